#pragma once

// CSV / JSON serialization of sweep results and verification reports.
// Floating-point fields are written with 15 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "json.hpp"

#include "qst/acceptance.hpp"
#include "qst/fidelity.hpp"

namespace qst {

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.14e", x);
  return buf;
}

/// The value a reader recovers from format_number(x).
inline double rounded(double x) { return std::stod(format_number(x)); }

inline constexpr const char* kSweepHeader = "N,n,ratio,time,encoding,fidelity";

inline std::string sweep_to_csv(const SweepResult& r) {
  std::string out = kSweepHeader;
  out += '\n';
  for (const auto& row : r.rows) {
    out += std::to_string(row.N) + ',' + std::to_string(row.n) + ',' + format_number(row.ratio) + ',' +
           format_number(row.time) + ',' + std::string(to_string(row.encoding)) + ',' + format_number(row.fidelity) +
           '\n';
  }
  return out;
}

inline nlohmann::json sweep_to_json(const SweepResult& r) {
  auto rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"N", row.N},
                    {"n", row.n},
                    {"ratio", rounded(row.ratio)},
                    {"time", rounded(row.time)},
                    {"encoding", to_string(row.encoding)},
                    {"fidelity", rounded(row.fidelity)}});
  }
  return rows;
}

inline Encoding parse_encoding(const std::string& s) {
  if (s == "dfs") return Encoding::dfs;
  if (s == "ndfs") return Encoding::ndfs;
  throw std::runtime_error("unknown encoding '" + s + "'");
}

inline SweepResult sweep_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader) throw std::runtime_error("missing sweep CSV header");
  SweepResult r;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string N, n, ratio, time, enc, fid;
    if (!std::getline(fields, N, ',') || !std::getline(fields, n, ',') || !std::getline(fields, ratio, ',') ||
        !std::getline(fields, time, ',') || !std::getline(fields, enc, ',') || !std::getline(fields, fid, ','))
      throw std::runtime_error("malformed sweep CSV row: " + line);
    r.rows.push_back({std::stoi(N), std::stoi(n), std::stod(ratio), std::stod(time), parse_encoding(enc),
                      std::stod(fid)});
  }
  return r;
}

inline nlohmann::json report_to_json(const VerifyReport& r) {
  auto checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"criterion", c.criterion},
                      {"max_error", c.max_error},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass},
                      {"detail", c.detail}});
  }
  return {{"checks", checks}, {"overall_pass", r.overall_pass}};
}

/// Writes `content` to `path` ("-" is stdout) through a temporary file so a
/// failed write never leaves a partial output behind. Returns false on I/O failure.
inline bool write_output(const std::string& path, const std::string& content, std::ostream& err = std::cerr) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return static_cast<bool>(std::cout);
  }
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) out << content;
    if (out) out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      err << "error: cannot write " << path << "\n";
      return false;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    err << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

}  // namespace qst
