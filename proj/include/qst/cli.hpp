#pragma once

// Command-line front end: configuration parsing and the four subcommands.
// Exit codes: 0 success, 1 runtime or check failure, 2 usage error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qst/acceptance.hpp"
#include "qst/fidelity.hpp"
#include "qst/io.hpp"
#include "qst/oracle.hpp"

namespace qst {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for --help; what() holds the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { sweep, verify, oracle, phases };
enum class EncodingChoice { dfs, ndfs, both };
enum class OutputFormat { csv, json };

struct RunConfig {
  Command command = Command::sweep;
  int n = 2;
  std::vector<int> channel_lengths{101, 151, 201};
  double ratio_min = 1e-3;
  double ratio_max = 1.0;
  int ratio_steps = 40;
  bool linear_grid = false;
  EncodingChoice encoding = EncodingChoice::both;
  std::optional<double> time;  // unset: tau
  double sigma_lambda = 0.0;
  int shots = 200;
  std::uint64_t seed = 42;
  std::string output_path = "-";
  OutputFormat format = OutputFormat::csv;
  std::optional<double> tolerance;
  double disorder_sigma = 0.0;
  int disorder_samples = 1;

  [[nodiscard]] std::vector<double> ratio_grid() const {
    return linear_grid ? linear_spaced(ratio_min, ratio_max, ratio_steps)
                       : log_spaced(ratio_min, ratio_max, ratio_steps);
  }

  [[nodiscard]] std::vector<Encoding> encodings() const {
    switch (encoding) {
      case EncodingChoice::dfs: return {Encoding::dfs};
      case EncodingChoice::ndfs: return {Encoding::ndfs};
      case EncodingChoice::both: break;
    }
    return {Encoding::dfs, Encoding::ndfs};
  }
};

namespace detail {

inline Command parse_command(const std::string& s) {
  if (s == "sweep") return Command::sweep;
  if (s == "verify") return Command::verify;
  if (s == "oracle") return Command::oracle;
  if (s == "phases") return Command::phases;
  throw UsageError("unknown command '" + s + "' (expected sweep|verify|oracle|phases)");
}

inline EncodingChoice parse_encoding_choice(const std::string& s) {
  if (s == "dfs") return EncodingChoice::dfs;
  if (s == "ndfs") return EncodingChoice::ndfs;
  if (s == "both") return EncodingChoice::both;
  throw UsageError("unknown encoding '" + s + "' (expected dfs|ndfs|both)");
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw UsageError("unknown format '" + s + "' (expected csv|json)");
}

inline std::optional<double> parse_time(const std::string& s) {
  if (s == "tau") return std::nullopt;
  try {
    std::size_t used = 0;
    const double t = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(t)) throw std::invalid_argument(s);
    return t;
  } catch (const std::exception&) {
    throw UsageError("time must be 'tau' or a real number (got '" + s + "')");
  }
}

/// Applies a JSON config object whose keys are the long flag names.
inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "command") cfg.command = parse_command(value.get<std::string>());
      else if (key == "n") cfg.n = value.get<int>();
      else if (key == "channel-lengths") cfg.channel_lengths = value.get<std::vector<int>>();
      else if (key == "ratio-min") cfg.ratio_min = value.get<double>();
      else if (key == "ratio-max") cfg.ratio_max = value.get<double>();
      else if (key == "ratio-steps") cfg.ratio_steps = value.get<int>();
      else if (key == "linear") cfg.linear_grid = value.get<bool>();
      else if (key == "encoding") cfg.encoding = parse_encoding_choice(value.get<std::string>());
      else if (key == "time") cfg.time = value.is_number() ? std::optional<double>(value.get<double>())
                                                           : parse_time(value.get<std::string>());
      else if (key == "sigma-lambda") cfg.sigma_lambda = value.get<double>();
      else if (key == "shots") cfg.shots = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "output") cfg.output_path = value.get<std::string>();
      else if (key == "format") cfg.format = parse_format(value.get<std::string>());
      else if (key == "tolerance") cfg.tolerance = value.get<double>();
      else if (key == "disorder-sigma") cfg.disorder_sigma = value.get<double>();
      else if (key == "disorder-samples") cfg.disorder_samples = value.get<int>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
}

}  // namespace detail

inline void validate(const RunConfig& cfg) {
  if (cfg.n < 1) throw UsageError("n must be >= 1");
  if (cfg.channel_lengths.empty()) throw UsageError("channel length list is empty");
  for (int N : cfg.channel_lengths)
    if (N < 1 || N % 2 == 0) throw UsageError("channel length must be odd (got " + std::to_string(N) + ")");
  if (!(cfg.ratio_min > 0.0) || !(cfg.ratio_min < cfg.ratio_max))
    throw UsageError("ratio grid needs 0 < ratio-min < ratio-max");
  if (cfg.ratio_steps < 1) throw UsageError("ratio-steps must be positive (empty grid)");
  if (cfg.shots < 1) throw UsageError("shots must be positive");
  if (cfg.sigma_lambda < 0.0) throw UsageError("sigma-lambda must be >= 0");
  if (cfg.disorder_sigma < 0.0 || cfg.disorder_samples < 1)
    throw UsageError("disorder needs sigma >= 0 and samples >= 1");
  if (cfg.tolerance && *cfg.tolerance < 0.0) throw UsageError("tolerance must be >= 0");
}

/// CLI flags override config-file values, which override defaults.
inline RunConfig parse_config(int argc, const char* const* argv) {
  CLI::App app{"Protected quantum state transfer through an XX spin chain", "qst"};
  std::string command = "sweep", encoding, format, time, config_path, output;
  int n = 0, ratio_steps = 0, shots = 0, disorder_samples = 0;
  std::vector<int> channel_lengths;
  double ratio_min = 0, ratio_max = 0, sigma_lambda = 0, tolerance = 0, disorder_sigma = 0;
  std::uint64_t seed = 0;
  bool linear = false;

  app.add_option("command", command, "sweep | verify | oracle | phases");
  app.add_option("--config", config_path, "JSON file with defaults (keys = long flag names)");
  auto* o_n = app.add_option("--n", n, "register qubits per side");
  auto* o_lengths = app.add_option("--channel-lengths", channel_lengths, "odd channel lengths")->delimiter(',');
  auto* o_rmin = app.add_option("--ratio-min", ratio_min, "smallest g_I/g_C");
  auto* o_rmax = app.add_option("--ratio-max", ratio_max, "largest g_I/g_C");
  auto* o_steps = app.add_option("--ratio-steps", ratio_steps, "grid points");
  auto* o_linear = app.add_flag("--linear", linear, "linear instead of log-spaced grid");
  auto* o_enc = app.add_option("--encoding", encoding, "dfs | ndfs | both");
  auto* o_time = app.add_option("--time", time, "'tau' or an explicit evolution time");
  auto* o_sigma = app.add_option("--sigma-lambda", sigma_lambda, "std. dev. of the collective dephasing field");
  auto* o_shots = app.add_option("--shots", shots, "dephasing samples");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed");
  auto* o_out = app.add_option("--output,-o", output, "output path ('-' = stdout)");
  auto* o_fmt = app.add_option("--format", format, "csv | json");
  auto* o_tol = app.add_option("--tolerance", tolerance, "override every verify tolerance");
  auto* o_dsig = app.add_option("--disorder-sigma", disorder_sigma, "relative intraregister coupling disorder");
  auto* o_dsam = app.add_option("--disorder-samples", disorder_samples, "disorder realizations per point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what() + std::string("\n") + app.help());
  }

  RunConfig cfg;
  if (!config_path.empty()) detail::apply_config_file(cfg, config_path);
  if (app.get_option("command")->count()) cfg.command = detail::parse_command(command);
  if (o_n->count()) cfg.n = n;
  if (o_lengths->count()) cfg.channel_lengths = channel_lengths;
  if (o_rmin->count()) cfg.ratio_min = ratio_min;
  if (o_rmax->count()) cfg.ratio_max = ratio_max;
  if (o_steps->count()) cfg.ratio_steps = ratio_steps;
  if (o_linear->count()) cfg.linear_grid = linear;
  if (o_enc->count()) cfg.encoding = detail::parse_encoding_choice(encoding);
  if (o_time->count()) cfg.time = detail::parse_time(time);
  if (o_sigma->count()) cfg.sigma_lambda = sigma_lambda;
  if (o_shots->count()) cfg.shots = shots;
  if (o_seed->count()) cfg.seed = seed;
  if (o_out->count()) cfg.output_path = output;
  if (o_fmt->count()) cfg.format = detail::parse_format(format);
  if (o_tol->count()) cfg.tolerance = tolerance;
  if (o_dsig->count()) cfg.disorder_sigma = disorder_sigma;
  if (o_dsam->count()) cfg.disorder_samples = disorder_samples;

  validate(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------

inline SweepOptions sweep_options(const RunConfig& cfg) {
  SweepOptions opt;
  opt.n = cfg.n;
  opt.channel_lengths = cfg.channel_lengths;
  opt.ratios = cfg.ratio_grid();
  opt.time = cfg.time;
  opt.encodings = cfg.encodings();
  if (cfg.disorder_sigma > 0.0) opt.disorder = Disorder{cfg.disorder_sigma, cfg.seed, cfg.disorder_samples};
  return opt;
}

inline int run_sweep(const RunConfig& cfg, std::ostream& err = std::cerr) {
  if (cfg.n != 2) throw UsageError("sweep needs n = 2 (two-qubit registers)");
  const auto result = sweep_fidelity(sweep_options(cfg));
  const std::string text =
      cfg.format == OutputFormat::csv ? sweep_to_csv(result) : sweep_to_json(result).dump(2) + "\n";
  return write_output(cfg.output_path, text, err) ? 0 : 1;
}

/// Brute-force many-body fidelity next to the free-fermion formula, for
/// chains small enough for the oracle.
inline int run_oracle(const RunConfig& cfg, std::ostream& err = std::cerr) {
  if (cfg.n != 2) throw UsageError("oracle needs n = 2 (two-qubit registers)");
  for (int N : cfg.channel_lengths)
    if (N + 2 * cfg.n > kMaxOracleSites)
      throw UsageError("oracle supports N + 2n <= " + std::to_string(kMaxOracleSites) + " (got N = " +
                       std::to_string(N) + ")");

  const auto ratios = cfg.ratio_grid();
  const DephasingModel deph{cfg.sigma_lambda, cfg.shots, cfg.seed};
  const auto lambdas = dephasing_samples(deph);
  std::string csv = "N,n,ratio,time,encoding,fidelity,formula_fidelity\n";
  auto rows = nlohmann::json::array();
  for (int N : cfg.channel_lengths) {
    for (double ratio : ratios) {
      const auto spec = derive_parameters(cfg.n, N, 1.0, ratio);
      const double t = cfg.time.value_or(spec.tau);
      const Evolver evolver(build_spin_hamiltonian(spec, MatrixKind::full));
      const auto e = extract_register_elements(propagator_at(build_full_coupling_matrix(spec), t));
      for (Encoding enc : cfg.encodings()) {
        CompensatedSum sum;
        for (double f : fidelity_per_shot(evolver, logical_encoding(enc), ChannelInit::mixed(), lambdas, t)) sum.add(f);
        const double brute = sum.value() / static_cast<double>(lambdas.size());
        const double formula = fidelity(e, enc);
        csv += std::to_string(N) + ',' + std::to_string(cfg.n) + ',' + format_number(ratio) + ',' + format_number(t) +
               ',' + std::string(to_string(enc)) + ',' + format_number(brute) + ',' + format_number(formula) + '\n';
        rows.push_back({{"N", N},
                        {"n", cfg.n},
                        {"ratio", rounded(ratio)},
                        {"time", rounded(t)},
                        {"encoding", to_string(enc)},
                        {"fidelity", rounded(brute)},
                        {"formula_fidelity", rounded(formula)}});
      }
    }
  }
  const std::string text = cfg.format == OutputFormat::csv ? csv : rows.dump(2) + "\n";
  return write_output(cfg.output_path, text, err) ? 0 : 1;
}

inline std::string occupation_string(const OccupationPattern& p) {
  std::string s;
  for (int b : p.left) s += static_cast<char>('0' + b);
  s += '|';
  s += static_cast<char>('0' + p.kappa);
  s += '|';
  for (auto it = p.right.rbegin(); it != p.right.rend(); ++it) s += static_cast<char>('0' + *it);
  return s;
}

/// One row per effective-model basis state: predicted vs measured swap sign.
inline int run_phases(const RunConfig& cfg, std::ostream& err = std::cerr) {
  if (cfg.n > 3) throw UsageError("phases supports n <= 3");
  const auto report = effective_swap_check(cfg.n, cfg.tolerance.value_or(1e-8));
  std::string csv = "state,occupations,predicted,measured,match,amplitude_error\n";
  auto rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    const std::string occ = occupation_string(r.pattern);
    csv += std::to_string(r.state) + ',' + occ + ',' + std::to_string(r.predicted) + ',' +
           std::to_string(r.measured) + ',' + (r.match ? "true" : "false") + ',' + format_number(r.error) +
           '\n';
    rows.push_back({{"state", r.state},
                    {"occupations", occ},
                    {"predicted", r.predicted},
                    {"measured", r.measured},
                    {"match", r.match},
                    {"amplitude_error", rounded(r.error)}});
  }
  const std::string text = cfg.format == OutputFormat::csv ? csv : rows.dump(2) + "\n";
  if (!write_output(cfg.output_path, text, err)) return 1;
  return report.pass ? 0 : 1;
}

inline AcceptanceOptions acceptance_options(const RunConfig& cfg) {
  AcceptanceOptions o;
  o.tolerance = cfg.tolerance;
  o.seed = cfg.seed;
  o.shots = cfg.shots;
  return o;
}

/// Runs the acceptance checks, writes the JSON report, exits 0 iff all pass.
inline int run_verify(const RunConfig& cfg, std::ostream& err = std::cerr) {
  const auto report = run_acceptance_suite(acceptance_options(cfg));
  for (const auto& c : report.checks)
    err << (c.pass ? "PASS " : "FAIL ") << c.name << "  max_error=" << c.max_error << " tol=" << c.tolerance << "\n";
  if (!write_output(cfg.output_path, report_to_json(report).dump(2) + "\n", err)) return 1;
  return report.overall_pass ? 0 : 1;
}

/// Parses argv and dispatches; never throws.
inline int run_cli(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  try {
    const auto cfg = parse_config(argc, argv);
    switch (cfg.command) {
      case Command::sweep: return run_sweep(cfg, err);
      case Command::verify: return run_verify(cfg, err);
      case Command::oracle: return run_oracle(cfg, err);
      case Command::phases: return run_phases(cfg, err);
    }
    return 2;
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qst
