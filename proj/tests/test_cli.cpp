#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "qst/cli.hpp"

namespace qst {
namespace {

namespace fs = std::filesystem;

RunConfig parse(std::vector<const char*> args) {
  args.insert(args.begin(), "qst");
  return parse_config(static_cast<int>(args.size()), args.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("qst_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  [[nodiscard]] fs::path path(const std::string& name) const { return dir_ / name; }

  static int run_binary(const std::string& args) {
    const std::string cmd = std::string(QST_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

 private:
  fs::path dir_;
};

TEST(ParseConfig, Defaults) {
  const auto cfg = parse({});
  EXPECT_EQ(cfg.command, Command::sweep);
  EXPECT_EQ(cfg.n, 2);
  EXPECT_EQ(cfg.channel_lengths, (std::vector<int>{101, 151, 201}));
  EXPECT_EQ(cfg.ratio_min, 1e-3);
  EXPECT_EQ(cfg.ratio_max, 1.0);
  EXPECT_EQ(cfg.ratio_steps, 40);
  EXPECT_EQ(cfg.encoding, EncodingChoice::both);
  EXPECT_FALSE(cfg.time.has_value());
  EXPECT_EQ(cfg.sigma_lambda, 0.0);
  EXPECT_EQ(cfg.shots, 200);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.output_path, "-");
  EXPECT_EQ(cfg.format, OutputFormat::csv);
}

TEST(ParseConfig, FlagsOverrideDefaults) {
  const auto cfg = parse({"oracle", "--channel-lengths", "3,5", "--ratio-steps", "10", "--encoding", "ndfs",
                          "--time", "12.5", "--format", "json", "--seed", "7", "--linear"});
  EXPECT_EQ(cfg.command, Command::oracle);
  EXPECT_EQ(cfg.channel_lengths, (std::vector<int>{3, 5}));
  EXPECT_EQ(cfg.ratio_steps, 10);
  EXPECT_EQ(cfg.encodings(), std::vector<Encoding>{Encoding::ndfs});
  EXPECT_EQ(cfg.time, 12.5);
  EXPECT_EQ(cfg.format, OutputFormat::json);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.ratio_grid()[1], 1e-3 + (1.0 - 1e-3) / 9.0);
  EXPECT_FALSE(parse({"--time", "tau"}).time.has_value());
}

TEST(ParseConfig, RejectsBadInput) {
  EXPECT_THROW(parse({"--channel-lengths", "100"}), UsageError);
  EXPECT_THROW(parse({"--ratio-steps", "0"}), UsageError);
  EXPECT_THROW(parse({"--ratio-min", "0"}), UsageError);
  EXPECT_THROW(parse({"--ratio-min", "0.5", "--ratio-max", "0.1"}), UsageError);
  EXPECT_THROW(parse({"--bogus"}), UsageError);
  EXPECT_THROW(parse({"transfer"}), UsageError);
  EXPECT_THROW(parse({"--encoding", "both2"}), UsageError);
  EXPECT_THROW(parse({"--time", "soon"}), UsageError);
  EXPECT_THROW(parse({"--shots", "0"}), UsageError);
  EXPECT_THROW(parse({"--help"}), HelpRequested);
}

TEST_F(TempDir, ConfigFileSitsBetweenDefaultsAndFlags) {
  const auto file = path("run.json");
  std::ofstream(file) << R"({"command": "phases", "n": 3, "ratio-steps": 5, "time": "tau", "seed": 9})";
  const auto from_file = parse({"--config", file.c_str()});
  EXPECT_EQ(from_file.command, Command::phases);
  EXPECT_EQ(from_file.n, 3);
  EXPECT_EQ(from_file.ratio_steps, 5);
  EXPECT_EQ(from_file.seed, 9u);

  const auto overridden = parse({"--config", file.c_str(), "--n", "1", "sweep"});
  EXPECT_EQ(overridden.command, Command::sweep);
  EXPECT_EQ(overridden.n, 1);
  EXPECT_EQ(overridden.ratio_steps, 5);

  std::ofstream(path("bad.json")) << R"({"colour": 1})";
  EXPECT_THROW(parse({"--config", path("bad.json").c_str()}), UsageError);
  std::ofstream(path("broken.json")) << "{";
  EXPECT_THROW(parse({"--config", path("broken.json").c_str()}), UsageError);
  EXPECT_THROW(parse({"--config", path("missing.json").c_str()}), UsageError);
}

TEST(Serialisation, CsvRoundTripKeepsFifteenDigits) {
  SweepOptions opt;
  opt.channel_lengths = {3, 7};
  opt.ratios = log_spaced(1e-3, 1.0, 7);
  const auto r = sweep_fidelity(opt);
  std::istringstream in(sweep_to_csv(r));
  const auto back = sweep_from_csv(in);
  ASSERT_EQ(back.rows.size(), r.rows.size());
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    EXPECT_EQ(back.rows[k].N, r.rows[k].N);
    EXPECT_EQ(back.rows[k].encoding, r.rows[k].encoding);
    EXPECT_NEAR(back.rows[k].ratio, r.rows[k].ratio, 1e-14 * r.rows[k].ratio);
    EXPECT_NEAR(back.rows[k].time, r.rows[k].time, 1e-14 * r.rows[k].time);
    EXPECT_NEAR(back.rows[k].fidelity, r.rows[k].fidelity, 1e-14);
  }
  std::istringstream bad("N,n\n");
  EXPECT_THROW(sweep_from_csv(bad), std::runtime_error);
}

TEST(Serialisation, JsonRowsCarryAllColumns) {
  SweepOptions opt;
  opt.channel_lengths = {3};
  opt.ratios = {0.1};
  const auto j = sweep_to_json(sweep_fidelity(opt));
  ASSERT_EQ(j.size(), 2u);
  for (const char* key : {"N", "n", "ratio", "time", "encoding", "fidelity"}) EXPECT_TRUE(j[0].contains(key)) << key;
  EXPECT_EQ(j[1]["encoding"], "ndfs");
}

TEST_F(TempDir, DefaultSweepWritesFullGridAndIsReproducible) {
  const auto a = path("a.csv"), b = path("b.csv");
  ASSERT_EQ(run_binary("sweep -o " + a.string()), 0);
  ASSERT_EQ(run_binary("sweep --output " + b.string()), 0);
  const std::string text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  std::istringstream in(text);
  const auto r = sweep_from_csv(in);
  EXPECT_EQ(r.rows.size(), 3u * 40u * 2u);
  EXPECT_FALSE(fs::exists(a.string() + ".partial"));
}

TEST_F(TempDir, SweepJsonOutput) {
  const auto out = path("s.json");
  ASSERT_EQ(run_binary("--channel-lengths 3 --ratio-steps 3 --format json -o " + out.string()), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j.size(), 6u);
}

TEST_F(TempDir, PhasesTableForTwoQubitRegisters) {
  const auto out = path("phases.csv");
  auto cfg = parse({"phases", "-o", out.c_str()});
  EXPECT_EQ(run_phases(cfg), 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "state,occupations,predicted,measured,match,amplitude_error");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",true,"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 32);
  EXPECT_EQ(run_binary("phases --n 4 -o " + path("p4.csv").string()), 2);
  EXPECT_FALSE(fs::exists(path("p4.csv")));
}

TEST_F(TempDir, OracleAgreesWithFormula) {
  const auto out = path("oracle.json");
  auto cfg = parse({"oracle", "--channel-lengths", "3", "--ratio-steps", "2", "--ratio-min", "0.05", "--ratio-max",
                    "0.3", "--format", "json", "-o", out.c_str()});
  ASSERT_EQ(run_oracle(cfg), 0);
  const auto rows = nlohmann::json::parse(slurp(out));
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows)
    EXPECT_NEAR(row["fidelity"].get<double>(), row["formula_fidelity"].get<double>(), 1e-10);
  EXPECT_EQ(run_binary("oracle --channel-lengths 9"), 2);
}

TEST_F(TempDir, VerifyPassesAndFailsWithZeroTolerance) {
  const auto ok = path("report.json");
  ASSERT_EQ(run_binary("verify -o " + ok.string()), 0);
  const auto report = nlohmann::json::parse(slurp(ok));
  EXPECT_TRUE(report["overall_pass"].get<bool>());
  std::set<int> criteria;
  for (const auto& c : report["checks"]) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c["name"];
    criteria.insert(c["criterion"].get<int>());
  }
  EXPECT_EQ(criteria, (std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}));

  const auto strict = path("strict.json");
  EXPECT_EQ(run_binary("verify --tolerance 0 -o " + strict.string()), 1);
  EXPECT_FALSE(nlohmann::json::parse(slurp(strict))["overall_pass"].get<bool>());
}

TEST_F(TempDir, ExitCodes) {
  EXPECT_EQ(run_binary("--help > /dev/null"), 0);
  EXPECT_EQ(run_binary("--channel-lengths 4"), 2);
  EXPECT_EQ(run_binary("--no-such-flag"), 2);
  EXPECT_EQ(run_binary("sweep --n 3 --channel-lengths 3"), 2);
  const auto target = path("missing_dir") / "out.csv";
  EXPECT_EQ(run_binary("--channel-lengths 3 --ratio-steps 2 -o " + target.string()), 1);
  EXPECT_FALSE(fs::exists(target));
  EXPECT_FALSE(fs::exists(target.string() + ".partial"));
}

}  // namespace
}  // namespace qst
