#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dqpt/commands.hpp"

using namespace dqpt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dqpt_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DQPT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(ParseConfig, MinimalFlagsResolveDefaults) {
  const auto c = parse_config({"quench", "--n", "10", "--h", "1.0", "--j", "1.0", "--tmax", "8"});
  EXPECT_EQ(c.command, Command::Quench);
  EXPECT_EQ(c.model.n_sites, 10);
  EXPECT_DOUBLE_EQ(c.model.Jp, 0.0);
  EXPECT_DOUBLE_EQ(c.dt, 0.01);
  EXPECT_EQ(c.format, OutputFormat::Csv);
  EXPECT_EQ(c.sector, SectorChoice::Auto);
  EXPECT_FALSE(c.open_system.has_value());
  EXPECT_TRUE(c.observables.qfi_optimal);
}

TEST(ParseConfig, OpenSystemFlags) {
  const auto c = parse_config({"open", "--gamma-z", "0.05", "--gamma-m", "0.05", "--n", "10"});
  ASSERT_TRUE(c.open_system.has_value());
  EXPECT_DOUBLE_EQ(c.open_system->gamma_z, 0.05);
  EXPECT_DOUBLE_EQ(c.open_system->gamma_m, 0.05);
  EXPECT_THROW(parse_config({"open", "--n", "30"}), ResourceCapError);
  EXPECT_THROW(parse_config({"open", "--n", "13", "--gamma-z", "0.1"}), ResourceCapError);
  EXPECT_THROW(parse_config({"quench", "--gamma-z", "0.1"}), ConfigError);
  EXPECT_THROW(parse_config({"open", "--gamma-z", "-0.1"}), ConfigError);
}

TEST(ParseConfig, InvariantViolations) {
  EXPECT_THROW(parse_config({"quench", "--dt", "0"}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--tmax", "-1"}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--n", "2", "--jp", "1"}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--n", "40"}), ResourceCapError);
  EXPECT_THROW(parse_config({"spectrum", "--n", "16"}), ResourceCapError);
  EXPECT_THROW(parse_config({"husimi", "--tmax", "2", "--husimi-times", "0,3"}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--format", "xml"}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--sector", "odd"}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--bogus", "1"}), ConfigError);
  EXPECT_THROW(parse_config({"scaling", "--n", "8"}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--sweep-var", "n", "--sweep-values", "8,9.5"}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--sweep-var", "gamma", "--sweep-values", "0.1"}), ConfigError);
  EXPECT_THROW(parse_config({}), ConfigError);
}

TEST(ParseConfig, ConfigFileAndOverrides) {
  const auto dir = scratch_dir("conf");
  const auto file = dir / "run.conf";
  {
    std::ofstream out(file);
    out << "n = 12\nh = 0.5\ntmax = 3\n";
  }
  const auto c = parse_config({"quench", "--config", file.string(), "--h", "2"});
  EXPECT_EQ(c.model.n_sites, 12);
  EXPECT_DOUBLE_EQ(c.model.h, 2.0);
  EXPECT_DOUBLE_EQ(c.t_max, 3.0);

  const auto bad = dir / "bad.conf";
  {
    std::ofstream out(bad);
    out << "n = 12\nfield_strength = 1\n";
  }
  EXPECT_THROW(parse_config({"quench", "--config", bad.string()}), ConfigError);
  EXPECT_THROW(parse_config({"quench", "--config", (dir / "missing.conf").string()}), ConfigError);
}

TEST(Output, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(12.7136123456789), "12.7136123457");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Commands, QuenchTableColumnSemantics) {
  RunConfig c = parse_config({"quench", "--n", "8", "--tmax", "1", "--dt", "0.1"});
  const auto t = quench_table(c, c.model, {true, true});
  const std::vector<std::string> cols{"t",       "f_Q_z",  "f_Q_opt", "n_opt_x",
                                      "n_opt_y", "n_opt_z", "lambda",  "loschmidt",
                                      "energy",  "norm",    "delta_phi"};
  EXPECT_EQ(t.columns, cols);
  ASSERT_EQ(t.rows.size(), 11u);
  EXPECT_NEAR(t.rows[0][1], 1.0, 1e-12);
  EXPECT_NEAR(t.rows[0][6], 0.0, 1e-14);
  EXPECT_NEAR(t.rows[0][9], 1.0, 1e-14);
  const auto e = t.column("energy");
  for (double v : e) EXPECT_NEAR(v, e.front(), 1e-8 * std::max(1.0, std::abs(e.front())));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("exit");
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("quench --dt -1 --out " + (dir / "a").string()), 2);
  EXPECT_EQ(run_cli("quench --unknown 3"), 2);
  EXPECT_EQ(run_cli("open --n 30 --gamma-z 0.05"), 4);
  EXPECT_EQ(run_cli("quench --n 40"), 4);
  EXPECT_EQ(run_cli("quench --n 6 --tmax 1 --dt 0.1 --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "quench.csv"));
  EXPECT_TRUE(fs::exists(dir / "ok" / "manifest.json"));
}

TEST(Cli, DeterministicOutputAndManifestRerun) {
  const auto dir = scratch_dir("det");
  const std::string base = "quench --n 8 --h 1 --tmax 2 --dt 0.05 --out ";
  ASSERT_EQ(run_cli(base + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli(base + (dir / "b").string()), 0);
  EXPECT_EQ(slurp(dir / "a" / "quench.csv"), slurp(dir / "b" / "quench.csv"));
  EXPECT_EQ(slurp(dir / "a" / "summary.json"), slurp(dir / "b" / "summary.json"));

  const auto lines = csv_lines(dir / "a" / "quench.csv");
  ASSERT_EQ(lines.size(), 42u);
  EXPECT_EQ(lines[0], "t,f_Q_z,f_Q_opt,n_opt_x,n_opt_y,n_opt_z,lambda,loschmidt,energy,norm,delta_phi");

  // The echoed config re-runs the same job.
  ASSERT_EQ(run_cli("quench --config " + (dir / "a" / "run.conf").string() + " --out " +
                    (dir / "c").string()),
            0);
  EXPECT_EQ(slurp(dir / "a" / "quench.csv"), slurp(dir / "c" / "quench.csv"));

  const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(m["model"]["n"], 8);
}

TEST(Cli, JsonFormatAndSweep) {
  const auto dir = scratch_dir("sweep");
  ASSERT_EQ(run_cli("quench --n 6 --tmax 1 --dt 0.1 --no-optimal --format json --sweep-var h "
                    "--sweep-values 0.5,1 --workers 2 --out " +
                    dir.string()),
            0);
  for (const char* tag : {"quench_N6_h0.5_jp0.json", "quench_N6_h1_jp0.json"}) {
    ASSERT_TRUE(fs::exists(dir / tag)) << tag;
    const auto j = nlohmann::json::parse(slurp(dir / tag));
    EXPECT_TRUE(j.contains("columns"));
  }
}

TEST(Cli, SmallRunsOfEveryCommand) {
  const auto dir = scratch_dir("all");
  EXPECT_EQ(run_cli("spectrum --n 6 --tmax 4 --dt 0.05 --h-values 0.5,1 --out " + (dir / "s").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "s" / "spectrum.csv"));
  EXPECT_EQ(run_cli("husimi --n 6 --tmax 1 --husimi-times 0,1 --n-theta 19 --n-phi 18 --out " +
                    (dir / "h").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "h" / "husimi_summary.csv"));
  EXPECT_EQ(run_cli("open --n 4 --tmax 1 --dt 0.1 --gamma-z 0.05 --gamma-m 0.05 --out " +
                    (dir / "o").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "o" / "open.csv"));
  EXPECT_EQ(run_cli("scaling --h 1 --tmax 4 --dt 0.02 --sweep-var n --sweep-values 6,8,10 --out " +
                    (dir / "c").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "c" / "scaling.json"));
}

// Every shipped config parses under the command named in its first line.
TEST(ParseConfig, ShippedConfigs) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(DQPT_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".conf") continue;
    std::ifstream in(entry.path());
    std::string first;
    std::getline(in, first);
    std::istringstream words(first);
    std::string hash, prog, command;
    words >> hash >> prog >> command;
    ASSERT_EQ(prog, "dqpt") << entry.path();
    EXPECT_NO_THROW(parse_config({command, "--config", entry.path().string()})) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 6);
}
