#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "wrenchsim/cli.hpp"
#include "wrenchsim/scenario_io.hpp"

using namespace wrenchsim;
namespace fs = std::filesystem;

namespace {

const std::string kScenarioDir = std::string(WRENCHSIM_SOURCE_DIR) + "/scenarios/";

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "wrenchsim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  Invocation inv;
  inv.code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  inv.out = out.str();
  inv.err = err.str();
  return inv;
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("wrenchsim_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text(p)); }

}  // namespace

TEST_CASE("run writes the three outputs") {
  const fs::path d = temp_dir("run");
  const auto inv = invoke({"run", kScenarioDir + "reference.json", "--out", d.string()});
  CHECK(inv.code == 0);
  CHECK(fs::exists(d / "trajectory.csv"));
  CHECK(fs::exists(d / "summary.txt"));
  const auto report = read_json(d / "report.json");
  CHECK(report["status"] == "completed");
  CHECK(report["placement"]["stable"] == true);
  CHECK(inv.out.find("Task completed") != std::string::npos);
  CHECK(inv.out == read_text(d / "summary.txt"));
}

TEST_CASE("quiet run prints nothing") {
  const fs::path d = temp_dir("quiet");
  const auto inv = invoke({"run", kScenarioDir + "reference.json", "--out", d.string(), "--quiet"});
  CHECK(inv.code == 0);
  CHECK(inv.out.empty());
}

TEST_CASE("replayed run reproduces the commanded tcp") {
  const fs::path d = temp_dir("recorded");
  const auto inv = invoke({"run", kScenarioDir + "recorded.json", "--replay",
                           kScenarioDir + "recorded_replay.json", "--out", d.string(), "--quiet"});
  REQUIRE(inv.code == 0);
  const auto r = read_json(d / "report.json");
  CHECK(r["placement"]["commanded_tcp_mm"][0].get<double>() == doctest::Approx(-217.16).epsilon(1e-12));
  CHECK(r["placement"]["commanded_tcp_mm"][1].get<double>() == doctest::Approx(298.34).epsilon(1e-12));
  CHECK(r["placement"]["actual_tcp_mm"][0].get<double>() == doctest::Approx(-218.12).epsilon(1e-12));
  CHECK(std::abs(r["metrics"]["correction_command_error_mm"].get<double>() - 2.73) <= 0.02);
  CHECK(std::abs(r["metrics"]["release_error_vs_ideal_mm"].get<double>() - 3.38) <= 0.02);
  CHECK(std::abs(r["metrics"]["execution_error_mm"].get<double>() - 1.03) <= 0.02);
}

TEST_CASE("malformed scenario exits 1 naming the field") {
  const fs::path d = temp_dir("bad");
  auto j = nlohmann::json::parse(read_text(kScenarioDir + "reference.json"));
  j["payload"]["mass_kg"] = -1.0;
  std::ofstream(d / "bad.json") << j.dump();
  const auto inv = invoke({"run", (d / "bad.json").string(), "--out", d.string()});
  CHECK(inv.code == 1);
  CHECK(inv.err.find("payload.mass_kg") != std::string::npos);
}

TEST_CASE("parallel excitation exits 2 with the reason") {
  const fs::path d = temp_dir("parallel");
  const auto inv = invoke({"run", kScenarioDir + "parallel.json", "--out", d.string(), "--quiet"});
  CHECK(inv.code == 2);
  CHECK(inv.err.find("NotIdentifiable") != std::string::npos);
  CHECK(read_json(d / "report.json")["abort_reason"] == "NotIdentifiable");
}

TEST_CASE("diverging gains exit 1") {
  const fs::path d = temp_dir("diverge");
  auto j = nlohmann::json::parse(read_text(kScenarioDir + "reference.json"));
  j["gains"]["M"] = {1e-4, 1e-4, 1e-4};
  std::ofstream(d / "diverge.json") << j.dump();
  const auto inv = invoke({"run", (d / "diverge.json").string(), "--out", d.string()});
  CHECK(inv.code == 1);
  CHECK(inv.err.find("divergence") != std::string::npos);
}

TEST_CASE("seed override and dt override") {
  const fs::path a = temp_dir("seed_a");
  const fs::path b = temp_dir("seed_b");
  const fs::path c = temp_dir("seed_c");
  const std::string noisy = kScenarioDir + "noisy.json";
  CHECK(invoke({"run", noisy, "--out", a.string(), "--quiet", "--seed-override", "7"}).code == 0);
  CHECK(invoke({"run", noisy, "--out", b.string(), "--quiet", "--seed-override", "7"}).code == 0);
  CHECK(invoke({"run", noisy, "--out", c.string(), "--quiet"}).code == 0);
  CHECK(read_text(a / "trajectory.csv") == read_text(b / "trajectory.csv"));
  CHECK(read_text(a / "trajectory.csv") != read_text(c / "trajectory.csv"));

  const fs::path e = temp_dir("dt");
  CHECK(invoke({"run", kScenarioDir + "reference.json", "--out", e.string(), "--quiet", "--dt",
                "0.001"})
            .code == 0);
  const CsvTable t = read_csv(e / "trajectory.csv");
  CHECK(std::stod(t.rows[1][0]) == 0.001);
}

TEST_CASE("sweep writes one row per value") {
  const fs::path d = temp_dir("sweep");
  const auto inv = invoke({"sweep", kScenarioDir + "reference.json", "--param", "sensor.sigma_tau",
                           "--values", "0,0.001,0.01", "--trials", "4", "--out", d.string(),
                           "--quiet"});
  REQUIRE(inv.code == 0);
  const CsvTable t = read_csv(d / "sweep.csv");
  REQUIRE(t.rows.size() == 3);
  CHECK(t.header[4] == "mean_offset_rmse_x_mm");
  double prev = -1.0;
  for (const auto& row : t.rows) {
    CHECK(row[0] == "sensor.sigma_tau");
    CHECK(row[3] == "4");
    const double v = std::stod(row[4]);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("sweep usage errors") {
  const fs::path d = temp_dir("sweep_bad");
  const std::string sc = kScenarioDir + "reference.json";
  CHECK(invoke({"sweep", sc, "--param", "gains.K", "--values", "1", "--out", d.string()}).code == 1);
  CHECK(invoke({"sweep", sc, "--param", "sensor.sigma_tau", "--out", d.string()}).code == 1);
  CHECK(invoke({"sweep", sc, "--param", "sensor.sigma_tau", "--values", "x", "--out", d.string()})
            .code == 1);
  CHECK(invoke({"sweep", sc, "--param", "sensor.sigma_tau", "--values", "-1", "--out",
                d.string()})
            .code == 1);
  std::ostringstream out, err;
  CHECK(cli::cmd_sweep(sc, "sensor.sigma_tau", {}, 3, cli::CommonOptions{}, out, err) == 1);
}

TEST_CASE("stack reproduces the table ground truth") {
  const fs::path d = temp_dir("stack");
  const auto inv = invoke({"stack", kScenarioDir + "three_layers.json", "--layers", "3", "--out",
                           d.string(), "--quiet"});
  REQUIRE(inv.code == 0);
  const auto r = read_json(d / "report.json");
  CHECK(r["stable_layers"] == 3);
  const double truth[3] = {-57.0, 0.0, -85.0};
  for (int i = 0; i < 3; ++i) {
    const auto& o = r["objects"][static_cast<std::size_t>(i)];
    CHECK(o["actual_com_x_mm"].get<double>() == doctest::Approx(truth[i]));
    CHECK(std::abs(o["estimated_com_x_mm"].get<double>() - truth[i]) <= 1e-6);
    CHECK(std::abs(o["implemented_com_x_mm"].get<double>() - truth[i]) <= 1e-6);
    CHECK(o["stable"] == true);
    CHECK(fs::exists(d / ("trajectory_layer" + std::to_string(i) + ".csv")));
  }
  const CsvTable t = read_csv(d / "stack_table.csv");
  CHECK(t.rows.size() == 3);
}

TEST_CASE("single layer stack") {
  const fs::path d = temp_dir("stack1");
  CHECK(invoke({"stack", kScenarioDir + "reference.json", "--layers", "1", "--out", d.string(),
                "--quiet"})
            .code == 0);
  CHECK(read_csv(d / "stack_table.csv").rows.size() == 1);
}

TEST_CASE("stack halts on an unidentifiable layer") {
  const fs::path d = temp_dir("stack_abort");
  const auto inv = invoke({"stack", kScenarioDir + "parallel.json", "--layers", "3", "--out",
                           d.string(), "--quiet"});
  CHECK(inv.code == 2);
  const auto r = read_json(d / "report.json");
  CHECK(r["status"] == "aborted");
  CHECK(r["objects"].size() == 1);
  CHECK(r["objects"][0]["abort_reason"] == "NotIdentifiable");
  CHECK(invoke({"stack", kScenarioDir + "reference.json", "--layers", "0", "--out", d.string()})
            .code == 1);
  CHECK(invoke({"stack", kScenarioDir + "three_layers.json", "--layers", "4", "--out", d.string()})
            .code == 1);
}

TEST_CASE("plotdata narrow format") {
  const fs::path d = temp_dir("plot");
  REQUIRE(invoke({"run", kScenarioDir + "noisy.json", "--out", d.string(), "--quiet"}).code == 0);
  const fs::path out = d / "plot.csv";
  const auto inv = invoke({"plotdata", (d / "trajectory.csv").string(), "--signals",
                           "r_hat_x_raw,r_hat_x_filtered", "--out", out.string()});
  REQUIRE(inv.code == 0);
  const CsvTable t = read_csv(out);
  CHECK(t.header == std::vector<std::string>{"time", "signal", "value"});
  const CsvTable traj = read_csv(d / "trajectory.csv");
  REQUIRE(t.rows.size() == 2 * traj.rows.size());
  CHECK(t.rows[0][1] == "r_hat_x_raw");
  CHECK(t.rows[1][1] == "r_hat_x_filtered");
  CHECK(t.rows[0][0] == t.rows[1][0]);
}

TEST_CASE("plotdata errors") {
  const fs::path d = temp_dir("plot_bad");
  REQUIRE(invoke({"run", kScenarioDir + "reference.json", "--out", d.string(), "--quiet"}).code == 0);
  const auto unknown = invoke({"plotdata", (d / "trajectory.csv").string(), "--signals", "r_hat_q",
                               "--out", (d / "p.csv").string()});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("r_hat_x_filtered") != std::string::npos);

  std::ofstream(d / "empty.csv") << "";
  CHECK(invoke({"plotdata", (d / "empty.csv").string(), "--signals", "p_a_x", "--out",
                (d / "p.csv").string()})
            .code == 1);
  std::ofstream(d / "header_only.csv") << "time,p_a_x\n";
  CHECK(invoke({"plotdata", (d / "header_only.csv").string(), "--signals", "p_a_x", "--out",
                (d / "p.csv").string()})
            .code == 1);
}

TEST_CASE("usage errors and help") {
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"fly"}).code == 1);
  CHECK(invoke({"run"}).code == 1);
  CHECK(invoke({"run", kScenarioDir + "reference.json", "--bogus"}).code == 1);
  CHECK(invoke({"run", kScenarioDir + "missing.json", "--out", temp_dir("missing").string()}).code ==
        1);
  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("sweep") != std::string::npos);
}
