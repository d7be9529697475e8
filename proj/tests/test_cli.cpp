#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cli/commands.hpp"
#include "fedsim/report.hpp"
#include "fedsim/strategy_config.hpp"

using namespace fedsim;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fedsim_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

int run_cmd(std::initializer_list<std::string> args) {
  std::vector<std::string> argv = {"fedsim"};
  argv.insert(argv.end(), args.begin(), args.end());
  return fedsim::cli::run_cli(argv);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// One generated micro dataset shared by the run/compare tests.
const fs::path& dataset() {
  static const fs::path dir = [] {
    const fs::path d = fresh_dir("data");
    REQUIRE(run_cmd({"generate", "--preset", "paper13", "--scale", "0.004", "--seed", "7",
                 "--out", d.string()}) == 0);
    return d;
  }();
  return dir;
}

// Small strategy config that keeps CLI runs quick.
const fs::path& quick_config() {
  static const fs::path path = [] {
    const fs::path dir = fresh_dir("config");
    fs::create_directories(dir);
    StrategyConfig config;
    config.batch_size = 64;
    config.flad_max_steps = 6;
    config.flad_max_epochs = 2;
    config.flad_patience = 5;
    const fs::path file = dir / "quick.json";
    std::ofstream out(file);
    out << config_to_json(config);
    return file;
  }();
  return path;
}

}  // namespace

TEST_SUITE("cli seeds") {
  TEST_CASE("seed lists parse ranges and commas") {
    CHECK(cli::parse_seed_list("1..4") == std::vector<std::uint64_t>{1, 2, 3, 4});
    CHECK(cli::parse_seed_list("5") == std::vector<std::uint64_t>{5});
    CHECK(cli::parse_seed_list("2,9,1") == std::vector<std::uint64_t>{2, 9, 1});
    CHECK_THROWS(cli::parse_seed_list("9..2"));
    CHECK_THROWS(cli::parse_seed_list("abc"));
  }
}

TEST_SUITE("cli generate") {
  TEST_CASE("emits 13 client files and a manifest") {
    int csvs = 0;
    for (const auto& entry : fs::directory_iterator(dataset())) {
      if (entry.path().extension() == ".csv") ++csvs;
    }
    CHECK(csvs == 13);
    CHECK(fs::exists(dataset() / "federation.json"));
  }

  TEST_CASE("same seed emits identical files") {
    const fs::path again = fresh_dir("data_again");
    REQUIRE(run_cmd({"generate", "--preset", "paper13", "--scale", "0.004", "--seed", "7",
                 "--out", again.string()}) == 0);
    CHECK(slurp(dataset() / "client_00_webddos.csv") ==
          slurp(again / "client_00_webddos.csv"));
    CHECK(slurp(dataset() / "client_12_mssql.csv") ==
          slurp(again / "client_12_mssql.csv"));
  }

  TEST_CASE("missing --out is an error") {
    CHECK(run_cmd({"generate", "--preset", "paper13", "--seed", "7"}) != 0);
  }

  TEST_CASE("unknown preset is an error") {
    const fs::path dir = fresh_dir("data_bad");
    CHECK(run_cmd({"generate", "--preset", "nope", "--seed", "7", "--out", dir.string()}) != 0);
  }
}

TEST_SUITE("cli run") {
  TEST_CASE("an unknown strategy fails with a nonzero exit") {
    const fs::path out = fresh_dir("run_unknown");
    CHECK(run_cmd({"run", "--strategy", "sgd", "--data", dataset().string(), "--rounds",
               "2", "--seed", "1", "--out", out.string()}) != 0);
  }

  TEST_CASE("non-flad strategies require --rounds") {
    const fs::path out = fresh_dir("run_norounds");
    CHECK(run_cmd({"run", "--strategy", "fedavg", "--data", dataset().string(), "--seed",
               "1", "--out", out.string()}) != 0);
  }

  TEST_CASE("the requested round count is executed and recorded") {
    const fs::path out = fresh_dir("run_rounds");
    REQUIRE(run_cmd({"run", "--strategy", "fedavg", "--data", dataset().string(),
                 "--rounds", "4", "--seed", "1", "--config", quick_config().string(),
                 "--out", out.string()}) == 0);
    const ExperimentResult result = load_result(out / "result.json");
    CHECK(result.rounds_executed == 4);
    CHECK(result.rounds.size() == 4);
    CHECK(result.stop_reason == "round_cap");
  }

  TEST_CASE("flad ignores --rounds and stops by itself") {
    const fs::path out = fresh_dir("run_flad");
    REQUIRE(run_cmd({"run", "--strategy", "flad", "--data", dataset().string(), "--seed",
                 "1", "--config", quick_config().string(), "--out",
                 out.string()}) == 0);
    const ExperimentResult result = load_result(out / "result.json");
    CHECK((result.stop_reason == "flad_patience" || result.stop_reason == "round_cap"));
    CHECK(result.rounds_executed >= 1);
  }

  TEST_CASE("identical runs export byte-identical tables for 1 and 4 workers") {
    const fs::path out1 = fresh_dir("run_det_a");
    const fs::path out4 = fresh_dir("run_det_b");
    REQUIRE(run_cmd({"run", "--strategy", "scaffold", "--data", dataset().string(),
                 "--rounds", "3", "--seed", "5", "--threads", "1", "--config",
                 quick_config().string(), "--out", out1.string()}) == 0);
    REQUIRE(run_cmd({"run", "--strategy", "scaffold", "--data", dataset().string(),
                 "--rounds", "3", "--seed", "5", "--threads", "4", "--config",
                 quick_config().string(), "--out", out4.string()}) == 0);
    for (const char* name : {"summary.csv", "f1_series.csv", "bandwidth.csv",
                             "participation.csv", "test_f1.csv", "result.json",
                             "model.bin"}) {
      CHECK(slurp(out1 / name) == slurp(out4 / name));
    }
  }
}

TEST_SUITE("cli compare") {
  TEST_CASE("runs every strategy per seed with a shared round count") {
    const fs::path out = fresh_dir("compare");
    REQUIRE(run_cmd({"compare", "--data", dataset().string(), "--seeds", "1..2",
                 "--max-rounds", "4", "--config", quick_config().string(), "--out",
                 out.string()}) == 0);

    for (const char* merged : {"merged_summary.csv", "merged_test_f1.csv",
                               "merged_participation.csv", "merged_bandwidth.csv"}) {
      CHECK(fs::exists(out / merged));
    }

    for (std::uint64_t seed : {1, 2}) {
      const fs::path seed_dir = out / ("seed_" + std::to_string(seed));
      const ExperimentResult flad = load_result(seed_dir / "flad" / "result.json");
      const int rounds = flad.rounds_executed;
      std::uint64_t init_hash = flad.initial_model_hash;
      for (const char* name :
           {"fedavg", "fedprox", "scaffold", "fedala", "dafl", "fedsbs"}) {
        const ExperimentResult r = load_result(seed_dir / name / "result.json");
        CHECK(r.rounds_executed == rounds);
        CHECK(r.initial_model_hash == init_hash);
        CHECK(r.seed == seed);
      }
    }
  }
}

TEST_SUITE("cli report") {
  TEST_CASE("re-exported tables match the originals") {
    const fs::path run_out = fresh_dir("report_src");
    REQUIRE(run_cmd({"run", "--strategy", "fedavg", "--data", dataset().string(),
                 "--rounds", "3", "--seed", "2", "--config", quick_config().string(),
                 "--out", run_out.string()}) == 0);
    const fs::path report_out = fresh_dir("report_dst");
    REQUIRE(run_cmd({"report", "--result", run_out.string(), "--out",
                 report_out.string()}) == 0);
    for (const char* name : {"summary.csv", "f1_series.csv", "bandwidth.csv",
                             "participation.csv", "test_f1.csv", "work_units.csv"}) {
      CHECK(slurp(run_out / name) == slurp(report_out / name));
    }
  }
}
