#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedsim/engine.hpp"
#include "fedsim/federation_gen.hpp"
#include "fedsim/report.hpp"

using namespace fedsim;

namespace {

Federation micro_federation(std::uint64_t seed) {
  return generate_federation(paper13_spec(seed, 0.004));
}

StrategyConfig micro_config() {
  StrategyConfig config;
  config.batch_size = 64;
  config.flad_max_steps = 8;
  config.flad_max_epochs = 2;
  return config;
}

ExperimentResult run(StrategyKind kind, std::uint64_t seed, int rounds) {
  const Federation fed = micro_federation(seed);
  RunOptions options;
  options.seed = seed;
  options.round_cap = rounds;
  return run_federation(fed, kind, micro_config(), options);
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fedsim_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir.parent_path());
  return dir;
}

double cell_number(const Table::Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
  if (const auto* u = std::get_if<std::uint64_t>(&cell)) return static_cast<double>(*u);
  return 0.0;
}

}  // namespace

TEST_SUITE("report tables") {
  TEST_CASE("dafl participation is exactly 100 percent for every client") {
    const auto result = run(StrategyKind::kDafl, 21, 3);
    const Table t = selection_table(result);
    REQUIRE(t.rows.size() == 14);  // 13 clients + mean
    for (std::size_t r = 0; r < 13; ++r) {
      CHECK(cell_number(t.rows[r][3]) == 100.0);
    }
    CHECK(cell_number(t.rows[13][3]) == 100.0);
  }

  TEST_CASE("random selection hovers near 46 percent over many rounds") {
    const auto result = run(StrategyKind::kFedAvg, 22, 130);
    const Table t = selection_table(result);
    CHECK(cell_number(t.rows[13][3]) == doctest::Approx(100.0 * 6 / 13).epsilon(1e-9));
    for (std::size_t r = 0; r < 13; ++r) {
      CHECK(cell_number(t.rows[r][3]) > 46.0 - 10.0);
      CHECK(cell_number(t.rows[r][3]) < 46.0 + 10.0);
    }
  }

  TEST_CASE("a client that never trains reports zero percent") {
    ExperimentResult result;
    result.client_names = {"a", "b"};
    result.ledger = TransportLedger(2);
    RoundRecord round;
    round.clients.resize(2);
    round.selected = {0};
    round.clients[0].selected = true;
    result.rounds.push_back(round);
    const Table t = selection_table(result);
    CHECK(cell_number(t.rows[0][3]) == 100.0);
    CHECK(cell_number(t.rows[1][3]) == 0.0);
  }

  TEST_CASE("f1 series shape and mean column") {
    const auto result = run(StrategyKind::kFedAvg, 23, 5);
    const Table t = f1_series(result);
    REQUIRE(t.rows.size() == 5);
    REQUIRE(t.columns.size() == 2 + 13);
    for (const auto& row : t.rows) {
      double sum = 0.0;
      for (std::size_t c = 2; c < row.size(); ++c) {
        const double f1 = cell_number(row[c]);
        CHECK(f1 >= 0.0);
        CHECK(f1 <= 1.0);
        sum += f1;
      }
      CHECK(std::abs(cell_number(row[1]) - sum / 13.0) < 1e-12);
    }
  }

  TEST_CASE("bandwidth rows add up to the ledger total") {
    const auto result = run(StrategyKind::kScaffold, 24, 3);
    const Table t = bandwidth_table(result);
    REQUIRE(t.rows.size() == 14);
    double sum = 0.0;
    for (std::size_t r = 0; r < 13; ++r) sum += cell_number(t.rows[r][8]);
    CHECK(sum == cell_number(t.rows[13][8]));
    CHECK(sum == static_cast<double>(result.ledger.total()));
  }

  TEST_CASE("a zero-round result exports all zeros") {
    ExperimentResult result;
    result.client_names = {"a", "b", "c"};
    result.ledger = TransportLedger(3);
    const Table t = bandwidth_table(result);
    for (const auto& row : t.rows) CHECK(cell_number(row[8]) == 0.0);
  }
}

TEST_SUITE("report export") {
  TEST_CASE("csv and json exports carry identical numbers") {
    const auto result = run(StrategyKind::kFedAvg, 25, 3);
    const Table t = f1_series(result);

    const std::string csv = render_csv(t);
    const nlohmann::json j = nlohmann::json::parse(render_json(t));

    // Parse the CSV back and compare cell by cell.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    std::size_t row = 0;
    while (std::getline(lines, line)) {
      std::istringstream fields(line);
      std::string field;
      std::size_t col = 0;
      while (std::getline(fields, field, ',')) {
        const double from_csv = std::stod(field);
        const double from_json = j["rows"][row][col].get<double>();
        CHECK(from_csv == doctest::Approx(from_json).epsilon(1e-15));
        ++col;
      }
      ++row;
    }
    CHECK(row == t.rows.size());
  }

  TEST_CASE("export writes one file per table plus the manifest") {
    const auto result = run(StrategyKind::kFedAvg, 26, 2);
    const auto dir = fresh_dir("export_files");
    const auto out = export_result(result, "csv", dir);
    for (const char* name :
         {"participation.csv", "bandwidth.csv", "f1_series.csv", "work_units.csv",
          "test_f1.csv", "summary.csv", "manifest.json", "result.json", "model.bin"}) {
      CHECK(std::filesystem::exists(out / name));
    }
  }

  TEST_CASE("manifest round trips the configuration") {
    const auto result = run(StrategyKind::kFedProx, 27, 2);
    const auto dir = fresh_dir("export_manifest");
    const auto out = export_result(result, "json", dir);
    std::ifstream in(out / "manifest.json");
    const nlohmann::json manifest = nlohmann::json::parse(in);
    const StrategyConfig parsed = config_from_json(manifest["config"].dump());
    CHECK(parsed.selection_ratio == result.config.selection_ratio);
    CHECK(parsed.prox_lambda == result.config.prox_lambda);
    CHECK(parsed.batch_size == result.config.batch_size);
    CHECK(manifest["strategy"] == "fedprox");
  }

  TEST_CASE("existing directories are never overwritten") {
    const auto result = run(StrategyKind::kFedAvg, 28, 2);
    const auto dir = fresh_dir("export_collision");
    std::filesystem::remove_all(dir.parent_path() / "export_collision_1");
    const auto first = export_result(result, "csv", dir);
    const auto second = export_result(result, "csv", dir);
    CHECK(first != second);
    CHECK(second.filename().string() == "export_collision_1");
    CHECK(std::filesystem::exists(first / "summary.csv"));
    CHECK(std::filesystem::exists(second / "summary.csv"));
  }

  TEST_CASE("a saved result loads back with the same records") {
    const auto original = run(StrategyKind::kScaffold, 29, 3);
    const auto dir = fresh_dir("export_roundtrip");
    std::filesystem::create_directories(dir);
    save_result(original, dir / "result.json");
    const ExperimentResult loaded = load_result(dir / "result.json");

    CHECK(loaded.strategy == original.strategy);
    CHECK(loaded.seed == original.seed);
    CHECK(loaded.stop_reason == original.stop_reason);
    CHECK(loaded.ledger == original.ledger);
    REQUIRE(loaded.rounds.size() == original.rounds.size());
    for (std::size_t r = 0; r < loaded.rounds.size(); ++r) {
      CHECK(loaded.rounds[r].model_hash == original.rounds[r].model_hash);
      CHECK(loaded.rounds[r].selected == original.rounds[r].selected);
      for (std::size_t c = 0; c < loaded.rounds[r].clients.size(); ++c) {
        CHECK(loaded.rounds[r].clients[c].val_f1 ==
              original.rounds[r].clients[c].val_f1);
        CHECK(loaded.rounds[r].clients[c].bytes_down ==
              original.rounds[r].clients[c].bytes_down);
      }
    }
    for (std::size_t c = 0; c < loaded.test_metrics.size(); ++c) {
      CHECK(loaded.test_metrics[c].f1 == original.test_metrics[c].f1);
    }
  }
}
