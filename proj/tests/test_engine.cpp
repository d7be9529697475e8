#include <doctest.h>

#include "fedsim/engine.hpp"
#include "fedsim/federation_gen.hpp"
#include "fedsim/model.hpp"
#include "fedsim/wire.hpp"
#include "support/generators.hpp"

using namespace fedsim;
using namespace fedsim::test;

namespace {

// A small but learnable federation used across the engine tests.
Federation micro_federation(std::uint64_t seed, double scale = 0.004) {
  return generate_federation(paper13_spec(seed, scale));
}

StrategyConfig micro_config() {
  StrategyConfig config;
  config.batch_size = 64;
  config.flad_max_steps = 8;
  config.flad_max_epochs = 2;
  return config;
}

std::uint64_t round_model_bytes(const RoundRecord& round) {
  std::uint64_t total = 0;
  for (const auto& c : round.clients) total += c.bytes_down + c.bytes_up;
  return total;
}

bool records_equal(const ExperimentResult& a, const ExperimentResult& b) {
  if (a.rounds.size() != b.rounds.size()) return false;
  if (!(a.ledger == b.ledger)) return false;
  if (a.final_model.values != b.final_model.values) return false;
  for (std::size_t r = 0; r < a.rounds.size(); ++r) {
    if (a.rounds[r].selected != b.rounds[r].selected) return false;
    if (a.rounds[r].model_hash != b.rounds[r].model_hash) return false;
    if (a.rounds[r].work_units != b.rounds[r].work_units) return false;
    for (std::size_t c = 0; c < a.rounds[r].clients.size(); ++c) {
      const auto& ca = a.rounds[r].clients[c];
      const auto& cb = b.rounds[r].clients[c];
      if (ca.bytes_down != cb.bytes_down || ca.bytes_up != cb.bytes_up) return false;
      if (ca.val_f1 != cb.val_f1 || ca.num_updates != cb.num_updates) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("wire") {
  TEST_CASE("the standard model serializes to 18574 bytes") {
    CHECK(serialized_size(kStandardParamCount) == 18574);
    const FlatParams params(kStandardParamCount, 0.25);
    CHECK(serialize_model(params).size() == 18574);
  }

  TEST_CASE("serialize-deserialize-serialize is bytewise idempotent") {
    Rng rng(1);
    const FlatParams params = random_params(rng, 301);
    const auto once = serialize_model(params);
    const auto twice = serialize_model(deserialize_model(once));
    CHECK(once == twice);
  }

  TEST_CASE("a zero vector is all zero bytes after the header") {
    const auto bytes = serialize_model(FlatParams(17));
    REQUIRE(bytes.size() == kWireHeaderBytes + 4 * 17);
    for (std::size_t i = kWireHeaderBytes; i < bytes.size(); ++i) {
      CHECK(bytes[i] == 0);
    }
  }

  TEST_CASE("corrupt input is rejected") {
    auto bytes = serialize_model(FlatParams(4));
    bytes[0] = 'X';
    CHECK_THROWS(deserialize_model(bytes));

    auto truncated = serialize_model(FlatParams(4));
    truncated.pop_back();
    CHECK_THROWS(deserialize_model(truncated));
  }
}

TEST_SUITE("ledger") {
  TEST_CASE("transfers accumulate") {
    TransportLedger ledger(3);
    ledger.account(1, Direction::kUp, PayloadKind::kLocalModel, 10);
    ledger.account(1, Direction::kUp, PayloadKind::kLocalModel, 10);
    CHECK(ledger.client_bytes(1, Direction::kUp, PayloadKind::kLocalModel) == 20);
    CHECK(ledger.total() == 20);
  }

  TEST_CASE("unknown clients are rejected") {
    TransportLedger ledger(2);
    CHECK_THROWS(ledger.account(5, Direction::kDown, PayloadKind::kGlobalModel, 1));
  }

  TEST_CASE("client counters mirror the server per kind") {
    Rng rng(2);
    TransportLedger ledger(4);
    for (int i = 0; i < 200; ++i) {
      ledger.account(static_cast<int>(rng.below(4)),
                     rng.below(2) == 0 ? Direction::kDown : Direction::kUp,
                     static_cast<PayloadKind>(rng.below(kPayloadKinds)),
                     rng.below(1000));
    }
    for (auto dir : {Direction::kDown, Direction::kUp}) {
      for (std::size_t k = 0; k < kPayloadKinds; ++k) {
        const auto kind = static_cast<PayloadKind>(k);
        std::uint64_t client_sum = 0;
        for (int c = 0; c < 4; ++c) client_sum += ledger.client_bytes(c, dir, kind);
        CHECK(client_sum == ledger.server_bytes(dir, kind));
      }
    }
  }
}

TEST_SUITE("engine") {
  TEST_CASE("a zero round cap is rejected") {
    const Federation fed = micro_federation(1);
    RunOptions options;
    options.round_cap = 0;
    CHECK_THROWS(run_federation(fed, StrategyKind::kFedAvg, micro_config(), options));
  }

  TEST_CASE("fedavg rounds select 6 of 13 and move 12 models") {
    const Federation fed = micro_federation(2);
    RunOptions options;
    options.seed = 3;
    options.round_cap = 4;
    const auto result = run_federation(fed, StrategyKind::kFedAvg, micro_config(), options);
    REQUIRE(result.rounds.size() == 4);
    const std::uint64_t model_bytes = serialized_size(kStandardParamCount);
    for (const auto& round : result.rounds) {
      CHECK(round.selected.size() == 6);
      CHECK(round_model_bytes(round) == 12 * model_bytes);
    }
    CHECK(result.ledger.server_bytes(Direction::kDown, PayloadKind::kScalarReport) == 0);
    CHECK(result.ledger.server_bytes(Direction::kUp, PayloadKind::kScalarReport) == 0);
  }

  TEST_CASE("scaffold ships models and variates symmetrically") {
    const Federation fed = micro_federation(3);
    RunOptions options;
    options.seed = 4;
    options.round_cap = 3;
    const auto result =
        run_federation(fed, StrategyKind::kScaffold, micro_config(), options);
    const std::uint64_t model_bytes = serialized_size(kStandardParamCount);
    const std::uint64_t rounds = result.rounds.size();
    CHECK(result.ledger.server_bytes(Direction::kDown, PayloadKind::kGlobalModel) ==
          rounds * 6 * model_bytes);
    CHECK(result.ledger.server_bytes(Direction::kUp, PayloadKind::kLocalModel) ==
          rounds * 6 * model_bytes);
    CHECK(result.ledger.server_bytes(Direction::kDown, PayloadKind::kControlVariate) ==
          rounds * 6 * model_bytes);
    CHECK(result.ledger.server_bytes(Direction::kUp, PayloadKind::kControlVariate) ==
          rounds * 6 * model_bytes);
  }

  TEST_CASE("fedsbs broadcasts to all and trains six") {
    const Federation fed = micro_federation(4);
    RunOptions options;
    options.seed = 5;
    options.round_cap = 3;
    const auto result = run_federation(fed, StrategyKind::kFedSbs, micro_config(), options);
    const std::uint64_t model_bytes = serialized_size(kStandardParamCount);
    for (const auto& round : result.rounds) {
      CHECK(round.selected.size() == 6);
      // 13 evaluation copies down, 6 training copies share them, 6 uploads,
      // plus the two loss scalars per client.
      CHECK(round_model_bytes(round) ==
            (13 + 6 + 6) * model_bytes + 13 * 2 * kScalarReportBytes);
    }
  }

  TEST_CASE("dafl trains everyone every round") {
    const Federation fed = micro_federation(5);
    RunOptions options;
    options.seed = 6;
    options.round_cap = 3;
    const auto result = run_federation(fed, StrategyKind::kDafl, micro_config(), options);
    for (const auto& round : result.rounds) {
      CHECK(round.selected.size() == 13);
    }
    CHECK(result.ledger.server_bytes(Direction::kDown, PayloadKind::kGlobalModel) ==
          result.rounds.size() * 13 * serialized_size(kStandardParamCount));
  }

  TEST_CASE("fedprox with lambda 0 walks the exact fedavg trajectory") {
    const Federation fed = micro_federation(6);
    RunOptions options;
    options.seed = 7;
    options.round_cap = 3;
    StrategyConfig config = micro_config();
    config.prox_lambda = 0.0;
    const auto avg = run_federation(fed, StrategyKind::kFedAvg, micro_config(), options);
    const auto prox = run_federation(fed, StrategyKind::kFedProx, config, options);
    CHECK(avg.final_model.values == prox.final_model.values);
    for (std::size_t r = 0; r < avg.rounds.size(); ++r) {
      CHECK(avg.rounds[r].model_hash == prox.rounds[r].model_hash);
    }
  }

  TEST_CASE("fedavg, fedprox and fedala ledgers are identical") {
    const Federation fed = micro_federation(7);
    RunOptions options;
    options.seed = 8;
    options.round_cap = 3;
    const auto avg = run_federation(fed, StrategyKind::kFedAvg, micro_config(), options);
    const auto prox = run_federation(fed, StrategyKind::kFedProx, micro_config(), options);
    const auto ala = run_federation(fed, StrategyKind::kFedAla, micro_config(), options);
    CHECK(avg.ledger == prox.ledger);
    CHECK(avg.ledger == ala.ledger);
  }

  TEST_CASE("identical runs are identical for 1 and 4 workers") {
    const Federation fed = micro_federation(8);
    for (StrategyKind kind : {StrategyKind::kFedAvg, StrategyKind::kScaffold,
                              StrategyKind::kFedAla, StrategyKind::kFlad}) {
      RunOptions serial;
      serial.seed = 9;
      serial.round_cap = 3;
      serial.threads = 1;
      RunOptions parallel = serial;
      parallel.threads = 4;
      const auto a = run_federation(fed, kind, micro_config(), serial);
      const auto b = run_federation(fed, kind, micro_config(), parallel);
      CHECK(records_equal(a, b));
    }
  }

  TEST_CASE("selection counts reconcile with per-client records") {
    const Federation fed = micro_federation(9);
    RunOptions options;
    options.seed = 10;
    options.round_cap = 5;
    const auto result = run_federation(fed, StrategyKind::kFedAvg, micro_config(), options);
    std::size_t from_sets = 0;
    std::size_t from_records = 0;
    for (const auto& round : result.rounds) {
      from_sets += round.selected.size();
      for (const auto& c : round.clients) from_records += c.selected ? 1 : 0;
    }
    CHECK(from_sets == from_records);
  }

  TEST_CASE("a dafl round with no passer keeps the global model") {
    // Attack indistinguishable from benign everywhere: no client can clear
    // the threshold, so every round carries the initial model forward.
    Federation fed;
    Rng rng(42);
    for (int id = 0; id < 3; ++id) {
      ClientDataset client;
      client.client_id = id;
      client.attack_name = "noise" + std::to_string(id);
      // Large validation splits keep the chance accuracy pinned at 0.5.
      LabeledSet all;
      all.features = Matrix(5000, kInputDim);
      all.labels.resize(5000);
      for (std::size_t i = 0; i < 5000; ++i) {
        for (std::size_t k = 0; k < kInputDim; ++k) {
          all.features.at(i, k) = rng.uniform();
        }
        all.labels[i] = i % 2 == 0 ? 0 : 1;
      }
      split_dataset(all, static_cast<std::uint64_t>(id), client.train, client.val,
                    client.test);
      client.class_proportions = class_proportions(client.train);
      fed.push_back(std::move(client));
    }
    RunOptions options;
    options.seed = 1;
    options.round_cap = 3;
    const auto result = run_federation(fed, StrategyKind::kDafl, micro_config(), options);
    for (const auto& round : result.rounds) {
      CHECK_FALSE(round.aggregated);
      CHECK(round.model_hash == result.initial_model_hash);
    }
    CHECK(params_hash(result.final_model) == result.initial_model_hash);
  }

  TEST_CASE("flad restores the best snapshot and records why it stopped") {
    const Federation fed = micro_federation(10);
    StrategyConfig config = micro_config();
    config.flad_patience = 4;
    RunOptions options;
    options.seed = 11;
    options.round_cap = 200;
    const auto result = run_federation(fed, StrategyKind::kFlad, config, options);
    REQUIRE(result.stop_reason == "flad_patience");
    CHECK(result.rounds_executed < 200);

    // The final model equals the snapshot of the recorded best round.
    REQUIRE(result.best_round >= -1);
    if (result.best_round >= 0) {
      CHECK(params_hash(result.final_model) ==
            result.rounds[static_cast<std::size_t>(result.best_round)].model_hash);
    } else {
      CHECK(params_hash(result.final_model) == result.initial_model_hash);
    }

    // No improvement in the last `patience` rounds, measured on mean accuracy.
    auto mean_acc = [&](const RoundRecord& round) {
      double sum = 0.0;
      for (const auto& c : round.clients) sum += c.val_accuracy;
      return sum / static_cast<double>(round.clients.size());
    };
    double best = 0.0;
    for (int r = 0; r <= result.best_round; ++r) {
      best = std::max(best, mean_acc(result.rounds[static_cast<std::size_t>(r)]));
    }
    for (std::size_t r = static_cast<std::size_t>(result.best_round + 1);
         r < result.rounds.size(); ++r) {
      CHECK(mean_acc(result.rounds[r]) <= best + 1e-6);
    }
  }
}
