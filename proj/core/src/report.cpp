#include "fedsim/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fedsim/wire.hpp"

namespace fedsim {

namespace {

std::string cell_text(const Table::Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  char buf[40];
  char* end = buf;
  if (const auto* d = std::get_if<double>(&cell)) {
    end = std::to_chars(buf, buf + sizeof(buf), *d).ptr;
  } else if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    end = std::to_chars(buf, buf + sizeof(buf), *i).ptr;
  } else {
    end = std::to_chars(buf, buf + sizeof(buf), std::get<std::uint64_t>(cell)).ptr;
  }
  return std::string(buf, end);
}

nlohmann::json cell_json(const Table::Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  return std::get<std::uint64_t>(cell);
}

double participation_pct(const ExperimentResult& result, std::size_t client) {
  if (result.rounds.empty()) return 0.0;
  std::uint64_t selected = 0;
  for (const auto& round : result.rounds) {
    if (round.clients[client].selected) ++selected;
  }
  return 100.0 * static_cast<double>(selected) /
         static_cast<double>(result.rounds.size());
}

}  // namespace

Table selection_table(const ExperimentResult& result) {
  Table t;
  t.name = "participation";
  t.columns = {"client_id", "attack", "rounds_selected", "participation_pct"};
  const std::size_t n = result.client_names.size();
  double mean = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::uint64_t selected = 0;
    for (const auto& round : result.rounds) {
      if (round.clients[c].selected) ++selected;
    }
    const double pct = participation_pct(result, c);
    mean += pct / static_cast<double>(n);
    t.rows.push_back({static_cast<std::int64_t>(c), result.client_names[c], selected, pct});
  }
  t.rows.push_back({std::string("mean"), std::string(""), std::uint64_t{0}, mean});
  return t;
}

Table bandwidth_table(const ExperimentResult& result) {
  Table t;
  t.name = "bandwidth";
  t.columns = {"client_id",    "attack",        "model_bytes", "variate_bytes",
               "scalar_bytes", "directive_bytes", "down_bytes", "up_bytes",
               "total_bytes",  "total_mb"};
  const auto& ledger = result.ledger;
  std::uint64_t grand_total = 0;
  for (std::size_t c = 0; c < result.client_names.size(); ++c) {
    const int id = static_cast<int>(c);
    std::uint64_t per_kind[kPayloadKinds] = {};
    std::uint64_t down = 0;
    std::uint64_t up = 0;
    for (std::size_t k = 0; k < kPayloadKinds; ++k) {
      const auto kind = static_cast<PayloadKind>(k);
      const std::uint64_t d = ledger.client_bytes(id, Direction::kDown, kind);
      const std::uint64_t u = ledger.client_bytes(id, Direction::kUp, kind);
      per_kind[k] = d + u;
      down += d;
      up += u;
    }
    const std::uint64_t total = down + up;
    grand_total += total;
    t.rows.push_back(
        {static_cast<std::int64_t>(c), result.client_names[c],
         per_kind[static_cast<std::size_t>(PayloadKind::kGlobalModel)] +
             per_kind[static_cast<std::size_t>(PayloadKind::kLocalModel)],
         per_kind[static_cast<std::size_t>(PayloadKind::kControlVariate)],
         per_kind[static_cast<std::size_t>(PayloadKind::kScalarReport)],
         per_kind[static_cast<std::size_t>(PayloadKind::kDirective)], down, up, total,
         static_cast<double>(total) / 1e6});
  }
  t.rows.push_back({std::string("sum"), std::string(""), std::uint64_t{0},
                    std::uint64_t{0}, std::uint64_t{0}, std::uint64_t{0},
                    std::uint64_t{0}, std::uint64_t{0}, grand_total,
                    static_cast<double>(grand_total) / 1e6});
  return t;
}

Table f1_series(const ExperimentResult& result) {
  Table t;
  t.name = "f1_series";
  t.columns = {"round", "mean_f1"};
  for (const auto& name : result.client_names) t.columns.push_back("f1_" + name);
  for (const auto& round : result.rounds) {
    std::vector<Table::Cell> row;
    row.push_back(static_cast<std::int64_t>(round.round));
    double mean = 0.0;
    for (const auto& c : round.clients) {
      mean += c.val_f1 / static_cast<double>(round.clients.size());
    }
    row.push_back(mean);
    for (const auto& c : round.clients) row.push_back(c.val_f1);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table work_units_table(const ExperimentResult& result) {
  Table t;
  t.name = "work_units";
  t.columns = {"round", "work_units"};
  for (const auto& name : result.client_names) t.columns.push_back("updates_" + name);
  for (const auto& round : result.rounds) {
    std::vector<Table::Cell> row;
    row.push_back(static_cast<std::int64_t>(round.round));
    row.push_back(round.work_units);
    for (const auto& c : round.clients) {
      row.push_back(static_cast<std::int64_t>(c.num_updates));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table test_f1_table(const ExperimentResult& result) {
  Table t;
  t.name = "test_f1";
  t.columns = {"client_id", "attack", "precision", "recall", "f1", "accuracy", "loss"};
  const std::size_t n = result.test_metrics.size();
  double mean = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const EvalMetrics& m = result.test_metrics[c];
    mean += m.f1 / static_cast<double>(n);
    t.rows.push_back({static_cast<std::int64_t>(c), result.client_names[c], m.precision,
                      m.recall, m.f1, m.accuracy, m.mean_loss});
  }
  double var = 0.0;
  for (const auto& m : result.test_metrics) {
    var += (m.f1 - mean) * (m.f1 - mean) / static_cast<double>(n);
  }
  t.rows.push_back({std::string("mean"), std::string(""), 0.0, 0.0, mean, 0.0, 0.0});
  t.rows.push_back({std::string("std_dev"), std::string(""), 0.0, 0.0, std::sqrt(var),
                    0.0, 0.0});
  return t;
}

Table summary_table(const ExperimentResult& result) {
  double mean_participation = 0.0;
  const std::size_t n = result.client_names.size();
  for (std::size_t c = 0; c < n; ++c) {
    mean_participation += participation_pct(result, c) / static_cast<double>(n);
  }
  double mean_f1 = 0.0;
  for (const auto& m : result.test_metrics) {
    mean_f1 += m.f1 / static_cast<double>(result.test_metrics.size());
  }
  std::uint64_t work = 0;
  for (const auto& round : result.rounds) work += round.work_units;

  Table t;
  t.name = "summary";
  t.columns = {"strategy",      "seed",        "rounds",   "stop_reason",
               "participation", "total_bytes", "total_mb", "work_units",
               "mean_test_f1",  "initial_model_hash", "final_model_hash"};
  t.rows.push_back({result.strategy, static_cast<std::uint64_t>(result.seed),
                    static_cast<std::int64_t>(result.rounds_executed),
                    result.stop_reason, mean_participation, result.ledger.total(),
                    static_cast<double>(result.ledger.total()) / 1e6, work, mean_f1,
                    hash_hex(result.initial_model_hash),
                    params_hash_hex(result.final_model)});
  return t;
}

std::string render_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += cell_text(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string render_json(const Table& table) {
  nlohmann::json j;
  j["table"] = table.name;
  j["columns"] = table.columns;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) r.push_back(cell_json(cell));
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2);
}

namespace {

nlohmann::json ledger_to_json(const TransportLedger& ledger) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t c = 0; c < ledger.num_clients(); ++c) {
    nlohmann::json client;
    for (std::size_t k = 0; k < kPayloadKinds; ++k) {
      const auto kind = static_cast<PayloadKind>(k);
      client["down"][payload_kind_name(kind)] =
          ledger.client_bytes(static_cast<int>(c), Direction::kDown, kind);
      client["up"][payload_kind_name(kind)] =
          ledger.client_bytes(static_cast<int>(c), Direction::kUp, kind);
    }
    j.push_back(std::move(client));
  }
  return j;
}

TransportLedger ledger_from_json(const nlohmann::json& j) {
  TransportLedger ledger(j.size());
  for (std::size_t c = 0; c < j.size(); ++c) {
    for (std::size_t k = 0; k < kPayloadKinds; ++k) {
      const auto kind = static_cast<PayloadKind>(k);
      ledger.account(static_cast<int>(c), Direction::kDown, kind,
                     j[c]["down"][payload_kind_name(kind)].get<std::uint64_t>());
      ledger.account(static_cast<int>(c), Direction::kUp, kind,
                     j[c]["up"][payload_kind_name(kind)].get<std::uint64_t>());
    }
  }
  return ledger;
}

nlohmann::json metrics_to_json(const EvalMetrics& m) {
  return {{"tp", m.tp},         {"fp", m.fp},
          {"fn", m.fn},         {"tn", m.tn},
          {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},         {"accuracy", m.accuracy},
          {"mean_loss", m.mean_loss}};
}

EvalMetrics metrics_from_json(const nlohmann::json& j) {
  EvalMetrics m;
  m.tp = j.at("tp").get<std::uint64_t>();
  m.fp = j.at("fp").get<std::uint64_t>();
  m.fn = j.at("fn").get<std::uint64_t>();
  m.tn = j.at("tn").get<std::uint64_t>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.accuracy = j.at("accuracy").get<double>();
  m.mean_loss = j.at("mean_loss").get<double>();
  return m;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void save_result(const ExperimentResult& result, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["strategy"] = result.strategy;
  j["config"] = nlohmann::json::parse(config_to_json(result.config));
  j["seed"] = result.seed;
  j["rounds_executed"] = result.rounds_executed;
  j["stop_reason"] = result.stop_reason;
  j["best_round"] = result.best_round;
  j["initial_model_hash"] = result.initial_model_hash;
  j["client_names"] = result.client_names;
  j["ledger"] = ledger_to_json(result.ledger);

  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& round : result.rounds) {
    nlohmann::json r;
    r["round"] = round.round;
    r["selected"] = round.selected;
    r["work_units"] = round.work_units;
    r["model_hash"] = round.model_hash;
    r["aggregated"] = round.aggregated;
    nlohmann::json clients = nlohmann::json::array();
    for (const auto& c : round.clients) {
      clients.push_back({{"selected", c.selected},
                         {"participated", c.participated},
                         {"num_updates", c.num_updates},
                         {"bytes_down", c.bytes_down},
                         {"bytes_up", c.bytes_up},
                         {"val_f1", c.val_f1},
                         {"val_accuracy", c.val_accuracy},
                         {"val_loss", c.val_loss}});
    }
    r["clients"] = std::move(clients);
    rounds.push_back(std::move(r));
  }
  j["rounds"] = std::move(rounds);

  nlohmann::json tests = nlohmann::json::array();
  for (const auto& m : result.test_metrics) tests.push_back(metrics_to_json(m));
  j["test_metrics"] = std::move(tests);

  write_text_file(path, j.dump(2) + "\n");
}

ExperimentResult load_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in);

  ExperimentResult result;
  result.strategy = j.at("strategy").get<std::string>();
  result.config = config_from_json(j.at("config").dump());
  result.seed = j.at("seed").get<std::uint64_t>();
  result.rounds_executed = j.at("rounds_executed").get<int>();
  result.stop_reason = j.at("stop_reason").get<std::string>();
  result.best_round = j.at("best_round").get<int>();
  result.initial_model_hash = j.at("initial_model_hash").get<std::uint64_t>();
  result.client_names = j.at("client_names").get<std::vector<std::string>>();
  result.ledger = ledger_from_json(j.at("ledger"));

  for (const auto& r : j.at("rounds")) {
    RoundRecord round;
    round.round = r.at("round").get<int>();
    round.selected = r.at("selected").get<std::vector<int>>();
    round.work_units = r.at("work_units").get<std::uint64_t>();
    round.model_hash = r.at("model_hash").get<std::uint64_t>();
    round.aggregated = r.at("aggregated").get<bool>();
    for (const auto& c : r.at("clients")) {
      ClientRoundRecord record;
      record.selected = c.at("selected").get<bool>();
      record.participated = c.at("participated").get<bool>();
      record.num_updates = c.at("num_updates").get<int>();
      record.bytes_down = c.at("bytes_down").get<std::uint64_t>();
      record.bytes_up = c.at("bytes_up").get<std::uint64_t>();
      record.val_f1 = c.at("val_f1").get<double>();
      record.val_accuracy = c.at("val_accuracy").get<double>();
      record.val_loss = c.at("val_loss").get<double>();
      round.clients.push_back(record);
    }
    result.rounds.push_back(std::move(round));
  }
  for (const auto& m : j.at("test_metrics")) {
    result.test_metrics.push_back(metrics_from_json(m));
  }
  return result;
}

std::filesystem::path versioned_directory(const std::filesystem::path& directory) {
  if (!std::filesystem::exists(directory)) return directory;
  for (int suffix = 1;; ++suffix) {
    std::filesystem::path candidate = directory;
    candidate += "_" + std::to_string(suffix);
    if (!std::filesystem::exists(candidate)) return candidate;
  }
}

std::filesystem::path export_result(const ExperimentResult& result,
                                    const std::string& format,
                                    const std::filesystem::path& directory) {
  if (format != "csv" && format != "json") {
    throw std::invalid_argument("export_result: format must be csv or json");
  }
  const std::filesystem::path out = versioned_directory(directory);
  std::filesystem::create_directories(out);

  const Table tables[] = {selection_table(result), bandwidth_table(result),
                          f1_series(result),       work_units_table(result),
                          test_f1_table(result),   summary_table(result)};
  for (const Table& table : tables) {
    if (format == "csv") {
      write_text_file(out / (table.name + ".csv"), render_csv(table));
    } else {
      write_text_file(out / (table.name + ".json"), render_json(table));
    }
  }

  nlohmann::json manifest;
  manifest["artifact"] = "fedsim";
  manifest["format_version"] = 1;
  manifest["strategy"] = result.strategy;
  manifest["seed"] = result.seed;
  manifest["stop_reason"] = result.stop_reason;
  manifest["rounds_executed"] = result.rounds_executed;
  manifest["initial_model_hash"] = hash_hex(result.initial_model_hash);
  manifest["final_model_hash"] = params_hash_hex(result.final_model);
  manifest["config"] = nlohmann::json::parse(config_to_json(result.config));
  write_text_file(out / "manifest.json", manifest.dump(2) + "\n");

  save_result(result, out / "result.json");
  if (!result.final_model.empty()) {
    write_params_file((out / "model.bin").string(), result.final_model);
  }
  return out;
}

}  // namespace fedsim
