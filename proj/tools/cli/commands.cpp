#include "cli/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fedsim/csv_io.hpp"
#include "fedsim/engine.hpp"
#include "fedsim/federation_gen.hpp"
#include "fedsim/log.hpp"
#include "fedsim/report.hpp"
#include "fedsim/wire.hpp"

namespace fedsim::cli {

namespace {

constexpr int kFladSafetyCap = 1000;

int env_threads_default() {
  if (const char* env = std::getenv("FEDSIM_THREADS")) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
    if (ec == std::errc{} && ptr == env + std::strlen(env) && value >= 1) return value;
    log_warn("ignoring non-numeric FEDSIM_THREADS value");
  }
  return 1;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// The manifest written by `generate` pins the split seed of a dataset
// directory; without it the splits fall back to seed 0.
std::uint64_t dataset_split_seed(const std::filesystem::path& data_dir) {
  const auto manifest = data_dir / "federation.json";
  if (std::filesystem::exists(manifest)) {
    return spec_from_json(read_file(manifest)).seed;
  }
  return 0;
}

StrategyConfig load_config(const std::string& config_path) {
  StrategyConfig config;
  if (!config_path.empty()) {
    config = config_from_json(read_file(config_path), config);
  }
  return config;
}

struct CommonArgs {
  std::uint64_t seed = 0;
  std::string out;
  int threads = env_threads_default();
  std::string log_level = "warn";
};

void add_common(CLI::App* cmd, CommonArgs& common, bool out_required = true) {
  cmd->add_option("--seed", common.seed, "Run seed");
  auto* out = cmd->add_option("--out", common.out, "Output directory");
  if (out_required) out->required();
  cmd->add_option("--threads", common.threads,
                  "Worker threads (FEDSIM_THREADS is the fallback)");
  cmd->add_option("--log-level", common.log_level, "error|warn|info|debug");
}

int cmd_generate(const CommonArgs& common, const std::string& preset,
                 const std::string& spec_path, double scale) {
  FederationSpec spec;
  if (!spec_path.empty()) {
    spec = spec_from_json(read_file(spec_path));
    spec.seed = common.seed;
  } else if (preset == "paper13") {
    spec = paper13_spec(common.seed, scale);
  } else {
    throw std::runtime_error("unknown preset '" + preset + "' (try paper13)");
  }

  const Federation federation = generate_federation(spec);
  const auto out = versioned_directory(common.out);
  write_federation(out, spec, federation);
  std::cout << out.string() << "\n";
  return 0;
}

ExperimentResult run_one(const Federation& federation, StrategyKind kind,
                         const StrategyConfig& config, std::uint64_t seed, int rounds,
                         int threads) {
  RunOptions options;
  options.seed = seed;
  options.threads = threads;
  options.round_cap = kind == StrategyKind::kFlad ? kFladSafetyCap : rounds;
  return run_federation(federation, kind, config, options);
}

int cmd_run(const CommonArgs& common, const std::string& strategy,
            const std::string& data_dir, std::optional<int> rounds,
            const std::string& config_path, const std::string& format) {
  const StrategyKind kind = strategy_from_name(strategy);
  const StrategyConfig config = load_config(config_path);

  if (kind == StrategyKind::kFlad) {
    if (rounds.has_value()) {
      log_warn("--rounds is ignored for flad; it stops on patience (cap " +
               std::to_string(kFladSafetyCap) + ")");
    }
  } else if (!rounds.has_value() || *rounds < 1) {
    throw std::runtime_error("--rounds is required for strategy '" + strategy + "'");
  }

  const Federation federation =
      load_csv_federation(data_dir, dataset_split_seed(data_dir));
  const ExperimentResult result =
      run_one(federation, kind, config, common.seed, rounds.value_or(0), common.threads);
  const auto out = export_result(result, format, common.out);
  std::cout << out.string() << "\n";
  return 0;
}

void write_merged(const std::filesystem::path& path,
                  const std::vector<ExperimentResult>& results,
                  Table (*make)(const ExperimentResult&)) {
  Table merged;
  bool first = true;
  for (const auto& result : results) {
    Table t = make(result);
    if (first) {
      merged.name = t.name;
      merged.columns = {"strategy", "seed"};
      merged.columns.insert(merged.columns.end(), t.columns.begin(), t.columns.end());
      first = false;
    }
    for (auto& row : t.rows) {
      std::vector<Table::Cell> cells = {result.strategy,
                                        static_cast<std::uint64_t>(result.seed)};
      cells.insert(cells.end(), row.begin(), row.end());
      merged.rows.push_back(std::move(cells));
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << render_csv(merged);
}

int cmd_compare(const CommonArgs& common, const std::string& data_dir,
                const std::string& seeds_text, int max_rounds,
                const std::string& config_path) {
  const std::vector<std::uint64_t> seeds = parse_seed_list(seeds_text);
  const StrategyConfig config = load_config(config_path);
  const Federation federation =
      load_csv_federation(data_dir, dataset_split_seed(data_dir));

  const auto out = versioned_directory(common.out);
  std::filesystem::create_directories(out);

  std::vector<ExperimentResult> all;
  nlohmann::json errors = nlohmann::json::array();
  for (std::uint64_t seed : seeds) {
    try {
      RunOptions options;
      options.seed = seed;
      options.threads = common.threads;
      options.round_cap = max_rounds;
      std::vector<ExperimentResult> results = run_comparison(federation, config, options);
      for (const auto& result : results) {
        export_result(result, "csv",
                      out / ("seed_" + std::to_string(seed)) / result.strategy);
      }
      all.insert(all.end(), std::make_move_iterator(results.begin()),
                 std::make_move_iterator(results.end()));
    } catch (const std::exception& e) {
      errors.push_back({{"seed", seed}, {"error", e.what()}});
      log_error("seed " + std::to_string(seed) + " failed: " + e.what());
    }
  }

  if (!all.empty()) {
    write_merged(out / "merged_summary.csv", all, &summary_table);
    write_merged(out / "merged_test_f1.csv", all, &test_f1_table);
    write_merged(out / "merged_participation.csv", all, &selection_table);
    write_merged(out / "merged_bandwidth.csv", all, &bandwidth_table);
  }

  std::cout << out.string() << "\n";
  if (!errors.empty()) {
    std::cerr << nlohmann::json{{"failed_seeds", errors}}.dump() << "\n";
    return 1;
  }
  return 0;
}

int cmd_report(const CommonArgs& common, const std::string& result_dir,
               const std::string& format) {
  const std::filesystem::path dir(result_dir);
  ExperimentResult result = load_result(dir / "result.json");
  const auto model_file = dir / "model.bin";
  if (std::filesystem::exists(model_file)) {
    result.final_model = read_params_file(model_file.string());
  }
  const auto out = export_result(result, format, common.out);
  std::cout << out.string() << "\n";
  return 0;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  auto parse_one = [](const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw std::runtime_error("bad seed '" + s + "'");
    }
    return v;
  };

  const std::size_t range = text.find("..");
  if (range != std::string::npos) {
    const std::uint64_t lo = parse_one(text.substr(0, range));
    const std::uint64_t hi = parse_one(text.substr(range + 2));
    if (hi < lo) throw std::runtime_error("seed range is inverted: " + text);
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    if (end > start) seeds.push_back(parse_one(text.substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (seeds.empty()) throw std::runtime_error("no seeds in '" + text + "'");
  return seeds;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Deterministic federated-learning simulator for DDoS detection"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* generate = app.add_subcommand("generate", "Create a synthetic federation");
  std::string preset = "paper13";
  std::string spec_path;
  double scale = 1.0;
  generate->add_option("--preset", preset, "Built-in federation preset");
  generate->add_option("--spec", spec_path, "Explicit federation spec (JSON)");
  generate->add_option("--scale", scale, "Scales every client's sample count");
  add_common(generate, common);

  auto* run = app.add_subcommand("run", "Run one strategy over a dataset directory");
  std::string strategy;
  std::string data_dir;
  std::string config_path;
  std::string format = "csv";
  std::optional<int> rounds;
  run->add_option("--strategy", strategy,
                  "fedavg|fedprox|scaffold|fedala|dafl|fedsbs|flad")
      ->required();
  run->add_option("--data", data_dir, "Dataset directory of client CSVs")->required();
  run->add_option("--rounds", rounds, "Round count (required except for flad)");
  run->add_option("--config", config_path, "Strategy config JSON");
  run->add_option("--format", format, "Table export format: csv|json");
  add_common(run, common);

  auto* compare = app.add_subcommand("compare", "Full comparison protocol, many seeds");
  std::string seeds_text = "1..10";
  int max_rounds = kFladSafetyCap;
  compare->add_option("--data", data_dir, "Dataset directory of client CSVs")->required();
  compare->add_option("--seeds", seeds_text, "Seed list: 1..10 or 1,4,9");
  compare->add_option("--max-rounds", max_rounds, "Safety cap for the flad run");
  compare->add_option("--config", config_path, "Strategy config JSON");
  add_common(compare, common);

  auto* report = app.add_subcommand("report", "Re-export tables from a stored result");
  std::string result_dir;
  report->add_option("--result", result_dir, "Run directory with result.json")->required();
  report->add_option("--format", format, "Table export format: csv|json");
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    set_log_threshold(log_level_from_name(common.log_level));
    if (generate->parsed()) return cmd_generate(common, preset, spec_path, scale);
    if (run->parsed()) {
      return cmd_run(common, strategy, data_dir, rounds, config_path, format);
    }
    if (compare->parsed()) {
      return cmd_compare(common, data_dir, seeds_text, max_rounds, config_path);
    }
    if (report->parsed()) return cmd_report(common, result_dir, format);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fedsim::cli
