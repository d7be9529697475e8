#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "fedsim/engine.hpp"

namespace fedsim {

// A rectangular table; rendered identically (same values) to CSV and JSON.
struct Table {
  using Cell = std::variant<std::string, double, std::int64_t, std::uint64_t>;

  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Per-client share of rounds with local training, percent, plus the mean.
Table selection_table(const ExperimentResult& result);

// Per-client byte totals split by payload kind, with a federation sum row.
// The MB column uses decimal megabytes.
Table bandwidth_table(const ExperimentResult& result);

// One row per round: mean validation F1 of the aggregated global model and
// each client's score.
Table f1_series(const ExperimentResult& result);

// One row per round: total work units (mu_i * batch_size) plus each client's
// update count.
Table work_units_table(const ExperimentResult& result);

// Final model on each client's test split.
Table test_f1_table(const ExperimentResult& result);

// One-row run digest.
Table summary_table(const ExperimentResult& result);

std::string render_csv(const Table& table);
std::string render_json(const Table& table);

// Full result round trip; everything an export contains is recomputable
// from this document plus the model file.
void save_result(const ExperimentResult& result, const std::filesystem::path& path);
ExperimentResult load_result(const std::filesystem::path& path);

// Writes every table, a manifest, the raw result document and the final
// model under directory. An existing directory is never touched: a versioned
// _N suffix is picked instead. Returns the directory actually written.
std::filesystem::path export_result(const ExperimentResult& result,
                                    const std::string& format,
                                    const std::filesystem::path& directory);

// Picks `directory` or the first free `directory_N`.
std::filesystem::path versioned_directory(const std::filesystem::path& directory);

}  // namespace fedsim
