#pragma once

#include <filesystem>
#include <string>

#include "fedsim/dataset.hpp"
#include "fedsim/federation_gen.hpp"

namespace fedsim {

// Client CSV layout: header "f0,...,f109,label", one flow sample per row,
// features row-major over (packet, feature), '.' decimal, UTF-8.
inline constexpr char kCsvHeaderPrefix[] = "f0,";

// Writes one client's samples (train, val and test merged back together is
// not needed; generation writes the unsplit set).
void write_client_csv(const std::filesystem::path& path, const LabeledSet& samples);

// Reads every *.csv in the directory (sorted by filename; that order assigns
// client ids), min-max normalizes feature columns per file, splits per the
// standard policy and derives the attack name from the file stem. Malformed
// rows are reported with file and line number.
Federation load_csv_federation(const std::filesystem::path& directory,
                               std::uint64_t split_seed);

// Writes the full federation as per-client CSVs plus a federation.json
// manifest describing the generating spec.
void write_federation(const std::filesystem::path& directory, const FederationSpec& spec,
                      const Federation& federation);

}  // namespace fedsim
