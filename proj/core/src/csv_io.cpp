#include "fedsim/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <nlohmann/json.hpp>

#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

[[noreturn]] void csv_error(const std::filesystem::path& path, std::size_t line,
                            const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_field(const std::filesystem::path& path, std::size_t line_no,
                   std::string_view field) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    csv_error(path, line_no, "non-numeric field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

void write_client_csv(const std::filesystem::path& path, const LabeledSet& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < kInputDim; ++c) {
    out << 'f' << c << ',';
  }
  out << "label\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    auto row = samples.features.row(r);
    for (std::size_t c = 0; c < kInputDim; ++c) {
      out << format_double(row[c]) << ',';
    }
    out << samples.labels[r] << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

LabeledSet load_client_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  std::vector<int> labels;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line.rfind(kCsvHeaderPrefix, 0) != 0) {
        csv_error(path, 1, "expected header starting with 'f0,'");
      }
      continue;
    }
    if (line.empty()) continue;

    std::size_t fields = 0;
    std::size_t start = 0;
    double label_value = 0.0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      const std::string_view field(line.data() + start, end - start);
      if (fields < kInputDim) {
        values.push_back(parse_field(path, line_no, field));
      } else if (fields == kInputDim) {
        label_value = parse_field(path, line_no, field);
      }
      ++fields;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields != kInputDim + 1) {
      csv_error(path, line_no,
                "expected " + std::to_string(kInputDim + 1) + " columns, got " +
                    std::to_string(fields));
    }
    if (label_value != 0.0 && label_value != 1.0) {
      csv_error(path, line_no, "label must be 0 or 1");
    }
    labels.push_back(label_value != 0.0 ? 1 : 0);
  }

  if (labels.empty()) {
    throw std::runtime_error(path.string() + ": file holds no samples");
  }
  LabeledSet set;
  set.features = Matrix(labels.size(), kInputDim, std::move(values));
  set.labels = std::move(labels);
  for (double v : set.features.data()) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(path.string() + ": non-finite feature value");
    }
  }
  return set;
}

std::string attack_name_from(const std::filesystem::path& path) {
  std::string stem = path.stem().string();
  // Generated files look like client_03_dns; keep the trailing name part.
  const std::size_t last = stem.rfind('_');
  if (stem.rfind("client_", 0) == 0 && last != std::string::npos && last + 1 < stem.size()) {
    return stem.substr(last + 1);
  }
  return stem;
}

}  // namespace

Federation load_csv_federation(const std::filesystem::path& directory,
                               std::uint64_t split_seed) {
  if (!std::filesystem::is_directory(directory)) {
    throw std::runtime_error(directory.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw std::runtime_error("no .csv files in " + directory.string());
  }
  std::sort(files.begin(), files.end());

  Federation federation;
  for (std::size_t i = 0; i < files.size(); ++i) {
    LabeledSet all = load_client_csv(files[i]);
    normalize_columns(all.features);
    ClientDataset client;
    client.client_id = static_cast<int>(i);
    client.attack_name = attack_name_from(files[i]);
    split_dataset(all, mix_seed({split_seed, 0x73706c6974ULL, i}), client.train,
                  client.val, client.test);
    client.class_proportions = class_proportions(client.train);
    federation.push_back(std::move(client));
  }
  return federation;
}

void write_federation(const std::filesystem::path& directory, const FederationSpec& spec,
                      const Federation& federation) {
  std::filesystem::create_directories(directory);
  for (const auto& client : federation) {
    char index[8];
    std::snprintf(index, sizeof(index), "%02d", client.client_id);
    const auto path =
        directory / ("client_" + std::string(index) + "_" + client.attack_name + ".csv");
    write_client_csv(path, concat(concat(client.train, client.val), client.test));
  }
  std::ofstream manifest(directory / "federation.json");
  if (!manifest) {
    throw std::runtime_error("cannot write manifest in " + directory.string());
  }
  manifest << spec_to_json(spec) << '\n';
}

}  // namespace fedsim
