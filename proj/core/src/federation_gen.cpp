#include "fedsim/federation_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

constexpr std::size_t kMinClientSamples = 100;
constexpr std::size_t kBenignComponents = 4;

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Feature geometry. Traffic classes are signature subspaces over a flat
// benign base. Benign structure (the strong web-like component and the mild
// variety components) lives on one coordinate block; every attack signature
// lives outside it, except the first ood profile, which shadows the web
// component with a small extra shift on web coordinates. That keeps the
// shadow invisible to models that only learn "elevated non-web coordinates
// mean attack", while staying learnable with dedicated local training.
constexpr double kBenignBase = 0.30;
constexpr std::size_t kWebCoords = 45;
constexpr double kWebShift = 0.52;
constexpr std::size_t kBenignVarietyCoords = 12;
constexpr double kBenignVarietyShift = 0.10;
constexpr std::size_t kUdpCoords = 8;
constexpr double kUdpShift = 0.30;
constexpr std::size_t kShadowCoords = 12;
constexpr double kShadowShift = 0.16;
constexpr std::size_t kOodCoords = 45;
constexpr double kOodShift = 0.58;

struct Layout {
  std::vector<std::vector<double>> benign_means;  // shared mixture
  std::vector<std::vector<double>> attack_means;  // one per client
};

std::vector<std::size_t> sample_subset(Rng& rng, std::vector<std::size_t> pool,
                                       std::size_t count) {
  rng.shuffle(pool);
  pool.resize(count);
  return pool;
}

std::vector<std::size_t> all_coords() {
  std::vector<std::size_t> coords(kInputDim);
  for (std::size_t k = 0; k < kInputDim; ++k) coords[k] = k;
  return coords;
}

std::vector<double> shifted(const std::vector<double>& base,
                            const std::vector<std::size_t>& coords, double shift) {
  std::vector<double> mean = base;
  for (std::size_t k : coords) mean[k] += shift;
  return mean;
}

Layout place_means(const FederationSpec& spec) {
  Rng rng(mix_seed({spec.seed, 0x6c61796f7574ULL}));
  Layout layout;
  layout.attack_means.resize(spec.clients.size());

  const std::vector<double> base(kInputDim, kBenignBase);

  // Benign mixture: component 0 is the strong web-like signature, the rest
  // only mild variety on web coordinates so no attack signature is aliased.
  const std::vector<std::size_t> web = sample_subset(rng, all_coords(), kWebCoords);
  layout.benign_means.push_back(shifted(base, web, kWebShift));
  for (std::size_t c = 1; c < kBenignComponents; ++c) {
    layout.benign_means.push_back(
        shifted(base, sample_subset(rng, web, kBenignVarietyCoords),
                kBenignVarietyShift));
  }

  // Coordinates outside the web signature; every other signature lives here
  // so the web component stays a clean benign landmark.
  std::vector<std::size_t> outside_web;
  {
    std::vector<bool> in_web(kInputDim, false);
    for (std::size_t k : web) in_web[k] = true;
    for (std::size_t k = 0; k < kInputDim; ++k) {
      if (!in_web[k]) outside_web.push_back(k);
    }
  }

  // udp_like attacks: one signature subset each, with a pairwise floor.
  std::vector<std::vector<double>> udp_means;
  for (std::size_t i = 0; i < spec.clients.size(); ++i) {
    if (spec.clients[i].family != ProfileFamily::kUdpLike) continue;
    std::vector<double> mean;
    for (int attempt = 0; attempt < 100; ++attempt) {
      mean = shifted(base, sample_subset(rng, outside_web, kUdpCoords), kUdpShift);
      bool ok = true;
      for (const auto& other : udp_means) {
        if (distance(mean, other) < spec.min_profile_distance) {
          ok = false;
          break;
        }
      }
      if (ok) break;
    }
    udp_means.push_back(mean);
    layout.attack_means[i] = std::move(mean);
  }

  double udp_distance_sum = 0.0;
  std::size_t udp_pairs = 0;
  for (std::size_t a = 0; a < udp_means.size(); ++a) {
    for (std::size_t b = a + 1; b < udp_means.size(); ++b) {
      udp_distance_sum += distance(udp_means[a], udp_means[b]);
      ++udp_pairs;
    }
  }
  const double udp_spacing = udp_pairs > 0 ? udp_distance_sum / static_cast<double>(udp_pairs) : 0.0;

  // ood attacks. The first hides next to benign component 0, offset on web
  // coordinates only; the others take strong exclusive non-web signatures.
  std::size_t ood_index = 0;
  for (std::size_t i = 0; i < spec.clients.size(); ++i) {
    if (spec.clients[i].family != ProfileFamily::kTcpLikeOod) continue;
    if (ood_index == 0) {
      const auto offset = sample_subset(rng, web, kShadowCoords);
      layout.attack_means[i] = shifted(layout.benign_means[0], offset, kShadowShift);
    } else {
      if (outside_web.size() < kOodCoords) {
        throw std::runtime_error("generate_federation: no room for another ood profile");
      }
      const auto coords = sample_subset(rng, outside_web, kOodCoords);
      layout.attack_means[i] = shifted(base, coords, kOodShift);
      std::vector<bool> used(kInputDim, false);
      for (std::size_t k : coords) used[k] = true;
      std::erase_if(outside_web, [&](std::size_t k) { return used[k]; });
    }
    ++ood_index;
  }

  // The out-of-distribution guarantee must hold on the actual placement,
  // measured against the typical udp_like spacing.
  const double required = spec.ood_distance_factor * udp_spacing;
  for (std::size_t i = 0; i < spec.clients.size(); ++i) {
    if (spec.clients[i].family != ProfileFamily::kTcpLikeOod) continue;
    for (std::size_t j = 0; j < spec.clients.size(); ++j) {
      if (i == j) continue;
      if (distance(layout.attack_means[i], layout.attack_means[j]) < required) {
        throw std::runtime_error(
            "generate_federation: ood profile '" + spec.clients[i].name +
            "' is closer than " + std::to_string(required) + " to '" +
            spec.clients[j].name + "'");
      }
    }
  }
  return layout;
}

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

ClientDataset generate_client(const FederationSpec& spec, const Layout& layout,
                              std::size_t index) {
  const AttackProfile& profile = spec.clients[index];
  Rng rng(mix_seed({spec.seed, 0x636c69656e74ULL, index}));

  const std::size_t attack_n = profile.total_samples / 2;
  const std::size_t benign_n = profile.total_samples - attack_n;

  LabeledSet all;
  all.features = Matrix(profile.total_samples, kInputDim);
  all.labels.resize(profile.total_samples);

  for (std::size_t s = 0; s < benign_n; ++s) {
    const auto& mean = layout.benign_means[rng.below(layout.benign_means.size())];
    auto row = all.features.row(s);
    for (std::size_t k = 0; k < kInputDim; ++k) {
      row[k] = clip01(rng.normal(mean[k], spec.benign_stddev));
    }
    all.labels[s] = 0;
  }
  const auto& attack_mean = layout.attack_means[index];
  for (std::size_t s = benign_n; s < profile.total_samples; ++s) {
    auto row = all.features.row(s);
    for (std::size_t k = 0; k < kInputDim; ++k) {
      row[k] = clip01(rng.normal(attack_mean[k], profile.feature_stddev));
    }
    all.labels[s] = 1;
  }

  ClientDataset client;
  client.client_id = static_cast<int>(index);
  client.attack_name = profile.name;
  split_dataset(all, mix_seed({spec.seed, 0x73706c6974ULL, index}), client.train,
                client.val, client.test);
  client.class_proportions = class_proportions(client.train);
  return client;
}

}  // namespace

FederationSpec paper13_spec(std::uint64_t seed, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("paper13_spec: scale must be positive");
  // Names and relative volumes follow the one-attack-per-client layout; the
  // two TCP profiles are the out-of-distribution ones and WebDDoS is tiny.
  struct Row {
    const char* name;
    ProfileFamily family;
    std::size_t samples;
    double stddev;
  };
  static const Row rows[] = {
      {"webddos", ProfileFamily::kTcpLikeOod, 300, 0.02},
      {"ldap", ProfileFamily::kUdpLike, 16000, 0.02},
      {"portmap", ProfileFamily::kUdpLike, 12000, 0.02},
      {"dns", ProfileFamily::kUdpLike, 20000, 0.02},
      {"udplag", ProfileFamily::kUdpLike, 9000, 0.02},
      {"ntp", ProfileFamily::kUdpLike, 22000, 0.02},
      {"snmp", ProfileFamily::kUdpLike, 26000, 0.02},
      {"ssdp", ProfileFamily::kUdpLike, 30000, 0.02},
      {"syn", ProfileFamily::kTcpLikeOod, 12000, 0.02},
      {"tftp", ProfileFamily::kUdpLike, 36000, 0.02},
      {"udp", ProfileFamily::kUdpLike, 18000, 0.02},
      {"netbios", ProfileFamily::kUdpLike, 46000, 0.02},
      {"mssql", ProfileFamily::kUdpLike, 64000, 0.02},
  };
  FederationSpec spec;
  spec.seed = seed;
  for (const Row& row : rows) {
    AttackProfile p;
    p.name = row.name;
    p.family = row.family;
    p.total_samples = std::max(
        kMinClientSamples,
        static_cast<std::size_t>(std::llround(static_cast<double>(row.samples) * scale)));
    p.feature_stddev = row.stddev;
    spec.clients.push_back(std::move(p));
  }
  return spec;
}

Federation generate_federation(const FederationSpec& spec) {
  if (spec.clients.size() < 2) {
    throw std::invalid_argument("generate_federation: need at least 2 clients");
  }
  for (const auto& profile : spec.clients) {
    if (profile.total_samples < 20) {
      throw std::invalid_argument("generate_federation: client '" + profile.name +
                                  "' has too few samples to split");
    }
  }
  const Layout layout = place_means(spec);
  Federation federation;
  federation.reserve(spec.clients.size());
  for (std::size_t i = 0; i < spec.clients.size(); ++i) {
    federation.push_back(generate_client(spec, layout, i));
  }
  return federation;
}

namespace {

std::string family_name(ProfileFamily family) {
  return family == ProfileFamily::kUdpLike ? "udp_like" : "tcp_like_ood";
}

ProfileFamily family_from(const std::string& name) {
  if (name == "udp_like") return ProfileFamily::kUdpLike;
  if (name == "tcp_like_ood") return ProfileFamily::kTcpLikeOod;
  throw std::invalid_argument("unknown profile family: " + name);
}

}  // namespace

std::string spec_to_json(const FederationSpec& spec) {
  nlohmann::json j;
  j["version"] = 1;
  j["seed"] = spec.seed;
  j["benign_stddev"] = spec.benign_stddev;
  j["min_profile_distance"] = spec.min_profile_distance;
  j["ood_distance_factor"] = spec.ood_distance_factor;
  j["clients"] = nlohmann::json::array();
  for (const auto& p : spec.clients) {
    j["clients"].push_back({{"name", p.name},
                            {"family", family_name(p.family)},
                            {"total_samples", p.total_samples},
                            {"feature_stddev", p.feature_stddev}});
  }
  return j.dump(2);
}

FederationSpec spec_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FederationSpec spec;
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.benign_stddev = j.value("benign_stddev", spec.benign_stddev);
  spec.min_profile_distance = j.value("min_profile_distance", spec.min_profile_distance);
  spec.ood_distance_factor = j.value("ood_distance_factor", spec.ood_distance_factor);
  for (const auto& c : j.at("clients")) {
    AttackProfile p;
    p.name = c.at("name").get<std::string>();
    p.family = family_from(c.at("family").get<std::string>());
    p.total_samples = c.at("total_samples").get<std::size_t>();
    p.feature_stddev = c.value("feature_stddev", p.feature_stddev);
    spec.clients.push_back(std::move(p));
  }
  return spec;
}

}  // namespace fedsim
