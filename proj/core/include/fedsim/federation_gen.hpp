#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"

namespace fedsim {

// Attack placement families. udp_like profiles cluster in a shared central
// region with a pairwise distance floor; tcp_like_ood profiles are placed far
// from every other attack profile (the first one shadows a benign mixture
// component, which makes it hard to learn without dedicated training).
enum class ProfileFamily { kUdpLike, kTcpLikeOod };

struct AttackProfile {
  std::string name;
  ProfileFamily family = ProfileFamily::kUdpLike;
  std::size_t total_samples = 0;  // benign + attack, balanced ~50/50
  double feature_stddev = 0.02;
};

struct FederationSpec {
  std::vector<AttackProfile> clients;
  double benign_stddev = 0.03;
  // Pairwise distance floor between udp_like attack means.
  double min_profile_distance = 0.25;
  // tcp_like_ood means sit at least this multiple of the widest udp_like
  // pairwise distance away from every other attack profile.
  double ood_distance_factor = 3.0;
  std::uint64_t seed = 0;
};

// The 13-client pathological layout: one attack per client, shared benign
// mixture, two out-of-distribution profiles, one of them tiny. scale shrinks
// every client (floor 100 samples) for desk-size runs.
FederationSpec paper13_spec(std::uint64_t seed, double scale = 1.0);

// Draws every client's dataset from the spec. Deterministic: each client has
// its own derived seed, so the result does not depend on generation order.
Federation generate_federation(const FederationSpec& spec);

std::string spec_to_json(const FederationSpec& spec);
FederationSpec spec_from_json(const std::string& text);

}  // namespace fedsim
