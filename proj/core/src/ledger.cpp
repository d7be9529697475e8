#include "fedsim/ledger.hpp"

#include <stdexcept>

namespace fedsim {

const char* payload_kind_name(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::kGlobalModel: return "global_model";
    case PayloadKind::kLocalModel: return "local_model";
    case PayloadKind::kControlVariate: return "control_variate";
    case PayloadKind::kScalarReport: return "scalar_report";
    case PayloadKind::kDirective: return "directive";
  }
  return "unknown";
}

TransportLedger::TransportLedger(std::size_t num_clients) : per_client_(num_clients) {}

void TransportLedger::account(int client_id, Direction direction, PayloadKind kind,
                              std::uint64_t num_bytes) {
  if (client_id < 0 || static_cast<std::size_t>(client_id) >= per_client_.size()) {
    throw std::invalid_argument("ledger: unknown client id " + std::to_string(client_id));
  }
  const std::size_t d = direction == Direction::kDown ? 0 : 1;
  const std::size_t k = static_cast<std::size_t>(kind);
  per_client_[static_cast<std::size_t>(client_id)][d][k] += num_bytes;
  server_[d][k] += num_bytes;
}

std::uint64_t TransportLedger::client_bytes(int client_id, Direction direction,
                                            PayloadKind kind) const {
  const std::size_t d = direction == Direction::kDown ? 0 : 1;
  return per_client_.at(static_cast<std::size_t>(client_id))[d][static_cast<std::size_t>(kind)];
}

std::uint64_t TransportLedger::client_total(int client_id) const {
  std::uint64_t sum = 0;
  for (const auto& kinds : per_client_.at(static_cast<std::size_t>(client_id))) {
    for (std::uint64_t v : kinds) sum += v;
  }
  return sum;
}

std::uint64_t TransportLedger::server_bytes(Direction direction, PayloadKind kind) const {
  const std::size_t d = direction == Direction::kDown ? 0 : 1;
  return server_[d][static_cast<std::size_t>(kind)];
}

std::uint64_t TransportLedger::total() const {
  std::uint64_t sum = 0;
  for (const auto& kinds : server_) {
    for (std::uint64_t v : kinds) sum += v;
  }
  return sum;
}

}  // namespace fedsim
