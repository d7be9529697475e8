#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace fedsim {

enum class Direction { kDown, kUp };  // down: server -> client

enum class PayloadKind {
  kGlobalModel,
  kLocalModel,
  kControlVariate,
  kScalarReport,  // accuracies, losses, sample counts; 8 bytes per scalar
  kDirective,     // per-client epoch/step assignment; 16 bytes
};

inline constexpr std::size_t kPayloadKinds = 5;
inline constexpr std::uint64_t kScalarReportBytes = 8;
inline constexpr std::uint64_t kDirectiveBytes = 16;

const char* payload_kind_name(PayloadKind kind);

// Byte counters for every client/direction/payload combination, mirrored on
// the server side so conservation is checkable. Counters only grow.
class TransportLedger {
 public:
  TransportLedger() = default;
  explicit TransportLedger(std::size_t num_clients);

  void account(int client_id, Direction direction, PayloadKind kind,
               std::uint64_t num_bytes);

  std::uint64_t client_bytes(int client_id, Direction direction, PayloadKind kind) const;
  std::uint64_t client_total(int client_id) const;
  std::uint64_t server_bytes(Direction direction, PayloadKind kind) const;
  std::uint64_t total() const;

  std::size_t num_clients() const { return per_client_.size(); }

  bool operator==(const TransportLedger&) const = default;

 private:
  using KindCounters = std::array<std::uint64_t, kPayloadKinds>;
  using DirCounters = std::array<KindCounters, 2>;

  std::vector<DirCounters> per_client_;
  DirCounters server_{};
};

}  // namespace fedsim
