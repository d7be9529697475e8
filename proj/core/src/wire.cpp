#include "fedsim/wire.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fedsim {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'I', 'M'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

}  // namespace

std::size_t serialized_size(std::size_t param_count) {
  return kWireHeaderBytes + 4 * param_count;
}

std::vector<std::uint8_t> serialize_model(const FlatParams& params) {
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(params.size()));
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kWireVersion);
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (double v : params.values) {
    const float f = static_cast<float>(v);
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    put_u32(out, bits);
  }
  return out;
}

FlatParams deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kWireHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("deserialize_model: bad magic");
  }
  const std::uint16_t version =
      static_cast<std::uint16_t>(bytes[4] | (std::uint16_t{bytes[5]} << 8));
  if (version != kWireVersion) {
    throw std::runtime_error("deserialize_model: unsupported version " +
                             std::to_string(version));
  }
  std::uint32_t count = 0;
  for (int i = 0; i < 4; ++i) count |= std::uint32_t{bytes[6 + i]} << (8 * i);
  if (bytes.size() != serialized_size(count)) {
    throw std::runtime_error("deserialize_model: parameter count mismatch");
  }
  FlatParams params(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint32_t bits = 0;
    const std::size_t base = kWireHeaderBytes + 4 * static_cast<std::size_t>(k);
    for (int i = 0; i < 4; ++i) bits |= std::uint32_t{bytes[base + i]} << (8 * i);
    params[k] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return params;
}

std::uint64_t params_hash(const FlatParams& params) {
  const std::vector<std::uint8_t> bytes = serialize_model(params);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string params_hash_hex(const FlatParams& params) {
  return hash_hex(params_hash(params));
}

void write_params_file(const std::string& path, const FlatParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const auto bytes = serialize_model(params);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

FlatParams read_params_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace fedsim
