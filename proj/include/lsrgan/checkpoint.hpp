// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lsrgan/nets.hpp"
#include "lsrgan/tensor.hpp"

namespace lsrgan {

inline constexpr char kCheckpointMagic[4] = {'L', 'S', 'R', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { kFloat32 = 0, kFloat64 = 1, kUInt64 = 2 };

/// Binary checkpoint: "LSRC", u32 version, then records until end of file.
/// Each record is u32 name length, UTF-8 name, u8 dtype tag, u32 rank,
/// rank x u64 dims, raw payload. All integers and floats little-endian.
class Checkpoint {
 public:
  struct Record {
    std::string name;
    Shape dims;
    std::variant<std::vector<float>, std::vector<double>, std::vector<std::uint64_t>> payload;
    DType dtype() const { return static_cast<DType>(payload.index()); }
  };

  template <typename T>
  void put(std::string name, const Tensor<T>& tensor);
  void put_u64(std::string name, std::uint64_t value);
  void put_f64(std::string name, double value);

  bool contains(std::string_view name) const;
  const Record& record(std::string_view name) const;
  // Values converted to T; float <-> double conversions are allowed.
  template <typename T>
  Tensor<T> get(std::string_view name) const;
  std::uint64_t get_u64(std::string_view name) const;
  double get_f64(std::string_view name) const;

  const std::vector<Record>& records() const { return records_; }

  std::vector<unsigned char> serialize() const;
  static Checkpoint deserialize(const std::vector<unsigned char>& bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  void insert(Record record);
  std::vector<Record> records_;
};

// Parameters are stored as "<prefix>/<name>"; prefixes G, D, L, P.
// Network dimensions are stored under "config/...".
template <typename T>
void store_networks(Checkpoint& ckpt, const Networks<T>& nets);
template <typename T>
Networks<T> restore_networks(const Checkpoint& ckpt);

template <typename T>
void store_params(Checkpoint& ckpt, std::string_view prefix, const NetworkParams<T>& params);
// Copies every "<prefix>/<name>" record into the matching parameter.
template <typename T>
void restore_params(const Checkpoint& ckpt, std::string_view prefix, NetworkParams<T>& params);

}  // namespace lsrgan
