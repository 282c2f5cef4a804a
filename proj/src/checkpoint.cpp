// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

namespace lsrgan {

namespace {

template <typename U>
void put_le(std::vector<unsigned char>& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<unsigned char>(value >> (8 * i)));
  }
}

template <typename F>
void put_float_le(std::vector<unsigned char>& out, F value) {
  using Bits = std::conditional_t<sizeof(F) == 4, std::uint32_t, std::uint64_t>;
  put_le(out, std::bit_cast<Bits>(value));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}
  bool done() const { return pos_ == bytes_.size(); }

  template <typename U>
  U take() {
    need(sizeof(U));
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return value;
  }

  std::string take_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("checkpoint: truncated record");
  }
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

template <typename V>
std::vector<V> read_payload(Reader& in, std::size_t count) {
  std::vector<V> values(count);
  for (auto& v : values) {
    if constexpr (std::is_same_v<V, float>) {
      v = std::bit_cast<float>(in.take<std::uint32_t>());
    } else if constexpr (std::is_same_v<V, double>) {
      v = std::bit_cast<double>(in.take<std::uint64_t>());
    } else {
      v = in.take<std::uint64_t>();
    }
  }
  return values;
}

}  // namespace

void Checkpoint::insert(Record record) {
  if (contains(record.name)) throw Error("checkpoint: duplicate record " + record.name);
  records_.push_back(std::move(record));
}

template <typename T>
void Checkpoint::put(std::string name, const Tensor<T>& tensor) {
  insert(Record{std::move(name), tensor.shape(),
                std::vector<T>(tensor.data().begin(), tensor.data().end())});
}

void Checkpoint::put_u64(std::string name, std::uint64_t value) {
  insert(Record{std::move(name), {1}, std::vector<std::uint64_t>{value}});
}

void Checkpoint::put_f64(std::string name, double value) {
  insert(Record{std::move(name), {1}, std::vector<double>{value}});
}

bool Checkpoint::contains(std::string_view name) const {
  for (const auto& r : records_) {
    if (r.name == name) return true;
  }
  return false;
}

const Checkpoint::Record& Checkpoint::record(std::string_view name) const {
  for (const auto& r : records_) {
    if (r.name == name) return r;
  }
  throw IoError("checkpoint: missing record " + std::string(name));
}

template <typename T>
Tensor<T> Checkpoint::get(std::string_view name) const {
  const auto& r = record(name);
  std::vector<T> values;
  std::visit(
      [&values, &name](const auto& payload) {
        using V = typename std::decay_t<decltype(payload)>::value_type;
        if constexpr (std::is_same_v<V, std::uint64_t>) {
          throw IoError("checkpoint: record " + std::string(name) + " is not floating point");
        } else {
          values.assign(payload.begin(), payload.end());
        }
      },
      r.payload);
  return Tensor<T>::from(r.dims, std::move(values));
}

std::uint64_t Checkpoint::get_u64(std::string_view name) const {
  const auto& r = record(name);
  const auto* v = std::get_if<std::vector<std::uint64_t>>(&r.payload);
  if (!v || v->size() != 1) throw IoError("checkpoint: record " + r.name + " is not a u64 scalar");
  return v->front();
}

double Checkpoint::get_f64(std::string_view name) const {
  const auto& r = record(name);
  const auto* v = std::get_if<std::vector<double>>(&r.payload);
  if (!v || v->size() != 1) throw IoError("checkpoint: record " + r.name + " is not a f64 scalar");
  return v->front();
}

std::vector<unsigned char> Checkpoint::serialize() const {
  std::vector<unsigned char> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_le(out, kCheckpointVersion);
  for (const auto& r : records_) {
    put_le(out, static_cast<std::uint32_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    out.push_back(static_cast<unsigned char>(r.dtype()));
    put_le(out, static_cast<std::uint32_t>(r.dims.size()));
    for (auto d : r.dims) put_le(out, static_cast<std::uint64_t>(d));
    std::visit(
        [&out](const auto& payload) {
          for (auto v : payload) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_floating_point_v<V>) {
              put_float_le(out, v);
            } else {
              put_le(out, v);
            }
          }
        },
        r.payload);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw IoError("checkpoint: bad magic (expected LSRC)");
  }
  Reader in(bytes);
  in.take_string(4);
  const auto version = in.take<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  }
  Checkpoint ckpt;
  while (!in.done()) {
    Record r;
    r.name = in.take_string(in.take<std::uint32_t>());
    const auto tag = in.take<std::uint8_t>();
    const auto rank = in.take<std::uint32_t>();
    for (std::uint32_t i = 0; i < rank; ++i) r.dims.push_back(in.take<std::uint64_t>());
    const std::size_t count = shape_numel(r.dims);
    switch (static_cast<DType>(tag)) {
      case DType::kFloat32: r.payload = read_payload<float>(in, count); break;
      case DType::kFloat64: r.payload = read_payload<double>(in, count); break;
      case DType::kUInt64: r.payload = read_payload<std::uint64_t>(in, count); break;
      default: throw IoError("checkpoint: unknown dtype tag " + std::to_string(tag));
    }
    ckpt.insert(std::move(r));
  }
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

template <typename T>
void store_params(Checkpoint& ckpt, std::string_view prefix, const NetworkParams<T>& params) {
  for (const auto& [name, t] : params) ckpt.put(std::string(prefix) + "/" + name, t);
}

template <typename T>
void restore_params(const Checkpoint& ckpt, std::string_view prefix, NetworkParams<T>& params) {
  for (auto& [name, t] : params) {
    params.assign(name, ckpt.get<T>(std::string(prefix) + "/" + name));
  }
}

template <typename T>
void store_networks(Checkpoint& ckpt, const Networks<T>& nets) {
  const auto& c = nets.generator.config;
  ckpt.put_u64("config/g_blocks", c.g_blocks);
  ckpt.put_u64("config/g_channels", c.g_channels);
  ckpt.put_u64("config/d_channels", c.d_channels);
  ckpt.put_u64("config/d_hidden", c.d_hidden);
  ckpt.put_u64("config/hr_size", c.hr_size);
  ckpt.put_u64("config/l_channels", c.l_channels);
  for (std::size_t i = 0; i < 3; ++i) {
    ckpt.put_u64("config/probe_channels" + std::to_string(i), c.probe_channels[i]);
  }
  ckpt.put_u64("config/probe_stage", c.probe_stage);
  ckpt.put_u64("config/probe_seed", c.probe_seed);
  store_params(ckpt, "G", nets.generator.params);
  store_params(ckpt, "D", nets.discriminator.params);
  store_params(ckpt, "L", nets.encoder.params);
  store_params(ckpt, "P", nets.probe.params);
}

template <typename T>
Networks<T> restore_networks(const Checkpoint& ckpt) {
  NetConfig c;
  c.g_blocks = ckpt.get_u64("config/g_blocks");
  c.g_channels = ckpt.get_u64("config/g_channels");
  c.d_channels = ckpt.get_u64("config/d_channels");
  c.d_hidden = ckpt.get_u64("config/d_hidden");
  c.hr_size = ckpt.get_u64("config/hr_size");
  c.l_channels = ckpt.get_u64("config/l_channels");
  for (std::size_t i = 0; i < 3; ++i) {
    c.probe_channels[i] = ckpt.get_u64("config/probe_channels" + std::to_string(i));
  }
  c.probe_stage = ckpt.get_u64("config/probe_stage");
  c.probe_seed = ckpt.get_u64("config/probe_seed");
  auto nets = init_networks<T>(c, 0);
  restore_params(ckpt, "G", nets.generator.params);
  restore_params(ckpt, "D", nets.discriminator.params);
  restore_params(ckpt, "L", nets.encoder.params);
  restore_params(ckpt, "P", nets.probe.params);
  return nets;
}

template void Checkpoint::put<float>(std::string, const Tensor<float>&);
template void Checkpoint::put<double>(std::string, const Tensor<double>&);
template Tensor<float> Checkpoint::get<float>(std::string_view) const;
template Tensor<double> Checkpoint::get<double>(std::string_view) const;
template void store_params<float>(Checkpoint&, std::string_view, const NetworkParams<float>&);
template void store_params<double>(Checkpoint&, std::string_view, const NetworkParams<double>&);
template void restore_params<float>(const Checkpoint&, std::string_view, NetworkParams<float>&);
template void restore_params<double>(const Checkpoint&, std::string_view, NetworkParams<double>&);
template void store_networks<float>(Checkpoint&, const Networks<float>&);
template void store_networks<double>(Checkpoint&, const Networks<double>&);
template Networks<float> restore_networks<float>(const Checkpoint&);
template Networks<double> restore_networks<double>(const Checkpoint&);

}  // namespace lsrgan
