// Copyright 2026 The lutcomp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lutcomp/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lutcomp/error.hpp"

namespace lutcomp {
namespace {

constexpr char kMagic[8] = {'L', 'U', 'T', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
  }
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  void matrix(const Mat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) put(m.data()[i]);
  }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& buf, std::size_t end) : buf_(buf), end_(end) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void matrix(Mat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get<double>();
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) fail(ErrorCode::kFormat, "checkpoint is truncated");
  }
  const std::string& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const NetConfig& cfg = ckpt.params.config;
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.input_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.lstm_units));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.sigmoid_units));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.output_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.mask.size()));
  w.bytes(reinterpret_cast<const char*>(cfg.mask.data()), cfg.mask.size());
  w.put<std::uint32_t>(kNumTensors);
  for (int i = 0; i < kNumTensors; ++i) {
    const std::string name = tensor_name(static_cast<TensorId>(i));
    const Mat& m = ckpt.params.p.t[i];
    w.put<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
    w.matrix(m);
  }
  const OptState& o = ckpt.opt;
  w.put<std::uint8_t>(o.kind == OptimizerKind::kAdam ? 0 : 1);
  w.put<std::uint64_t>(o.step);
  w.put(o.lr);
  w.put(o.beta1);
  w.put(o.beta2);
  w.put(o.eps);
  const bool moments = o.kind == OptimizerKind::kAdam;
  w.put<std::uint8_t>(moments ? 1 : 0);
  if (moments) {
    for (const auto& m : o.m.t) w.matrix(m);
    for (const auto& v : o.v.t) w.matrix(v);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.meta.size()));
  w.bytes(ckpt.meta.data(), ckpt.meta.size());
  w.put<std::uint32_t>(crc_of(w.str().data(), w.str().size()));
  return std::move(w.str());
}

namespace {

constexpr int kMaxUnits = 4096;

Checkpoint parse_body(const std::string& bytes, std::size_t body) {
  Reader r(bytes, body);
  r.bytes(sizeof(kMagic) + 4);
  Checkpoint ckpt;
  NetConfig& cfg = ckpt.params.config;
  cfg.input_dim = static_cast<int>(r.get<std::uint32_t>());
  cfg.lstm_units = static_cast<int>(r.get<std::uint32_t>());
  cfg.sigmoid_units = static_cast<int>(r.get<std::uint32_t>());
  cfg.output_dim = static_cast<int>(r.get<std::uint32_t>());
  if (cfg.lstm_units > kMaxUnits || cfg.sigmoid_units > kMaxUnits) {
    fail(ErrorCode::kFormat, "implausible network dimensions in checkpoint");
  }
  const auto mask_len = r.get<std::uint32_t>();
  const std::string mask = r.bytes(mask_len);
  cfg.mask.assign(mask.begin(), mask.end());
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("checkpoint header: ") + e.what());
  }
  ckpt.params.p = ParamSet::zeros_like(cfg);
  if (r.get<std::uint32_t>() != kNumTensors) {
    fail(ErrorCode::kFormat, "unexpected tensor count");
  }
  for (int i = 0; i < kNumTensors; ++i) {
    const auto name_len = r.get<std::uint16_t>();
    const std::string name = r.bytes(name_len);
    Mat& m = ckpt.params.p.t[i];
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (name != tensor_name(static_cast<TensorId>(i)) || rows != m.rows() ||
        cols != m.cols()) {
      fail(ErrorCode::kFormat, "tensor '" + name + "' out of order or misshapen");
    }
    r.matrix(m);
  }
  OptState& o = ckpt.opt;
  const auto kind = r.get<std::uint8_t>();
  if (kind > 1) fail(ErrorCode::kFormat, "unknown optimizer kind");
  o.kind = kind == 0 ? OptimizerKind::kAdam : OptimizerKind::kSgd;
  o.step = r.get<std::uint64_t>();
  o.lr = r.get<double>();
  o.beta1 = r.get<double>();
  o.beta2 = r.get<double>();
  o.eps = r.get<double>();
  if (r.get<std::uint8_t>() == 1) {
    o.m = ParamSet::zeros_like(cfg);
    o.v = ParamSet::zeros_like(cfg);
    for (auto& m : o.m.t) r.matrix(m);
    for (auto& v : o.v.t) r.matrix(v);
  }
  const auto meta_len = r.get<std::uint32_t>();
  ckpt.meta = r.bytes(meta_len);
  if (r.pos() != body) fail(ErrorCode::kFormat, "trailing bytes in checkpoint");
  return ckpt;
}

}  // namespace

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorCode::kFormat, "not a lutcomp checkpoint (bad magic)");
  }
  Reader header(bytes, bytes.size());
  header.bytes(sizeof(kMagic));
  const auto version = header.get<std::uint32_t>();
  if (version != kCheckpointFormatVersion) {
    fail(ErrorCode::kVersion, "unsupported checkpoint format_version " +
                                  std::to_string(version));
  }
  const std::size_t body = bytes.size() - 4;
  Reader tail(bytes, bytes.size());
  tail.bytes(body);
  if (tail.get<std::uint32_t>() == crc_of(bytes.data(), body)) {
    return parse_body(bytes, body);
  }
  // A short file usually also fails the checksum; report the truncation when
  // the structure itself runs out of bytes.
  try {
    parse_body(bytes, body);
  } catch (const Error& e) {
    if (std::string_view(e.what()).find("truncated") != std::string_view::npos) throw;
  }
  fail(ErrorCode::kChecksum, "checkpoint checksum mismatch");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace lutcomp
