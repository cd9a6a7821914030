#include "svrnn/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "svrnn/error.hpp"

namespace svrnn {

namespace {

constexpr char kMagic[8] = {'S', 'V', 'R', 'N', 'N', 'C', 'K', 'P'};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) { little(v); }
  void u64(std::uint64_t v) { little(v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string& bytes() { return out_; }

 private:
  template <typename T>
  void little(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  std::uint32_t u32() { return little<std::uint32_t>(); }
  std::uint64_t u64() { return little<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  void raw(char* p, std::size_t n) {
    need(n);
    std::memcpy(p, s_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= s_.size(), ErrorCode::kFormat, "checkpoint is truncated");
  }
  template <typename T>
  T little() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
  }
  const std::uint64_t sum = fnv1a(w.bytes().data(), w.bytes().size());
  w.u64(sum);
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  require(bytes.size() >= sizeof(kMagic) + 12, ErrorCode::kFormat, "checkpoint is truncated");
  require(std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0, ErrorCode::kFormat, "not a checkpoint file");
  Reader trailer(bytes);
  {
    const std::size_t body = bytes.size() - 8;
    std::uint64_t stored = 0;
    for (std::size_t i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[body + i])) << (8 * i);
    require(stored == fnv1a(bytes.data(), body), ErrorCode::kFormat, "checkpoint checksum mismatch");
  }
  Reader r(bytes);
  char magic[8];
  r.raw(magic, 8);
  const std::uint32_t version = r.u32();
  require(version == kCheckpointVersion, ErrorCode::kFormat,
          "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    ckpt.meta[std::move(k)] = r.str();
  }
  const std::uint32_t n_tensors = r.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.str();
    const std::uint32_t rows = r.u32(), cols = r.u32();
    nn::Matrix m(rows, cols);
    for (std::uint32_t a = 0; a < rows; ++a)
      for (std::uint32_t b = 0; b < cols; ++b) m(a, b) = r.f64();
    ckpt.tensors[std::move(name)] = std::move(m);
  }
  require(r.pos() + 8 == bytes.size(), ErrorCode::kFormat, "trailing bytes in checkpoint");
  return ckpt;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::kIo, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), ErrorCode::kIo, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::kIo, "cannot move checkpoint into place at " + path + ": " + ec.message());
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace svrnn
