#include "cqg/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "cqg/errors.hpp"

namespace cqg {

namespace {

constexpr char kMagic[8] = {'C', 'Q', 'G', 'K', 'I', 'T', '1', '\n'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void raw(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    bytes_.insert(bytes_.end(), c, c + n);
  }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  const std::vector<char>& bytes() const { return bytes_; }

private:
  std::vector<char> bytes_;
};

class Reader {
public:
  Reader(std::vector<char> bytes, const std::string& path)
      : bytes_(std::move(bytes)), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    std::uint64_t n = u64();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void raw(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t size() const { return bytes_.size(); }
  const char* data() const { return bytes_.data(); }

private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ParseError("truncated checkpoint: " + path_);
  }
  std::vector<char> bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  return std::vector<char>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

Reader open_checked(const std::string& path) {
  Reader r(read_file(path), path);
  if (r.size() < sizeof(kMagic) + 8) throw ParseError("truncated checkpoint: " + path);
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("bad magic header in " + path);
  }
  const std::size_t body = r.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 7; i >= 0; --i) {
    stored = (stored << 8) | static_cast<unsigned char>(r.data()[body + i]);
  }
  if (stored != fnv1a64(r.data(), body)) {
    throw ParseError("checkpoint checksum mismatch: " + path);
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  return r;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

void write_checkpoint(const std::string& path, const ParameterStore& store,
                      std::uint64_t config_hash, const std::string& meta_json) {
  Writer w;
  w.raw(kMagic, 8);
  w.u32(kVersion);
  w.u64(store.seed());
  w.u64(config_hash);
  w.str(meta_json);
  w.u64(store.names().size());
  for (const std::string& name : store.names()) {
    const Tensor& t = store.get(name);
    const AdamState& adam = store.adam(name);
    w.str(name);
    w.u64(t.shape().size());
    for (std::size_t d : t.shape()) w.u64(d);
    for (double v : t.data()) w.f64(v);
    for (double v : adam.m) w.f64(v);
    for (double v : adam.v) w.f64(v);
    w.u64(adam.step);
  }
  const std::uint64_t sum = fnv1a64(w.bytes().data(), w.bytes().size());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write checkpoint: " + path);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  char tail[8];
  for (int i = 0; i < 8; ++i) tail[i] = static_cast<char>((sum >> (8 * i)) & 0xff);
  out.write(tail, 8);
  if (!out) throw ParseError("short write: " + path);
}

CheckpointInfo peek_checkpoint(const std::string& path) {
  Reader r = open_checked(path);
  CheckpointInfo info;
  info.rng_seed = r.u64();
  info.config_hash = r.u64();
  info.meta_json = r.str();
  return info;
}

std::vector<std::string> apply_checkpoint(const std::string& path, ParameterStore& store,
                                          bool strict) {
  Reader r = open_checked(path);
  (void)r.u64();  // seed
  (void)r.u64();  // config hash
  (void)r.str();  // meta
  const std::uint64_t count = r.u64();
  std::vector<std::string> applied;
  for (std::uint64_t p = 0; p < count; ++p) {
    const std::string name = r.str();
    const std::uint64_t rank = r.u64();
    Shape shape(rank);
    std::size_t n = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      shape[i] = r.u64();
      n *= shape[i];
    }
    std::vector<double> values(n);
    AdamState adam;
    adam.m.resize(n);
    adam.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = r.f64();
    for (std::size_t i = 0; i < n; ++i) adam.m[i] = r.f64();
    for (std::size_t i = 0; i < n; ++i) adam.v[i] = r.f64();
    adam.step = r.u64();

    if (!store.has(name)) {
      if (strict) throw ConfigError("checkpoint parameter not in store: " + name);
      continue;
    }
    if (store.get(name).shape() != shape) {
      throw ShapeError("checkpoint shape mismatch for " + name + ": file " +
                       shape_str(shape) + " vs store " +
                       shape_str(store.get(name).shape()));
    }
    store.set_values(name, std::move(values));
    store.set_adam(name, std::move(adam));
    applied.push_back(name);
  }
  if (strict && applied.size() != store.names().size()) {
    throw ConfigError("checkpoint does not cover every store parameter");
  }
  return applied;
}

}  // namespace cqg
