#include "atagan/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>
#include <vector>

#include "atagan/errors.hpp"

namespace atagan {

namespace {

constexpr std::string_view kMagic = "ATAGAN1";
constexpr std::string_view kAdamMagic = "ADAM1";
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 8;

class Writer {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> data, std::string origin)
      : data_(std::move(data)), origin_(std::move(origin)) {}

  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  bool peek(std::string_view s) const {
    return remaining() >= s.size() && std::memcmp(data_.data() + pos_, s.data(), s.size()) == 0;
  }
  void expect(std::string_view s, const char* what) {
    if (!peek(s)) fail(std::string("missing ") + what);
    pos_ += s.size();
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str(const char* what) {
    const std::uint32_t n = u32();
    if (n > kMaxNameLength) fail(std::string(what) + " length " + std::to_string(n) + " too large");
    need(n);
    std::string s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void f64s(std::span<double> out) {
    need(out.size() * 8);
    for (double& v : out) v = f64();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(origin_ + ": " + msg + " (offset " + std::to_string(pos_) + ")");
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail("truncated checkpoint");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::vector<char> data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic);
  w.str(ckpt.arch);
  w.u32(static_cast<std::uint32_t>(ckpt.params.size()));
  for (const auto& [name, t] : ckpt.params) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.u64(d);
    for (double v : t.data()) w.f64(v);
  }
  if (ckpt.adam) {
    const AdamState& a = *ckpt.adam;
    if (a.m.size() != ckpt.params.size() || a.v.size() != ckpt.params.size()) {
      throw FormatError("write_checkpoint: optimizer state does not match parameter count");
    }
    w.bytes(kAdamMagic);
    w.u64(a.step);
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
      if (a.m[i].size() != ckpt.params[i].value.numel() ||
          a.v[i].size() != ckpt.params[i].value.numel()) {
        throw FormatError("write_checkpoint: moment buffer size mismatch for '" +
                          ckpt.params[i].name + "'");
      }
      for (double v : a.m[i]) w.f64(v);
      for (double v : a.v[i]) w.f64(v);
    }
  }

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path.string());

  Checkpoint c;
  r.expect(kMagic, "ATAGAN1 magic");
  c.arch = r.str("architecture tag");
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str("parameter name");
    const std::uint32_t rank = r.u32();
    if (rank > kMaxRank) r.fail("parameter '" + name + "' has rank " + std::to_string(rank));
    Shape shape;
    std::uint64_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(r.u64());
      numel *= shape.back();
      if (numel > r.remaining() / 8) r.fail("truncated checkpoint");
    }
    Tensor t(std::move(shape));
    r.f64s(t.data());
    c.params.push_back({std::move(name), t});
  }
  if (r.peek(kAdamMagic)) {
    r.expect(kAdamMagic, "ADAM1 magic");
    AdamState a;
    a.step = r.u64();
    for (const auto& p : c.params) {
      a.m.emplace_back(p.value.numel());
      a.v.emplace_back(p.value.numel());
      r.f64s(a.m.back());
      r.f64s(a.v.back());
    }
    c.adam = std::move(a);
  }
  if (!r.at_end()) r.fail("unexpected trailing bytes");
  return c;
}

}  // namespace atagan
