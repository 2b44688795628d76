#include "atagan/pnm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "atagan/errors.hpp"

namespace atagan {

namespace {

void write_pnm(const std::filesystem::path& path, const char* magic, std::size_t w,
               std::size_t h, const std::vector<std::uint8_t>& pixels, std::size_t channels) {
  if (pixels.size() != w * h * channels) {
    throw std::invalid_argument("write " + path.string() + ": pixel buffer size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << magic << '\n' << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

class HeaderReader {
 public:
  HeaderReader(const std::string& bytes, const std::filesystem::path& path)
      : b_(bytes), path_(path) {}

  std::size_t number(const char* what) {
    skip_space_and_comments();
    std::size_t v = 0;
    std::size_t digits = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(b_[pos_] - '0');
      if (v > (std::size_t{1} << 31)) fail(std::string(what) + " too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) fail(std::string("missing ") + what);
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_]))) {
      fail("missing whitespace before raster");
    }
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError(path_.string() + ": " + why);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const char c = b_[pos_];
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& b_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 2;
};

struct RawPnm {
  std::size_t width;
  std::size_t height;
  std::vector<std::uint8_t> pixels;
};

RawPnm read_pnm(const std::filesystem::path& path, char kind, std::size_t channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != kind) {
    throw FormatError(path.string() + ": expected P" + std::string(1, kind) + " magic");
  }
  HeaderReader hr(bytes, path);
  const std::size_t w = hr.number("width");
  const std::size_t h = hr.number("height");
  const std::size_t maxval = hr.number("maxval");
  if (w == 0 || h == 0) hr.fail("zero image size");
  if (maxval != 255) hr.fail("unsupported maxval " + std::to_string(maxval));
  const std::size_t start = hr.raster_start();
  const std::size_t need = w * h * channels;
  if (bytes.size() - start != need) {
    hr.fail("raster has " + std::to_string(bytes.size() - start) + " bytes, expected " +
            std::to_string(need));
  }
  return {w, h, std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                          bytes.end())};
}

std::pair<std::size_t, std::size_t> image_hw(const Tensor& image, const char* who) {
  const Shape& s = image.shape();
  if (s.size() == 2) return {s[0], s[1]};
  if (s.size() == 3 && s[0] == 1) return {s[1], s[2]};
  throw ShapeError(std::string(who) + ": expected [H,W] or [1,H,W], got " + shape_str(s));
}

}  // namespace

std::uint8_t quantize(double v) {
  if (std::isnan(v)) throw std::invalid_argument("quantize: NaN pixel");
  const double c = std::clamp(v, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::nearbyint(c));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  write_pnm(path, "P5", img.width, img.height, img.pixels, 1);
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  write_pnm(path, "P6", img.width, img.height, img.pixels, 3);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  RawPnm r = read_pnm(path, '5', 1);
  return {r.width, r.height, std::move(r.pixels)};
}

RgbImage read_ppm(const std::filesystem::path& path) {
  RawPnm r = read_pnm(path, '6', 3);
  return {r.width, r.height, std::move(r.pixels)};
}

GrayImage to_gray(const Tensor& image) {
  const auto [h, w] = image_hw(image, "to_gray");
  GrayImage out{w, h, std::vector<std::uint8_t>(w * h)};
  auto d = image.data();
  for (std::size_t i = 0; i < d.size(); ++i) out.pixels[i] = quantize(d[i]);
  return out;
}

Tensor from_gray(const GrayImage& img) {
  Tensor t = Tensor::zeros({1, img.height, img.width});
  auto d = t.data();
  for (std::size_t i = 0; i < img.pixels.size(); ++i) d[i] = img.pixels[i] / 255.0;
  return t;
}

void write_pgm(const std::filesystem::path& path, const Tensor& image) {
  write_pgm(path, to_gray(image));
}

Tensor read_pgm_tensor(const std::filesystem::path& path) { return from_gray(read_pgm(path)); }

RgbImage overlay(const Tensor& image, const Tensor& attention, double alpha) {
  const auto [h, w] = image_hw(image, "overlay");
  const auto [ah, aw] = image_hw(attention, "overlay");
  if (ah != h || aw != w) {
    throw ShapeError("overlay: attention " + shape_str(attention.shape()) + " vs image " +
                     shape_str(image.shape()));
  }
  RgbImage out{w, h, std::vector<std::uint8_t>(w * h * 3)};
  auto g = image.data();
  auto a = attention.data();
  for (std::size_t i = 0; i < w * h; ++i) {
    const double gi = std::clamp(g[i], 0.0, 1.0);
    const double ai = std::clamp(a[i], 0.0, 1.0);
    const double keep = (1.0 - alpha * ai) * gi;
    out.pixels[3 * i] = quantize(keep + alpha * ai);
    out.pixels[3 * i + 1] = quantize(keep);
    out.pixels[3 * i + 2] = quantize(keep);
  }
  return out;
}

GrayImage tile(const Tensor& images, std::size_t cols, std::size_t pad,
               std::uint8_t pad_value) {
  const Shape& s = images.shape();
  if (s.size() != 4 || s[1] != 1 || s[0] == 0) {
    throw ShapeError("tile: expected [N,1,H,W], got " + shape_str(s));
  }
  if (cols == 0) throw std::invalid_argument("tile: cols must be positive");
  const std::size_t n = s[0], h = s[2], w = s[3];
  cols = std::min(cols, n);
  const std::size_t rows = (n + cols - 1) / cols;
  GrayImage out;
  out.width = cols * w + (cols + 1) * pad;
  out.height = rows * h + (rows + 1) * pad;
  out.pixels.assign(out.width * out.height, pad_value);
  auto d = images.data();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t oy = pad + (k / cols) * (h + pad);
    const std::size_t ox = pad + (k % cols) * (w + pad);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out.pixels[(oy + y) * out.width + ox + x] = quantize(d[(k * h + y) * w + x]);
      }
    }
  }
  return out;
}

}  // namespace atagan
