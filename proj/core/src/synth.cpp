#include "atagan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "atagan/errors.hpp"
#include "atagan/models.hpp"
#include "atagan/pnm.hpp"

namespace atagan {

namespace {

constexpr std::size_t kSide = kImageSize;
constexpr std::size_t kPixels = kSide * kSide;
constexpr double kCentreLo = 16.0;
constexpr double kCentreHi = 48.0;
constexpr double kSemiAxisLo = 8.0;
constexpr double kSemiAxisHi = 20.0;

struct Ellipse {
  double cx, cy, a, b, theta;

  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double c = std::cos(theta), s = std::sin(theta);
    const double u = (dx * c + dy * s) / a;
    const double v = (-dx * s + dy * c) / b;
    return u * u + v * v <= 1.0;
  }
};

std::vector<std::uint8_t> rasterize(const Ellipse& e) {
  std::vector<std::uint8_t> m(kPixels);
  for (std::size_t y = 0; y < kSide; ++y) {
    for (std::size_t x = 0; x < kSide; ++x) {
      m[y * kSide + x] = e.contains(static_cast<double>(x), static_cast<double>(y)) ? 1 : 0;
    }
  }
  return m;
}

// Paints a disc of radius r around (px,py), restricted to the mask, keeping
// the brighter of the existing and new value.
void paint_disc(std::vector<double>& img, const std::vector<std::uint8_t>& mask, double px,
                double py, double r, double value) {
  const long x0 = std::max(0L, static_cast<long>(std::floor(px - r)));
  const long x1 = std::min(static_cast<long>(kSide) - 1, static_cast<long>(std::ceil(px + r)));
  const long y0 = std::max(0L, static_cast<long>(std::floor(py - r)));
  const long y1 = std::min(static_cast<long>(kSide) - 1, static_cast<long>(std::ceil(py + r)));
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * kSide + static_cast<std::size_t>(x);
      const double dx = static_cast<double>(x) - px, dy = static_cast<double>(y) - py;
      if (mask[i] && dx * dx + dy * dy <= r * r) img[i] = std::max(img[i], value);
    }
  }
}

// Point inside the ellipse at most `reach` of the way out from the centre.
std::pair<double, double> interior_point(const Ellipse& e, double reach, Rng& rng) {
  const double rho = reach * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double u = e.a * rho * std::cos(phi), v = e.b * rho * std::sin(phi);
  const double c = std::cos(e.theta), s = std::sin(e.theta);
  return {e.cx + u * c - v * s, e.cy + u * s + v * c};
}

void render_texture(CellClass cls, const Ellipse& e, const std::vector<std::uint8_t>& mask,
                    std::size_t area, std::vector<double>& img, Rng& rng) {
  auto fill = [&](double v) {
    for (std::size_t i = 0; i < kPixels; ++i) {
      if (mask[i]) img[i] = v;
    }
  };
  switch (cls) {
    case CellClass::homogeneous:
      fill(rng.uniform(0.55, 0.85));
      break;
    case CellClass::speckled: {
      fill(rng.uniform(0.20, 0.35));
      const std::size_t dots = area / 8;
      for (std::size_t k = 0; k < dots; ++k) {
        const auto [px, py] = interior_point(e, 1.0, rng);
        paint_disc(img, mask, px, py, 1.0, rng.uniform(0.65, 0.85));
      }
      break;
    }
    case CellClass::nucleolar: {
      fill(rng.uniform(0.15, 0.30));
      const std::size_t blobs = 2 + rng.below(4);
      for (std::size_t k = 0; k < blobs; ++k) {
        const auto [px, py] = interior_point(e, 0.6, rng);
        const double r = rng.uniform(2.5, 4.0);
        const double peak = rng.uniform(0.85, 1.0);
        paint_disc(img, mask, px, py, r, peak * 0.8);
        paint_disc(img, mask, px, py, 0.6 * r, peak);
      }
      break;
    }
    case CellClass::centromere: {
      fill(rng.uniform(0.05, 0.15));
      const std::size_t dots = 20 + rng.below(21);
      for (std::size_t k = 0; k < dots; ++k) {
        const auto [px, py] = interior_point(e, 0.9, rng);
        paint_disc(img, mask, px, py, 0.5, rng.uniform(0.9, 1.0));
      }
      break;
    }
  }
}

std::uint64_t split_seed(const DatasetSpec& spec, bool validation) {
  return derive_seed(spec.seed, validation ? 1 : 0);
}

Dataset generate_indices(const DatasetSpec& spec, std::uint64_t seed, std::size_t n,
                         unsigned workers) {
  Dataset out;
  out.samples.resize(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(derive_seed(seed, i));
      out.samples[i] =
          generate_sample(spec, static_cast<CellClass>(i % kCellClassCount), rng);
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    work(0, n);
    return out;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = std::min(n, w * chunk), e = std::min(n, b + chunk);
    threads.emplace_back(work, b, e);
  }
  for (auto& t : threads) t.join();
  return out;
}

std::string sample_stem(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return buf;
}

void write_split(const std::filesystem::path& dir, const char* name, const Dataset& d) {
  const auto sub = dir / name;
  std::filesystem::create_directories(sub);
  std::ofstream manifest(dir / (std::string(name) + ".manifest"));
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir.string());
  manifest << "# index label mask_area\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& s = d.samples[i];
    write_pgm(sub / (sample_stem(i) + "_image.pgm"), s.image);
    write_pgm(sub / (sample_stem(i) + "_mask.pgm"), s.mask);
    manifest << i << ' ' << s.label << ' ' << s.mask_area() << '\n';
  }
  if (!manifest) throw std::runtime_error("manifest write failed in " + dir.string());
}

}  // namespace

std::string_view to_string(CellClass c) {
  switch (c) {
    case CellClass::homogeneous: return "homogeneous";
    case CellClass::speckled: return "speckled";
    case CellClass::nucleolar: return "nucleolar";
    case CellClass::centromere: return "centromere";
  }
  return "unknown";
}

std::size_t SyntheticSample::mask_area() const {
  std::size_t n = 0;
  for (double v : mask.data()) n += v > 0.5 ? 1 : 0;
  return n;
}

SyntheticSample generate_sample(const DatasetSpec& spec, CellClass label, Rng& rng) {
  if (spec.noise_level < 0.0) throw std::invalid_argument("noise_level must be >= 0");
  Ellipse e{};
  std::vector<std::uint8_t> mask;
  std::size_t area = 0;
  for (;;) {
    e = {rng.uniform(kCentreLo, kCentreHi), rng.uniform(kCentreLo, kCentreHi),
         rng.uniform(kSemiAxisLo, kSemiAxisHi), rng.uniform(kSemiAxisLo, kSemiAxisHi),
         rng.uniform(0.0, std::numbers::pi)};
    mask = rasterize(e);
    area = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    const double frac = static_cast<double>(area) / static_cast<double>(kPixels);
    if (frac >= kMinMaskFraction && frac <= kMaxMaskFraction) break;
  }
  std::vector<double> img(kPixels, 0.0);
  render_texture(label, e, mask, area, img, rng);
  if (spec.noise_level > 0.0) {
    for (double& v : img) v = std::clamp(v + spec.noise_level * rng.normal(), 0.0, 1.0);
  }
  SyntheticSample s;
  s.image = Tensor({1, kSide, kSide}, std::move(img));
  s.mask = Tensor({1, kSide, kSide}, std::vector<double>(mask.begin(), mask.end()));
  s.label = static_cast<int>(label);
  return s;
}

Dataset generate_split(const DatasetSpec& spec, bool validation, unsigned workers) {
  return generate_indices(spec, split_seed(spec, validation),
                          validation ? spec.n_val : spec.n_train, workers);
}

SplitDataset generate_dataset(const DatasetSpec& spec, unsigned workers) {
  return {generate_split(spec, false, workers), generate_split(spec, true, workers)};
}

Batch gather(const Dataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("gather: empty batch");
  Batch b;
  const std::size_t n = indices.size();
  b.images = Tensor::zeros({n, 1, kSide, kSide});
  b.masks = Tensor::zeros({n, 1, kSide, kSide});
  auto im = b.images.data();
  auto mk = b.masks.data();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = indices[k];
    if (i >= data.size()) throw std::out_of_range("gather: index out of range");
    const auto& s = data.samples[i];
    std::copy_n(s.image.data().begin(), kPixels, im.begin() + static_cast<std::ptrdiff_t>(k * kPixels));
    std::copy_n(s.mask.data().begin(), kPixels, mk.begin() + static_cast<std::ptrdiff_t>(k * kPixels));
    b.labels.push_back(s.label);
  }
  b.indices.assign(indices.begin(), indices.end());
  return b;
}

BatchStream::BatchStream(const Dataset& data, std::size_t batch_size, std::uint64_t shuffle_seed)
    : data_(&data), batch_size_(batch_size), seed_(shuffle_seed) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (data.size() == 0) throw std::invalid_argument("cannot batch an empty dataset");
}

std::size_t BatchStream::batches_per_epoch() const {
  return (data_->size() + batch_size_ - 1) / batch_size_;
}

std::vector<std::vector<std::size_t>> BatchStream::epoch_indices(std::uint64_t epoch) const {
  const std::size_t n = data_->size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed_, epoch));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t b = 0; b < n; b += batch_size_) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, b + batch_size_)));
  }
  return out;
}

Batch BatchStream::next() {
  if (current_epoch_ != pos_.epoch) {
    current_ = epoch_indices(pos_.epoch);
    current_epoch_ = pos_.epoch;
  }
  Batch b = gather(*data_, current_[pos_.batch]);
  if (++pos_.batch == current_.size()) {
    pos_.batch = 0;
    ++pos_.epoch;
  }
  return b;
}

void BatchStream::seek(Position p) {
  if (p.batch >= batches_per_epoch()) throw std::out_of_range("BatchStream::seek: bad batch");
  pos_ = p;
}

void write_dataset(const std::filesystem::path& dir, const SplitDataset& data) {
  write_split(dir, "train", data.train);
  write_split(dir, "val", data.val);
}

Dataset read_split(const std::filesystem::path& dir, bool validation) {
  const char* name = validation ? "val" : "train";
  const auto manifest_path = dir / (std::string(name) + ".manifest");
  std::ifstream manifest(manifest_path);
  if (!manifest) throw std::runtime_error("cannot open " + manifest_path.string());
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::size_t index = 0, area = 0;
    int label = -1;
    std::string extra;
    if (!(ls >> index >> label >> area) || (ls >> extra) || index != d.size() || label < 0 ||
        label >= kCellClassCount) {
      throw FormatError(manifest_path.string() + ":" + std::to_string(line_no) +
                        ": malformed manifest line");
    }
    SyntheticSample s;
    s.image = read_pgm_tensor(dir / name / (sample_stem(index) + "_image.pgm"));
    s.mask = read_pgm_tensor(dir / name / (sample_stem(index) + "_mask.pgm"));
    if (s.image.shape() != Shape{1, kSide, kSide} || s.mask.shape() != s.image.shape()) {
      throw FormatError(dir.string() + ": sample " + std::to_string(index) + " is not 64x64");
    }
    s.label = label;
    if (s.mask_area() != area) {
      throw FormatError(dir.string() + ": sample " + std::to_string(index) +
                        " mask area disagrees with manifest");
    }
    d.samples.push_back(std::move(s));
  }
  if (d.size() == 0) throw FormatError(manifest_path.string() + ": no samples");
  return d;
}

SplitDataset read_dataset(const std::filesystem::path& dir) {
  return {read_split(dir, false), read_split(dir, true)};
}

}  // namespace atagan
