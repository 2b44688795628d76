#include "atagan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "atagan/ops.hpp"
#include "atagan/pnm.hpp"

namespace atagan {

namespace {

constexpr std::size_t kEvalChunk = 50;

void require_same(const char* who, std::size_t a, std::size_t b) {
  if (a != b || a == 0) {
    throw ShapeError(std::string(who) + ": map has " + std::to_string(a) +
                     " pixels, mask has " + std::to_string(b));
  }
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt(double v, const char* spec = "%.17g") {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double mask_fraction(std::span<const double> mask) {
  double s = 0.0;
  for (double m : mask) s += m;
  return s / static_cast<double>(mask.size());
}

Tensor slice_images(const Dataset& data, std::size_t begin, std::size_t end, bool masks) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  Batch b = gather(data, idx);
  return masks ? b.masks : b.images;
}

struct Scorer {
  std::string model;
  std::function<ScamMap(const Tensor&)> attend;
};

}  // namespace

double attention_mass_ratio(std::span<const double> scam, std::span<const double> mask) {
  require_same("attention_mass_ratio", scam.size(), mask.size());
  double total = 0.0, inside = 0.0;
  for (std::size_t i = 0; i < scam.size(); ++i) {
    if (scam[i] < 0.0) throw std::invalid_argument("attention_mass_ratio: negative attention");
    total += scam[i];
    inside += scam[i] * mask[i];
  }
  if (total == 0.0) return mask_fraction(mask);
  return inside / total;
}

bool pointing_game(std::span<const double> scam, std::span<const double> mask) {
  require_same("pointing_game", scam.size(), mask.size());
  const auto best = std::max_element(scam.begin(), scam.end()) - scam.begin();
  return mask[static_cast<std::size_t>(best)] > 0.5;
}

std::vector<double> attention_mass_ratios(const ScamMap& map, const Tensor& masks) {
  if (map.values.shape() != masks.shape()) {
    throw ShapeError("attention_mass_ratios: map " + shape_str(map.values.shape()) +
                     " vs masks " + shape_str(masks.shape()));
  }
  const std::size_t n = map.batch(), px = map.height() * map.width();
  auto v = map.values.data();
  auto m = masks.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = attention_mass_ratio(v.subspan(i * px, px), m.subspan(i * px, px));
  }
  return out;
}

std::vector<bool> pointing_hits(const ScamMap& map, const Tensor& masks) {
  if (map.values.shape() != masks.shape()) {
    throw ShapeError("pointing_hits: map " + shape_str(map.values.shape()) + " vs masks " +
                     shape_str(masks.shape()));
  }
  const std::size_t n = map.batch(), px = map.height() * map.width();
  auto v = map.values.data();
  auto m = masks.data();
  std::vector<bool> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = pointing_game(v.subspan(i * px, px), m.subspan(i * px, px));
  }
  return out;
}

ScamMap teacher_attention(const TeacherParams& teacher, const Tensor& images) {
  const TeacherParams frozen = detached(teacher);
  TeacherOutput out = teacher_forward(frozen, images.detach());
  return align_and_normalize(soft_cam(out.feature_maps, frozen.head_w, out.logits),
                             images.dim(2), images.dim(3));
}

ScamMap discriminator_attention(const DiscriminatorParams& disc, const Tensor& images,
                                ScamGate gate) {
  const DiscriminatorParams frozen = detached(disc);
  DiscriminatorOutput out = discriminator_forward(frozen, images.detach());
  return align_and_normalize(discriminator_scam(out.feature_maps, frozen.head_w, gate, out.logit),
                             images.dim(2), images.dim(3));
}

Tensor teacher_proxy_masks(const TeacherParams& teacher, const Tensor& images) {
  Tensor m = teacher_attention(teacher, images).values.detach();
  for (double& v : m.data()) v = v >= kProxyMaskThreshold ? 1.0 : 0.0;
  return m;
}

std::vector<LocalizationReport> evaluate_run(const EvalInputs& in, const Dataset& data,
                                             std::size_t n) {
  if (n == 0) throw std::invalid_argument("evaluate_run: n must be positive");
  if (n > data.size()) {
    throw std::invalid_argument("evaluate_run: n = " + std::to_string(n) + " exceeds the " +
                                std::to_string(data.size()) + " available samples");
  }
  std::vector<Scorer> scorers;
  scorers.push_back({"teacher", [&](const Tensor& x) { return teacher_attention(in.teacher, x); }});
  if (in.d_baseline) {
    scorers.push_back({"D-baseline", [&](const Tensor& x) {
                         return discriminator_attention(*in.d_baseline, x, in.gate);
                       }});
  }
  if (in.d_ata) {
    scorers.push_back(
        {"D-ata", [&](const Tensor& x) { return discriminator_attention(*in.d_ata, x, in.gate); }});
  }

  std::vector<LocalizationReport> reports;
  for (const Scorer& s : scorers) {
    LocalizationReport r;
    r.model = s.model;
    r.images = "real";
    r.mask_kind = "ground-truth";
    double frac_sum = 0.0;
    for (std::size_t b = 0; b < n; b += kEvalChunk) {
      const std::size_t e = std::min(n, b + kEvalChunk);
      const Tensor images = slice_images(data, b, e, false);
      const Tensor masks = slice_images(data, b, e, true);
      const ScamMap map = s.attend(images);
      for (double v : attention_mass_ratios(map, masks)) r.ratios.push_back(v);
      for (bool h : pointing_hits(map, masks)) r.hits.push_back(h);
      auto md = masks.data();
      const std::size_t px = md.size() / (e - b);
      for (std::size_t i = 0; i < e - b; ++i) frac_sum += mask_fraction(md.subspan(i * px, px));
    }
    r.n_samples = n;
    r.mean_ratio = mean_of(r.ratios);
    r.hit_rate = static_cast<double>(std::count(r.hits.begin(), r.hits.end(), true)) /
                 static_cast<double>(n);
    r.mean_mask_fraction = frac_sum / static_cast<double>(n);
    r.config_hash = in.config_hash;
    reports.push_back(std::move(r));
  }

  if (in.generator) {
    const GeneratorParams g = detached(*in.generator);
    Rng rng(in.latent_seed);
    for (std::size_t si = 0; si < scorers.size(); ++si) {
      LocalizationReport r;
      r.model = scorers[si].model;
      r.images = "generated";
      r.mask_kind = "teacher-proxy";
      reports.push_back(std::move(r));
    }
    std::vector<double> frac(n);
    for (std::size_t b = 0; b < n; b += kEvalChunk) {
      const std::size_t e = std::min(n, b + kEvalChunk);
      Tensor z = Tensor::zeros({e - b, kLatentDim});
      for (double& v : z.data()) v = rng.normal();
      const Tensor images = generator_forward(g, z);
      const Tensor masks = teacher_proxy_masks(in.teacher, images);
      auto md = masks.data();
      const std::size_t px = md.size() / (e - b);
      for (std::size_t i = 0; i < e - b; ++i) frac[b + i] = mask_fraction(md.subspan(i * px, px));
      for (std::size_t si = 0; si < scorers.size(); ++si) {
        auto& r = reports[reports.size() - scorers.size() + si];
        for (bool h : pointing_hits(scorers[si].attend(images), masks)) r.hits.push_back(h);
      }
    }
    for (std::size_t si = 0; si < scorers.size(); ++si) {
      auto& r = reports[reports.size() - scorers.size() + si];
      r.n_samples = n;
      r.mean_ratio = std::numeric_limits<double>::quiet_NaN();
      r.hit_rate = static_cast<double>(std::count(r.hits.begin(), r.hits.end(), true)) /
                   static_cast<double>(n);
      r.mean_mask_fraction = mean_of(frac);
      r.config_hash = in.config_hash;
    }
  }
  return reports;
}

std::string format_report_table(const std::vector<LocalizationReport>& reports) {
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-11s %-10s %-13s %6s %10s %9s %10s\n", "model", "images",
                "mask", "n", "mass_ratio", "hit_rate", "mask_frac");
  out += line;
  for (const auto& r : reports) {
    const std::string ratio = std::isnan(r.mean_ratio) ? "-" : fmt(r.mean_ratio, "%.4f");
    std::snprintf(line, sizeof line, "%-11s %-10s %-13s %6zu %10s %9.4f %10.4f\n",
                  r.model.c_str(), r.images.c_str(), r.mask_kind.c_str(), r.n_samples,
                  ratio.c_str(), r.hit_rate, r.mean_mask_fraction);
    out += line;
  }
  if (!reports.empty()) out += "config_hash " + reports.front().config_hash + "\n";
  bool proxy = false;
  for (const auto& r : reports) proxy = proxy || r.mask_kind == "teacher-proxy";
  if (proxy) {
    out += "generated images have no ground truth: hits are scored against the teacher's "
           "attention thresholded at 0.5 (proxy mask)\n";
  }
  return out;
}

void write_report(const std::filesystem::path& dir,
                  const std::vector<LocalizationReport>& reports) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream txt(dir / "localization.txt");
    txt << format_report_table(reports);
    if (!txt) throw std::runtime_error("cannot write localization.txt in " + dir.string());
  }
  {
    std::ofstream csv(dir / "localization.csv");
    csv << "model,images,mask_kind,n,mean_mass_ratio,hit_rate,mean_mask_fraction,config_hash\n";
    for (const auto& r : reports) {
      csv << r.model << ',' << r.images << ',' << r.mask_kind << ',' << r.n_samples << ','
          << fmt(r.mean_ratio) << ',' << fmt(r.hit_rate) << ',' << fmt(r.mean_mask_fraction)
          << ',' << r.config_hash << '\n';
    }
    if (!csv) throw std::runtime_error("cannot write localization.csv in " + dir.string());
  }
  std::ofstream per(dir / "localization_samples.csv");
  per << "model,images,index,mass_ratio,hit\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.hits.size(); ++i) {
      per << r.model << ',' << r.images << ',' << i << ','
          << (i < r.ratios.size() ? fmt(r.ratios[i]) : "") << ',' << (r.hits[i] ? 1 : 0) << '\n';
    }
  }
  if (!per) throw std::runtime_error("cannot write localization_samples.csv in " + dir.string());
}

void export_grid(const Tensor& images, std::size_t cols, const std::filesystem::path& path) {
  write_pgm(path, tile(images, cols));
}

void export_overlay(const Tensor& image, const Tensor& attention,
                    const std::filesystem::path& path) {
  write_ppm(path, overlay(image, attention));
}

std::uint64_t fnv1a_file(const std::filesystem::path& path, std::uint64_t h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

}  // namespace atagan
