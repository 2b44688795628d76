#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atagan/models.hpp"
#include "atagan/scam.hpp"
#include "atagan/synth.hpp"

namespace atagan {

/// sum(scam * mask) / sum(scam) for one nonnegative map and a binary mask of
/// the same size. A map with zero mass carries no localization information
/// and yields the mask-area fraction.
double attention_mass_ratio(std::span<const double> scam, std::span<const double> mask);

/// True when the map's maximum lies inside the mask; among tied maxima the
/// lowest row-major index wins.
bool pointing_game(std::span<const double> scam, std::span<const double> mask);

/// Per-sample ratios of a normalized map batch [N,1,h,w] against masks of the
/// same resolution.
std::vector<double> attention_mass_ratios(const ScamMap& map, const Tensor& masks);
std::vector<bool> pointing_hits(const ScamMap& map, const Tensor& masks);

/// Normalized attention at image resolution (64x64), without a graph.
ScamMap teacher_attention(const TeacherParams& teacher, const Tensor& images);
ScamMap discriminator_attention(const DiscriminatorParams& disc, const Tensor& images,
                                ScamGate gate = ScamGate::one);

inline constexpr double kProxyMaskThreshold = 0.5;

/// Binary masks where the teacher's normalized attention is >= 0.5.
Tensor teacher_proxy_masks(const TeacherParams& teacher, const Tensor& images);

struct LocalizationReport {
  std::string model;   // teacher, D-baseline, D-ata
  std::string images;  // real or generated
  std::string mask_kind;  // ground-truth or teacher-proxy
  std::size_t n_samples = 0;
  std::vector<double> ratios;  // empty for proxy masks
  std::vector<bool> hits;
  double mean_ratio = 0;       // NaN when ratios is empty
  double hit_rate = 0;
  double mean_mask_fraction = 0;
  std::string config_hash;
};

/// Inputs of evaluate_run. Missing discriminators are skipped; generated
/// images come from `generator` (skipped when absent).
struct EvalInputs {
  TeacherParams teacher;
  std::optional<DiscriminatorParams> d_baseline;
  std::optional<DiscriminatorParams> d_ata;
  std::optional<GeneratorParams> generator;
  ScamGate gate = ScamGate::one;
  std::uint64_t latent_seed = 0;
  std::string config_hash;
};

/// Evaluates the first `n` samples of `data`. On generated images there is
/// no ground truth, so only the pointing game is scored against the
/// teacher's thresholded map (a proxy, marked as such in the report).
/// Throws std::invalid_argument when n exceeds the dataset.
std::vector<LocalizationReport> evaluate_run(const EvalInputs& in, const Dataset& data,
                                             std::size_t n);

std::string format_report_table(const std::vector<LocalizationReport>& reports);
/// Summary CSV plus a per-sample CSV.
void write_report(const std::filesystem::path& dir,
                  const std::vector<LocalizationReport>& reports);

/// Tiles [N,1,H,W] images (or maps) into a PGM grid.
void export_grid(const Tensor& images, std::size_t cols, const std::filesystem::path& path);
/// Red-on-gray overlay of a [1,H,W] image and a same-sized map in [0,1].
void export_overlay(const Tensor& image, const Tensor& attention,
                    const std::filesystem::path& path);

/// FNV-1a 64 of a file's bytes, folded into `h`; starts from the FNV basis.
std::uint64_t fnv1a_file(const std::filesystem::path& path,
                         std::uint64_t h = 0xcbf29ce484222325ull);

}  // namespace atagan
