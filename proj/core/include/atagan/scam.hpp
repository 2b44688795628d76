#pragma once

#include <cstddef>
#include <string_view>

#include "atagan/tensor.hpp"

namespace atagan {

/// Resolution at which teacher and discriminator maps are compared.
inline constexpr std::size_t kScamResolution = 16;
inline constexpr double kScamNormEps = 1e-8;

enum class ScamSource { teacher, discriminator };

/// How the discriminator's single class is weighted. `one` is the softmax of
/// a single logit (identically 1); `sigmoid` uses the decision probability.
enum class ScamGate { one, sigmoid };

std::string_view to_string(ScamGate gate);
/// Throws ConfigError for anything but "one" / "sigmoid".
ScamGate parse_scam_gate(std::string_view s);

/// Single-channel attention image per sample.
struct ScamMap {
  Tensor values;  // [N,1,h,w]
  ScamSource source = ScamSource::teacher;
  bool normalized = false;

  std::size_t batch() const { return values.dim(0); }
  std::size_t height() const { return values.dim(2); }
  std::size_t width() const { return values.dim(3); }
};

/// Soft-CAM: SC[n] = sum_j softmax(logits[n])_j * sum_i fm[n,i] * W[i,j].
/// fm [N,K,h,w], W [K,C], logits [N,C]. Differentiable in all three inputs;
/// the result is not normalized.
ScamMap soft_cam(const Tensor& fm, const Tensor& w, const Tensor& logits,
                 ScamSource source = ScamSource::teacher);

/// Regular CAM of one class: sum_i fm[n,i] * W[i,class_index].
ScamMap hard_cam(const Tensor& fm, const Tensor& w, std::size_t class_index,
                 ScamSource source = ScamSource::teacher);

/// Soft-CAM of the discriminator's single class, W = w [K,1]. With the `one`
/// gate this is Soft-CAM over one logit; with `sigmoid` each sample's CAM is
/// scaled by sigmoid(logit[n]) and `logit` [N,1] is required.
ScamMap discriminator_scam(const Tensor& fm, const Tensor& w, ScamGate gate = ScamGate::one,
                           const Tensor& logit = {});

/// Align-corners resize to (out_h, out_w), then per-sample min-max
/// normalization (v - min) / (max - min + eps). Differentiable.
ScamMap align_and_normalize(const ScamMap& map, std::size_t out_h = kScamResolution,
                            std::size_t out_w = kScamResolution, double eps = kScamNormEps);

}  // namespace atagan
