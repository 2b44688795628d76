#pragma once

#include <span>
#include <string_view>

#include "atagan/scam.hpp"
#include "atagan/tensor.hpp"

namespace atagan {

inline constexpr double kBceClamp = 1e-7;

/// -mean(t ln p + (1 - t) ln(1 - p)) with p clamped to [1e-7, 1 - 1e-7].
/// `target` must be 0 or 1; predictions outside [0,1] (or NaN) throw
/// std::invalid_argument.
Tensor bce(const Tensor& pred, double target);

/// Mean softmax cross-entropy of logits [N,C] against integer labels.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Attention-transfer MSE: 1/2 * mean over samples and pixels of (T - D)^2.
/// Both maps must be normalized and share a resolution. The teacher map is
/// detached, so no gradient reaches it.
Tensor scam_loss(const ScamMap& teacher, const ScamMap& disc);

enum class GeneratorLoss { non_saturating, saturating };

std::string_view to_string(GeneratorLoss form);
GeneratorLoss parse_generator_loss(std::string_view s);

/// Non-saturating: -mean ln D(G(z)). Saturating: mean ln(1 - D(G(z))), the
/// literal minmax form. No attention term in either.
Tensor generator_objective(const Tensor& d_fake_pred,
                           GeneratorLoss form = GeneratorLoss::non_saturating);

struct DiscriminatorLoss {
  Tensor adv_real;    // bce(D(x), 1)
  Tensor adv_fake;    // bce(D(G(z)), 0)
  Tensor scam_real;   // undefined when no attention term is used
  Tensor scam_fake;
  Tensor scam_total;  // scam_real + scam_fake
  Tensor total;       // adv_real + adv_fake [+ lambda * scam_total]
};

/// Discriminator objective. When `scam_real`/`scam_fake` are undefined the
/// result is the plain adversarial loss; otherwise lambda * (real + fake)
/// attention losses are added.
DiscriminatorLoss discriminator_objective(const Tensor& real_pred, const Tensor& fake_pred,
                                          const Tensor& scam_real, const Tensor& scam_fake,
                                          double lambda);

}  // namespace atagan
