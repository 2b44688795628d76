#include "atagan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "atagan/errors.hpp"
#include "atagan/ops.hpp"

namespace atagan {

Tensor bce(const Tensor& pred, double target) {
  if (target != 0.0 && target != 1.0) {
    throw std::invalid_argument("bce: target must be 0 or 1");
  }
  for (double p : pred.data()) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("bce: prediction " + std::to_string(p) + " outside [0,1]");
    }
  }
  Tensor p = clamp(pred, kBceClamp, 1.0 - kBceClamp);
  if (target == 1.0) return scale(mean(log(p)), -1.0);
  return scale(mean(log(add_scalar(scale(p, -1.0), 1.0))), -1.0);
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size() || logits.dim(0) == 0) {
    throw ShapeError("cross_entropy: logits " + shape_str(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= c) {
      throw std::invalid_argument("cross_entropy: label " + std::to_string(l) +
                                  " out of range");
    }
  }
  auto x = logits.data();
  std::vector<double> probs(n * c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - lse);
    total += lse - row[labels[i]];
  }
  std::vector<int> label_copy(labels.begin(), labels.end());
  return record_op({1}, {total / static_cast<double>(n)}, "cross_entropy", {logits},
                   [logits, n, c, probs = std::move(probs), label_copy = std::move(label_copy)](
                       const detail::TensorImpl&, std::span<const double> g) {
                     auto gx = grad_accumulator(logits);
                     const double s = g[0] / static_cast<double>(n);
                     for (std::size_t i = 0; i < n; ++i) {
                       for (std::size_t j = 0; j < c; ++j) {
                         const double onehot = static_cast<int>(j) == label_copy[i] ? 1.0 : 0.0;
                         gx[i * c + j] += s * (probs[i * c + j] - onehot);
                       }
                     }
                   });
}

Tensor scam_loss(const ScamMap& teacher, const ScamMap& disc) {
  if (!teacher.normalized || !disc.normalized) {
    throw std::invalid_argument("scam_loss: both maps must be normalized");
  }
  if (teacher.values.shape() != disc.values.shape()) {
    throw ShapeError("scam_loss: resolution mismatch " + shape_str(teacher.values.shape()) +
                     " vs " + shape_str(disc.values.shape()));
  }
  Tensor diff = sub(teacher.values.detach(), disc.values);
  return scale(mean(mul(diff, diff)), 0.5);
}

std::string_view to_string(GeneratorLoss form) {
  return form == GeneratorLoss::non_saturating ? "non_saturating" : "saturating";
}

GeneratorLoss parse_generator_loss(std::string_view s) {
  if (s == "non_saturating") return GeneratorLoss::non_saturating;
  if (s == "saturating") return GeneratorLoss::saturating;
  throw ConfigError("g_loss must be 'non_saturating' or 'saturating', got '" + std::string(s) +
                    "'");
}

Tensor generator_objective(const Tensor& d_fake_pred, GeneratorLoss form) {
  if (form == GeneratorLoss::non_saturating) return bce(d_fake_pred, 1.0);
  return scale(bce(d_fake_pred, 0.0), -1.0);
}

DiscriminatorLoss discriminator_objective(const Tensor& real_pred, const Tensor& fake_pred,
                                          const Tensor& scam_real, const Tensor& scam_fake,
                                          double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("discriminator_objective: lambda must be >= 0");
  DiscriminatorLoss out;
  out.adv_real = bce(real_pred, 1.0);
  out.adv_fake = bce(fake_pred, 0.0);
  Tensor adversarial = add(out.adv_real, out.adv_fake);
  if (scam_real.defined() != scam_fake.defined()) {
    throw std::invalid_argument("discriminator_objective: need both real and fake attention losses");
  }
  if (!scam_real.defined()) {
    out.total = adversarial;
    return out;
  }
  out.scam_real = scam_real;
  out.scam_fake = scam_fake;
  out.scam_total = add(scam_real, scam_fake);
  out.total = add(adversarial, scale(out.scam_total, lambda));
  return out;
}

}  // namespace atagan
