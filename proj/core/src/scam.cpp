#include "atagan/scam.hpp"

#include <string>

#include "atagan/errors.hpp"
#include "atagan/ops.hpp"

namespace atagan {

namespace {

void require_fm(const char* who, const Tensor& fm, const Tensor& w) {
  if (fm.rank() != 4) {
    throw ShapeError(std::string(who) + ": feature maps must be [N,K,h,w], got " +
                     shape_str(fm.shape()));
  }
  if (w.rank() != 2 || w.dim(0) != fm.dim(1)) {
    throw ShapeError(std::string(who) + ": weight " + shape_str(w.shape()) +
                     " does not match " + std::to_string(fm.dim(1)) + " feature channels");
  }
}

// out[n] = sum_i fm[n,i] * channel_weights[n,i]; channel_weights [N,K].
Tensor weighted_channel_sum(const Tensor& fm, const Tensor& channel_weights) {
  const std::size_t n = fm.dim(0), k = fm.dim(1), h = fm.dim(2), w = fm.dim(3);
  Tensor maps = bmm(reshape(channel_weights, {n, 1, k}), reshape(fm, {n, k, h * w}));
  return reshape(maps, {n, 1, h, w});
}

}  // namespace

std::string_view to_string(ScamGate gate) {
  return gate == ScamGate::one ? "one" : "sigmoid";
}

ScamGate parse_scam_gate(std::string_view s) {
  if (s == "one") return ScamGate::one;
  if (s == "sigmoid") return ScamGate::sigmoid;
  throw ConfigError("disc_scam_gate must be 'one' or 'sigmoid', got '" + std::string(s) + "'");
}

ScamMap soft_cam(const Tensor& fm, const Tensor& w, const Tensor& logits, ScamSource source) {
  require_fm("soft_cam", fm, w);
  if (logits.rank() != 2 || logits.dim(0) != fm.dim(0) || logits.dim(1) != w.dim(1)) {
    throw ShapeError("soft_cam: logits " + shape_str(logits.shape()) + " do not match " +
                     std::to_string(fm.dim(0)) + " samples and " + std::to_string(w.dim(1)) +
                     " classes");
  }
  // sum_j SM_j sum_i fm_i W_ij == sum_i fm_i (SM W^T)_i
  Tensor channel_weights = matmul(softmax(logits), transpose(w));
  return {weighted_channel_sum(fm, channel_weights), source, false};
}

ScamMap hard_cam(const Tensor& fm, const Tensor& w, std::size_t class_index, ScamSource source) {
  require_fm("hard_cam", fm, w);
  if (class_index >= w.dim(1)) {
    throw ShapeError("hard_cam: class " + std::to_string(class_index) + " out of range for " +
                     std::to_string(w.dim(1)) + " classes");
  }
  Tensor one_hot = Tensor::zeros({fm.dim(0), w.dim(1)});
  for (std::size_t n = 0; n < fm.dim(0); ++n) one_hot.data()[n * w.dim(1) + class_index] = 1.0;
  Tensor channel_weights = matmul(one_hot, transpose(w));
  return {weighted_channel_sum(fm, channel_weights), source, false};
}

ScamMap discriminator_scam(const Tensor& fm, const Tensor& w, ScamGate gate,
                           const Tensor& logit) {
  require_fm("discriminator_scam", fm, w);
  if (w.dim(1) != 1) {
    throw ShapeError("discriminator_scam: expected a single-class weight [K,1], got " +
                     shape_str(w.shape()));
  }
  if (gate == ScamGate::one) {
    // softmax over one class is exactly 1 for any logit value.
    return soft_cam(fm, w, Tensor::zeros({fm.dim(0), 1}), ScamSource::discriminator);
  }
  if (!logit.defined() || logit.shape() != Shape{fm.dim(0), 1}) {
    throw ShapeError("discriminator_scam: sigmoid gate needs logits [N,1]");
  }
  Tensor channel_weights = matmul(sigmoid(logit), transpose(w));
  return {weighted_channel_sum(fm, channel_weights), ScamSource::discriminator, false};
}

ScamMap align_and_normalize(const ScamMap& map, std::size_t out_h, std::size_t out_w,
                            double eps) {
  Tensor resized = bilinear_resize(map.values, out_h, out_w);
  return {minmax_normalize(resized, eps), map.source, true};
}

}  // namespace atagan
