#include "atagan/models.hpp"

#include <cmath>
#include <string>

#include "atagan/errors.hpp"
#include "atagan/ops.hpp"
#include "atagan/rng.hpp"

namespace atagan {

namespace {

// 3x3 stride 2 on an even input gives an exact half with one pixel of
// padding on a single side. The last layer of a stack pads at the end so
// feature-map cells sit near the align-corners sample points of the upsampled
// attention map (centres 16i+8 for the teacher, 8i+4 for the discriminator).
const ConvGeometry kHalve3x3{2, 1, 0};
const ConvGeometry kHalve3x3Late{2, 0, 1};
const ConvGeometry kDouble4x4{2, 1, 1};  // 4x4 stride 2 transposed -> exact double
constexpr std::size_t kProjChannels = 128;
constexpr std::size_t kProjSide = 4;

std::vector<ParamSpec> make_layout(Arch arch) {
  switch (arch) {
    case Arch::teacher:
      return {{"conv1", {16, 1, 3, 3}, 1 * 9},
              {"conv2", {32, 16, 3, 3}, 16 * 9},
              {"conv3", {64, 32, 3, 3}, 32 * 9},
              {"conv4", {kFeatureChannels, 64, 3, 3}, 64 * 9},
              {"head_w", {kFeatureChannels, kNumClasses}, kFeatureChannels},
              {"head_b", {kNumClasses}, 0}};
    case Arch::generator:
      // Transposed-conv fan-in counts the taps reaching one output pixel:
      // in_channels * k*k / stride^2.
      return {{"proj_w", {kLatentDim, kProjChannels * kProjSide * kProjSide}, kLatentDim},
              {"proj_b", {kProjChannels * kProjSide * kProjSide}, 0},
              {"deconv1", {128, 64, 4, 4}, 128 * 4},
              {"deconv2", {64, 32, 4, 4}, 64 * 4},
              {"deconv3", {32, 16, 4, 4}, 32 * 4},
              {"deconv4", {16, 1, 4, 4}, 16 * 4}};
    case Arch::discriminator:
      return {{"conv1", {16, 1, 3, 3}, 1 * 9},
              {"conv2", {32, 16, 3, 3}, 16 * 9},
              {"conv3", {kFeatureChannels, 32, 3, 3}, 32 * 9},
              {"head_w", {kFeatureChannels, 1}, kFeatureChannels},
              {"head_b", {1}, 0}};
  }
  throw std::logic_error("unknown architecture");
}

template <std::size_t N>
Tensor conv_stack(const std::array<Tensor, N>& convs, Tensor h) {
  for (std::size_t i = 0; i < N; ++i) {
    h = leaky_relu(conv2d(h, convs[i], i + 1 < N ? kHalve3x3 : kHalve3x3Late), kLeakySlope);
  }
  return h;
}

void require_images(const char* who, const Tensor& images) {
  const Shape& s = images.shape();
  if (s.size() != 4 || s[0] == 0 || s[1] != 1 || s[2] != kImageSize || s[3] != kImageSize) {
    throw ShapeError(std::string(who) + ": expected images [N,1," +
                     std::to_string(kImageSize) + "," + std::to_string(kImageSize) +
                     "], got " + shape_str(s));
  }
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add(matmul(x, w), broadcast_rows(b, x.dim(0)));
}

template <std::size_t N>
ParamList conv_named(const char* prefix, const std::array<Tensor, N>& convs) {
  ParamList out;
  for (std::size_t i = 0; i < N; ++i) {
    out.push_back({prefix + std::to_string(i + 1), convs[i]});
  }
  return out;
}

}  // namespace

std::string_view arch_tag(Arch arch) {
  switch (arch) {
    case Arch::teacher: return "teacher";
    case Arch::generator: return "generator";
    case Arch::discriminator: return "discriminator";
  }
  return "unknown";
}

Arch parse_arch(std::string_view tag) {
  for (Arch a : {Arch::teacher, Arch::generator, Arch::discriminator}) {
    if (arch_tag(a) == tag) return a;
  }
  throw FormatError("unknown architecture tag '" + std::string(tag) + "'");
}

const std::vector<ParamSpec>& param_layout(Arch arch) {
  static const std::vector<ParamSpec> teacher = make_layout(Arch::teacher);
  static const std::vector<ParamSpec> generator = make_layout(Arch::generator);
  static const std::vector<ParamSpec> discriminator = make_layout(Arch::discriminator);
  switch (arch) {
    case Arch::teacher: return teacher;
    case Arch::generator: return generator;
    case Arch::discriminator: return discriminator;
  }
  throw std::logic_error("unknown architecture");
}

ParamList init_params(Arch arch, std::uint64_t seed) {
  ParamList out;
  const auto& layout = param_layout(arch);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const ParamSpec& spec = layout[i];
    Tensor t = Tensor::zeros(spec.shape);
    if (spec.fan_in > 0) {
      Rng rng(derive_seed(seed, i));
      const double sd = std::sqrt(2.0 / static_cast<double>(spec.fan_in));
      for (double& v : t.data()) v = sd * rng.normal();
    }
    out.push_back({spec.name, t});
  }
  return out;
}

void check_layout(Arch arch, const ParamList& params) {
  const auto& layout = param_layout(arch);
  const std::string tag(arch_tag(arch));
  if (params.size() != layout.size()) {
    throw FormatError(tag + ": expected " + std::to_string(layout.size()) +
                      " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params[i].name != layout[i].name) {
      throw FormatError(tag + ": parameter " + std::to_string(i) + " is '" + params[i].name +
                        "', expected '" + layout[i].name + "'");
    }
    if (params[i].value.shape() != layout[i].shape) {
      throw FormatError(tag + ": parameter '" + params[i].name + "' has shape " +
                        shape_str(params[i].value.shape()) + ", expected " +
                        shape_str(layout[i].shape));
    }
  }
}

TeacherParams TeacherParams::init(std::uint64_t seed) {
  return from_named(init_params(kArch, seed));
}

TeacherParams TeacherParams::from_named(const ParamList& params) {
  check_layout(kArch, params);
  return {{params[0].value, params[1].value, params[2].value, params[3].value},
          params[4].value,
          params[5].value};
}

ParamList TeacherParams::named() const {
  ParamList out = conv_named("conv", conv);
  out.push_back({"head_w", head_w});
  out.push_back({"head_b", head_b});
  return out;
}

GeneratorParams GeneratorParams::init(std::uint64_t seed) {
  return from_named(init_params(kArch, seed));
}

GeneratorParams GeneratorParams::from_named(const ParamList& params) {
  check_layout(kArch, params);
  return {params[0].value,
          params[1].value,
          {params[2].value, params[3].value, params[4].value, params[5].value}};
}

ParamList GeneratorParams::named() const {
  ParamList out{{"proj_w", proj_w}, {"proj_b", proj_b}};
  for (auto& e : conv_named("deconv", deconv)) out.push_back(std::move(e));
  return out;
}

DiscriminatorParams DiscriminatorParams::init(std::uint64_t seed) {
  return from_named(init_params(kArch, seed));
}

DiscriminatorParams DiscriminatorParams::from_named(const ParamList& params) {
  check_layout(kArch, params);
  return {{params[0].value, params[1].value, params[2].value}, params[3].value,
          params[4].value};
}

ParamList DiscriminatorParams::named() const {
  ParamList out = conv_named("conv", conv);
  out.push_back({"head_w", head_w});
  out.push_back({"head_b", head_b});
  return out;
}

TeacherOutput teacher_forward(const TeacherParams& p, const Tensor& images) {
  require_images("teacher_forward", images);
  Tensor h = conv_stack(p.conv, images);
  Tensor logits = linear(global_avg_pool(h), p.head_w, p.head_b);
  return {logits, h};
}

Tensor generator_forward(const GeneratorParams& p, const Tensor& z) {
  if (z.rank() != 2 || z.dim(1) != kLatentDim || z.dim(0) == 0) {
    throw ShapeError("generator_forward: expected latent [N," + std::to_string(kLatentDim) +
                     "], got " + shape_str(z.shape()));
  }
  const std::size_t n = z.dim(0);
  Tensor h = reshape(linear(z, p.proj_w, p.proj_b),
                     {n, kProjChannels, kProjSide, kProjSide});
  h = leaky_relu(h, kLeakySlope);
  for (std::size_t i = 0; i < p.deconv.size(); ++i) {
    h = conv2d_transpose(h, p.deconv[i], kDouble4x4);
    h = (i + 1 < p.deconv.size()) ? leaky_relu(h, kLeakySlope) : sigmoid(h);
  }
  return h;
}

DiscriminatorOutput discriminator_forward(const DiscriminatorParams& p, const Tensor& images) {
  require_images("discriminator_forward", images);
  Tensor h = conv_stack(p.conv, images);
  Tensor logit = linear(global_avg_pool(h), p.head_w, p.head_b);
  return {sigmoid(logit), logit, h};
}

}  // namespace atagan
