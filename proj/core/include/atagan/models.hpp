#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "atagan/tensor.hpp"

namespace atagan {

inline constexpr std::size_t kImageSize = 64;
inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::size_t kLatentDim = 64;
inline constexpr std::size_t kFeatureChannels = 64;  // K, channels feeding the GAP heads
inline constexpr double kLeakySlope = 0.2;

enum class Arch { teacher, generator, discriminator };

std::string_view arch_tag(Arch arch);
/// Throws FormatError for unknown tags.
Arch parse_arch(std::string_view tag);

struct NamedTensor {
  std::string name;
  Tensor value;
};
using ParamList = std::vector<NamedTensor>;

struct ParamSpec {
  std::string name;
  Shape shape;
  std::size_t fan_in;  // 0: zero-initialized
};

/// Parameter names, shapes and init fan-in, in storage order.
const std::vector<ParamSpec>& param_layout(Arch arch);

/// He-style normal init, std sqrt(2 / fan_in); each tensor draws from its own
/// stream derived from (seed, position), biases start at zero.
ParamList init_params(Arch arch, std::uint64_t seed);

/// Validates names and shapes against param_layout; throws FormatError.
void check_layout(Arch arch, const ParamList& params);

/// GAP-headed classifier: four 3x3 stride-2 convs 1->16->32->64->64, then
/// logits = GAP(FM) * W + b. W [K,C] is the Soft-CAM class weight matrix.
struct TeacherParams {
  static constexpr Arch kArch = Arch::teacher;
  std::array<Tensor, 4> conv;
  Tensor head_w;  // [K, C]
  Tensor head_b;  // [C]

  static TeacherParams init(std::uint64_t seed);
  static TeacherParams from_named(const ParamList& params);
  ParamList named() const;
};

/// z [N,Z] -> linear to 128x4x4 -> four 4x4 stride-2 transposed convs
/// 128->64->32->16->1 -> sigmoid, giving [N,1,64,64].
struct GeneratorParams {
  static constexpr Arch kArch = Arch::generator;
  Tensor proj_w;  // [Z, 2048]
  Tensor proj_b;  // [2048]
  std::array<Tensor, 4> deconv;

  static GeneratorParams init(std::uint64_t seed);
  static GeneratorParams from_named(const ParamList& params);
  ParamList named() const;
};

/// Three 3x3 stride-2 convs 1->16->32->64 giving FM [N,64,8,8]. One GAP-linear
/// head (head_w, head_b) serves both the real/fake decision and, as the
/// single-class W, the attention map.
struct DiscriminatorParams {
  static constexpr Arch kArch = Arch::discriminator;
  std::array<Tensor, 3> conv;
  Tensor head_w;  // [K, 1]
  Tensor head_b;  // [1]

  static DiscriminatorParams init(std::uint64_t seed);
  static DiscriminatorParams from_named(const ParamList& params);
  ParamList named() const;
};

struct TeacherOutput {
  Tensor logits;        // [N, C]
  Tensor feature_maps;  // [N, K, 4, 4]
};

struct DiscriminatorOutput {
  Tensor decision;      // [N, 1], sigmoid(logit)
  Tensor logit;         // [N, 1]
  Tensor feature_maps;  // [N, K, 8, 8]
};

TeacherOutput teacher_forward(const TeacherParams& p, const Tensor& images);
Tensor generator_forward(const GeneratorParams& p, const Tensor& z);
DiscriminatorOutput discriminator_forward(const DiscriminatorParams& p, const Tensor& images);

/// Copies of every parameter with no graph and requires_grad off.
template <class P>
P detached(const P& p) {
  ParamList list = p.named();
  for (auto& e : list) e.value = e.value.detach();
  return P::from_named(list);
}

template <class P>
void set_requires_grad(P& p, bool on) {
  for (auto& e : p.named()) e.value.set_requires_grad(on);
}

template <class P>
std::vector<Tensor> tensors_of(const P& p) {
  std::vector<Tensor> out;
  for (auto& e : p.named()) out.push_back(e.value);
  return out;
}

}  // namespace atagan
