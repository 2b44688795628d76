#include "atagan/gradient_suite.hpp"

#include <cmath>
#include <span>
#include <vector>

#include "atagan/losses.hpp"
#include "atagan/models.hpp"
#include "atagan/ops.hpp"
#include "atagan/rng.hpp"
#include "atagan/scam.hpp"

namespace atagan {

namespace {

// Elements sampled per parameter tensor in the full-model cases.
constexpr std::size_t kModelElements = 4;

class Inputs {
 public:
  explicit Inputs(std::uint64_t seed) : rng_(seed) {}

  Tensor uniform(Shape shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng_.uniform(lo, hi);
    return t.set_requires_grad(true);
  }

  std::vector<int> labels(std::size_t n, int classes) {
    std::vector<int> out(n);
    for (int& l : out) l = static_cast<int>(rng_.next_u64() % static_cast<std::uint64_t>(classes));
    return out;
  }

  std::uint64_t seed() { return rng_.next_u64(); }

 private:
  Rng rng_;
};

GradCheckOptions options(std::size_t max_elements, std::uint64_t seed) {
  GradCheckOptions o;
  o.eps = kSuiteEps;
  o.tol = kSuiteTol;
  o.max_elements = max_elements;
  o.seed = seed;
  return o;
}

// Reduces a tensor-valued op to a scalar with fixed random weights so every
// output element contributes a distinct sensitivity.
using UnaryOp = std::function<Tensor(const Tensor&)>;
using BinaryOp = std::function<Tensor(const Tensor&, const Tensor&)>;

GradientCase unary(std::string name, Shape shape, UnaryOp op, double lo = -1.0,
                   double hi = 1.0) {
  return {std::move(name), [shape, op, lo, hi](std::uint64_t seed) {
            Inputs in(seed);
            Tensor x = in.uniform(shape, lo, hi);
            const Tensor probe = op(x.detach());
            const Tensor r = in.uniform(probe.shape()).detach();
            const Tensor wrt[] = {x};
            return grad_check([&] { return sum(mul(op(x), r)); }, wrt, options(0, seed));
          }};
}

GradientCase binary(std::string name, Shape a_shape, Shape b_shape, BinaryOp op) {
  return {std::move(name), [a_shape, b_shape, op](std::uint64_t seed) {
            Inputs in(seed);
            Tensor a = in.uniform(a_shape), b = in.uniform(b_shape);
            const Tensor probe = op(a.detach(), b.detach());
            const Tensor r = in.uniform(probe.shape()).detach();
            const Tensor wrt[] = {a, b};
            return grad_check([&] { return sum(mul(op(a, b), r)); }, wrt, options(0, seed));
          }};
}

template <class P>
std::vector<Tensor> leaves(P& params) {
  std::vector<Tensor> out;
  for (auto& p : params.named()) out.push_back(p.value.set_requires_grad(true));
  return out;
}

ScamMap teacher_target(const TeacherParams& t, const Tensor& images) {
  const TeacherOutput o = teacher_forward(t, images);
  return align_and_normalize(soft_cam(o.feature_maps, t.head_w, o.logits));
}

ScamMap disc_map(const DiscriminatorParams& d, const DiscriminatorOutput& o, ScamGate gate) {
  return align_and_normalize(discriminator_scam(o.feature_maps, d.head_w, gate, o.logit));
}

GradientCase discriminator_case(std::string name, ScamGate gate, double lambda) {
  return {std::move(name), [gate, lambda](std::uint64_t seed) {
            Inputs in(seed);
            const TeacherParams teacher = TeacherParams::init(in.seed());
            DiscriminatorParams d = DiscriminatorParams::init(in.seed());
            const Tensor real = in.uniform({2, 1, kImageSize, kImageSize}, 0, 1).detach();
            const Tensor fake = in.uniform({2, 1, kImageSize, kImageSize}, 0, 1).detach();
            const ScamMap t_real = teacher_target(teacher, real);
            const ScamMap t_fake = teacher_target(teacher, fake);
            const auto wrt = leaves(d);
            auto f = [&] {
              const DiscriminatorOutput r = discriminator_forward(d, real);
              const DiscriminatorOutput g = discriminator_forward(d, fake);
              if (lambda == 0.0) {
                return discriminator_objective(r.decision, g.decision, {}, {}, 0.0).total;
              }
              return discriminator_objective(r.decision, g.decision,
                                             scam_loss(t_real, disc_map(d, r, gate)),
                                             scam_loss(t_fake, disc_map(d, g, gate)), lambda)
                  .total;
            };
            return grad_check(f, wrt, options(kModelElements, seed));
          }};
}

GradientCase generator_case(std::string name, GeneratorLoss form) {
  return {std::move(name), [form](std::uint64_t seed) {
            Inputs in(seed);
            GeneratorParams g = GeneratorParams::init(in.seed());
            const DiscriminatorParams d = DiscriminatorParams::init(in.seed());
            const Tensor z = in.uniform({2, kLatentDim}).detach();
            const auto wrt = leaves(g);
            auto f = [&] {
              return generator_objective(discriminator_forward(d, generator_forward(g, z)).decision,
                                         form);
            };
            return grad_check(f, wrt, options(kModelElements, seed));
          }};
}

std::vector<GradientCase> make_cases() {
  std::vector<GradientCase> c;
  c.push_back(binary("add", {3, 4}, {3, 4}, add));
  c.push_back(binary("sub", {3, 4}, {3, 4}, sub));
  c.push_back(binary("mul", {3, 4}, {3, 4}, mul));
  c.push_back(unary("scale", {5}, [](const Tensor& x) { return scale(x, -2.5); }));
  c.push_back(unary("add_scalar", {5}, [](const Tensor& x) { return add_scalar(x, 0.7); }));
  c.push_back(unary("log", {6}, [](const Tensor& x) { return log(x); }, 0.2, 3.0));
  c.push_back(unary("clamp", {8}, [](const Tensor& x) { return clamp(x, -0.5, 0.5); }));
  c.push_back(unary("leaky_relu", {2, 3, 4}, [](const Tensor& x) { return leaky_relu(x, 0.2); }));
  c.push_back(unary("sigmoid", {7}, [](const Tensor& x) { return sigmoid(x); }, -4, 4));
  c.push_back(unary("softmax_1d", {5}, [](const Tensor& x) { return softmax(x); }, -3, 3));
  c.push_back(unary("softmax_2d", {3, 4}, [](const Tensor& x) { return softmax(x); }, -3, 3));
  c.push_back(unary("sum", {3, 4}, [](const Tensor& x) { return sum(x); }));
  c.push_back(unary("mean", {3, 4}, [](const Tensor& x) { return mean(x); }));
  c.push_back(unary("global_avg_pool", {2, 3, 4, 5},
                    [](const Tensor& x) { return global_avg_pool(x); }));
  c.push_back(unary("reshape", {2, 6}, [](const Tensor& x) { return reshape(x, {3, 4}); }));
  c.push_back(unary("broadcast_rows", {4},
                    [](const Tensor& x) { return broadcast_rows(x, 3); }));
  c.push_back(unary("transpose", {3, 5}, [](const Tensor& x) { return transpose(x); }));
  c.push_back(binary("matmul", {3, 4}, {4, 2}, matmul));
  c.push_back(binary("bmm", {2, 3, 4}, {2, 4, 5}, bmm));
  c.push_back(binary("conv2d_s1_p1", {2, 2, 5, 5}, {3, 2, 3, 3},
                     [](const Tensor& x, const Tensor& k) { return conv2d(x, k, {1, 1, 1}); }));
  c.push_back(binary("conv2d_s2_pad_before", {2, 2, 6, 6}, {3, 2, 3, 3},
                     [](const Tensor& x, const Tensor& k) { return conv2d(x, k, {2, 1, 0}); }));
  c.push_back(binary("conv2d_s2_pad_after", {2, 2, 6, 6}, {3, 2, 3, 3},
                     [](const Tensor& x, const Tensor& k) { return conv2d(x, k, {2, 0, 1}); }));
  c.push_back(binary("conv2d_transpose_s2_p1", {2, 3, 3, 3}, {3, 2, 4, 4},
                     [](const Tensor& x, const Tensor& k) {
                       return conv2d_transpose(x, k, {2, 1, 1});
                     }));
  c.push_back(unary("bilinear_up", {2, 1, 4, 3},
                    [](const Tensor& x) { return bilinear_resize(x, 9, 7); }));
  c.push_back(unary("bilinear_down", {1, 2, 9, 8},
                    [](const Tensor& x) { return bilinear_resize(x, 4, 3); }));
  c.push_back(unary("minmax_normalize", {2, 1, 4, 4},
                    [](const Tensor& x) { return minmax_normalize(x, kScamNormEps); }));
  c.push_back({"soft_cam", [](std::uint64_t seed) {
                 Inputs in(seed);
                 Tensor fm = in.uniform({2, 3, 4, 4}), w = in.uniform({3, 4}),
                        logits = in.uniform({2, 4}, -2, 2);
                 const Tensor r = in.uniform({2, 1, 4, 4}).detach();
                 const Tensor wrt[] = {fm, w, logits};
                 return grad_check([&] { return sum(mul(soft_cam(fm, w, logits).values, r)); },
                                   wrt, options(0, seed));
               }});
  c.push_back({"hard_cam", [](std::uint64_t seed) {
                 Inputs in(seed);
                 Tensor fm = in.uniform({2, 3, 4, 4}), w = in.uniform({3, 4});
                 const Tensor r = in.uniform({2, 1, 4, 4}).detach();
                 const Tensor wrt[] = {fm, w};
                 return grad_check([&] { return sum(mul(hard_cam(fm, w, 2).values, r)); }, wrt,
                                   options(0, seed));
               }});
  for (ScamGate gate : {ScamGate::one, ScamGate::sigmoid}) {
    c.push_back({"discriminator_scam_" + std::string(to_string(gate)),
                 [gate](std::uint64_t seed) {
                   Inputs in(seed);
                   Tensor fm = in.uniform({2, 3, 4, 4}), w = in.uniform({3, 1}),
                          logit = in.uniform({2, 1}, -2, 2);
                   const Tensor r = in.uniform({2, 1, 4, 4}).detach();
                   const Tensor wrt[] = {fm, w, logit};
                   return grad_check(
                       [&] { return sum(mul(discriminator_scam(fm, w, gate, logit).values, r)); },
                       wrt, options(0, seed));
                 }});
  }
  c.push_back(unary("align_and_normalize", {2, 1, 4, 4}, [](const Tensor& x) {
    return align_and_normalize(ScamMap{x, ScamSource::discriminator, false}, 7, 7).values;
  }));
  for (double target : {0.0, 1.0}) {
    c.push_back(unary(target == 0.0 ? "bce_target0" : "bce_target1", {4, 1},
                      [target](const Tensor& p) { return bce(p, target); }, 0.05, 0.95));
  }
  c.push_back({"cross_entropy", [](std::uint64_t seed) {
                 Inputs in(seed);
                 Tensor logits = in.uniform({3, 4}, -3, 3);
                 const std::vector<int> labels = in.labels(3, 4);
                 const Tensor wrt[] = {logits};
                 return grad_check([&] { return cross_entropy(logits, labels); }, wrt,
                                   options(0, seed));
               }});
  c.push_back({"scam_loss", [](std::uint64_t seed) {
                 Inputs in(seed);
                 const Tensor t = in.uniform({2, 1, 5, 5}, 0, 1).detach();
                 Tensor d = in.uniform({2, 1, 5, 5}, 0, 1);
                 const Tensor wrt[] = {d};
                 return grad_check(
                     [&] {
                       return scam_loss({t, ScamSource::teacher, true},
                                        {d, ScamSource::discriminator, true});
                     },
                     wrt, options(0, seed));
               }});
  c.push_back({"teacher_loss", [](std::uint64_t seed) {
                 Inputs in(seed);
                 TeacherParams t = TeacherParams::init(in.seed());
                 const Tensor x = in.uniform({2, 1, kImageSize, kImageSize}, 0, 1).detach();
                 const std::vector<int> labels = in.labels(2, kNumClasses);
                 const auto wrt = leaves(t);
                 return grad_check(
                     [&] { return cross_entropy(teacher_forward(t, x).logits, labels); }, wrt,
                     options(kModelElements, seed));
               }});
  c.push_back(discriminator_case("discriminator_loss_baseline", ScamGate::one, 0.0));
  c.push_back(discriminator_case("discriminator_loss_ata", ScamGate::one, 1.0));
  c.push_back(discriminator_case("discriminator_loss_ata_sigmoid_gate", ScamGate::sigmoid, 1.0));
  c.push_back(generator_case("generator_loss_non_saturating", GeneratorLoss::non_saturating));
  c.push_back(generator_case("generator_loss_saturating", GeneratorLoss::saturating));
  return c;
}

}  // namespace

const std::vector<GradientCase>& gradient_cases() {
  static const std::vector<GradientCase> cases = make_cases();
  return cases;
}

GradientSuiteResult run_gradient_suite(
    std::size_t seeds, const std::function<void(const GradientCaseResult&)>& on_case) {
  GradientSuiteResult out;
  for (const GradientCase& gc : gradient_cases()) {
    GradientCaseResult r;
    r.name = gc.name;
    for (std::uint64_t s = 1; s <= seeds; ++s) {
      const GradCheckReport rep = gc.run(s);
      ++r.seeds;
      r.checked += rep.checked;
      if (!std::isnan(r.max_error) &&
          (r.worst.empty() || std::isnan(rep.max_error) || rep.max_error > r.max_error)) {
        r.max_error = rep.max_error;
        r.worst = "seed " + std::to_string(s) + ": " + rep.worst;
      }
      r.passed = r.passed && rep.passed;
    }
    out.passed = out.passed && r.passed;
    if (on_case) on_case(r);
    out.cases.push_back(std::move(r));
  }
  return out;
}

}  // namespace atagan
