#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "atagan/grad_check.hpp"
#include "atagan/ops.hpp"
#include "atagan/scam.hpp"
#include "../support/oracles.hpp"

namespace atagan {
namespace {

using testing::max_abs_diff;
using testing::naive_soft_cam;
using testing::naive_softmax_rows;
using testing::random_tensor;

TEST(SoftCam, TwoByTwoExample) {
  Tensor fm({1, 2, 2, 2}, {1, 0, 0, 1, 0, 1, 1, 0});
  Tensor w({2, 2}, {1, 0, 0, 1});
  Tensor logits({1, 2}, {std::log(3.0), 0.0});
  ScamMap sc = soft_cam(fm, w, logits);
  EXPECT_EQ(sc.values.shape(), (Shape{1, 1, 2, 2}));
  EXPECT_FALSE(sc.normalized);
  const double expect[] = {0.75, 0.25, 0.25, 0.75};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(sc.values.at(i), expect[i], 1e-15);
}

TEST(SoftCam, ZeroWeightsGiveZeroMap) {
  Tensor fm = random_tensor({2, 5, 3, 3}, 1);
  ScamMap sc = soft_cam(fm, Tensor::zeros({5, 3}), random_tensor({2, 3}, 2));
  for (double v : sc.values.data()) EXPECT_EQ(v, 0.0);
}

TEST(SoftCam, ShapeMismatchesAreRejected) {
  Tensor fm = random_tensor({2, 5, 3, 3}, 3);
  EXPECT_THROW(soft_cam(fm, Tensor::zeros({4, 3}), Tensor::zeros({2, 3})), ShapeError);
  EXPECT_THROW(soft_cam(fm, Tensor::zeros({5, 3}), Tensor::zeros({2, 4})), ShapeError);
  EXPECT_THROW(soft_cam(fm, Tensor::zeros({5, 3}), Tensor::zeros({3, 3})), ShapeError);
  EXPECT_THROW(hard_cam(fm, Tensor::zeros({5, 3}), 3), ShapeError);
}

TEST(SoftCam, MatchesTripleLoopOracleOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(1000 + seed);
    const std::size_t n = 1 + rng.below(3), k = 1 + rng.below(8), c = 1 + rng.below(5);
    const std::size_t h = 1 + rng.below(6), w = 1 + rng.below(6);
    Tensor fm = random_tensor({n, k, h, w}, 2000 + seed, -2, 2);
    Tensor wt = random_tensor({k, c}, 3000 + seed, -2, 2);
    Tensor logits = random_tensor({n, c}, 4000 + seed, -4, 4);
    const auto expect = naive_soft_cam(fm, wt, naive_softmax_rows(logits));
    ScamMap sc = soft_cam(fm, wt, logits);
    ASSERT_LE(max_abs_diff(sc.values.data(), expect), 1e-12) << "seed " << seed;
  }
}

TEST(SoftCam, IsConvexCombinationOfHardCams) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t n = 2, k = 6, c = 4;
    Tensor fm = random_tensor({n, k, 5, 4}, 100 + seed, -3, 3);
    Tensor w = random_tensor({k, c}, 200 + seed, -1, 1);
    Tensor logits = random_tensor({n, c}, 300 + seed, -3, 3);
    const auto sm = naive_softmax_rows(logits);
    ScamMap sc = soft_cam(fm, w, logits);
    std::vector<ScamMap> cams;
    for (std::size_t j = 0; j < c; ++j) cams.push_back(hard_cam(fm, w, j));
    const std::size_t hw = 20;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t p = 0; p < hw; ++p) {
        double combo = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t j = 0; j < c; ++j) {
          const double v = cams[j].values.at(s * hw + p);
          combo += sm[s * c + j] * v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        const double got = sc.values.at(s * hw + p);
        EXPECT_NEAR(got, combo, 1e-12);
        EXPECT_GE(got, lo - 1e-12);
        EXPECT_LE(got, hi + 1e-12);
      }
    }
  }
}

TEST(SoftCam, OneHotSoftmaxCollapsesToHardCam) {
  for (std::size_t jstar = 0; jstar < 4; ++jstar) {
    Tensor fm = random_tensor({3, 7, 4, 4}, 40 + jstar);
    Tensor w = random_tensor({7, 4}, 50 + jstar);
    Tensor logits = random_tensor({3, 4}, 60 + jstar);
    for (std::size_t n = 0; n < 3; ++n) logits.data()[n * 4 + jstar] += 1000.0;
    ScamMap sc = soft_cam(fm, w, logits);
    ScamMap hc = hard_cam(fm, w, jstar);
    EXPECT_LE(max_abs_diff(sc.values.data(), hc.values.data()), 1e-9);
  }
}

TEST(SoftCam, LinearInFeatureMapsForFixedLogits) {
  Tensor a = random_tensor({2, 4, 3, 3}, 70), b = random_tensor({2, 4, 3, 3}, 71);
  Tensor w = random_tensor({4, 3}, 72), logits = random_tensor({2, 3}, 73);
  const double alpha = 1.7, beta = -0.6;
  ScamMap lhs = soft_cam(add(scale(a, alpha), scale(b, beta)), w, logits);
  Tensor rhs = add(scale(soft_cam(a, w, logits).values, alpha),
                   scale(soft_cam(b, w, logits).values, beta));
  EXPECT_LE(max_abs_diff(lhs.values.data(), rhs.data()), 1e-12);
}

TEST(HardCam, SingleMapWithUnitWeightIsIdentity) {
  Tensor fm = random_tensor({2, 1, 3, 5}, 80);
  ScamMap hc = hard_cam(fm, Tensor({1, 1}, {1.0}), 0);
  EXPECT_EQ(max_abs_diff(hc.values.data(), fm.data()), 0.0);
}

TEST(HardCam, IsLinear) {
  Tensor fm = random_tensor({2, 3, 4, 4}, 81), w = random_tensor({3, 2}, 82);
  ScamMap scaled = hard_cam(scale(fm, 2.5), w, 1);
  ScamMap base = hard_cam(fm, w, 1);
  for (std::size_t i = 0; i < base.values.numel(); ++i) {
    EXPECT_NEAR(scaled.values.at(i), 2.5 * base.values.at(i), 1e-12);
  }
}

TEST(HardCam, MatchesPerClassTermOfTheOracle) {
  Tensor fm = random_tensor({2, 5, 3, 3}, 83), w = random_tensor({5, 3}, 84);
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> onehot(2 * 3, 0.0);
    onehot[j] = onehot[3 + j] = 1.0;
    EXPECT_LE(max_abs_diff(hard_cam(fm, w, j).values.data(), naive_soft_cam(fm, w, onehot)),
              1e-12);
  }
}

TEST(DiscriminatorScam, EqualsHardCamExactly) {
  Tensor fm = random_tensor({3, 64, 8, 8}, 90), w = random_tensor({64, 1}, 91);
  ScamMap d = discriminator_scam(fm, w);
  ScamMap h = hard_cam(fm, w, 0);
  EXPECT_EQ(d.source, ScamSource::discriminator);
  EXPECT_EQ(max_abs_diff(d.values.data(), h.values.data()), 0.0);
}

TEST(DiscriminatorScam, ZeroWeightGivesZeroMap) {
  ScamMap d = discriminator_scam(random_tensor({2, 64, 8, 8}, 92), Tensor::zeros({64, 1}));
  for (double v : d.values.data()) EXPECT_EQ(v, 0.0);
}

TEST(DiscriminatorScam, MatchesTripleLoopOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Tensor fm = random_tensor({2, 64, 8, 8}, 500 + seed), w = random_tensor({64, 1}, 600 + seed);
    const auto expect = naive_soft_cam(fm, w, std::vector<double>(2, 1.0));
    ASSERT_LE(max_abs_diff(discriminator_scam(fm, w).values.data(), expect), 1e-12);
  }
}

TEST(DiscriminatorScam, SigmoidGateScalesEachSample) {
  Tensor fm = random_tensor({2, 4, 3, 3}, 93), w = random_tensor({4, 1}, 94);
  Tensor logit({2, 1}, {0.4, -1.3});
  ScamMap gated = discriminator_scam(fm, w, ScamGate::sigmoid, logit);
  ScamMap plain = discriminator_scam(fm, w);
  for (std::size_t n = 0; n < 2; ++n) {
    const double s = 1.0 / (1.0 + std::exp(-logit.at(n)));
    for (std::size_t p = 0; p < 9; ++p) {
      EXPECT_NEAR(gated.values.at(n * 9 + p), s * plain.values.at(n * 9 + p), 1e-12);
    }
  }
  EXPECT_THROW(discriminator_scam(fm, w, ScamGate::sigmoid), ShapeError);
  EXPECT_THROW(discriminator_scam(fm, Tensor::zeros({4, 2})), ShapeError);
}

TEST(ScamGate, ParsesBothNames) {
  EXPECT_EQ(parse_scam_gate("one"), ScamGate::one);
  EXPECT_EQ(parse_scam_gate("sigmoid"), ScamGate::sigmoid);
  EXPECT_THROW(parse_scam_gate("softmax"), std::invalid_argument);
}

TEST(AlignAndNormalize, ConstantMapGoesToZero) {
  ScamMap m{Tensor({2, 1, 4, 4}, 3.25), ScamSource::teacher, false};
  ScamMap out = align_and_normalize(m);
  EXPECT_EQ(out.values.shape(), (Shape{2, 1, 16, 16}));
  EXPECT_TRUE(out.normalized);
  for (double v : out.values.data()) {
    EXPECT_FALSE(std::isnan(v));
    EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(AlignAndNormalize, RangeIsZeroToOne) {
  ScamMap m{random_tensor({3, 1, 8, 8}, 95, -5, 5), ScamSource::discriminator, false};
  ScamMap out = align_and_normalize(m);
  for (std::size_t n = 0; n < 3; ++n) {
    auto s = out.values.data().subspan(n * 256, 256);
    EXPECT_NEAR(*std::min_element(s.begin(), s.end()), 0.0, 1e-12);
    EXPECT_NEAR(*std::max_element(s.begin(), s.end()), 1.0, 1e-7);
  }
}

TEST(AlignAndNormalize, IsIdempotentOnNormalizedMaps) {
  ScamMap m{random_tensor({2, 1, 4, 4}, 96), ScamSource::teacher, false};
  ScamMap once = align_and_normalize(m);
  ScamMap twice = align_and_normalize(once);
  EXPECT_LE(max_abs_diff(once.values.data(), twice.values.data()), 1e-7);
}

TEST(AlignAndNormalize, GradsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Tensor raw = random_tensor({2, 1, 4, 4}, 97 + seed).set_requires_grad(true);
    Tensor weights = random_tensor({2, 1, 16, 16}, 120 + seed);
    auto f = [&](const Tensor& x) {
      return sum(mul(weights, align_and_normalize({x, ScamSource::teacher, false}).values));
    };
    auto r = grad_check(f, raw, 1e-5, 1e-4);
    EXPECT_TRUE(r.passed) << r.worst;
  }
}

TEST(SoftCam, GradsMatchFiniteDifferences) {
  Tensor fm = random_tensor({2, 3, 3, 3}, 130).set_requires_grad(true);
  Tensor w = random_tensor({3, 4}, 131).set_requires_grad(true);
  Tensor logits = random_tensor({2, 4}, 132).set_requires_grad(true);
  Tensor weights = random_tensor({2, 1, 3, 3}, 133);
  const Tensor wrt[] = {fm, w, logits};
  auto r = grad_check([&] { return sum(mul(weights, soft_cam(fm, w, logits).values)); }, wrt);
  EXPECT_TRUE(r.passed) << r.worst;
}

}  // namespace
}  // namespace atagan
