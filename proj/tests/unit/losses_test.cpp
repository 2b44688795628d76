#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "atagan/grad_check.hpp"
#include "atagan/losses.hpp"
#include "atagan/models.hpp"
#include "atagan/ops.hpp"
#include "../support/oracles.hpp"

namespace atagan {
namespace {

using testing::random_tensor;

ScamMap normalized(Tensor v) { return {std::move(v), ScamSource::teacher, true}; }

TEST(Bce, HalfGivesLnTwo) {
  EXPECT_NEAR(bce(Tensor({3, 1}, 0.5), 1.0).item(), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce(Tensor({3, 1}, 0.5), 0.0).item(), std::log(2.0), 1e-15);
}

TEST(Bce, LimitsAndClamp) {
  EXPECT_NEAR(bce(Tensor({2}, 1.0 - 1e-12), 1.0).item(), 0.0, 1e-6);
  EXPECT_NEAR(bce(Tensor({2}, 1e-12), 0.0).item(), 0.0, 1e-6);
  const double worst = bce(Tensor({1}, 0.0), 1.0).item();
  EXPECT_TRUE(std::isfinite(worst));
  EXPECT_NEAR(worst, -std::log(kBceClamp), 1e-9);
}

TEST(Bce, RejectsOutOfRangePredictions) {
  EXPECT_THROW(bce(Tensor({1}, 1.5), 1.0), std::invalid_argument);
  EXPECT_THROW(bce(Tensor({1}, -0.1), 0.0), std::invalid_argument);
  EXPECT_THROW(bce(Tensor({1}, std::numeric_limits<double>::quiet_NaN()), 0.0),
               std::invalid_argument);
  EXPECT_THROW(bce(Tensor({1}, 0.5), 0.5), std::invalid_argument);
}

TEST(Bce, GradsMatchFiniteDifferences) {
  for (double target : {0.0, 1.0}) {
    Tensor p = random_tensor({4, 1}, 5, 0.05, 0.95).set_requires_grad(true);
    auto r = grad_check([&](const Tensor& x) { return bce(x, target); }, p, 1e-5, 1e-4);
    EXPECT_TRUE(r.passed) << r.worst;
  }
}

TEST(CrossEntropy, MatchesClosedFormAndGrads) {
  Tensor logits({2, 3}, {1, 2, 3, 0, 0, 0});
  const int labels[] = {2, 1};
  const double l0 = std::log(std::exp(1) + std::exp(2) + std::exp(3)) - 3;
  const double l1 = std::log(3.0);
  EXPECT_NEAR(cross_entropy(logits, labels).item(), (l0 + l1) / 2, 1e-14);
  Tensor x = random_tensor({4, 4}, 6, -3, 3).set_requires_grad(true);
  const int y[] = {0, 3, 1, 1};
  auto r = grad_check([&](const Tensor& t) { return cross_entropy(t, y); }, x, 1e-5, 1e-4);
  EXPECT_TRUE(r.passed) << r.worst;
  const int bad[] = {0, 4, 1, 1};
  EXPECT_THROW(cross_entropy(x, bad), std::invalid_argument);
}

TEST(ScamLoss, IdenticalMapsGiveZero) {
  Tensor v = random_tensor({2, 1, 16, 16}, 7, 0, 1);
  EXPECT_EQ(scam_loss(normalized(v), normalized(v.clone())).item(), 0.0);
}

TEST(ScamLoss, DiagonalAgainstZeros) {
  ScamMap t = normalized(Tensor({1, 1, 2, 2}, {1, 0, 0, 1}));
  ScamMap d = normalized(Tensor::zeros({1, 1, 2, 2}));
  EXPECT_DOUBLE_EQ(scam_loss(t, d).item(), 0.25);
}

TEST(ScamLoss, NonNegativeAndZeroOnlyWhenEqual) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ScamMap t = normalized(random_tensor({2, 1, 4, 4}, 10 + seed, 0, 1));
    ScamMap d = normalized(random_tensor({2, 1, 4, 4}, 50 + seed, 0, 1));
    EXPECT_GT(scam_loss(t, d).item(), 0.0);
  }
}

TEST(ScamLoss, GradientReachesDiscriminatorMapOnly) {
  Tensor tv = random_tensor({2, 1, 4, 4}, 8, 0, 1).set_requires_grad(true);
  Tensor dv = random_tensor({2, 1, 4, 4}, 9, 0, 1).set_requires_grad(true);
  scam_loss(normalized(tv), normalized(dv)).backward();
  EXPECT_FALSE(tv.has_grad());
  ASSERT_TRUE(dv.has_grad());
  // d/dD of 1/2 mean (T - D)^2 is (D - T) / count
  for (std::size_t i = 0; i < dv.numel(); ++i) {
    EXPECT_NEAR(dv.grad()[i], (dv.at(i) - tv.at(i)) / 32.0, 1e-15);
  }
  Tensor dv2 = random_tensor({2, 1, 4, 4}, 9, 0, 1).set_requires_grad(true);
  auto r = grad_check([&](const Tensor& x) { return scam_loss(normalized(tv.detach()), normalized(x)); },
                      dv2, 1e-5, 1e-4);
  EXPECT_TRUE(r.passed) << r.worst;
}

TEST(ScamLoss, PreconditionsAreEnforced) {
  ScamMap a = normalized(Tensor::zeros({1, 1, 4, 4}));
  ScamMap b = normalized(Tensor::zeros({1, 1, 8, 8}));
  EXPECT_THROW(scam_loss(a, b), ShapeError);
  ScamMap raw{Tensor::zeros({1, 1, 4, 4}), ScamSource::discriminator, false};
  EXPECT_THROW(scam_loss(a, raw), std::invalid_argument);
}

TEST(DiscriminatorObjective, LambdaZeroIsExactBaseline) {
  Tensor real = random_tensor({4, 1}, 11, 0.1, 0.9), fake = random_tensor({4, 1}, 12, 0.1, 0.9);
  Tensor sr = Tensor::scalar(0.37), sf = Tensor::scalar(0.11);
  const DiscriminatorLoss base = discriminator_objective(real, fake, {}, {}, 1.0);
  const DiscriminatorLoss zero = discriminator_objective(real, fake, sr, sf, 0.0);
  EXPECT_EQ(base.total.item(), zero.total.item());
  EXPECT_EQ(base.total.item(), base.adv_real.item() + base.adv_fake.item());
  EXPECT_FALSE(base.scam_total.defined());
  EXPECT_DOUBLE_EQ(zero.scam_total.item(), 0.48);
}

TEST(DiscriminatorObjective, ZeroScamLossesEqualAdversarialPart) {
  Tensor real = random_tensor({4, 1}, 13, 0.1, 0.9), fake = random_tensor({4, 1}, 14, 0.1, 0.9);
  const auto l = discriminator_objective(real, fake, Tensor::scalar(0), Tensor::scalar(0), 1.0);
  EXPECT_EQ(l.total.item(), l.adv_real.item() + l.adv_fake.item());
}

TEST(DiscriminatorObjective, MonotoneInLambda) {
  Tensor real = random_tensor({4, 1}, 15, 0.1, 0.9), fake = random_tensor({4, 1}, 16, 0.1, 0.9);
  Tensor sr = Tensor::scalar(0.2), sf = Tensor::scalar(0.05);
  double prev = -1.0;
  for (double lambda : {0.0, 0.5, 1.0, 2.0, 10.0}) {
    const double t = discriminator_objective(real, fake, sr, sf, lambda).total.item();
    EXPECT_GT(t, prev);
    prev = t;
  }
  EXPECT_THROW(discriminator_objective(real, fake, sr, sf, -1.0), std::invalid_argument);
  EXPECT_THROW(discriminator_objective(real, fake, sr, {}, 1.0), std::invalid_argument);
}

TEST(GeneratorObjective, ClosedFormsAndLimit) {
  EXPECT_NEAR(generator_objective(Tensor({2, 1}, 0.5)).item(), std::log(2.0), 1e-15);
  EXPECT_NEAR(generator_objective(Tensor({2, 1}, 1.0 - 1e-12)).item(), 0.0, 1e-6);
  EXPECT_NEAR(generator_objective(Tensor({2, 1}, 0.5), GeneratorLoss::saturating).item(),
              -std::log(2.0), 1e-15);
  EXPECT_EQ(parse_generator_loss("saturating"), GeneratorLoss::saturating);
  EXPECT_THROW(parse_generator_loss("hinge"), std::invalid_argument);
}

TEST(GeneratorObjective, GradsReachGeneratorOnly) {
  GeneratorParams g = GeneratorParams::init(17);
  set_requires_grad(g, true);
  const DiscriminatorParams d = DiscriminatorParams::init(18);
  Tensor z = random_tensor({2, kLatentDim}, 19);
  Tensor loss = generator_objective(discriminator_forward(d, generator_forward(g, z)).decision);
  loss.backward();
  for (const auto& p : g.named()) EXPECT_TRUE(p.value.has_grad()) << p.name;
  for (const auto& p : d.named()) EXPECT_FALSE(p.value.has_grad()) << p.name;
}

}  // namespace
}  // namespace atagan
