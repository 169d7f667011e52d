#include <gtest/gtest.h>

#include <unordered_set>

#include "opineq/sampler.hpp"
#include "opineq/spectral.hpp"

using opineq::ComplexMatrix;
using opineq::SampleClass;
using opineq::SampleSpec;

TEST(Mix, KnownValues) {
  // SplitMix64 reference outputs for the state sequence starting at 0.
  EXPECT_EQ(opineq::mix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(opineq::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(opineq::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(TrialSeed, GoldenValue) {
  EXPECT_EQ(opineq::derive_trial_seed(0, "horn", 2, 0), 0x5e73e3319598ef25ULL);
}

TEST(TrialSeed, Stable) {
  EXPECT_EQ(opineq::derive_trial_seed(7, "main", 5, 12), opineq::derive_trial_seed(7, "main", 5, 12));
  EXPECT_NE(opineq::derive_trial_seed(7, "main", 5, 12), opineq::derive_trial_seed(7, "shi", 5, 12));
  EXPECT_NE(opineq::derive_trial_seed(7, "main", 5, 12), opineq::derive_trial_seed(7, "main", 3, 12));
  EXPECT_NE(opineq::derive_trial_seed(7, "main", 5, 12), opineq::derive_trial_seed(8, "main", 5, 12));
}

TEST(TrialSeed, NoCollisionsOverMillionIndices) {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1 << 21);
  for (std::uint64_t i = 0; i < 1000000; ++i) seen.insert(opineq::derive_trial_seed(7, "horn", 3, i));
  EXPECT_EQ(seen.size(), 1000000u);
}

TEST(HaarUnitary, DimensionOneIsUnitModulus) {
  const auto u = opineq::haar_unitary(1, 9);
  EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-15);
}

TEST(HaarUnitary, UnitaryAndDeterministic) {
  for (std::size_t n : {2u, 3u, 8u, 16u}) {
    const auto u = opineq::haar_unitary(n, 42);
    EXPECT_LE((u.adjoint() * u - ComplexMatrix::identity(n)).frobenius_norm(), 1e-12 * static_cast<double>(n));
  }
  EXPECT_EQ(opineq::haar_unitary(3, 42), opineq::haar_unitary(3, 42));
  EXPECT_NE(opineq::haar_unitary(3, 42), opineq::haar_unitary(3, 43));
}

TEST(HaarUnitary, PhaseFixedDiagonalIsNotBiased) {
  // Mean of the (0,0) entry of Haar unitaries is 0.
  opineq::Complex mean = 0.0;
  const int draws = 4000;
  for (int k = 0; k < draws; ++k) mean += opineq::haar_unitary(3, static_cast<std::uint64_t>(k))(0, 0);
  mean /= static_cast<double>(draws);
  EXPECT_LT(std::abs(mean), 0.05);
}

TEST(Sample, ClassesPassClassification) {
  for (std::size_t dim : {2u, 3u, 5u, 8u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto herm = opineq::classify(opineq::sample({SampleClass::hermitian, dim, seed}));
      EXPECT_TRUE(herm.hermitian);
      const auto pos = opineq::classify(opineq::sample({SampleClass::positive, dim, seed}));
      EXPECT_TRUE(pos.positive);
      const auto nor = opineq::classify(opineq::sample({SampleClass::normal, dim, seed}));
      EXPECT_TRUE(nor.normal);
      const auto inv = opineq::classify(opineq::sample({SampleClass::invertible_normal, dim, seed}));
      EXPECT_TRUE(inv.normal);
      EXPECT_TRUE(inv.invertible);
      EXPECT_GE(inv.sigma_min, 0.1 - 1e-12);
      EXPECT_LE(inv.sigma_max, 2.0 + 1e-12);
      const auto uni = opineq::classify(opineq::sample({SampleClass::unitary, dim, seed}));
      EXPECT_TRUE(uni.unitary);
    }
  }
}

TEST(Sample, NormalResidualTiny) {
  const ComplexMatrix a = opineq::sample({SampleClass::normal, 3, 11});
  const double n2 = std::pow(opineq::operator_norm(a), 2);
  EXPECT_LE((a * a.adjoint() - a.adjoint() * a).frobenius_norm(), 1e-10 * n2);
}

TEST(Sample, SpectrumScale) {
  const auto inv = opineq::classify(opineq::sample({SampleClass::invertible_normal, 4, 3, 10.0}));
  EXPECT_GE(inv.sigma_min, 1.0 - 1e-10);
  EXPECT_LE(inv.sigma_max, 20.0 + 1e-10);
}

TEST(Sample, SelfadjointProductPair) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ops = opineq::sample_operands({SampleClass::selfadjoint_product_pair, 3, seed}, 2);
    ASSERT_EQ(ops.size(), 2u);
    const ComplexMatrix st = ops[0] * ops[1];
    EXPECT_LE((st - st.adjoint()).frobenius_norm(), 1e-9 * opineq::operator_norm(st));
    const auto sv = opineq::svd(ops[0]).sigmas;
    EXPECT_GE(sv.back(), 0.5 - 1e-12);
    EXPECT_LE(sv.front(), 2.0 + 1e-12);
  }
  EXPECT_THROW(opineq::sample({SampleClass::selfadjoint_product_pair, 3, 0}), opineq::ConfigError);
  EXPECT_THROW(opineq::sample_operands({SampleClass::selfadjoint_product_pair, 3, 0}, 3), opineq::ConfigError);
}

TEST(Sample, OperandsAreDeterministicAndDistinct) {
  const auto a = opineq::sample_operands({SampleClass::ginibre, 4, 5}, 4);
  const auto b = opineq::sample_operands({SampleClass::ginibre, 4, 5}, 4);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NE(a[0], a[1]);
}

TEST(Sample, InvalidSpecs) {
  EXPECT_THROW(opineq::sample({SampleClass::ginibre, 1, 0}), opineq::ConfigError);
  EXPECT_THROW(opineq::sample({SampleClass::ginibre, 65, 0}), opineq::ConfigError);
  EXPECT_THROW(opineq::sample({SampleClass::ginibre, 2, 0, -1.0}), opineq::ConfigError);
}

TEST(SampleClassNames, RoundTrip) {
  for (SampleClass c : opineq::kAllSampleClasses) EXPECT_EQ(opineq::parse_sample_class(opineq::to_string(c)), c);
  EXPECT_EQ(opineq::to_string(SampleClass::invertible_normal), "invertible_normal");
  EXPECT_THROW(opineq::parse_sample_class("NORMAL"), opineq::ConfigError);
}
