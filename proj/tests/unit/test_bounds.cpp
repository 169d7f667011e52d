#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "opineq/bounds.hpp"
#include "support/oracles.hpp"

using opineq::BoundId;
using opineq::BoundReport;
using opineq::ComplexMatrix;
using opineq::Verdict;

namespace {

const ComplexMatrix kShift{{0.0, 1.0}, {0.0, 0.0}};
const ComplexMatrix kI2 = ComplexMatrix::identity(2);
const ComplexMatrix kZero2(2, 2);
const ComplexMatrix kD20 = ComplexMatrix::diagonal({2.0, 0.0});
const ComplexMatrix kD03 = ComplexMatrix::diagonal({0.0, 3.0});

void expect_equality(const BoundReport& r, double value) {
  EXPECT_NEAR(r.lhs, value, 1e-9) << r.bound_id;
  EXPECT_NEAR(r.rhs, value, 1e-9) << r.bound_id;
  EXPECT_LE(std::abs(r.slack), 1e-9) << r.bound_id;
  EXPECT_EQ(r.verdict, Verdict::verified) << r.bound_id;
}

void expect_holds(const BoundReport& r) {
  EXPECT_NE(r.verdict, Verdict::violated) << r.bound_id << " slack " << r.slack;
  EXPECT_GE(r.slack, -r.tolerance_used) << r.bound_id;
  EXPECT_TRUE(r.hypothesis_ok) << r.bound_id << ": " << r.note;
}

std::vector<ComplexMatrix> draw(BoundId id, std::size_t dim, std::uint64_t index) {
  const auto seed = opineq::derive_trial_seed(99, opineq::to_string(id), dim, index);
  return opineq::sample_operands({opineq::hypothesis_class(id), dim, seed}, opineq::bound_arity(id));
}

}  // namespace

TEST(BoundIds, RoundTripAndMetadata) {
  for (BoundId id : opineq::kAllBounds) EXPECT_EQ(opineq::parse_bound_id(opineq::to_string(id)), id);
  EXPECT_THROW(opineq::parse_bound_id("nope"), opineq::ConfigError);
  EXPECT_EQ(opineq::bound_arity(BoundId::lemma_block), 4u);
  EXPECT_EQ(opineq::bound_arity(BoundId::yamazaki), 1u);
  EXPECT_EQ(opineq::bound_arity(BoundId::main), 2u);
  EXPECT_FALSE(opineq::is_proof_backed(BoundId::w_reim_half));
  EXPECT_TRUE(opineq::is_proof_backed(BoundId::w_reim_sqrt2));
}

TEST(Horn, Examples) {
  expect_equality(opineq::eval_horn(kD20, kD03), 3.0);
  const auto r = opineq::eval_horn(kI2, -1.0 * kI2);
  EXPECT_NEAR(r.lhs, 0.0, 1e-15);
  EXPECT_NEAR(r.rhs, 2.0, 1e-12);
}

TEST(Horn, NonNormalFlaggedOrThrown) {
  const auto r = opineq::eval_horn(kShift, kI2);
  EXPECT_FALSE(r.hypothesis_ok);
  EXPECT_GT(r.hypothesis_residuals.at("normal_residual_S"), 0.5);
  EXPECT_THROW(opineq::eval_horn(kShift, kI2, {.strict = true}), opineq::HypothesisViolated);
}

TEST(Horn, HypothesisFailureNeverReportsViolation) {
  // ||S + T|| > || |S| + |T| || here, but the operands are not normal.
  const ComplexMatrix s{{0.0, 2.0}, {0.0, 0.0}};
  const ComplexMatrix t = ComplexMatrix::diagonal({1.0, 0.0});
  const auto r = opineq::eval_horn(s, t);
  EXPECT_LT(r.slack, 0.0);
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
}

TEST(DavidsonPower, Examples) {
  expect_equality(opineq::eval_davidson_power(kI2, kI2), 2.0);
  expect_equality(opineq::eval_davidson_power(kD20, kD03), 3.0);
  EXPECT_FALSE(opineq::eval_davidson_power(kShift, kI2).hypothesis_ok);
}

TEST(PowerInterp, Examples) {
  expect_equality(opineq::eval_power_interp(kI2, kI2, 0.5), 2.0);
  oracle::Rng rng(50);
  const ComplexMatrix s = rng.ginibre(3);
  const auto r = opineq::eval_power_interp(s, ComplexMatrix(3, 3), 0.4);
  EXPECT_NEAR(r.rhs, opineq::operator_norm(s), 1e-10);
  EXPECT_NEAR(r.slack, 0.0, 1e-10);
  EXPECT_THROW(opineq::eval_power_interp(s, s, 1.2), opineq::DomainError);
}

TEST(FgMax, Examples) {
  expect_equality(opineq::eval_fg_max(kI2, kI2, opineq::power_pair(0.5)), 2.0);
  oracle::Rng rng(51);
  const ComplexMatrix t = rng.ginibre(3);
  const auto r = opineq::eval_fg_max(ComplexMatrix(3, 3), t, opineq::power_pair(0.7));
  EXPECT_NEAR(r.rhs, opineq::operator_norm(t), 1e-10);
}

TEST(FgMax, RejectsBrokenPair) {
  opineq::FunctionPair bad{"x,x", [](double x) { return x; }, [](double x) { return x; }, {}, false, {}};
  EXPECT_THROW(opineq::eval_fg_max(2.0 * kI2, kI2, bad), opineq::DomainError);
}

TEST(Shi, Examples) {
  expect_equality(opineq::eval_shi(kI2, kI2, 0.5, 0.5, 1.0), 2.0);
  oracle::Rng rng(52);
  const ComplexMatrix s = oracle::random_normal(3, rng);
  for (double t : {0.3, 1.0, 5.0}) {
    const auto r = opineq::eval_shi(s, ComplexMatrix(3, 3), 0.3, 0.6, t);
    EXPECT_NEAR(r.rhs, opineq::operator_norm(s), 1e-10);
  }
  EXPECT_THROW(opineq::eval_shi(kI2, kI2, 0.5, 0.5, 0.0), opineq::DomainError);
}

TEST(Main, Examples) {
  const auto half = opineq::power_pair(0.5);
  const auto r = opineq::eval_main(kI2, kI2, half, half);
  expect_equality(r, 2.0);
  EXPECT_NEAR(r.details.at("rhs_geometric"), 2.0, 1e-12);
  EXPECT_NEAR(r.details.at("t_star"), 1.0, 1e-6);
  expect_equality(opineq::eval_main(kD20, kD03, half, half), 3.0);
}

TEST(Main, FunctionPairFromExp) {
  oracle::Rng rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ops = draw(BoundId::geo_max, 3, trial);
    const auto p = opineq::parse_pair("fdiv:exp");
    expect_holds(opineq::eval_main(ops[0], ops[1], p, opineq::parse_pair("fdiv:affine:1:1")));
  }
}

TEST(Main, WidePowerNeedsInvertibility) {
  EXPECT_THROW(opineq::eval_main(kD20, kI2, opineq::power_pair(-0.5), opineq::power_pair(0.5)),
               opineq::DomainError);
  EXPECT_NO_THROW(opineq::eval_main(2.0 * kI2, kI2, opineq::power_pair(-0.5), opineq::power_pair(0.5)));
}

TEST(GeoMax, Examples) {
  expect_equality(opineq::eval_geo_max_power(kI2, kI2, 0.5, 0.5), 2.0);
  expect_equality(opineq::eval_geo_max_power(2.0 * kI2, kZero2, 0.5, 0.5), 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ops = draw(BoundId::geo_max, 4, trial);
    expect_holds(opineq::eval_geo_max(ops[0], ops[1], opineq::parse_pair("fdiv:exp"),
                                      opineq::parse_pair("fdiv:affine:1:1")));
  }
}

TEST(Arbitrary, Examples) {
  const auto half = opineq::power_pair(0.5);
  const auto r = opineq::eval_arbitrary(kShift, kZero2, half, half);
  expect_equality(r, 1.0);
  EXPECT_NEAR(r.details.at("alpha"), 0.0, 1e-20);
  EXPECT_NEAR(r.details.at("beta"), 0.0, 1e-20);
  expect_equality(opineq::eval_arbitrary(kI2, kI2, half, half), 2.0);
}

TEST(Arbitrary, EveryGridPointHolds) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto ops = draw(BoundId::arbitrary, 3, trial);
    const auto r = opineq::eval_arbitrary(ops[0], ops[1], opineq::power_pair(0.3), opineq::power_pair(0.6));
    expect_holds(r);
    EXPECT_GE(r.details.at("grid_min_slack"), r.slack - 1e-12);
  }
}

TEST(AdjointGeoMax, Examples) {
  expect_equality(opineq::eval_adjoint_geo_max(kShift, kZero2, 0.5, 0.5), 1.0);
  expect_equality(opineq::eval_adjoint_geo_max(kI2, kI2, 0.5, 0.5), 2.0);
}

TEST(WdiffLower, Examples) {
  expect_equality(opineq::eval_wdiff_lower(kI2, kI2, 0.5, 0.5), 0.0);
  expect_equality(opineq::eval_wdiff_lower(kI2, kZero2, 0.5, 0.5), 1.0);
}

TEST(WdiffLower, PositivePairRemark) {
  oracle::Rng rng(54);
  const ComplexMatrix s = oracle::random_positive(3, rng), t = oracle::random_positive(3, rng);
  const auto r = opineq::eval_wdiff_lower(s, t, 0.5, 0.5);
  expect_holds(r);
  ASSERT_TRUE(r.details.count("sqrt_product_norm"));
  ASSERT_TRUE(r.details.count("normal_case_rhs"));
  EXPECT_GE(r.details.at("positive_case_lhs"), r.details.at("positive_case_rhs") - 1e-10);
  // S^{1/2} T^{1/2} from the independent spectral route.
  const double direct = opineq::operator_norm(opineq::apply_spectral_function(s, [](double x) { return std::sqrt(x); }) *
                                              opineq::apply_spectral_function(t, [](double x) { return std::sqrt(x); }));
  EXPECT_NEAR(r.details.at("sqrt_product_norm"), direct, 1e-10);
}

TEST(WFuncpair, Examples) {
  const auto half = opineq::power_pair(0.5);
  const auto shift = opineq::eval_w_funcpair(kShift, half, half);
  expect_equality(shift, 0.5);
  EXPECT_NEAR(shift.details.at("alpha"), 0.0, 1e-15);
  const auto id = opineq::eval_w_funcpair(kI2, half, half);
  expect_equality(id, 1.0);
  EXPECT_NEAR(id.details.at("alpha"), 2.0, 1e-12);
  EXPECT_NEAR(id.details.at("beta"), 2.0, 1e-12);
}

TEST(WReim, Examples) {
  for (auto c : {opineq::ReimCoefficient::half, opineq::ReimCoefficient::sqrt2_over_2}) {
    expect_equality(opineq::eval_w_reim(kI2, c), 1.0);
  }
  const auto half = opineq::eval_w_reim(kShift, opineq::ReimCoefficient::half);
  EXPECT_NEAR(half.lhs, 0.5, 1e-9);
  EXPECT_NEAR(half.rhs, 0.75, 1e-12);
  const auto root = opineq::eval_w_reim(kShift, opineq::ReimCoefficient::sqrt2_over_2);
  EXPECT_NEAR(root.rhs, 0.5 + 0.25 * std::numbers::sqrt2, 1e-12);
  EXPECT_EQ(root.bound_id, "w_reim_sqrt2");
}

TEST(WClassic, Examples) {
  expect_equality(opineq::eval_w_classic(kShift), 0.5);
  expect_equality(opineq::eval_w_classic(kI2), 1.0);
}

TEST(Yamazaki, Examples) {
  expect_equality(opineq::eval_yamazaki(kShift, 0.5), 0.5);
  oracle::Rng rng(55);
  const ComplexMatrix h = rng.hermitian(3);
  const auto r = opineq::eval_yamazaki(h, 0.3);
  EXPECT_NEAR(r.rhs, opineq::operator_norm(h), 1e-9);
  EXPECT_NEAR(r.lhs, opineq::operator_norm(h), 1e-9);
  EXPECT_NE(r.verdict, Verdict::violated);
}

TEST(BlockLemma, Examples) {
  expect_equality(opineq::check_block_norm_lemma(kI2, kZero2, kZero2, kZero2), 1.0);
  expect_equality(opineq::check_block_norm_lemma(kZero2, kI2, kI2, kZero2), 1.0);
  EXPECT_THROW(opineq::check_block_norm_lemma(kI2, ComplexMatrix(3, 3), kI2, kI2), opineq::DimensionMismatch);
}

TEST(BlockLemma, RectangularBlocks) {
  oracle::Rng rng(56);
  const auto r = opineq::check_block_norm_lemma(rng.ginibre(2, 3), rng.ginibre(2, 1), rng.ginibre(4, 3),
                                                rng.ginibre(4, 1));
  expect_holds(r);
}

TEST(SelfadjointLemma, Examples) {
  oracle::Rng rng(57);
  const ComplexMatrix t = rng.hermitian(3);
  expect_equality(opineq::check_selfadjoint_product_lemma(ComplexMatrix::identity(3), t), opineq::operator_norm(t));
  const ComplexMatrix s = ComplexMatrix::diagonal({1.0, 2.0});
  const ComplexMatrix k{{0.0, 1.0}, {1.0, 0.0}};
  const auto r = opineq::check_selfadjoint_product_lemma(s, opineq::inverse(s) * k);
  EXPECT_GE(r.slack, 0.0);
  EXPECT_TRUE(r.hypothesis_ok);
}

TEST(SelfadjointLemma, NonHermitianProductFlagged) {
  const auto r = opineq::check_selfadjoint_product_lemma(kShift, kI2);
  EXPECT_FALSE(r.hypothesis_ok);
  EXPECT_THROW(opineq::check_selfadjoint_product_lemma(kShift, kI2, {.strict = true}), opineq::HypothesisViolated);
}

TEST(Evaluate, DispatchesWithDefaults) {
  const std::vector<ComplexMatrix> two{kD20, kD03};
  const auto r = opineq::evaluate(BoundId::main, two);
  EXPECT_EQ(r.bound_id, "main");
  EXPECT_EQ(r.parameters.at("pair_f"), "pow:0.5");
  const auto ag = opineq::evaluate(BoundId::adjoint_geo_max, two);
  EXPECT_EQ(ag.parameters.at("r"), "0.20000000000000001");
  EXPECT_THROW(opineq::evaluate(BoundId::w_classic, two), opineq::ConfigError);
  opineq::BoundParams p;
  p.t = 0.5;
  const std::vector<ComplexMatrix> one{kShift};
  expect_equality(opineq::evaluate(BoundId::yamazaki, one, p), 0.5);
}

TEST(Verdict, ToleranceGrowsWithEnclosureWidth) {
  const auto r = opineq::eval_w_classic(kShift, {.grid_size = 16});
  EXPECT_GT(r.tolerance_used, std::numbers::pi / 16.0);
  EXPECT_LT(r.tolerance_used, std::numbers::pi / 16.0 + 1e-6);
  const auto horn = opineq::eval_horn(kD20, kD03);
  EXPECT_NEAR(horn.tolerance_used, 1e-7 * 5.0, 1e-20);
}

TEST(BoundProperty, RefinementOrdering) {
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 2 + trial % 4;
    const auto ops = draw(BoundId::main, dim, trial);
    const double r = 0.1 + 0.8 * ((trial * 37) % 10) / 10.0;
    const double s = 0.1 + 0.8 * ((trial * 53) % 10) / 10.0;
    const auto main = opineq::eval_main(ops[0], ops[1], opineq::power_pair(r), opineq::power_pair(s));
    expect_holds(main);
    // main below shi for every t
    for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      EXPECT_LE(main.rhs, opineq::eval_shi(ops[0], ops[1], r, s, t).rhs + 1e-9);
    }
    // main below its geometric relaxation
    EXPECT_LE(main.rhs, main.details.at("rhs_geometric") + 1e-9);
    // geometric term below the arithmetic one
    const auto geo = opineq::eval_geo_max_power(ops[0], ops[1], r, r);
    const auto interp = opineq::eval_power_interp(ops[0], ops[1], r);
    EXPECT_LE(geo.details.at("geometric_term"), interp.details.at("half_sum") + 1e-9);
  }
}

TEST(BoundProperty, InHypothesisTrialsHold) {
  for (BoundId id : opineq::kAllBounds) {
    if (!opineq::is_proof_backed(id)) continue;
    for (std::size_t dim : {2u, 3u, 5u}) {
      for (std::uint64_t k = 0; k < 8; ++k) {
        const auto ops = draw(id, dim, k);
        expect_holds(opineq::evaluate(id, ops));
      }
    }
  }
}

TEST(BoundProperty, SlackRecomputable) {
  for (BoundId id : opineq::kAllBounds) {
    const auto ops = draw(id, 3, 0);
    const auto r = opineq::evaluate(id, ops);
    const double expected = id == BoundId::wdiff_lower ? r.lhs - r.rhs : r.rhs - r.lhs;
    EXPECT_EQ(r.slack, expected) << r.bound_id;
  }
}

TEST(BoundProperty, PolarCompletionDoesNotAffectYamazaki) {
  // Rank-deficient operands: the transform only sees U on the range of |S|.
  oracle::Rng rng(58);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix g = rng.ginibre(3, 2);
    const ComplexMatrix s = g * rng.ginibre(2, 3);
    const ComplexMatrix u = oracle::random_unitary_gs(3, rng);
    // Conjugating by a unitary commutes with the transform.
    const ComplexMatrix a = opineq::aluthge_generalized(u * s * u.adjoint(), 0.3);
    const ComplexMatrix b = u * opineq::aluthge_generalized(s, 0.3) * u.adjoint();
    EXPECT_LE((a - b).frobenius_norm(), 1e-10 * std::max(1.0, s.frobenius_norm()));
  }
}
