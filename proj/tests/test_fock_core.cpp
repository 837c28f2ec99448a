#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qballot/qballot.hpp"

using namespace qballot;
using std::numbers::pi;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

ModeLayout two_modes(int a, int b) { return ModeLayout({{"A", a}, {"B", b}}); }

void expect_amplitudes(const PureState& s, const std::vector<Complex>& expected, double tol = 1e-12) {
  ASSERT_EQ(static_cast<std::size_t>(s.amplitudes().size()), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    EXPECT_LT(std::abs(s.amplitudes()[static_cast<Eigen::Index>(i)] - expected[i]), tol) << "index " << i;
}

}  // namespace

TEST(Layout, RowMajorIndexingLastSubsystemFastest) {
  ModeLayout layout({{"T", 3}, {"V", 2}}, {"q1"});
  EXPECT_EQ(layout.dim(), 4u * 3u * 3u);
  EXPECT_EQ(layout.index_of({{1, 2}, {-1}}), 1u * 9u + 2u * 3u + 0u);
  EXPECT_EQ(layout.basis_state(layout.index_of({{3, 0}, {1}})), (BasisState{{3, 0}, {1}}));
  for (std::size_t i = 0; i < layout.dim(); ++i) EXPECT_EQ(layout.index_of(layout.basis_state(i)), i);
}

TEST(Layout, RejectsBadDeclarations) {
  EXPECT_THROW(ModeLayout({{"A", 1}, {"A", 1}}), LayoutError);
  EXPECT_THROW(ModeLayout({{"A", 1}}, {"A"}), LayoutError);
  EXPECT_THROW(ModeLayout({{"A", -1}}), CutoffError);
  EXPECT_THROW(ModeLayout({{"A", 4095}, {"B", 4095}}, {}, std::size_t{1} << 20), CutoffError);
  EXPECT_NO_THROW(ModeLayout({{"A", 4095}, {"B", 4095}}));
  EXPECT_THROW(ModeLayout({{"A", 4096}, {"B", 4096}}), CutoffError);
}

TEST(MakeBasisState, Examples) {
  expect_amplitudes(make_basis_state(two_modes(1, 1), {{1, 0}, {}}), {0, 0, 1, 0});
  auto s = make_basis_state(ModeLayout({{"T", 3}, {"V", 3}}), {{3, 0}, {}});
  EXPECT_EQ(s.amplitude({{3, 0}, {}}), Complex(1.0));
  EXPECT_DOUBLE_EQ(s.norm(), 1.0);
  EXPECT_THROW(make_basis_state(ModeLayout({{"A", 1}}), {{2}, {}}), CutoffError);
}

TEST(Superpose, BuildsComparativeStates) {
  auto layout = two_modes(1, 1);
  auto c0 = superpose(layout, {{1.0, {{1, 0}, {}}}, {1.0, {{0, 1}, {}}}});
  expect_amplitudes(c0, {0, kInvSqrt2, kInvSqrt2, 0});
  auto c1 = superpose(layout, {{1.0, {{1, 0}, {}}}, {-1.0, {{0, 1}, {}}}});
  expect_amplitudes(c1, {0, -kInvSqrt2, kInvSqrt2, 0});
  EXPECT_THROW(superpose(layout, {{0.0, {{1, 0}, {}}}}), DegenerateStateError);
}

TEST(NumberPhase, YesVoteFlipsComparativeBallot) {
  auto c0 = comparative_state();
  auto voted = apply_number_phase(c0, "A", [](int n) { return pi * n; });
  expect_amplitudes(voted, {0, kInvSqrt2, -kInvSqrt2, 0});
  EXPECT_TRUE(equal_up_to_global_phase(voted, comparison_basis()[1].vector));
  EXPECT_THROW(apply_number_phase(c0, "Z", [](int) { return 0.0; }), LayoutError);
}

TEST(NumberPhase, ZeroPhaseIsIdentity) {
  auto s = survey_state({5});
  EXPECT_LT(distance(apply_number_phase(s, "V", [](int) { return 0.0; }), s), 1e-15);
}

TEST(NumberPhase, ExpandedSurveyStateForNEquals2) {
  auto s = apply_number_phase(survey_state({2}), "V", [](int n) { return n * 2.0 * pi / 3.0; });
  const double r = 1.0 / std::sqrt(3.0);
  EXPECT_LT(std::abs(s.amplitude({{2, 0}, {}}) - r), 1e-12);
  EXPECT_LT(std::abs(s.amplitude({{1, 1}, {}}) - std::polar(r, 2 * pi / 3)), 1e-12);
  EXPECT_LT(std::abs(s.amplitude({{0, 2}, {}}) - std::polar(r, 4 * pi / 3)), 1e-12);
}

TEST(ConditionalSpinPhase, SpinZeroComponentGetsOnlyTheOffset) {
  ModeLayout layout({{"V", 3}}, {"q"});
  auto s = superpose(layout, {{1.0, {{2}, {0}}}, {1.0, {{2}, {1}}}, {1.0, {{2}, {-1}}}});
  auto out = apply_conditional_spin_phase(s, "V", "q", 0.3, 0.5);
  const double r = 1.0 / std::sqrt(3.0);
  EXPECT_LT(std::abs(out.amplitude({{2}, {0}}) - std::polar(r, 2 * 0.3)), 1e-12);
  EXPECT_LT(std::abs(out.amplitude({{2}, {1}}) - std::polar(r, 2 * 0.8)), 1e-12);
  EXPECT_LT(std::abs(out.amplitude({{2}, {-1}}) - std::polar(r, 2 * -0.2)), 1e-12);
  EXPECT_THROW(apply_conditional_spin_phase(s, "q", "V", 0, 0), LayoutError);
}

TEST(ConditionalSpinPhase, TwoAgentYesAndCheatPhases) {
  const int N = 4;
  const double d = 2 * pi / (N + 1);
  for (auto [spins, expected] : {std::pair{std::vector<int>{0, 1}, 1.0}, std::pair{std::vector<int>{1, 0}, 1.0},
                                 std::pair{std::vector<int>{1, 1}, 1.5}, std::pair{std::vector<int>{0, -1}, 0.0}}) {
    ModeLayout layout({{"V1", N}, {"V2", N}}, {"q1", "q2"});
    const int n = 3;
    auto s = make_basis_state(layout, {{n, n}, spins});
    s = apply_conditional_spin_phase(s, "V1", "q1", d / 4, d / 2);
    s = apply_conditional_spin_phase(s, "V2", "q2", d / 4, d / 2);
    const Complex a = s.amplitude({{n, n}, spins});
    EXPECT_LT(std::abs(a - std::polar(1.0, n * d * expected)), 1e-12);
  }
}

TEST(InnerProduct, Examples) {
  auto basis = comparison_basis();
  EXPECT_LT(std::abs(inner_product(basis[0].vector, basis[0].vector) - 1.0), 1e-15);
  EXPECT_LT(std::abs(inner_product(basis[0].vector, basis[1].vector)), 1e-15);
  auto tb = tally_basis({6}, survey_state({6}).layout());
  for (const auto& a : tb)
    for (const auto& b : tb)
      EXPECT_LT(std::abs(inner_product(a.state, b.state) - (a.n == b.n ? 1.0 : 0.0)), 1e-12);
  EXPECT_THROW(inner_product(comparative_state(), survey_state({2})), LayoutError);
  auto x = survey_state({3});
  auto y = apply_number_phase(x, "V", [](int n) { return 0.7 * n * n; });
  EXPECT_LT(std::abs(inner_product(x, y) - std::conj(inner_product(y, x))), 1e-15);
}

TEST(PartialTrace, SurveyStateIsUniformAtEitherSite) {
  const int N = 5;
  for (int m = 0; m <= N; ++m) {
    auto s = apply_number_phase(survey_state({N}), "V", [&](int n) { return n * m * 2 * pi / (N + 1); });
    auto rho = partial_trace(s, {"T"});
    EXPECT_LT((rho.matrix() - Eigen::MatrixXcd::Identity(N + 1, N + 1) / (N + 1.0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(rho.is_valid());
  }
}

TEST(PartialTrace, ComparativeSiteIsMaximallyMixed) {
  auto rho = partial_trace(comparative_state(), {"A"});
  EXPECT_LT((rho.matrix() - Eigen::MatrixXcd::Identity(2, 2) * 0.5).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(rho.entropy(), std::log(2.0), 1e-12);
}

TEST(PartialTrace, ProductStateKeepsPureFactor) {
  auto s = make_basis_state(two_modes(1, 1), {{1, 0}, {}});
  auto rho = partial_trace(s, {"A"});
  EXPECT_NEAR(rho.matrix()(1, 1).real(), 1.0, 1e-15);
  EXPECT_NEAR(rho.purity(), 1.0, 1e-15);
  EXPECT_THROW(partial_trace(s, {}), LayoutError);
  EXPECT_THROW(partial_trace(s, {"C"}), LayoutError);
}

TEST(PartialTrace, MatchesBruteForceOracleOnMixedLayout) {
  ModeLayout layout({{"A", 2}, {"B", 1}}, {"q"});
  Rng rng(7);
  std::normal_distribution<double> g;
  Amplitudes amps(static_cast<Eigen::Index>(layout.dim()));
  for (auto& a : amps) a = Complex(g(rng), g(rng));
  PureState s = PureState(layout, amps).normalized();
  std::vector<oracle::C> psi(s.amplitudes().data(), s.amplitudes().data() + s.amplitudes().size());
  for (auto keep : {std::vector<std::string>{"A"}, {"B"}, {"q"}, {"A", "q"}, {"B", "q"}}) {
    std::vector<bool> mask{false, false, false};
    for (const auto& k : keep) mask[layout.subsystem(k)] = true;
    auto expected = oracle::partial_trace(psi, {3, 2, 3}, mask);
    auto rho = partial_trace(s, keep).matrix();
    for (std::size_t i = 0; i < expected.size(); ++i)
      for (std::size_t j = 0; j < expected.size(); ++j)
        EXPECT_LT(std::abs(rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - expected[i][j]), 1e-12);
  }
}

TEST(MeasureProjective, ComparativeOutcomes) {
  Rng rng(1);
  auto basis = comparison_basis();
  auto diff = measure_projective(basis[1].vector, basis, rng);
  EXPECT_EQ(diff.label, "different");
  EXPECT_NEAR(diff.probability, 1.0, 1e-15);
  auto same = measure_projective(comparative_state(), basis, rng);
  EXPECT_EQ(same.label, "same");

  Amplitudes mix = (basis[0].vector.amplitudes() + basis[1].vector.amplitudes()) / std::sqrt(2.0);
  auto probs = outcome_probabilities(PureState(basis[0].vector.layout(), mix), basis, ResidualPolicy::strict);
  ASSERT_EQ(probs.size(), 2u);
  EXPECT_NEAR(probs[0].probability, 0.5, 1e-12);
  EXPECT_NEAR(probs[1].probability, 0.5, 1e-12);
}

TEST(MeasureProjective, SampledFrequenciesFollowBornRule) {
  auto basis = comparison_basis();
  Amplitudes mix = (basis[0].vector.amplitudes() * std::sqrt(0.3) + basis[1].vector.amplitudes() * std::sqrt(0.7));
  PureState s(basis[0].vector.layout(), mix);
  Rng rng(2024);
  int same = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) same += measure_projective(s, basis, rng).label == "same";
  EXPECT_NEAR(same / double(n), 0.3, 3 * std::sqrt(0.21 / n));
}

TEST(MeasureProjective, ResidualPolicyAndBasisErrors) {
  Rng rng(3);
  auto layout = two_modes(1, 1);
  auto s = superpose(layout, {{1.0, {{0, 0}, {}}}, {1.0, {{1, 0}, {}}}});
  std::vector<BasisVector> partial{{"a", make_basis_state(layout, {{1, 0}, {}})}};
  EXPECT_THROW(measure_projective(s, partial, rng, ResidualPolicy::strict), IncompleteBasisError);
  auto probs = outcome_probabilities(s, partial);
  ASSERT_EQ(probs.size(), 2u);
  EXPECT_EQ(probs[1].label, kOutsideLabel);
  EXPECT_NEAR(probs[1].probability, 0.5, 1e-12);
  bool saw_outside = false;
  for (int i = 0; i < 50 && !saw_outside; ++i) {
    auto o = measure_projective(s, partial, rng);
    if (o.label == kOutsideLabel) {
      saw_outside = true;
      EXPECT_TRUE(equal_up_to_global_phase(o.state, make_basis_state(layout, {{0, 0}, {}})));
    }
  }
  EXPECT_TRUE(saw_outside);

  std::vector<BasisVector> skew{{"a", make_basis_state(layout, {{1, 0}, {}})}, {"b", s}};
  EXPECT_THROW(measure_projective(s, skew, rng), BasisError);
}

TEST(MeasureLocal, CollapsesOnlyTheMeasuredSite) {
  Rng rng(11);
  auto out = measure_local(comparative_state(), "A", {{"0", Eigen::Vector2cd(1, 0)}, {"1", Eigen::Vector2cd(0, 1)}}, rng);
  if (out.label == "1")
    EXPECT_TRUE(equal_up_to_global_phase(out.state, make_basis_state(out.state.layout(), {{1, 0}, {}})));
  else
    EXPECT_TRUE(equal_up_to_global_phase(out.state, make_basis_state(out.state.layout(), {{0, 1}, {}})));
  EXPECT_NEAR(out.probability, 0.5, 1e-12);
}

TEST(Expectation, TallyOperatorRecoversVoteSum) {
  const int N = 7;
  BallotParams p{N};
  auto s = apply_number_phase(survey_state(p), "V", [&](int n) { return n * 3 * p.delta(); });
  EXPECT_NEAR(expectation(s, tally_observable(p, s.layout())), 3.0, 1e-9);
  EXPECT_NEAR(expectation(survey_state(p), tally_observable(p, s.layout())), 0.0, 1e-12);
}

TEST(Expectation, CheatShiftedStateMatchesOverlapEnumeration) {
  const int N = 4;
  BallotParams p{N};
  const double phase = 1.5 * p.delta();
  const double oracle_value = oracle::tally_expectation(N, phase);
  EXPECT_NEAR(oracle_value, 1.6, 1e-12);  // frozen from the enumeration
  auto s = apply_number_phase(survey_state(p), "V", [&](int n) { return n * phase; });
  EXPECT_NEAR(expectation(s, tally_observable(p, s.layout())), oracle_value, 1e-12);
}

TEST(TotalNumber, FixedSectorAndPostCollusionState) {
  auto honest = total_number_distribution(survey_state({6}));
  ASSERT_EQ(honest.size(), 1u);
  EXPECT_NEAR(honest.at(6), 1.0, 1e-12);
  for (int N : {3, 7}) {
    auto psi = single_mode_phase_state(N, 0.4, true, "T");
    auto phi = single_mode_phase_state(N, 0.4, false, "V");
    auto dist = total_number_distribution(tensor_product(psi, phi));
    EXPECT_NEAR(dist.at(N), 1.0 / (N + 1), 1e-12);
    double total = 0;
    for (auto [n, p] : dist) total += p;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  auto dist3 = total_number_distribution(
      tensor_product(single_mode_phase_state(3, 1.1, true, "T"), single_mode_phase_state(3, 1.1, false, "V")));
  EXPECT_NEAR(dist3.at(3), 0.25, 1e-12);
}

TEST(GlobalPhase, CanonicalFormAndComparison) {
  auto s = survey_state({3});
  Amplitudes rotated = s.amplitudes() * std::polar(1.0, 1.234);
  PureState r(s.layout(), rotated);
  EXPECT_TRUE(equal_up_to_global_phase(s, r));
  EXPECT_LT(distance(canonical_phase(r), canonical_phase(s)), 1e-12);
  EXPECT_FALSE(equal_up_to_global_phase(s, apply_number_phase(s, "V", [](int n) { return 0.5 * n; })));
}

TEST(SchmidtSplit, ProductAndEntangledStates) {
  auto prod = tensor_product(single_mode_phase_state(3, 0.2, false, "A"), qutrit_vote_state(Vote::yes, 2));
  EXPECT_EQ(schmidt_rank(prod, {"A"}), 1);
  auto f = split_product(prod, {"A"});
  EXPECT_TRUE(equal_up_to_global_phase(f.kept, single_mode_phase_state(3, 0.2, false, "A")));
  EXPECT_TRUE(equal_up_to_global_phase(f.rest, qutrit_vote_state(Vote::yes, 2)));
  EXPECT_EQ(schmidt_rank(survey_state({3}), {"T"}), 4);
  EXPECT_THROW(split_product(survey_state({3}), {"T"}), InvariantError);
}

TEST(LocalOperator, PermutationOnOneMode) {
  Eigen::MatrixXcd shift = Eigen::MatrixXcd::Zero(2, 2);
  shift(0, 1) = shift(1, 0) = 1.0;
  auto s = apply_local_operator(make_basis_state(two_modes(1, 1), {{1, 0}, {}}), "B", shift);
  EXPECT_NEAR(std::abs(s.amplitude({{1, 1}, {}})), 1.0, 1e-15);
  EXPECT_THROW(apply_local_operator(s, "B", Eigen::MatrixXcd::Identity(3, 3)), LayoutError);
}

TEST(Serialization, RoundTripsThroughJson) {
  auto s = apply_conditional_spin_phase(tensor_product(agent_ballot_state({2}, 2), qutrit_vote_state(Vote::no, 2)),
                                        "V1", "q1", 0.3, 0.1);
  auto j = state_to_json(s);
  EXPECT_EQ(j["index_order"], kIndexOrder);
  auto back = state_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(back.layout() == s.layout());
  EXPECT_LT(distance(back, s), 1e-15);
  j["index_order"] = "column-major";
  EXPECT_THROW(state_from_json(j), ConfigError);
}
