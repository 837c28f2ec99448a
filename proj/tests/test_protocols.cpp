#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qballot/qballot.hpp"

using namespace qballot;

namespace {

int run_survey(int N, const std::vector<long long>& votes, std::uint64_t seed = 1) {
  auto s = BallotSession::survey({N});
  for (std::size_t i = 0; i < votes.size(); ++i) s.cast("voter" + std::to_string(i), votes[i]);
  s.transfer_to_tallyman();
  Rng rng(seed);
  return s.tally(rng).tally;
}

}  // namespace

TEST(Comparative, AllFourVotePairs) {
  Rng rng(7);
  for (auto a : {Vote::no, Vote::yes})
    for (auto b : {Vote::no, Vote::yes}) {
      auto r = comparative_run(a, b, rng);
      EXPECT_EQ(r.verdict, a == b ? Comparison::same : Comparison::different);
      EXPECT_NEAR(r.probability, 1.0, 1e-12);
    }
}

TEST(Survey, ZeroVoteLeavesStateUnchanged) {
  auto s = BallotSession::survey({5});
  auto before = s.state();
  s.cast("alice", 0);
  EXPECT_LT(distance(s.state(), before), 1e-15);
}

TEST(Survey, TwoVotesGiveTallyBasisVector) {
  BallotParams p{7};
  auto s = BallotSession::survey(p);
  s.cast("alice", 2);
  s.cast("bob", 1);
  auto basis = tally_basis(p, s.state().layout());
  EXPECT_TRUE(equal_up_to_global_phase(s.state(), basis[3].state));
  s.transfer_to_tallyman();
  Rng rng(3);
  auto r = s.tally(rng);
  EXPECT_EQ(r.tally, 3);
  EXPECT_NEAR(r.raw_expectation, 3.0, 1e-9);
  EXPECT_NEAR(r.outcome_probability, 1.0, 1e-12);
  EXPECT_NEAR(r.outside_probability, 0.0, 1e-12);
}

TEST(Survey, TallyExamples) {
  EXPECT_EQ(run_survey(4, {3, 4}), 2);
  EXPECT_EQ(run_survey(10, {3, 4, 2}), 9);
  EXPECT_EQ(run_survey(6, {}), 0);
  EXPECT_EQ(run_survey(6, {-1}), 6);
}

TEST(Survey, RandomVotesTallyToModularSum) {
  std::mt19937_64 gen(2024);
  for (int N : {4, 7, 10}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::uniform_int_distribution<int> count(0, N);
      std::uniform_int_distribution<long long> vote(0, 3 * N);
      std::vector<long long> votes(static_cast<std::size_t>(count(gen)));
      long long sum = 0;
      for (auto& v : votes) sum += (v = vote(gen));
      EXPECT_EQ(run_survey(N, votes, gen()), static_cast<int>(sum % (N + 1)));
    }
  }
}

TEST(Survey, PrivacyFingerprintsStayUniform) {
  BallotParams p{5};
  auto s = BallotSession::survey(p);
  for (int i = 0; i < 4; ++i) {
    s.cast("v" + std::to_string(i), i + 2);
    EXPECT_LT(s.privacy_deviation(), 1e-12);
    for (const auto& [site, ev] : s.fingerprints())
      for (double e : ev) EXPECT_NEAR(e, 1.0 / 6.0, 1e-12);
  }
}

TEST(Survey, ProtocolErrors) {
  auto s = BallotSession::survey({2});
  s.cast("alice", 1);
  EXPECT_THROW(s.cast("alice", 1), ProtocolError);
  Rng rng(1);
  EXPECT_THROW(s.tally(rng), ProtocolError);
  s.cast("bob", 1);
  EXPECT_THROW(s.cast("carol", 1), ProtocolError);  // at most N voters
  s.transfer_to_tallyman();
  EXPECT_THROW(s.transfer_to_tallyman(), ProtocolError);
  EXPECT_THROW(s.cast("dave", 0), ProtocolError);
  s.tally(rng);
  EXPECT_THROW(s.tally(rng), ProtocolError);
  EXPECT_THROW(s.cast_binary("erin", qutrit_vote_state(Vote::yes, 2)), ProtocolError);
}

TEST(Survey, AuditAccumulatorMatchesTally) {
  BallotParams p{8};
  auto s = BallotSession::survey(p, {.audit = true});
  s.cast("a", 5);
  s.cast("b", 7);
  EXPECT_NEAR(std::fmod(*s.phase_accumulator(), 2 * std::numbers::pi), 3 * p.delta(), 1e-12);
  ASSERT_EQ(s.vote_log().size(), 2u);
  EXPECT_EQ(s.vote_log()[1].value, "7");
}

TEST(Multiparty, VotesOnDistinctSites) {
  BallotParams p{4, 3};
  auto s = BallotSession::multiparty(p);
  s.cast("a", 2);
  s.cast("b", 1);
  s.cast("c", 4);
  EXPECT_EQ(*s.site_of("b"), "V2");
  EXPECT_THROW(s.cast("d", 1), ProtocolError);  // min(N, K) voters
  s.transfer_to_tallyman();
  Rng rng(9);
  EXPECT_EQ(s.tally(rng).tally, 7 % 5);
}

TEST(BinaryAgent, HonestVotesAdvancePhaseByDeltaOrZero) {
  BallotParams p{4};
  for (int agents : {2, 3}) {
    auto s = BallotSession::binary_agent(p, agents);
    const auto yes = qutrit_vote_state(Vote::yes, agents);
    auto r = s.cast_binary("alice", yes);
    EXPECT_NEAR(r.phase_advance, p.delta(), 1e-12);
    EXPECT_TRUE(equal_up_to_global_phase(r.returned_qutrits, yes));
    EXPECT_NEAR(tamper_probability(r.returned_qutrits, yes), 0.0, 1e-12);

    const auto no = qutrit_vote_state(Vote::no, agents);
    auto rn = s.cast_binary("bob", no);
    EXPECT_NEAR(std::min(rn.phase_advance, 2 * std::numbers::pi - rn.phase_advance), 0.0, 1e-12);
    EXPECT_TRUE(equal_up_to_global_phase(rn.returned_qutrits, no));
  }
}

TEST(BinaryAgent, TallyCountsYesVotes) {
  BallotParams p{5};
  auto s = BallotSession::binary_agent(p, 3);
  const Vote votes[] = {Vote::yes, Vote::no, Vote::yes, Vote::yes};
  for (int i = 0; i < 4; ++i) s.cast_binary("v" + std::to_string(i), qutrit_vote_state(votes[i], 3));
  s.transfer_to_tallyman();
  Rng rng(11);
  EXPECT_EQ(s.tally(rng).tally, 3);
}

TEST(BinaryAgent, CheatStateAdvancesOneAndAHalfVotes) {
  BallotParams p{4};
  auto s = BallotSession::binary_agent(p, 2, {.audit = true});
  auto r = s.cast_binary("mallory", cheat_vote_state());
  EXPECT_NEAR(r.phase_advance, 1.5 * p.delta(), 1e-12);
  EXPECT_EQ(s.vote_log().front().value, "cheat");
  s.transfer_to_tallyman();
  Rng rng(5);
  auto t = s.tally(rng);
  EXPECT_NEAR(t.raw_expectation, oracle::tally_expectation(4, 1.5 * oracle::theta(4)), 1e-12);
}

TEST(BinaryAgent, WidthMismatch) {
  auto s = BallotSession::binary_agent({3}, 3);
  EXPECT_THROW(s.cast_binary("a", qutrit_vote_state(Vote::yes, 2)), ProtocolError);
  EXPECT_THROW(s.cast("a", 1), ProtocolError);
}

TEST(TamperCheck, UntouchedIsCleanMeasuredIsDetected) {
  Rng rng(13);
  for (int w : {2, 3})
    for (auto v : {Vote::yes, Vote::no}) {
      auto prepared = qutrit_vote_state(v, w);
      for (int i = 0; i < 50; ++i) EXPECT_EQ(tamper_check(prepared, v, w, rng), TamperVerdict::clean);
    }
  // A register collapsed onto one branch overlaps the prepared state with weight 1/w.
  auto collapsed = make_basis_state(qutrit_layout(2), {{}, {1, 0}});
  EXPECT_NEAR(tamper_probability(collapsed, qutrit_vote_state(Vote::yes, 2)), 0.5, 1e-12);
  auto basis = tamper_basis(qutrit_vote_state(Vote::yes, 3), 3);
  EXPECT_EQ(basis.size(), 27u);
  EXPECT_NO_THROW(outcome_probabilities(qutrit_vote_state(Vote::no, 3), basis, ResidualPolicy::strict));
}

TEST(Omega, SameOperatorVotersAreAnonymous) {
  BallotParams p{6};
  auto b0 = survey_state(p);
  auto ya = vote_operation(p, "V", 2);
  auto yb = vote_operation(p, "V", 2);
  EXPECT_LT(anonymity_gap(ya, yb, b0), 1e-12);
  EXPECT_GT(anonymity_gap(vote_operation(p, "V", 1), identity_operation(), b0), 0.1);
}

TEST(Omega, CheatGapEqualsOmegaAndFidelityOne) {
  BallotParams p{6};
  auto b0 = survey_state(p);
  for (long long nu : {0, 1, 3}) {
    auto ya = vote_operation(p, "V", nu);
    auto yb = vote_operation(p, "V", 1);
    EXPECT_NEAR(cheat_gap(ya, yb, b0), anonymity_gap(ya, yb, b0), 1e-12);
    EXPECT_NEAR(cheat_gap(ya, yb, b0, NormConvention::squared), anonymity_gap(ya, yb, b0, NormConvention::squared),
                1e-12);
  }
  // Omega = 0: Bob cannot tell Y_B Y_A from Y_B^2.
  auto ya = vote_operation(p, "V", 2);
  auto yb = vote_operation(p, "V", 2);
  EXPECT_LT(cheat_gap(ya, yb, b0), 1e-12);
  EXPECT_NEAR(fidelity(yb(ya(b0)), yb(yb(b0))), 1.0, 1e-12);
}

TEST(Omega, AnalyticGapForSingleVoteShift) {
  // || (e^{i n d} - 1) c_n || summed: sqrt( sum_n |e^{i n d} - 1|^2 / (N+1) ).
  BallotParams p{5};
  double expected = 0.0;
  for (int n = 0; n <= 5; ++n) expected += std::norm(std::polar(1.0, n * p.delta()) - 1.0) / 6.0;
  EXPECT_NEAR(anonymity_gap(vote_operation(p, "V", 1), identity_operation(), survey_state(p)), std::sqrt(expected),
              1e-12);
}

TEST(Omega, CommutatorChecks) {
  BallotParams p{2, 2};
  auto survey = survey_state(p);
  EXPECT_LT(commutator_check(vote_operation(p, "V", 1), vote_operation(p, "V", 2), survey), 1e-12);
  auto multi = multiparty_survey_state(p);
  EXPECT_LT(commutator_check(vote_operation(p, "V1", 1), vote_operation(p, "V2", 2), multi), 1e-12);

  // Cyclic shift |n> -> |n+1 mod 3> on a 3-dim mode does not commute with a phase shift.
  Eigen::MatrixXcd shift = Eigen::MatrixXcd::Zero(3, 3);
  shift(1, 0) = shift(2, 1) = shift(0, 2) = 1.0;
  Operation permute = [shift](const PureState& s) { return apply_local_operator(s, "V", shift); };
  EXPECT_GT(commutator_check(vote_operation(p, "V", 1), permute, survey), 0.1);
}

TEST(Transcript, EventsAndFingerprints) {
  auto s = BallotSession::survey({3}, {.audit = true});
  s.cast("alice", 1);
  s.cast("bob", 1);
  s.transfer_to_tallyman();
  Rng rng(1);
  s.tally(rng);
  auto j = transcript_to_json(s);
  EXPECT_EQ(j["kind"], "survey");
  ASSERT_EQ(j["events"].size(), 4u);
  EXPECT_EQ(j["events"][0]["voter"], "alice");
  EXPECT_EQ(j["events"][0]["value"], "1");
  EXPECT_EQ(j["events"][2]["type"], "transfer");
  EXPECT_EQ(j["final_tally"]["tally"], 2);

  auto quiet = BallotSession::survey({3});
  quiet.cast("alice", 1);
  EXPECT_FALSE(transcript_to_json(quiet)["events"][0].contains("value"));
}
