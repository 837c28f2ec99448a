#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qballot/ballot_states.hpp"
#include "qballot/density.hpp"
#include "qballot/errors.hpp"
#include "qballot/measurement.hpp"
#include "qballot/protocols.hpp"
#include "qballot/rng.hpp"
#include "qballot/state.hpp"
#include "qballot/stats.hpp"

namespace qballot {

using ordered_json = nlohmann::ordered_json;

struct TrialPlan {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  bool keep_per_trial = false;
};

struct AttackReport {
  std::string attack;
  ordered_json params = ordered_json::object();
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<BinomialEstimate> estimates;
  ordered_json checks = ordered_json::object();  // exact (analytic) quantities and verdicts
  std::vector<ordered_json> per_trial;

  const BinomialEstimate& estimate(const std::string& name) const {
    for (const auto& e : estimates)
      if (e.name == name) return e;
    throw Error("report has no estimate '" + name + "'");
  }
};

inline int mod_floor(long long a, int m) { return static_cast<int>(((a % m) + m) % m); }

// ---------------------------------------------------------------------------
// Colluding voters on the two-site survey
// ---------------------------------------------------------------------------

struct CollusionResult {
  int recovered_tally = 0;
  PureState post_state;
  double theta_a = 0.0;
  double theta_b = 0.0;
};

/// Voter A measures site V in the discrete phase basis, the intermediate votes are
/// cast, then voter B measures again. The grid index difference is the intermediate
/// tally modulo N+1.
template <class Rng>
CollusionResult collusion_attack(const BallotParams& p, const std::vector<long long>& intermediate_votes, Rng& rng) {
  p.validate();
  const auto basis = phase_basis(p.N);
  auto first = measure_local(survey_state(p), kSurveySite, basis, rng, ResidualPolicy::strict);
  const int k_a = std::stoi(first.label);
  PureState s = std::move(first.state);
  for (auto nu : intermediate_votes) s = vote_operation(p, kSurveySite, nu)(s);
  auto second = measure_local(s, kSurveySite, basis, rng, ResidualPolicy::strict);
  const int k_b = std::stoi(second.label);
  return {mod_floor(k_b - k_a, p.modulus()), std::move(second.state), phase_grid_angle(p.N, k_a),
          phase_grid_angle(p.N, k_b)};
}

struct NumberCheck {
  bool detected = false;
  int sampled_total = 0;
  int expected_total = 0;
  double detection_probability = 0.0;  // exact: 1 - P(total = expected)
};

/// Tallyman's total-particle-number check. An honest ballot holds exactly K*N particles.
template <class Rng>
NumberCheck number_check(const PureState& post_state, const BallotParams& p, Rng& rng) {
  const int K = voting_mode_count(p, post_state.layout());
  NumberCheck r;
  r.expected_total = K * p.N;
  auto dist = total_number_distribution(post_state);
  std::vector<int> totals;
  std::vector<double> probs;
  for (const auto& [n, prob] : dist) {
    totals.push_back(n);
    probs.push_back(prob);
  }
  auto it = dist.find(r.expected_total);
  r.detection_probability = 1.0 - (it == dist.end() ? 0.0 : it->second);
  r.sampled_total = totals[sample_index(std::span<const double>(probs), rng)];
  r.detected = r.sampled_total != r.expected_total;
  return r;
}

inline AttackReport collusion_report(const BallotParams& p, const std::vector<long long>& intermediate_votes,
                                     const TrialPlan& plan) {
  long long total = 0;
  for (auto v : intermediate_votes) total += v;
  const int expected = mod_floor(total, p.modulus());

  AttackReport report;
  report.attack = "collude";
  report.params = {{"N", p.N}, {"intermediate_votes", intermediate_votes}};
  report.trials = plan.trials;
  report.seed = plan.seed;

  std::size_t recovered = 0;
  std::size_t detected = 0;
  double analytic_detection = 0.0;
  for (std::size_t t = 0; t < plan.trials; ++t) {
    auto rng = trial_rng(plan.seed, t);
    auto attack = collusion_attack(p, intermediate_votes, rng);
    auto check = number_check(attack.post_state, p, rng);
    recovered += attack.recovered_tally == expected;
    detected += check.detected;
    analytic_detection = check.detection_probability;
    if (plan.keep_per_trial)
      report.per_trial.push_back({{"trial", t},
                                  {"theta_a", attack.theta_a},
                                  {"theta_b", attack.theta_b},
                                  {"recovered_tally", attack.recovered_tally},
                                  {"total_number", check.sampled_total},
                                  {"detected", check.detected}});
  }
  report.estimates.push_back(estimate("recovery", recovered, plan.trials, 1.0));
  report.estimates.push_back(estimate("detection", detected, plan.trials, analytic_detection));
  report.checks["expected_tally"] = expected;
  report.checks["detection_formula"] = 1.0 - 1.0 / p.modulus();
  return report;
}

// ---------------------------------------------------------------------------
// Collusion against the multiparty ballot
// ---------------------------------------------------------------------------

namespace detail {

// Exact distribution of the attacker's grid difference given the other voter's vote.
inline std::vector<double> multiparty_difference_distribution(const BallotParams& p, long long nu) {
  const auto basis = phase_basis(p.N);
  const std::string attacker = voting_site(1);
  const std::string other = voting_site(2);
  const PureState initial = multiparty_survey_state(p);
  auto projections = local_projections(initial, attacker, basis);
  std::vector<double> dist(static_cast<std::size_t>(p.modulus()), 0.0);
  for (int k1 = 0; k1 <= p.N; ++k1) {
    const double p1 = projections[static_cast<std::size_t>(k1)].squaredNorm();
    if (p1 <= 0.0) continue;
    PureState s = vote_operation(p, other, nu)(PureState(initial.layout(), projections[static_cast<std::size_t>(k1)]).normalized());
    auto second = local_outcome_probabilities(s, attacker, basis, ResidualPolicy::strict);
    for (int k2 = 0; k2 <= p.N; ++k2)
      dist[static_cast<std::size_t>(mod_floor(k2 - k1, p.modulus()))] += p1 * second[static_cast<std::size_t>(k2)].probability;
  }
  return dist;
}

}  // namespace detail

/// The attacker holds voting site V1 and measures its phase before and after the other
/// voter (site V2) casts nu, drawn uniformly from 0..N. Reports the distribution of the
/// attacker's grid difference per nu, the analytic total-variation spread across nu,
/// a plug-in mutual-information estimate, and the number-check detection rate.
inline AttackReport multiparty_collusion_attempt(const BallotParams& p, const TrialPlan& plan) {
  p.validate();
  if (p.K < 2) throw ProtocolError("multiparty collusion needs K >= 2");
  const int M = p.modulus();
  const auto basis = phase_basis(p.N);
  const std::string attacker = voting_site(1);
  const std::string other = voting_site(2);

  AttackReport report;
  report.attack = "multiparty-collude";
  report.params = {{"N", p.N}, {"K", p.K}};
  report.trials = plan.trials;
  report.seed = plan.seed;

  std::vector<std::vector<double>> analytic;
  for (int nu = 0; nu <= p.N; ++nu) analytic.push_back(detail::multiparty_difference_distribution(p, nu));
  double tv_max = 0.0;
  for (int a = 0; a < M; ++a)
    for (int b = a + 1; b < M; ++b) {
      double tv = 0.0;
      for (int d = 0; d < M; ++d) tv += std::abs(analytic[a][d] - analytic[b][d]);
      tv_max = std::max(tv_max, 0.5 * tv);
    }

  std::vector<std::vector<std::size_t>> counts(M, std::vector<std::size_t>(M, 0));
  std::vector<std::size_t> per_nu(M, 0);
  std::size_t detected = 0;
  double detection_analytic = 0.0;
  const PureState initial = multiparty_survey_state(p);
  for (std::size_t t = 0; t < plan.trials; ++t) {
    auto rng = trial_rng(plan.seed, t);
    std::uniform_int_distribution<int> pick(0, p.N);
    const int nu = pick(rng);
    auto first = measure_local(initial, attacker, basis, rng, ResidualPolicy::strict);
    PureState s = vote_operation(p, other, nu)(first.state);
    auto second = measure_local(s, attacker, basis, rng, ResidualPolicy::strict);
    const int diff = mod_floor(std::stoi(second.label) - std::stoi(first.label), M);
    auto check = number_check(second.state, p, rng);
    detection_analytic = check.detection_probability;
    ++counts[nu][diff];
    ++per_nu[nu];
    detected += check.detected;
    if (plan.keep_per_trial)
      report.per_trial.push_back({{"trial", t},
                                  {"other_vote", nu},
                                  {"theta_first", phase_grid_angle(p.N, std::stoi(first.label))},
                                  {"theta_second", phase_grid_angle(p.N, std::stoi(second.label))},
                                  {"difference", diff},
                                  {"detected", check.detected}});
  }

  // Empirical spread: each per-outcome frequency difference against the pooled
  // frequency, bounded by 3 binomial sigma of a two-sample difference.
  std::vector<double> pooled(M, 0.0);
  for (int nu = 0; nu < M; ++nu)
    for (int d = 0; d < M; ++d) pooled[d] += static_cast<double>(counts[nu][d]) / static_cast<double>(plan.trials);
  double worst_excess = 0.0;  // max of |diff| - 3 sigma
  double empirical_tv_max = 0.0;
  for (int a = 0; a < M; ++a)
    for (int b = a + 1; b < M; ++b) {
      if (!per_nu[a] || !per_nu[b]) continue;
      double tv = 0.0;
      for (int d = 0; d < M; ++d) {
        const double fa = static_cast<double>(counts[a][d]) / static_cast<double>(per_nu[a]);
        const double fb = static_cast<double>(counts[b][d]) / static_cast<double>(per_nu[b]);
        const double sigma = std::sqrt(pooled[d] * (1.0 - pooled[d]) *
                                       (1.0 / static_cast<double>(per_nu[a]) + 1.0 / static_cast<double>(per_nu[b])));
        worst_excess = std::max(worst_excess, std::abs(fa - fb) - kDefaultZ * sigma);
        tv += std::abs(fa - fb);
      }
      empirical_tv_max = std::max(empirical_tv_max, 0.5 * tv);
    }

  // Plug-in mutual information I(nu; difference) in bits. Biased upward by roughly
  // (|nu|-1)(|d|-1) / (2 n ln 2) for finite samples.
  double mi = 0.0;
  for (int nu = 0; nu < M; ++nu)
    for (int d = 0; d < M; ++d) {
      if (!counts[nu][d]) continue;
      const double pj = static_cast<double>(counts[nu][d]) / static_cast<double>(plan.trials);
      const double pn = static_cast<double>(per_nu[nu]) / static_cast<double>(plan.trials);
      mi += pj * std::log2(pj / (pn * pooled[d]));
    }

  for (int nu = 0; nu < M; ++nu)
    for (int d = 0; d < M; ++d)
      report.estimates.push_back(estimate("difference=" + std::to_string(d) + "|vote=" + std::to_string(nu),
                                          counts[nu][d], per_nu[nu], analytic[nu][d]));
  report.estimates.push_back(estimate("detection", detected, plan.trials, detection_analytic));
  report.checks["analytic_tv_max"] = tv_max;
  report.checks["empirical_tv_max"] = empirical_tv_max;
  report.checks["empirical_excess_over_3sigma"] = worst_excess;
  report.checks["indistinguishable"] = tv_max < kAlgebraTol && worst_excess <= 0.0;
  report.checks["mutual_information_bits"] = mi;
  report.checks["mutual_information_bias_bits"] =
      static_cast<double>((M - 1) * (M - 1)) / (2.0 * static_cast<double>(plan.trials) * std::log(2.0));
  return report;
}

// ---------------------------------------------------------------------------
// Ballot agents measuring spin
// ---------------------------------------------------------------------------

struct SpinAttackResult {
  std::optional<Vote> learned;  // empty: outcome 0, nothing learned
  int spin = 0;
  PureState post_qutrits;
};

/// Agent 1 measures sigma_z on its qutrit of an honest vote register. Spin +1 or -1
/// reveals the vote; spin 0 reveals nothing.
template <class Rng>
SpinAttackResult agent_spin_attack(Vote vote, int width, Rng& rng) {
  auto outcome = measure_local(qutrit_vote_state(vote, width), qutrit_site(1), spin_z_basis(), rng,
                               ResidualPolicy::strict);
  const int spin = std::stoi(outcome.label);
  std::optional<Vote> learned;
  if (spin == 1) learned = Vote::yes;
  if (spin == -1) learned = Vote::no;
  return {learned, spin, std::move(outcome.state)};
}

struct SpinAttackAnalysis {
  double reveal_probability = 0.0;
  double tamper_after_attack = 0.0;
  double tamper_without_attack = 0.0;
  // P(vote = yes | spin 0) with a uniform prior.
  double posterior_yes_given_zero = 0.0;
};

// Exact Born-rule values for the spin attack.
inline SpinAttackAnalysis analyze_spin_attack(Vote vote, int width) {
  const PureState prepared = qutrit_vote_state(vote, width);
  const auto basis = spin_z_basis();
  auto projections = detail::local_projections(prepared, qutrit_site(1), basis);
  SpinAttackAnalysis a;
  for (std::size_t k = 0; k < projections.size(); ++k) {
    const double pk = projections[k].squaredNorm();
    if (pk <= 0.0) continue;
    if (basis[k].label != "0") a.reveal_probability += pk;
    a.tamper_after_attack += pk * tamper_probability(PureState(prepared.layout(), projections[k]), prepared);
  }
  a.tamper_without_attack = tamper_probability(prepared, prepared);

  auto zero_prob = [&](Vote v) {
    auto probs = local_outcome_probabilities(qutrit_vote_state(v, width), qutrit_site(1), basis);
    return probs[1].probability;
  };
  const double py = zero_prob(Vote::yes);
  const double pn = zero_prob(Vote::no);
  a.posterior_yes_given_zero = py / (py + pn);
  return a;
}

inline AttackReport agent_spin_report(Vote vote, int width, const TrialPlan& plan) {
  const auto exact = analyze_spin_attack(vote, width);
  const PureState prepared = qutrit_vote_state(vote, width);
  AttackReport report;
  report.attack = "agent-spin";
  report.params = {{"vote", to_string(vote)}, {"width", width}};
  report.trials = plan.trials;
  report.seed = plan.seed;

  std::size_t revealed = 0;
  std::size_t tampered_after = 0;
  std::size_t tampered_before = 0;
  std::size_t wrong = 0;
  for (std::size_t t = 0; t < plan.trials; ++t) {
    auto rng = trial_rng(plan.seed, t);
    const auto untouched = tamper_check(prepared, prepared, rng);
    auto attack = agent_spin_attack(vote, width, rng);
    const auto verdict = tamper_check(attack.post_qutrits, prepared, rng);
    revealed += attack.learned.has_value();
    wrong += attack.learned.has_value() && *attack.learned != vote;
    tampered_before += untouched == TamperVerdict::tampered;
    tampered_after += verdict == TamperVerdict::tampered;
    if (plan.keep_per_trial)
      report.per_trial.push_back({{"trial", t},
                                  {"spin", attack.spin},
                                  {"learned", attack.learned ? to_string(*attack.learned) : "nothing"},
                                  {"tamper_check", to_string(verdict)}});
  }
  report.estimates.push_back(estimate("reveal", revealed, plan.trials, exact.reveal_probability));
  report.estimates.push_back(estimate("tamper_after_attack", tampered_after, plan.trials, exact.tamper_after_attack));
  report.estimates.push_back(estimate("tamper_without_attack", tampered_before, plan.trials, exact.tamper_without_attack));
  report.checks["posterior_yes_given_zero"] = exact.posterior_yes_given_zero;
  report.checks["wrong_reveals"] = wrong;
  return report;
}

// ---------------------------------------------------------------------------
// Voter preparing the cheat state |1,1>
// ---------------------------------------------------------------------------

struct CheatAnalysis {
  double delta = 0.0;
  double cheat_advance = 0.0;   // per occupation quantum
  double honest_advance = 0.0;  // honest yes, for contrast
  double ramp_spread = 0.0;     // deviation of the cheat ballot from a linear phase ramp
  double spin_plus_probability = 0.0;  // agent sigma_z on a cheat qutrit gives +1
  double post_measurement_fidelity = 0.0;
  double tamper_probability = 0.0;  // voter's check of the returned cheat register

  double cheat_votes() const { return cheat_advance / delta; }
  double relative_error() const { return std::abs(cheat_votes() - 1.5) / 1.5; }
};

// Exact cheat-state analysis on a 2-agent ballot.
inline CheatAnalysis analyze_cheat_vote(const BallotParams& p) {
  CheatAnalysis a;
  a.delta = p.delta();

  auto cheat_session = BallotSession::binary_agent(p, 2);
  auto receipt = cheat_session.cast_binary("cheater", cheat_vote_state());
  a.cheat_advance = receipt.phase_advance;
  per_quantum_phase(cheat_session.params(), cheat_session.state(), &a.ramp_spread);

  auto honest_session = BallotSession::binary_agent(p, 2);
  a.honest_advance = honest_session.cast_binary("honest", qutrit_vote_state(Vote::yes, 2)).phase_advance;

  const PureState& returned = receipt.returned_qutrits;
  auto projections = detail::local_projections(returned, qutrit_site(1), spin_z_basis());
  a.spin_plus_probability = projections[2].squaredNorm();
  a.post_measurement_fidelity = fidelity(PureState(returned.layout(), projections[2]).normalized(), returned);
  a.tamper_probability = qballot::tamper_probability(returned, cheat_vote_state());
  return a;
}

inline AttackReport cheat_vote_analysis(const BallotParams& p, int width, const TrialPlan& plan) {
  if (width != 2) throw ProtocolError("the cheat state is defined for 2-agent ballots");
  const auto exact = analyze_cheat_vote(p);
  AttackReport report;
  report.attack = "cheat-voter";
  report.params = {{"N", p.N}, {"agents", 2}};
  report.trials = plan.trials;
  report.seed = plan.seed;

  const PureState cheat = cheat_vote_state();
  std::size_t plus = 0;
  std::size_t undisturbed = 0;
  std::size_t clean = 0;
  for (std::size_t t = 0; t < plan.trials; ++t) {
    auto rng = trial_rng(plan.seed, t);
    auto outcome = measure_local(cheat, qutrit_site(1), spin_z_basis(), rng, ResidualPolicy::strict);
    plus += outcome.label == "1";
    undisturbed += fidelity(outcome.state, cheat) > 1.0 - kAlgebraTol;
    clean += tamper_check(outcome.state, cheat, rng) == TamperVerdict::clean;
    if (plan.keep_per_trial) report.per_trial.push_back({{"trial", t}, {"spin", std::stoi(outcome.label)}});
  }
  report.estimates.push_back(estimate("agent_spin_plus", plus, plan.trials, exact.spin_plus_probability));
  report.estimates.push_back(estimate("undisturbed", undisturbed, plan.trials, exact.post_measurement_fidelity));
  report.estimates.push_back(estimate("tamper_clean", clean, plan.trials, 1.0 - exact.tamper_probability));
  report.checks["delta"] = exact.delta;
  report.checks["cheat_votes"] = exact.cheat_votes();
  report.checks["cheat_relative_error"] = exact.relative_error();
  report.checks["honest_votes"] = exact.honest_advance / exact.delta;
  report.checks["phase_ramp_spread"] = exact.ramp_spread;
  report.checks["post_measurement_fidelity"] = exact.post_measurement_fidelity;
  report.checks["tradeoff_holds"] = exact.relative_error() < kAlgebraTol &&
                                    std::abs(exact.spin_plus_probability - 1.0) < kAlgebraTol &&
                                    exact.tamper_probability < kAlgebraTol;
  return report;
}

}  // namespace qballot
