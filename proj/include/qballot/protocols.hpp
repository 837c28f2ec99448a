#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qballot/ballot_states.hpp"
#include "qballot/density.hpp"
#include "qballot/errors.hpp"
#include "qballot/measurement.hpp"
#include "qballot/state.hpp"

namespace qballot {

// ---------------------------------------------------------------------------
// Comparative ballot
// ---------------------------------------------------------------------------

enum class Comparison { same, different };

inline std::string to_string(Comparison c) { return c == Comparison::same ? "same" : "different"; }

struct ComparativeResult {
  Comparison verdict = Comparison::same;
  double probability = 0.0;  // probability of the returned verdict
};

// |C0> = same, |C1> = (|1,0> - |0,1>)/sqrt(2) = different.
inline std::vector<BasisVector> comparison_basis() {
  ModeLayout layout({{"A", 1}, {"B", 1}});
  return {{"same", comparative_state()}, {"different", superpose(layout, {{1.0, {{1, 0}, {}}}, {-1.0, {{0, 1}, {}}}})}};
}

namespace detail {

inline DensityMatrix maximally_mixed_qubit_mode(const std::string& site) {
  return DensityMatrix(ModeLayout({{site, 1}}), Eigen::MatrixXcd::Identity(2, 2) * 0.5);
}

inline void require_private(const PureState& state, const std::string& site, const DensityMatrix& expected) {
  if (trace_distance(partial_trace(state, {site}), expected) >= kAlgebraTol)
    throw InvariantError("reduced state at site '" + site + "' changed by a vote");
}

}  // namespace detail

/// Two voters share |C0>; a yes vote applies exp(i pi N) on the voter's site. The
/// tallyman measures in {|C0>, |C1>}. Every step verifies both sites still see I/2.
template <class Rng>
ComparativeResult comparative_run(Vote vote_a, Vote vote_b, Rng& rng) {
  const auto mixed_a = detail::maximally_mixed_qubit_mode("A");
  const auto mixed_b = detail::maximally_mixed_qubit_mode("B");
  auto yes_vote = [](int n) { return std::numbers::pi * n; };

  PureState state = comparative_state();
  if (vote_a == Vote::yes) state = apply_number_phase(state, "A", yes_vote);
  detail::require_private(state, "A", mixed_a);
  detail::require_private(state, "B", mixed_b);
  if (vote_b == Vote::yes) state = apply_number_phase(state, "B", yes_vote);
  detail::require_private(state, "A", mixed_a);
  detail::require_private(state, "B", mixed_b);

  auto outcome = measure_projective(state, comparison_basis(), rng, ResidualPolicy::strict);
  return {outcome.label == "same" ? Comparison::same : Comparison::different, outcome.probability};
}

// ---------------------------------------------------------------------------
// Survey, multiparty survey and agent ballots
// ---------------------------------------------------------------------------

enum class BallotKind { comparative, survey, multiparty_survey, binary_agent };

inline std::string to_string(BallotKind k) {
  switch (k) {
    case BallotKind::comparative: return "comparative";
    case BallotKind::survey: return "survey";
    case BallotKind::multiparty_survey: return "multiparty-survey";
    case BallotKind::binary_agent: return "binary-agent";
  }
  return "unknown";
}

struct SessionOptions {
  bool audit = false;       // keep the vote log and the expected phase
  bool self_check = true;   // verify per-site privacy after every cast
  ResidualPolicy residual = ResidualPolicy::allow;
};

struct VoteRecord {
  std::string voter;
  std::string value;
};

// Eigenvalues (ascending) of the reduced state at each party-accessible site.
using Fingerprints = std::map<std::string, std::vector<double>>;

struct SessionEvent {
  std::string type;  // cast | transfer | tally
  std::string voter;
  std::string site;
  std::optional<std::string> value;  // audit mode only
  Fingerprints fingerprints;
};

struct TallyResult {
  int tally = -1;  // -1 when the outcome fell outside the tally subspace
  double raw_expectation = 0.0;
  double outcome_probability = 0.0;
  std::map<int, double> outcome_distribution;
  double outside_probability = 0.0;
};

// Receipt of an agent-ballot cast: the qutrits handed back to the voter.
struct AgentCastReceipt {
  PureState returned_qutrits;
  double phase_advance = 0.0;  // per occupation quantum, in radians
};

// Agent operation coefficients (a, b) in exp(i N delta (a + b sigma_z)).
inline std::pair<double, double> agent_coefficients(int agents) {
  return {1.0 / (2.0 * agents), 0.5};
}

/// Relative phase per occupation quantum between consecutive ballot branches,
/// averaged over k as arg(c_k / c_0) / k, mapped to [0, 2 pi). `max_spread` receives
/// the largest deviation from a linear phase ramp.
inline double per_quantum_phase(const BallotParams& p, const PureState& state, double* max_spread = nullptr) {
  auto c = branch_amplitudes(p, state);
  const double two_pi = 2.0 * std::numbers::pi;
  double phi = std::arg(c[1] / c[0]);
  if (phi < 0.0) phi += two_pi;
  if (max_spread) {
    double spread = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      Complex expect = c[0] * std::polar(1.0, phi * static_cast<double>(k));
      spread = std::max(spread, std::abs(c[k] - expect));
    }
    *max_spread = spread;
  }
  return phi;
}

class BallotSession {
 public:
  static BallotSession survey(const BallotParams& p, SessionOptions opts = {}) {
    return BallotSession(BallotKind::survey, BallotParams{p.N, 1}, 0, survey_state(p), opts);
  }

  static BallotSession multiparty(const BallotParams& p, SessionOptions opts = {}) {
    return BallotSession(BallotKind::multiparty_survey, p, 0, multiparty_survey_state(p), opts);
  }

  static BallotSession binary_agent(const BallotParams& p, int agents, SessionOptions opts = {}) {
    return BallotSession(BallotKind::binary_agent, BallotParams{p.N, agents}, agents, agent_ballot_state(p, agents),
                         opts);
  }

  BallotKind kind() const noexcept { return kind_; }
  const BallotParams& params() const noexcept { return params_; }
  const PureState& state() const noexcept { return state_; }
  const SessionOptions& options() const noexcept { return options_; }
  int agents() const noexcept { return agents_; }
  bool transferred() const noexcept { return transferred_; }
  int votes_cast() const noexcept { return static_cast<int>(voters_.size()); }
  const std::vector<VoteRecord>& vote_log() const noexcept { return vote_log_; }
  const std::vector<SessionEvent>& events() const noexcept { return events_; }
  const std::optional<TallyResult>& result() const noexcept { return result_; }

  // Expected accumulated phase from the logged votes (audit mode).
  std::optional<double> phase_accumulator() const { return phase_accumulator_; }

  int max_voters() const {
    switch (kind_) {
      case BallotKind::multiparty_survey: return std::min(params_.N, params_.K);
      default: return params_.N;
    }
  }

  // Site used by `voter`, if they have cast.
  std::optional<std::string> site_of(const std::string& voter) const {
    for (const auto& [v, s] : voters_)
      if (v == voter) return s;
    return std::nullopt;
  }

  /// Survey vote of integer amount nu: exp(i N_site 2 pi nu / (N+1)) on the voter's site.
  void cast(const std::string& voter, long long nu) {
    if (kind_ != BallotKind::survey && kind_ != BallotKind::multiparty_survey)
      throw ProtocolError("integer votes need a survey session");
    const std::string site = admit(voter);
    const double angle = params_.delta() * static_cast<double>(nu % params_.modulus());
    state_ = apply_number_phase(state_, site, [angle](int n) { return angle * n; });
    if (phase_accumulator_) *phase_accumulator_ += angle;
    if (options_.audit) vote_log_.push_back({voter, std::to_string(nu)});
    finish_cast(voter, site, std::to_string(nu));
  }

  /// Agent ballot vote. Agent i applies exp(i N_Vi delta (a + b sigma_z^(i))) to its
  /// voting mode and qutrit i. The qutrits must come back unentangled; they are returned.
  AgentCastReceipt cast_binary(const std::string& voter, const PureState& vote_state) {
    if (kind_ != BallotKind::binary_agent) throw ProtocolError("qutrit votes need a binary-agent session");
    if (!(vote_state.layout() == qutrit_layout(agents_)))
      throw ProtocolError("vote register width does not match the number of agents");
    const std::string site = admit(voter);
    const auto [a, b] = agent_coefficients(agents_);
    const double d = params_.delta();

    PureState joint = tensor_product(state_, vote_state);
    for (int i = 1; i <= agents_; ++i)
      joint = apply_conditional_spin_phase(joint, voting_site(i), qutrit_site(i), a * d, b * d);

    std::vector<std::string> ballot_sites;
    for (const auto& m : state_.layout().modes()) ballot_sites.push_back(m.label);
    auto factors = split_product(joint, ballot_sites);

    const double before = per_quantum_phase(params_, state_);
    const double after = per_quantum_phase(params_, factors.kept);
    double advance = std::remainder(after - before, 2.0 * std::numbers::pi);
    if (advance < 0.0) advance += 2.0 * std::numbers::pi;
    state_ = std::move(factors.kept);

    const std::string label = classify_vote(vote_state);
    if (phase_accumulator_) {
      if (label == "yes")
        *phase_accumulator_ += d;
      else if (label == "cheat")
        *phase_accumulator_ += 1.5 * d;
      else if (label != "no")
        phase_accumulator_.reset();
    }
    if (options_.audit) vote_log_.push_back({voter, label});
    finish_cast(voter, site, label);
    return {std::move(factors.rest), advance};
  }

  // Moves every voting mode to the tallyman (lossless relabel V -> T:V).
  void transfer_to_tallyman() {
    if (transferred_) throw ProtocolError("modes already transferred");
    const auto& modes = state_.layout().modes();
    std::vector<std::string> voting;
    for (std::size_t i = 1; i < modes.size(); ++i) voting.push_back(modes[i].label);
    for (const auto& v : voting) state_ = relabel(state_, v, std::string(kTallySite) + ":" + v);
    transferred_ = true;
    events_.push_back({"transfer", "", "", std::nullopt, {}});
  }

  /// Projective measurement in the tally basis; the raw expectation of the tally
  /// operator is reported alongside. Collapses the ballot.
  template <class Rng>
  TallyResult tally(Rng& rng) {
    if (!transferred_) throw ProtocolError("tally requested before the modes reached the tallyman");
    if (result_) throw ProtocolError("ballot already tallied");
    auto basis = tally_measurement_basis(params_, state_.layout());
    TallyResult r;
    r.raw_expectation = expectation(state_, tally_observable(params_, state_.layout()));
    auto outcome = measure_projective(state_, basis, rng, options_.residual);
    for (const auto& o : outcome.distribution) {
      if (o.label == kOutsideLabel)
        r.outside_probability = o.probability;
      else
        r.outcome_distribution[std::stoi(o.label)] = o.probability;
    }
    r.tally = outcome.label == kOutsideLabel ? -1 : std::stoi(outcome.label);
    r.outcome_probability = outcome.probability;
    state_ = std::move(outcome.state);
    result_ = r;
    events_.push_back({"tally", "", "", std::nullopt, {}});
    return r;
  }

  // Reduced-state eigenvalues at every mode site.
  Fingerprints fingerprints() const {
    Fingerprints fp;
    for (const auto& m : state_.layout().modes()) {
      auto ev = partial_trace(state_, {m.label}).eigenvalues();
      fp[m.label] = std::vector<double>(ev.data(), ev.data() + ev.size());
    }
    return fp;
  }

  // Largest trace distance between any site's current reduced state and its initial one.
  double privacy_deviation() const {
    double worst = 0.0;
    for (const auto& [site, rho] : initial_reduced_)
      worst = std::max(worst, trace_distance(partial_trace(state_, {site}), rho));
    return worst;
  }

 private:
  BallotSession(BallotKind kind, BallotParams p, int agents, PureState initial, SessionOptions opts)
      : kind_(kind), params_(p), agents_(agents), state_(std::move(initial)), options_(opts) {
    params_.validate();
    if (options_.audit) phase_accumulator_ = 0.0;
    for (const auto& m : state_.layout().modes())
      initial_reduced_.emplace_back(m.label, partial_trace(state_, {m.label}));
  }

  std::string admit(const std::string& voter) {
    if (transferred_) throw ProtocolError("voting closed: modes already transferred");
    if (site_of(voter)) throw ProtocolError("voter '" + voter + "' has already voted");
    if (votes_cast() >= max_voters())
      throw ProtocolError("session admits at most " + std::to_string(max_voters()) + " voters");
    switch (kind_) {
      case BallotKind::survey: return kSurveySite;
      case BallotKind::multiparty_survey: return voting_site(votes_cast() + 1);
      default: return "";  // agent ballots act on every voting site
    }
  }

  void finish_cast(const std::string& voter, const std::string& site, const std::string& value) {
    voters_.emplace_back(voter, site);
    if (options_.self_check && privacy_deviation() >= kAlgebraTol)
      throw InvariantError("a cast changed a reduced state visible to a single party");
    events_.push_back({"cast", voter, site, options_.audit ? std::optional(value) : std::nullopt, fingerprints()});
  }

  std::string classify_vote(const PureState& v) const {
    auto matches = [&](const PureState& ref) { return equal_up_to_global_phase(v, ref); };
    if (matches(qutrit_vote_state(Vote::yes, agents_))) return "yes";
    if (matches(qutrit_vote_state(Vote::no, agents_))) return "no";
    if (agents_ == 2 && matches(cheat_vote_state())) return "cheat";
    return "other";
  }

  BallotKind kind_;
  BallotParams params_;
  int agents_ = 0;
  PureState state_;
  SessionOptions options_;
  bool transferred_ = false;
  std::vector<std::pair<std::string, std::string>> voters_;
  std::vector<VoteRecord> vote_log_;
  std::vector<SessionEvent> events_;
  std::optional<double> phase_accumulator_;
  std::optional<TallyResult> result_;
  std::vector<std::pair<std::string, DensityMatrix>> initial_reduced_;
};

// ---------------------------------------------------------------------------
// Tamper evidence
// ---------------------------------------------------------------------------

enum class TamperVerdict { clean, tampered };

inline std::string to_string(TamperVerdict t) { return t == TamperVerdict::clean ? "clean" : "tampered"; }

inline constexpr const char* kPreparedLabel = "prepared";

/// Orthonormal basis of the register that starts with `prepared`, then the yes and no
/// vote states (where independent), then completes with computational basis vectors.
inline std::vector<BasisVector> tamper_basis(const PureState& prepared, int width) {
  const auto& layout = prepared.layout();
  std::vector<BasisVector> basis;
  auto add = [&](std::string label, Amplitudes v) {
    for (const auto& b : basis) v -= b.vector.amplitudes().dot(v) * b.vector.amplitudes();
    if (v.norm() < 1e-8) return;
    v /= v.norm();
    basis.push_back({std::move(label), PureState(layout, std::move(v))});
  };
  add(kPreparedLabel, prepared.normalized().amplitudes());
  if (layout == qutrit_layout(width)) {
    add("yes", qutrit_vote_state(Vote::yes, width).amplitudes());
    add("no", qutrit_vote_state(Vote::no, width).amplitudes());
  }
  for (std::size_t i = 0; i < layout.dim(); ++i) {
    Amplitudes e = Amplitudes::Zero(static_cast<Eigen::Index>(layout.dim()));
    e[static_cast<Eigen::Index>(i)] = 1.0;
    add("other" + std::to_string(i), std::move(e));
  }
  return basis;
}

// P(tampered) when `returned` is checked against `prepared`.
inline double tamper_probability(const PureState& returned, const PureState& prepared) {
  return 1.0 - fidelity(returned.normalized(), prepared.normalized());
}

/// Voter-side check of a returned vote register: measure in a basis containing the
/// prepared state; any other outcome means the register was disturbed.
template <class Rng>
TamperVerdict tamper_check(const PureState& returned, const PureState& prepared, Rng& rng) {
  require_same_layout(returned, prepared);
  const int width = static_cast<int>(prepared.layout().qutrits().size());
  auto outcome = measure_projective(returned, tamper_basis(prepared, width), rng, ResidualPolicy::strict);
  return outcome.label == kPreparedLabel ? TamperVerdict::clean : TamperVerdict::tampered;
}

template <class Rng>
TamperVerdict tamper_check(const PureState& returned, Vote original, int width, Rng& rng) {
  return tamper_check(returned, qutrit_vote_state(original, width), rng);
}

// ---------------------------------------------------------------------------
// Anonymity versus cheating (Omega analysis)
// ---------------------------------------------------------------------------

using Operation = std::function<PureState(const PureState&)>;

enum class NormConvention {
  standard,  // || psi ||_2
  squared,   // <psi|psi>
};

namespace detail {
inline double apply_norm(double n, NormConvention c) { return c == NormConvention::squared ? n * n : n; }
}  // namespace detail

// Survey vote operator exp(i N_site 2 pi nu / (N+1)).
inline Operation vote_operation(const BallotParams& p, std::string site, long long nu) {
  const double angle = p.delta() * static_cast<double>(nu % p.modulus());
  return [site = std::move(site), angle](const PureState& s) {
    return apply_number_phase(s, site, [angle](int n) { return angle * n; });
  };
}

inline Operation identity_operation() {
  return [](const PureState& s) { return s; };
}

// Omega = || (Y_a - Y_b)|ballot> ||
inline double anonymity_gap(const Operation& ya, const Operation& yb, const PureState& ballot,
                            NormConvention c = NormConvention::standard) {
  return detail::apply_norm(distance(ya(ballot), yb(ballot)), c);
}

// || (Y_b Y_a - Y_b^2)|ballot> ||, equal to Omega by unitary invariance.
inline double cheat_gap(const Operation& ya, const Operation& yb, const PureState& ballot,
                        NormConvention c = NormConvention::standard) {
  return detail::apply_norm(distance(yb(ya(ballot)), yb(yb(ballot))), c);
}

// || [Y_a, Y_b]|ballot> ||
inline double commutator_check(const Operation& ya, const Operation& yb, const PureState& ballot,
                               NormConvention c = NormConvention::standard) {
  return detail::apply_norm(distance(ya(yb(ballot)), yb(ya(ballot))), c);
}

}  // namespace qballot
