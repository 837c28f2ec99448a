#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qballot/errors.hpp"
#include "qballot/layout.hpp"
#include "qballot/measurement.hpp"
#include "qballot/state.hpp"

namespace qballot {

enum class Vote { no, yes };

inline std::string to_string(Vote v) { return v == Vote::yes ? "yes" : "no"; }

/// Particle number N (the tally modulus is N + 1) and number of voting sites K.
struct BallotParams {
  int N = 1;
  int K = 1;

  // Phase of one vote unit, 2*pi/(N+1).
  double delta() const { return 2.0 * std::numbers::pi / static_cast<double>(N + 1); }
  int modulus() const { return N + 1; }

  void validate() const {
    if (N < 1) throw ProtocolError("N must be >= 1");
    if (K < 1) throw ProtocolError("K must be >= 1");
  }
};

inline constexpr const char* kTallySite = "T";
inline constexpr const char* kSurveySite = "V";

inline std::string voting_site(int i) { return "V" + std::to_string(i); }

// Tallyman mode T (cutoff K*N) followed by K voting modes (cutoff N each).
inline ModeLayout ballot_layout(int N, int K, bool single_site_labels = false) {
  std::vector<Mode> modes{{kTallySite, K * N}};
  for (int i = 1; i <= K; ++i) modes.push_back({single_site_labels ? kSurveySite : voting_site(i), N});
  return ModeLayout(std::move(modes));
}

namespace detail {

// (1/sqrt(N+1)) sum_n e^{i n phase} |K(N-n), n, ..., n>
inline PureState uniform_branch_state(const ModeLayout& layout, int N, int K, double phase_step) {
  Amplitudes amps = Amplitudes::Zero(static_cast<Eigen::Index>(layout.dim()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(N + 1));
  for (int n = 0; n <= N; ++n) {
    BasisState b{{K * (N - n)}, {}};
    for (int i = 0; i < K; ++i) b.occupations.push_back(n);
    amps[static_cast<Eigen::Index>(layout.index_of(b))] = scale * std::polar(1.0, phase_step * n);
  }
  return PureState(layout, std::move(amps));
}

}  // namespace detail

// (|1,0> + |0,1>)/sqrt(2) on sites A and B.
inline PureState comparative_state() {
  ModeLayout layout({{"A", 1}, {"B", 1}});
  return superpose(layout, {{1.0, {{1, 0}, {}}}, {1.0, {{0, 1}, {}}}});
}

// (1/sqrt(N+1)) sum_n |N-n, n> on sites T, V.
inline PureState survey_state(const BallotParams& p) {
  p.validate();
  return detail::uniform_branch_state(ballot_layout(p.N, 1, true), p.N, 1, 0.0);
}

// (1/sqrt(N+1)) sum_n |K(N-n), n, ..., n> on sites T, V1..VK.
inline PureState multiparty_survey_state(const BallotParams& p) {
  p.validate();
  return detail::uniform_branch_state(ballot_layout(p.N, p.K), p.N, p.K, 0.0);
}

inline PureState agent_ballot_state(const BallotParams& p, int agents) {
  if (agents != 2 && agents != 3) throw ProtocolError("agent ballots use 2 or 3 agents");
  return multiparty_survey_state(BallotParams{p.N, agents});
}

inline std::string qutrit_site(int i) { return "q" + std::to_string(i); }

inline ModeLayout qutrit_layout(int width) {
  std::vector<std::string> q;
  for (int i = 1; i <= width; ++i) q.push_back(qutrit_site(i));
  return ModeLayout({}, std::move(q));
}

/// Vote register of `width` qutrits: the symmetric superposition of one qutrit at spin
/// +1 (yes) or -1 (no) with all others at 0.
inline PureState qutrit_vote_state(Vote vote, int width) {
  if (width != 2 && width != 3) throw ProtocolError("vote registers have 2 or 3 qutrits");
  const int s = vote == Vote::yes ? 1 : -1;
  std::vector<Term> terms;
  for (int i = 0; i < width; ++i) {
    BasisState b{{}, std::vector<int>(static_cast<std::size_t>(width), 0)};
    b.spins[static_cast<std::size_t>(i)] = s;
    terms.push_back({1.0, b});
  }
  return superpose(qutrit_layout(width), terms);
}

// |1, 1> on two qutrits.
inline PureState cheat_vote_state() { return make_basis_state(qutrit_layout(2), {{}, {1, 1}}); }

struct TallyVector {
  int n = 0;
  PureState state;
};

// Number of voting modes in a ballot layout, validating the T + voting-mode shape.
inline int voting_mode_count(const BallotParams& p, const ModeLayout& layout) {
  const auto& modes = layout.modes();
  if (modes.size() < 2 || !layout.qutrits().empty() || modes.front().label != kTallySite)
    throw LayoutError("not a ballot layout (expected T followed by voting modes)");
  const int K = static_cast<int>(modes.size()) - 1;
  if (modes.front().cutoff < K * p.N) throw LayoutError("tally mode cutoff below K*N");
  for (std::size_t i = 1; i < modes.size(); ++i)
    if (modes[i].cutoff < p.N) throw LayoutError("voting mode cutoff below N");
  return K;
}

/// Tally basis |T_n> = (1/sqrt(N+1)) sum_k e^{i n k theta} |K(N-k), k, ..., k>, theta = 2pi/(N+1).
inline std::vector<TallyVector> tally_basis(const BallotParams& p, const ModeLayout& layout) {
  p.validate();
  const int K = voting_mode_count(p, layout);
  std::vector<TallyVector> basis;
  for (int n = 0; n <= p.N; ++n)
    basis.push_back({n, detail::uniform_branch_state(layout, p.N, K, p.delta() * n)});
  return basis;
}

inline std::vector<BasisVector> tally_measurement_basis(const BallotParams& p, const ModeLayout& layout) {
  std::vector<BasisVector> out;
  for (auto& t : tally_basis(p, layout)) out.push_back({std::to_string(t.n), std::move(t.state)});
  return out;
}

// sum_n n |T_n><T_n|, zero on the complement.
inline Observable tally_observable(const BallotParams& p, const ModeLayout& layout) {
  Observable obs;
  for (auto& t : tally_basis(p, layout)) obs.eigenbasis.push_back({static_cast<double>(t.n), std::move(t.state)});
  return obs;
}

/// Single-mode phase states (cutoff N):
///   conjugate = false: |phi(theta)> = (1/sqrt(N+1)) sum_n e^{+i n theta} |n>
///   conjugate = true:  |psi(theta)> = (1/sqrt(N+1)) sum_n e^{-i n theta} |N-n>
inline Eigen::VectorXcd phase_vector(int N, double theta, bool conjugate) {
  Eigen::VectorXcd v(N + 1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N + 1));
  for (int n = 0; n <= N; ++n) {
    if (conjugate)
      v[N - n] = scale * std::polar(1.0, -theta * n);
    else
      v[n] = scale * std::polar(1.0, theta * n);
  }
  return v;
}

inline PureState single_mode_phase_state(int N, double theta, bool conjugate, const std::string& site = "") {
  if (N < 1) throw ProtocolError("N must be >= 1");
  const std::string label = site.empty() ? (conjugate ? kTallySite : kSurveySite) : site;
  return PureState(ModeLayout({{label, N}}), phase_vector(N, theta, conjugate));
}

// Grid angle theta_k = 2 pi k / (N+1).
inline double phase_grid_angle(int N, int k) {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N + 1);
}

// Discrete phase basis {|phi(theta_k)>}, k = 0..N, labelled by k. Orthonormal on a cutoff-N mode.
inline std::vector<LocalBasisVector> phase_basis(int N) {
  std::vector<LocalBasisVector> basis;
  for (int k = 0; k <= N; ++k) basis.push_back({std::to_string(k), phase_vector(N, phase_grid_angle(N, k), false)});
  return basis;
}

/// Amplitudes c_k of the ballot branches |K(N-k), k, ..., k>, k = 0..N.
inline std::vector<Complex> branch_amplitudes(const BallotParams& p, const PureState& state) {
  const int K = voting_mode_count(p, state.layout());
  std::vector<Complex> out;
  for (int k = 0; k <= p.N; ++k) {
    BasisState b{{K * (p.N - k)}, {}};
    for (int i = 0; i < K; ++i) b.occupations.push_back(k);
    out.push_back(state.amplitude(b));
  }
  return out;
}

}  // namespace qballot
