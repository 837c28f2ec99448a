#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qballot/errors.hpp"
#include "qballot/layout.hpp"

namespace qballot {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;

inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kOrthoTol = 1e-10;
inline constexpr double kEigenTol = 1e-9;

// Complex amplitude vector over the basis of a ModeLayout.
class PureState {
 public:
  PureState(ModeLayout layout, Amplitudes amplitudes)
      : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != layout_.dim())
      throw LayoutError("amplitude vector length " + std::to_string(amplitudes_.size()) +
                        " does not match layout dimension " + std::to_string(layout_.dim()));
  }

  const ModeLayout& layout() const noexcept { return layout_; }
  const Amplitudes& amplitudes() const noexcept { return amplitudes_; }
  std::size_t dim() const noexcept { return layout_.dim(); }

  Complex amplitude(const BasisState& b) const {
    return amplitudes_[static_cast<Eigen::Index>(layout_.index_of(b))];
  }

  double norm() const { return amplitudes_.norm(); }

  PureState normalized() const {
    double n = norm();
    if (!(n > 0.0)) throw DegenerateStateError("cannot normalize the zero vector");
    return PureState(layout_, amplitudes_ / n);
  }

 private:
  ModeLayout layout_;
  Amplitudes amplitudes_;
};

inline void require_same_layout(const PureState& a, const PureState& b) {
  if (!(a.layout() == b.layout())) throw LayoutError("states live on different layouts");
}

inline PureState make_basis_state(const ModeLayout& layout, const BasisState& b) {
  Amplitudes amps = Amplitudes::Zero(static_cast<Eigen::Index>(layout.dim()));
  amps[static_cast<Eigen::Index>(layout.index_of(b))] = 1.0;
  return PureState(layout, std::move(amps));
}

struct Term {
  Complex coefficient;
  BasisState basis;
};

// Normalized sum of basis states. Repeated basis states accumulate.
inline PureState superpose(const ModeLayout& layout, const std::vector<Term>& terms) {
  Amplitudes amps = Amplitudes::Zero(static_cast<Eigen::Index>(layout.dim()));
  for (const auto& t : terms) amps[static_cast<Eigen::Index>(layout.index_of(t.basis))] += t.coefficient;
  if (!(amps.norm() > 0.0)) throw DegenerateStateError("superposition has all-zero coefficients");
  return PureState(layout, amps).normalized();
}

/// Multiplies each basis amplitude by exp(i * phase_fn(n)), n being the occupation of `site`.
/// This is exp(i f(N_site)) for the site's number operator.
template <class PhaseFn>
  requires std::invocable<PhaseFn&, int>
PureState apply_number_phase(const PureState& state, std::string_view site, PhaseFn phase_fn) {
  const auto& layout = state.layout();
  const auto sub = layout.mode_subsystem(site);
  std::vector<Complex> factor(layout.local_dim(sub));
  for (std::size_t n = 0; n < factor.size(); ++n)
    factor[n] = std::polar(1.0, static_cast<double>(phase_fn(static_cast<int>(n))));
  Amplitudes amps = state.amplitudes();
  for (std::size_t i = 0; i < layout.dim(); ++i) amps[static_cast<Eigen::Index>(i)] *= factor[layout.digit(i, sub)];
  return PureState(layout, std::move(amps));
}

/// exp(i N_mode (a + b sigma_z)) acting jointly on a bosonic mode and a qutrit.
/// Callers fold the ballot angle into `a` and `b`.
inline PureState apply_conditional_spin_phase(const PureState& state, std::string_view mode_site,
                                              std::string_view qutrit_site, double a, double b) {
  const auto& layout = state.layout();
  const auto ms = layout.mode_subsystem(mode_site);
  const auto qs = layout.qutrit_subsystem(qutrit_site);
  Amplitudes amps = state.amplitudes();
  for (std::size_t i = 0; i < layout.dim(); ++i) {
    const double n = layout.value(i, ms);
    const double s = layout.value(i, qs);
    amps[static_cast<Eigen::Index>(i)] *= std::polar(1.0, n * (a + b * s));
  }
  return PureState(layout, std::move(amps));
}

/// Applies `op` (local_dim x local_dim, acting on the site's digit) to one site.
inline PureState apply_local_operator(const PureState& state, std::string_view site,
                                      const Eigen::MatrixXcd& op) {
  const auto& layout = state.layout();
  const auto sub = layout.subsystem(site);
  const auto d = layout.local_dim(sub);
  const auto stride = layout.stride(sub);
  if (static_cast<std::size_t>(op.rows()) != d || static_cast<std::size_t>(op.cols()) != d)
    throw LayoutError("local operator shape does not match site '" + std::string(site) + "'");
  Amplitudes out = Amplitudes::Zero(state.amplitudes().size());
  Eigen::VectorXcd slice(static_cast<Eigen::Index>(d));
  const std::size_t block = d * stride;
  for (std::size_t hi = 0; hi < layout.dim(); hi += block) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      for (std::size_t k = 0; k < d; ++k)
        slice[static_cast<Eigen::Index>(k)] = state.amplitudes()[static_cast<Eigen::Index>(hi + k * stride + lo)];
      Eigen::VectorXcd mapped = op * slice;
      for (std::size_t k = 0; k < d; ++k)
        out[static_cast<Eigen::Index>(hi + k * stride + lo)] = mapped[static_cast<Eigen::Index>(k)];
    }
  }
  return PureState(layout, std::move(out));
}

// <a|b>
inline Complex inner_product(const PureState& a, const PureState& b) {
  require_same_layout(a, b);
  return a.amplitudes().dot(b.amplitudes());
}

// |<a|b>|^2 for normalized inputs.
inline double fidelity(const PureState& a, const PureState& b) { return std::norm(inner_product(a, b)); }

// || a - b ||_2
inline double distance(const PureState& a, const PureState& b) {
  require_same_layout(a, b);
  return (a.amplitudes() - b.amplitudes()).norm();
}

inline bool equal_up_to_global_phase(const PureState& a, const PureState& b, double tol = kOrthoTol) {
  require_same_layout(a, b);
  const double na = a.norm();
  const double nb = b.norm();
  if (std::abs(na - nb) > tol) return false;
  return std::abs(na * nb - std::abs(inner_product(a, b))) <= tol;
}

/// Removes the global phase: divides by the phase of the largest-magnitude amplitude.
/// Magnitudes within kAlgebraTol of the maximum count as tied; the lowest index wins.
inline PureState canonical_phase(const PureState& state) {
  const auto& amps = state.amplitudes();
  if (amps.size() == 0) return state;
  const double max_mag = amps.cwiseAbs().maxCoeff();
  if (max_mag == 0.0) return state;
  Eigen::Index pick = 0;
  while (std::abs(amps[pick]) < max_mag - kAlgebraTol) ++pick;
  const Complex phase = amps[pick] / std::abs(amps[pick]);
  return PureState(state.layout(), amps / phase);
}

// a (x) b over the concatenated layout: a's modes, b's modes, a's qutrits, b's qutrits.
inline PureState tensor_product(const PureState& a, const PureState& b) {
  const auto& la = a.layout();
  const auto& lb = b.layout();
  auto modes = la.modes();
  modes.insert(modes.end(), lb.modes().begin(), lb.modes().end());
  auto qutrits = la.qutrits();
  qutrits.insert(qutrits.end(), lb.qutrits().begin(), lb.qutrits().end());
  ModeLayout joint(std::move(modes), std::move(qutrits));
  Amplitudes amps(static_cast<Eigen::Index>(joint.dim()));
  for (std::size_t i = 0; i < joint.dim(); ++i) {
    BasisState bs = joint.basis_state(i);
    BasisState ba{{bs.occupations.begin(), bs.occupations.begin() + static_cast<std::ptrdiff_t>(la.modes().size())},
                  {bs.spins.begin(), bs.spins.begin() + static_cast<std::ptrdiff_t>(la.qutrits().size())}};
    BasisState bb{{bs.occupations.begin() + static_cast<std::ptrdiff_t>(la.modes().size()), bs.occupations.end()},
                  {bs.spins.begin() + static_cast<std::ptrdiff_t>(la.qutrits().size()), bs.spins.end()}};
    amps[static_cast<Eigen::Index>(i)] = a.amplitude(ba) * b.amplitude(bb);
  }
  return PureState(std::move(joint), std::move(amps));
}

// Same amplitudes, one site renamed.
inline PureState relabel(const PureState& state, std::string_view from, std::string to) {
  return PureState(state.layout().relabeled(from, std::move(to)), state.amplitudes());
}

}  // namespace qballot
