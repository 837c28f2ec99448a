#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qballot/errors.hpp"
#include "qballot/layout.hpp"
#include "qballot/state.hpp"

namespace qballot {

// Reduced (mixed) state on a sub-layout.
class DensityMatrix {
 public:
  DensityMatrix(ModeLayout layout, Eigen::MatrixXcd matrix)
      : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    const auto d = static_cast<Eigen::Index>(layout_.dim());
    if (matrix_.rows() != d || matrix_.cols() != d)
      throw LayoutError("density matrix shape does not match layout dimension");
  }

  const ModeLayout& layout() const noexcept { return layout_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }

  Complex trace() const { return matrix_.trace(); }

  // Ascending.
  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
  }

  double hermiticity_error() const { return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff(); }

  double purity() const { return (matrix_ * matrix_).trace().real(); }

  // Von Neumann entropy in nats.
  double entropy() const {
    double s = 0.0;
    for (double p : eigenvalues())
      if (p > kAlgebraTol) s -= p * std::log(p);
    return s;
  }

  // Hermitian, unit trace, PSD.
  bool is_valid() const {
    if (hermiticity_error() > kAlgebraTol) return false;
    if (std::abs(trace() - Complex(1.0)) > kAlgebraTol) return false;
    return eigenvalues().minCoeff() >= -1e-10;
  }

 private:
  ModeLayout layout_;
  Eigen::MatrixXcd matrix_;
};

// 0.5 * || a - b ||_1
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.layout() == b.layout())) throw LayoutError("density matrices on different layouts");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

namespace detail {

// Amplitudes reshaped as a (kept x rest) matrix, plus both sub-layouts.
struct Bipartition {
  ModeLayout kept;
  ModeLayout rest;
  Eigen::MatrixXcd psi;
};

inline Bipartition bipartition(const PureState& state, const std::vector<std::string>& keep) {
  const auto& layout = state.layout();
  if (keep.empty()) throw LayoutError("partial trace needs at least one kept site");
  std::vector<bool> kept(layout.subsystem_count(), false);
  for (const auto& label : keep) kept[layout.subsystem(label)] = true;
  std::vector<std::string> rest_labels;
  for (std::size_t s = 0; s < layout.subsystem_count(); ++s)
    if (!kept[s]) rest_labels.push_back(layout.label(s));

  ModeLayout kept_layout = layout.sub_layout(keep);
  // An empty complement is a single trivial basis vector.
  const std::size_t rest_dim = layout.dim() / kept_layout.dim();
  Eigen::MatrixXcd psi(static_cast<Eigen::Index>(kept_layout.dim()), static_cast<Eigen::Index>(rest_dim));
  for (std::size_t i = 0; i < layout.dim(); ++i) {
    std::size_t ki = 0;
    std::size_t ri = 0;
    for (std::size_t s = 0; s < layout.subsystem_count(); ++s) {
      const auto d = layout.local_dim(s);
      const auto digit = layout.digit(i, s);
      if (kept[s])
        ki = ki * d + digit;
      else
        ri = ri * d + digit;
    }
    psi(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(ri)) = state.amplitudes()[static_cast<Eigen::Index>(i)];
  }
  ModeLayout rest_layout = rest_labels.empty() ? ModeLayout({Mode{"_", 0}}) : layout.sub_layout(rest_labels);
  return {std::move(kept_layout), std::move(rest_layout), std::move(psi)};
}

}  // namespace detail

/// Reduced density operator on the sites in `keep` (taken in layout order).
inline DensityMatrix partial_trace(const PureState& state, const std::vector<std::string>& keep) {
  auto bp = detail::bipartition(state, keep);
  Eigen::MatrixXcd rho = bp.psi * bp.psi.adjoint();
  return DensityMatrix(std::move(bp.kept), std::move(rho));
}

// Schmidt coefficients across keep | rest, descending.
inline std::vector<double> schmidt_coefficients(const PureState& state, const std::vector<std::string>& keep) {
  auto bp = detail::bipartition(state, keep);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(bp.psi);
  const auto& sv = svd.singularValues();
  return {sv.data(), sv.data() + sv.size()};
}

inline int schmidt_rank(const PureState& state, const std::vector<std::string>& keep, double tol = kOrthoTol) {
  int rank = 0;
  for (double c : schmidt_coefficients(state, keep))
    if (c > tol) ++rank;
  return rank;
}

struct ProductFactors {
  PureState kept;
  PureState rest;
};

/// Splits a product state into its factor on `keep` and on the remaining sites.
/// Throws InvariantError when the state is entangled across the cut.
inline ProductFactors split_product(const PureState& state, const std::vector<std::string>& keep,
                                    double tol = kOrthoTol) {
  auto bp = detail::bipartition(state, keep);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(bp.psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  for (Eigen::Index k = 1; k < sv.size(); ++k)
    if (sv[k] > tol) throw InvariantError("state is entangled across the requested cut");
  Eigen::VectorXcd u = svd.matrixU().col(0);
  // psi = u * (s0 v^H), so the rest factor is conj(v) scaled by s0.
  Eigen::VectorXcd v = svd.matrixV().col(0).conjugate() * sv[0];
  // Fix the split of the global phase: the kept factor's canonical phase is real-positive.
  Eigen::Index pick = 0;
  u.cwiseAbs().maxCoeff(&pick);
  const Complex phase = u[pick] / std::abs(u[pick]);
  u /= phase;
  v *= phase;
  return {PureState(std::move(bp.kept), std::move(u)), PureState(std::move(bp.rest), std::move(v))};
}

}  // namespace qballot
