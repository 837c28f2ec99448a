#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qballot/errors.hpp"
#include "qballot/state.hpp"

namespace qballot {

inline constexpr std::string_view kOutsideLabel = "outside";
inline constexpr double kResidualTol = 1e-9;

// What to do with probability that falls outside the span of a partial basis.
enum class ResidualPolicy {
  allow,   // reported as the extra outcome "outside"
  strict,  // IncompleteBasisError above kResidualTol
};

struct BasisVector {
  std::string label;
  PureState vector;
};

// A measurement basis for a single site, given as local vectors of length local_dim.
struct LocalBasisVector {
  std::string label;
  Eigen::VectorXcd vector;
};

struct OutcomeProbability {
  std::string label;
  double probability = 0.0;
};

struct MeasurementOutcome {
  std::string label;
  PureState state;  // normalized post-measurement state
  double probability = 0.0;
  std::vector<OutcomeProbability> distribution;  // every outcome, including "outside" if present
  double residual_probability = 0.0;
};

template <class Rng>
std::size_t sample_index(std::span<const double> probabilities, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double total = 0.0;
  for (double p : probabilities) total += p;
  const double u = uniform(rng) * total;
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (probabilities[k] <= 0.0) continue;
    last_nonzero = k;
    acc += probabilities[k];
    if (u < acc) return k;
  }
  return last_nonzero;
}

namespace detail {

inline void check_orthonormal(const std::vector<Eigen::VectorXcd>& vectors) {
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i; j < vectors.size(); ++j) {
      const Complex g = vectors[i].dot(vectors[j]);
      const Complex expect = i == j ? Complex(1.0) : Complex(0.0);
      if (std::abs(g - expect) > kOrthoTol)
        throw BasisError("measurement basis is not orthonormal (vectors " + std::to_string(i) + ", " +
                         std::to_string(j) + ")");
    }
}

// Probabilities of each basis vector plus the residual, with policy applied.
inline std::vector<OutcomeProbability> outcome_table(const std::vector<std::string>& labels,
                                                     const std::vector<double>& probs, double norm2,
                                                     ResidualPolicy policy, double& residual) {
  std::vector<OutcomeProbability> table;
  double covered = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    table.push_back({labels[k], probs[k] / norm2});
    covered += probs[k] / norm2;
  }
  residual = std::max(0.0, 1.0 - covered);
  if (residual > kResidualTol) {
    if (policy == ResidualPolicy::strict)
      throw IncompleteBasisError("basis misses probability " + std::to_string(residual));
    table.push_back({std::string(kOutsideLabel), residual});
  }
  return table;
}

}  // namespace detail

// Outcome probabilities for a projective measurement in `basis` (no sampling).
inline std::vector<OutcomeProbability> outcome_probabilities(const PureState& state,
                                                             const std::vector<BasisVector>& basis,
                                                             ResidualPolicy policy = ResidualPolicy::allow) {
  std::vector<Eigen::VectorXcd> vecs;
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (const auto& b : basis) {
    require_same_layout(b.vector, state);
    vecs.push_back(b.vector.amplitudes());
    labels.push_back(b.label);
    probs.push_back(std::norm(b.vector.amplitudes().dot(state.amplitudes())));
  }
  detail::check_orthonormal(vecs);
  double residual = 0.0;
  return detail::outcome_table(labels, probs, state.amplitudes().squaredNorm(), policy, residual);
}

/// Projective measurement in an orthonormal (possibly partial) basis.
/// Outcome k has probability |<b_k|psi>|^2 and leaves the normalized projection.
template <class Rng>
MeasurementOutcome measure_projective(const PureState& state, const std::vector<BasisVector>& basis, Rng& rng,
                                      ResidualPolicy policy = ResidualPolicy::allow) {
  std::vector<Eigen::VectorXcd> vecs;
  std::vector<std::string> labels;
  std::vector<double> probs;
  std::vector<Complex> overlaps;
  for (const auto& b : basis) {
    require_same_layout(b.vector, state);
    vecs.push_back(b.vector.amplitudes());
    labels.push_back(b.label);
    overlaps.push_back(b.vector.amplitudes().dot(state.amplitudes()));
    probs.push_back(std::norm(overlaps.back()));
  }
  detail::check_orthonormal(vecs);
  double residual = 0.0;
  auto table = detail::outcome_table(labels, probs, state.amplitudes().squaredNorm(), policy, residual);

  std::vector<double> p;
  for (const auto& t : table) p.push_back(t.probability);
  const auto k = sample_index(std::span<const double>(p), rng);
  if (k < basis.size())
    return {table[k].label, basis[k].vector, table[k].probability, table, residual};

  Amplitudes rest = state.amplitudes();
  for (std::size_t j = 0; j < basis.size(); ++j) rest -= overlaps[j] * vecs[j];
  return {table[k].label, PureState(state.layout(), rest).normalized(), table[k].probability, table, residual};
}

namespace detail {

// (<b| (x) 1) applied on one site: returns the unnormalized projection |b><b| (x) 1 |psi>.
inline Amplitudes project_local(const PureState& state, std::size_t sub, const Eigen::VectorXcd& b) {
  const auto& layout = state.layout();
  const auto d = layout.local_dim(sub);
  const auto stride = layout.stride(sub);
  const std::size_t block = d * stride;
  Amplitudes out = Amplitudes::Zero(state.amplitudes().size());
  for (std::size_t hi = 0; hi < layout.dim(); hi += block)
    for (std::size_t lo = 0; lo < stride; ++lo) {
      Complex overlap = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        overlap += std::conj(b[static_cast<Eigen::Index>(k)]) * state.amplitudes()[static_cast<Eigen::Index>(hi + k * stride + lo)];
      for (std::size_t k = 0; k < d; ++k)
        out[static_cast<Eigen::Index>(hi + k * stride + lo)] = b[static_cast<Eigen::Index>(k)] * overlap;
    }
  return out;
}

inline std::vector<Amplitudes> local_projections(const PureState& state, std::string_view site,
                                                 const std::vector<LocalBasisVector>& basis) {
  const auto sub = state.layout().subsystem(site);
  std::vector<Eigen::VectorXcd> vecs;
  for (const auto& b : basis) {
    if (static_cast<std::size_t>(b.vector.size()) != state.layout().local_dim(sub))
      throw LayoutError("local basis vector length does not match site '" + std::string(site) + "'");
    vecs.push_back(b.vector);
  }
  check_orthonormal(vecs);
  std::vector<Amplitudes> projections;
  for (const auto& v : vecs) projections.push_back(project_local(state, sub, v));
  return projections;
}

}  // namespace detail

inline std::vector<OutcomeProbability> local_outcome_probabilities(const PureState& state, std::string_view site,
                                                                   const std::vector<LocalBasisVector>& basis,
                                                                   ResidualPolicy policy = ResidualPolicy::allow) {
  auto projections = detail::local_projections(state, site, basis);
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    labels.push_back(basis[k].label);
    probs.push_back(projections[k].squaredNorm());
  }
  double residual = 0.0;
  return detail::outcome_table(labels, probs, state.amplitudes().squaredNorm(), policy, residual);
}

/// Projective measurement of a single site in a local orthonormal basis; other sites untouched.
template <class Rng>
MeasurementOutcome measure_local(const PureState& state, std::string_view site,
                                 const std::vector<LocalBasisVector>& basis, Rng& rng,
                                 ResidualPolicy policy = ResidualPolicy::allow) {
  auto projections = detail::local_projections(state, site, basis);
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    labels.push_back(basis[k].label);
    probs.push_back(projections[k].squaredNorm());
  }
  double residual = 0.0;
  auto table = detail::outcome_table(labels, probs, state.amplitudes().squaredNorm(), policy, residual);
  std::vector<double> p;
  for (const auto& t : table) p.push_back(t.probability);
  const auto k = sample_index(std::span<const double>(p), rng);
  if (k < basis.size())
    return {table[k].label, PureState(state.layout(), projections[k]).normalized(), table[k].probability, table,
            residual};
  Amplitudes rest = state.amplitudes();
  for (const auto& proj : projections) rest -= proj;
  return {table[k].label, PureState(state.layout(), rest).normalized(), table[k].probability, table, residual};
}

// Spin-z eigenbasis of a qutrit, ordered -1, 0, +1.
inline std::vector<LocalBasisVector> spin_z_basis() {
  std::vector<LocalBasisVector> basis;
  for (int s = -1; s <= 1; ++s) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(3);
    v[s + 1] = 1.0;
    basis.push_back({std::to_string(s), v});
  }
  return basis;
}

struct Eigenpair {
  double value = 0.0;
  PureState vector;
};

/// Observable given by its spectral decomposition on a subspace. The orthogonal
/// complement is a single eigenspace with `complement_value`.
struct Observable {
  std::vector<Eigenpair> eigenbasis;
  double complement_value = 0.0;
  std::string complement_label = std::string(kOutsideLabel);

  void validate() const {
    std::vector<Eigen::VectorXcd> vecs;
    for (const auto& e : eigenbasis) {
      require_same_layout(e.vector, eigenbasis.front().vector);
      vecs.push_back(e.vector.amplitudes());
    }
    detail::check_orthonormal(vecs);
  }
};

inline double expectation(const PureState& state, const Observable& obs) {
  double total = 0.0;
  double covered = 0.0;
  const double norm2 = state.amplitudes().squaredNorm();
  for (const auto& e : obs.eigenbasis) {
    require_same_layout(e.vector, state);
    const double p = std::norm(inner_product(e.vector, state)) / norm2;
    total += e.value * p;
    covered += p;
  }
  return total + obs.complement_value * std::max(0.0, 1.0 - covered);
}

// Distribution of the total particle number over all bosonic modes.
inline std::map<int, double> total_number_distribution(const PureState& state) {
  const auto& layout = state.layout();
  std::map<int, double> dist;
  const double norm2 = state.amplitudes().squaredNorm();
  for (std::size_t i = 0; i < layout.dim(); ++i) {
    const double p = std::norm(state.amplitudes()[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    int total = 0;
    for (std::size_t m = 0; m < layout.modes().size(); ++m) total += layout.value(i, m);
    dist[total] += p / norm2;
  }
  return dist;
}

}  // namespace qballot
