#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "qballot/errors.hpp"

namespace qballot::dcnet {

using PadKey = std::pair<int, int>;  // (i, j) with i < j
using Pads = std::map<PadKey, std::uint8_t>;

// One round of the dining-cryptographers broadcast.
struct DcRound {
  int n_diners = 0;
  Pads pads;
  std::optional<int> payer;
  std::vector<std::uint8_t> announcements;

  // XOR of all announcements: 1 iff someone at the table paid.
  std::uint8_t broadcast() const {
    std::uint8_t sum = 0;
    for (auto a : announcements) sum ^= a;
    return sum;
  }
};

inline PadKey pad_key(int a, int b) { return a < b ? PadKey{a, b} : PadKey{b, a}; }

inline std::size_t pad_count(int n) { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2; }

inline void validate_round(int n_diners, std::optional<int> payer) {
  if (n_diners < 3) throw ProtocolError("a DC-net round needs at least 3 diners");
  if (payer && (*payer < 0 || *payer >= n_diners)) throw ProtocolError("payer is not at the table");
}

/// Each diner announces the XOR of every pad they share, flipped if they paid.
inline DcRound run_round(int n_diners, std::optional<int> payer, const Pads& pads) {
  validate_round(n_diners, payer);
  if (pads.size() != pad_count(n_diners)) throw ProtocolError("need exactly one pad per pair of diners");
  DcRound round{n_diners, pads, payer, std::vector<std::uint8_t>(static_cast<std::size_t>(n_diners), 0)};
  for (int i = 0; i < n_diners; ++i) {
    std::uint8_t sum = payer == i ? 1 : 0;
    for (int j = 0; j < n_diners; ++j) {
      if (j == i) continue;
      auto it = pads.find(pad_key(i, j));
      if (it == pads.end()) throw ProtocolError("missing pad between two diners");
      sum ^= it->second & 1U;
    }
    round.announcements[static_cast<std::size_t>(i)] = sum;
  }
  return round;
}

template <class Rng>
Pads random_pads(int n_diners, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Pads pads;
  for (int i = 0; i < n_diners; ++i)
    for (int j = i + 1; j < n_diners; ++j) pads[{i, j}] = coin(rng) ? 1 : 0;
  return pads;
}

template <class Rng>
DcRound run_round(int n_diners, std::optional<int> payer, Rng& rng) {
  validate_round(n_diners, payer);
  return run_round(n_diners, payer, random_pads(n_diners, rng));
}

// What `observer` sees: its own pads (in partner order) followed by every announcement.
inline std::vector<std::uint8_t> observer_view(const DcRound& round, int observer) {
  std::vector<std::uint8_t> view;
  for (int j = 0; j < round.n_diners; ++j)
    if (j != observer) view.push_back(round.pads.at(pad_key(observer, j)));
  view.insert(view.end(), round.announcements.begin(), round.announcements.end());
  return view;
}

using ViewDistribution = std::map<std::vector<std::uint8_t>, std::size_t>;

// Every pad assignment for `n_diners`, in lexicographic bit order.
inline std::vector<Pads> all_pad_assignments(int n_diners) {
  const auto count = pad_count(n_diners);
  std::vector<Pads> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << count); ++mask) {
    Pads pads;
    std::size_t bit = 0;
    for (int i = 0; i < n_diners; ++i)
      for (int j = i + 1; j < n_diners; ++j) pads[{i, j}] = (mask >> bit++) & 1U;
    out.push_back(std::move(pads));
  }
  return out;
}

struct ExhaustiveCheck {
  bool untraceable = true;
  std::size_t cases = 0;  // pad assignments x payers
};

/// Enumerates every pad assignment and payer. For each observer, the distribution of
/// its view must be identical whichever other diner paid, and every round must
/// broadcast 1.
inline ExhaustiveCheck anonymity_exhaustive(int n_diners = 3) {
  validate_round(n_diners, std::nullopt);
  const auto assignments = all_pad_assignments(n_diners);
  std::vector<std::vector<ViewDistribution>> views(static_cast<std::size_t>(n_diners),
                                                   std::vector<ViewDistribution>(static_cast<std::size_t>(n_diners)));
  ExhaustiveCheck check;
  for (int payer = 0; payer < n_diners; ++payer)
    for (const auto& pads : assignments) {
      const auto round = run_round(n_diners, payer, pads);
      ++check.cases;
      if (round.broadcast() != 1) check.untraceable = false;
      for (int o = 0; o < n_diners; ++o) ++views[static_cast<std::size_t>(o)][static_cast<std::size_t>(payer)][observer_view(round, o)];
    }
  for (int o = 0; o < n_diners; ++o)
    for (int a = 0; a < n_diners; ++a)
      for (int b = 0; b < n_diners; ++b) {
        if (a == o || b == o || a == b) continue;
        if (views[static_cast<std::size_t>(o)][static_cast<std::size_t>(a)] != views[static_cast<std::size_t>(o)][static_cast<std::size_t>(b)])
          check.untraceable = false;
      }
  return check;
}

inline bool anonymity_exhaustive_check(int n_diners = 3) { return anonymity_exhaustive(n_diners).untraceable; }

struct SampledCheck {
  std::size_t trials_per_payer = 0;
  double max_excess = 0.0;  // max over views of |f_a - f_b| - 3 sigma; <= 0 passes
  bool agrees() const { return max_excess <= 0.0; }
};

/// Monte Carlo version: compares the observer's view frequencies when payer_a versus
/// payer_b paid, view by view, against a 3-sigma two-sample bound.
template <class Rng>
SampledCheck anonymity_sampled_check(int n_diners, int observer, int payer_a, int payer_b, std::size_t trials,
                                     Rng& rng) {
  validate_round(n_diners, payer_a);
  validate_round(n_diners, payer_b);
  ViewDistribution fa;
  ViewDistribution fb;
  for (std::size_t t = 0; t < trials; ++t) {
    ++fa[observer_view(run_round(n_diners, payer_a, rng), observer)];
    ++fb[observer_view(run_round(n_diners, payer_b, rng), observer)];
  }
  ViewDistribution keys = fa;
  for (const auto& [v, c] : fb) keys[v] += 0;
  SampledCheck check{trials, -1.0};
  const double n = static_cast<double>(trials);
  for (const auto& [view, _] : keys) {
    const double pa = fa.count(view) ? static_cast<double>(fa.at(view)) / n : 0.0;
    const double pb = fb.count(view) ? static_cast<double>(fb.at(view)) / n : 0.0;
    const double pooled = 0.5 * (pa + pb);
    const double sigma = std::sqrt(pooled * (1.0 - pooled) * 2.0 / n);
    check.max_excess = std::max(check.max_excess, std::abs(pa - pb) - 3.0 * sigma);
  }
  return check;
}

struct PadComplexity {
  std::uint64_t classical_pads = 0;            // one pad per pair of voters
  std::uint64_t quantum_states_per_voter = 1;  // one shared ballot state access
  std::uint64_t classical_pads_per_voter = 0;
};

inline PadComplexity pad_complexity(std::uint64_t voters) {
  if (voters < 2) throw ProtocolError("pad complexity needs at least 2 voters");
  return {voters * (voters - 1) / 2, 1, voters - 1};
}

}  // namespace qballot::dcnet
