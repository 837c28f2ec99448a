#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "qballot/attacks.hpp"
#include "qballot/errors.hpp"
#include "qballot/layout.hpp"
#include "qballot/protocols.hpp"
#include "qballot/state.hpp"
#include "qballot/stats.hpp"

namespace qballot {

// Tag written with every serialized state; see ModeLayout for the ordering it names.
inline constexpr const char* kIndexOrder = "row-major:modes-then-qutrits:last-fastest";

inline ordered_json layout_to_json(const ModeLayout& layout) {
  ordered_json modes = ordered_json::array();
  for (const auto& m : layout.modes()) modes.push_back({{"label", m.label}, {"cutoff", m.cutoff}});
  return {{"modes", modes}, {"qutrits", layout.qutrits()}};
}

inline ModeLayout layout_from_json(const nlohmann::json& j) {
  try {
    std::vector<Mode> modes;
    for (const auto& m : j.at("modes")) modes.push_back({m.at("label").get<std::string>(), m.at("cutoff").get<int>()});
    std::vector<std::string> qutrits;
    if (j.contains("qutrits")) qutrits = j.at("qutrits").get<std::vector<std::string>>();
    return ModeLayout(std::move(modes), std::move(qutrits));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("layout", e.what());
  }
}

inline ordered_json state_to_json(const PureState& s) {
  ordered_json amps = ordered_json::array();
  for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i)
    amps.push_back({s.amplitudes()[i].real(), s.amplitudes()[i].imag()});
  return {{"layout", layout_to_json(s.layout())}, {"index_order", kIndexOrder}, {"amplitudes", amps}};
}

inline PureState state_from_json(const nlohmann::json& j) {
  if (!j.contains("index_order") || j.at("index_order") != kIndexOrder)
    throw ConfigError("index_order", "unsupported or missing basis ordering tag");
  ModeLayout layout = layout_from_json(j.at("layout"));
  const auto& arr = j.at("amplitudes");
  if (arr.size() != layout.dim()) throw ConfigError("amplitudes", "length does not match layout dimension");
  Amplitudes amps(static_cast<Eigen::Index>(layout.dim()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_array() || arr[i].size() != 2)
      throw ConfigError("amplitudes[" + std::to_string(i) + "]", "expected [re, im]");
    amps[static_cast<Eigen::Index>(i)] = Complex(arr[i][0].get<double>(), arr[i][1].get<double>());
  }
  return PureState(std::move(layout), std::move(amps));
}

inline ordered_json estimate_to_json(const BinomialEstimate& e) {
  ordered_json j{{"p_hat", e.p_hat}, {"ci_radius", e.ci_radius}, {"z", e.z}, {"successes", e.successes},
                 {"trials", e.trials}};
  if (e.analytic) {
    j["analytic"] = *e.analytic;
    j["abs_diff"] = std::abs(e.p_hat - *e.analytic);
    j["within_3_sigma"] = e.agrees();
  }
  return j;
}

inline ordered_json report_to_json(const AttackReport& r, bool per_trial = false) {
  ordered_json estimates = ordered_json::object();
  for (const auto& e : r.estimates) estimates[e.name] = estimate_to_json(e);
  ordered_json j{{"attack", r.attack}, {"params", r.params},   {"trials", r.trials},
                 {"seed", r.seed},     {"estimates", estimates}, {"checks", r.checks}};
  if (per_trial) j["per_trial"] = r.per_trial;
  return j;
}

inline ordered_json tally_to_json(const TallyResult& t) {
  ordered_json dist = ordered_json::object();
  for (const auto& [n, p] : t.outcome_distribution) dist[std::to_string(n)] = p;
  return {{"tally", t.tally},
          {"raw_expectation", t.raw_expectation},
          {"outcome_probability", t.outcome_probability},
          {"outcome_distribution", dist},
          {"outside_probability", t.outside_probability}};
}

/// Session transcript: kind, parameters, ordered events with per-site reduced-state
/// eigenvalues, and the final tally (null until tallied).
inline ordered_json transcript_to_json(const BallotSession& s) {
  ordered_json events = ordered_json::array();
  std::size_t step = 0;
  for (const auto& e : s.events()) {
    ordered_json ev{{"step", step++}, {"type", e.type}};
    if (!e.voter.empty()) ev["voter"] = e.voter;
    if (!e.site.empty()) ev["site"] = e.site;
    if (e.value) ev["value"] = *e.value;
    if (!e.fingerprints.empty()) ev["fingerprints"] = e.fingerprints;
    events.push_back(std::move(ev));
  }
  ordered_json params{{"N", s.params().N}, {"K", s.params().K}};
  if (s.agents()) params["agents"] = s.agents();
  return {{"kind", to_string(s.kind())},
          {"params", params},
          {"events", events},
          {"final_tally", s.result() ? tally_to_json(*s.result()) : ordered_json(nullptr)}};
}

}  // namespace qballot
