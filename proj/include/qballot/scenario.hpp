#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "qballot/attacks.hpp"
#include "qballot/ballot_states.hpp"
#include "qballot/dcnet.hpp"
#include "qballot/errors.hpp"
#include "qballot/io.hpp"
#include "qballot/protocols.hpp"
#include "qballot/rng.hpp"

namespace qballot {

/// Batch scenario description, parsed from one JSON document.
///
///   {"scenario": "survey", "N": 10, "votes": [3, 4, 2]}
///   {"scenario": "collude", "N": 7, "votes": [2, 3], "trials": 10000, "seed": 42}
///
/// Scenarios: comparative, survey, multiparty, binary-ballot, collude (alias
/// collude-detect), agent-spin, cheat-voter, multiparty-collude, dcnet, complexity.
struct ScenarioConfig {
  std::string scenario;
  int N = 1;
  int K = 2;
  int agents = 2;
  int width = 2;
  int diners = 3;
  std::optional<int> payer;
  std::vector<long long> votes;             // survey / multiparty / collude
  std::vector<std::string> vote_labels;     // comparative / binary-ballot: yes | no | cheat
  std::string vote = "yes";                 // agent-spin
  std::vector<std::uint64_t> voters{2, 10, 100};  // complexity
  std::size_t trials = 1;
  std::optional<std::uint64_t> seed;
  std::string output;
  bool signed_tally = false;
  bool per_trial = false;
  bool strict_basis = false;
  bool audit = false;
  bool snapshot = false;
};

inline const std::set<std::string>& known_scenarios() {
  static const std::set<std::string> s{"comparative", "survey",     "multiparty",         "binary-ballot",
                                       "collude",     "collude-detect", "agent-spin",    "cheat-voter",
                                       "multiparty-collude", "dcnet", "complexity"};
  return s;
}

inline bool is_attack(const std::string& scenario) {
  return scenario == "collude" || scenario == "collude-detect" || scenario == "agent-spin" ||
         scenario == "cheat-voter" || scenario == "multiparty-collude";
}

namespace detail {

template <class T>
T field(const nlohmann::json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

inline Vote parse_vote(const std::string& s, const std::string& path) {
  if (s == "yes") return Vote::yes;
  if (s == "no") return Vote::no;
  throw ConfigError(path, "expected \"yes\" or \"no\", got \"" + s + "\"");
}

}  // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  static const std::set<std::string> allowed{"scenario", "N",      "K",         "agents",       "width",
                                             "diners",   "payer",  "votes",     "vote",         "voters",
                                             "trials",   "seed",   "output",    "signed_tally", "per_trial",
                                             "strict_basis", "audit", "snapshot"};
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(key, "unknown field");

  ScenarioConfig c;
  c.scenario = detail::field<std::string>(j, "scenario", "");
  if (!known_scenarios().count(c.scenario)) throw ConfigError("scenario", "unknown scenario \"" + c.scenario + "\"");
  c.N = detail::field(j, "N", c.N);
  c.K = detail::field(j, "K", c.K);
  c.agents = detail::field(j, "agents", c.agents);
  c.width = detail::field(j, "width", c.width);
  c.diners = detail::field(j, "diners", c.diners);
  if (j.contains("payer") && !j.at("payer").is_null()) c.payer = detail::field<int>(j, "payer", 0);
  c.vote = detail::field(j, "vote", c.vote);
  c.voters = detail::field(j, "voters", c.voters);
  const auto trials = detail::field<long long>(j, "trials", 1);
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  c.trials = static_cast<std::size_t>(trials);
  if (j.contains("seed") && !j.at("seed").is_null()) {
    const auto& seed = j.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0))
      throw ConfigError("seed", "must be an unsigned 64-bit integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.output = detail::field<std::string>(j, "output", "");
  c.signed_tally = detail::field(j, "signed_tally", false);
  c.per_trial = detail::field(j, "per_trial", false);
  c.strict_basis = detail::field(j, "strict_basis", false);
  c.audit = detail::field(j, "audit", false);
  c.snapshot = detail::field(j, "snapshot", false);

  if (j.contains("votes")) {
    const auto& votes = j.at("votes");
    if (!votes.is_array()) throw ConfigError("votes", "must be an array");
    for (std::size_t i = 0; i < votes.size(); ++i) {
      const std::string path = "votes[" + std::to_string(i) + "]";
      if (votes[i].is_number_integer())
        c.votes.push_back(votes[i].get<long long>());
      else if (votes[i].is_string())
        c.vote_labels.push_back(votes[i].get<std::string>());
      else
        throw ConfigError(path, "must be an integer or a yes/no label");
    }
    if (!c.votes.empty() && !c.vote_labels.empty()) throw ConfigError("votes", "mixes integers and labels");
  }

  if (c.N < 1) throw ConfigError("N", "must be >= 1");
  if (c.K < 1) throw ConfigError("K", "must be >= 1");
  if (c.scenario == "binary-ballot" && c.agents != 2 && c.agents != 3) throw ConfigError("agents", "must be 2 or 3");
  if (c.scenario == "agent-spin" && c.width != 2 && c.width != 3) throw ConfigError("width", "must be 2 or 3");
  if (c.scenario == "cheat-voter" && c.width != 2) throw ConfigError("width", "the cheat state needs width 2");
  if (c.scenario == "multiparty-collude" && c.K < 2) throw ConfigError("K", "must be >= 2");
  if (c.scenario == "dcnet" && c.diners < 3) throw ConfigError("diners", "must be >= 3");
  if (c.payer && (*c.payer < 0 || *c.payer >= c.diners)) throw ConfigError("payer", "not a diner index");
  if (c.scenario == "comparative" && c.vote_labels.size() != 2)
    throw ConfigError("votes", "comparative ballot takes exactly two yes/no votes");
  if (c.scenario == "comparative")
    for (std::size_t i = 0; i < 2; ++i) detail::parse_vote(c.vote_labels[i], "votes[" + std::to_string(i) + "]");
  if (c.scenario == "binary-ballot")
    for (std::size_t i = 0; i < c.vote_labels.size(); ++i)
      if (c.vote_labels[i] != "cheat") detail::parse_vote(c.vote_labels[i], "votes[" + std::to_string(i) + "]");
  if (c.scenario == "binary-ballot" && !c.votes.empty()) throw ConfigError("votes", "binary ballot takes yes/no labels");
  if ((c.scenario == "survey" || c.scenario == "multiparty") && !c.vote_labels.empty())
    throw ConfigError("votes", "survey votes must be integers");
  if (c.scenario == "agent-spin") detail::parse_vote(c.vote, "vote");
  if (c.scenario == "complexity")
    for (std::size_t i = 0; i < c.voters.size(); ++i)
      if (c.voters[i] < 2) throw ConfigError("voters[" + std::to_string(i) + "]", "must be >= 2");
  if (is_attack(c.scenario) && !c.seed) throw ConfigError("seed", "required for stochastic scenarios");
  return c;
}

// Largest N below `N` whose ballot layout fits the dimension limit.
inline int suggest_smaller_N(int N, int sites, int extra_factor = 1) {
  for (int n = N - 1; n >= 1; --n) {
    const double dim = (static_cast<double>(sites) * n + 1) * std::pow(n + 1.0, sites) * extra_factor;
    if (dim <= static_cast<double>(kDefaultDimLimit)) return n;
  }
  return 0;
}

namespace detail {

inline std::uint64_t seed_or_default(const ScenarioConfig& c) { return c.seed.value_or(0); }

inline ordered_json survey_like(const ScenarioConfig& c, bool multiparty) {
  const BallotParams p{c.N, multiparty ? c.K : 1};
  SessionOptions opts{c.audit, true, c.strict_basis ? ResidualPolicy::strict : ResidualPolicy::allow};
  long long total = 0;
  for (auto v : c.votes) total += v;
  const int expected = mod_floor(total, p.modulus());

  std::map<int, std::size_t> counts;
  ordered_json transcript;
  ordered_json snapshot;
  TallyResult last;
  double worst_privacy = 0.0;
  for (std::size_t t = 0; t < c.trials; ++t) {
    auto rng = trial_rng(seed_or_default(c), t);
    auto session = multiparty ? BallotSession::multiparty(p, opts) : BallotSession::survey(p, opts);
    for (std::size_t i = 0; i < c.votes.size(); ++i) {
      session.cast("voter" + std::to_string(i + 1), c.votes[i]);
      worst_privacy = std::max(worst_privacy, session.privacy_deviation());
    }
    if (t == 0 && c.snapshot) snapshot = state_to_json(session.state());
    session.transfer_to_tallyman();
    last = session.tally(rng);
    ++counts[last.tally];
    if (last.tally != expected) throw InvariantError("honest survey tally differs from the vote sum");
    if (t == 0) transcript = transcript_to_json(session);
  }

  ordered_json r{{"tally", last.tally}};
  if (c.signed_tally) r["signed_tally"] = last.tally > c.N / 2 ? last.tally - p.modulus() : last.tally;
  r["expected_tally"] = expected;
  r["raw_expectation"] = last.raw_expectation;
  r["raw_expectation_abs_diff"] = std::abs(last.raw_expectation - expected);
  r["outcome_probability"] = last.outcome_probability;
  r["analytic_outcome_probability"] = 1.0;
  r["outcome_probability_abs_diff"] = std::abs(last.outcome_probability - 1.0);
  ordered_json hist = ordered_json::object();
  for (const auto& [n, k] : counts) hist[std::to_string(n)] = k;
  r["tally_counts"] = hist;
  r["privacy_max_trace_distance"] = worst_privacy;
  r["transcript"] = transcript;
  if (c.snapshot) r["final_state_before_transfer"] = snapshot;
  return r;
}

inline ordered_json binary_ballot(const ScenarioConfig& c) {
  const BallotParams p{c.N, c.agents};
  SessionOptions opts{c.audit, true, c.strict_basis ? ResidualPolicy::strict : ResidualPolicy::allow};
  bool honest = true;
  int yes = 0;
  for (const auto& v : c.vote_labels) {
    honest = honest && v != "cheat";
    yes += v == "yes";
  }
  if (!honest && c.agents != 2) throw ConfigError("votes", "the cheat state needs a 2-agent ballot");

  std::map<int, std::size_t> counts;
  ordered_json transcript;
  ordered_json advances = ordered_json::array();
  ordered_json returned = ordered_json::array();
  TallyResult last;
  for (std::size_t t = 0; t < c.trials; ++t) {
    auto rng = trial_rng(seed_or_default(c), t);
    auto session = BallotSession::binary_agent(p, c.agents, opts);
    for (std::size_t i = 0; i < c.vote_labels.size(); ++i) {
      const auto& label = c.vote_labels[i];
      const PureState prepared =
          label == "cheat" ? cheat_vote_state() : qutrit_vote_state(parse_vote(label, "votes"), c.agents);
      auto receipt = session.cast_binary("voter" + std::to_string(i + 1), prepared);
      if (t == 0) {
        advances.push_back(receipt.phase_advance / p.delta());
        returned.push_back(tamper_probability(receipt.returned_qutrits, prepared));
      }
    }
    session.transfer_to_tallyman();
    last = session.tally(rng);
    ++counts[last.tally];
    if (honest && last.tally != yes % p.modulus())
      throw InvariantError("honest binary ballot tally differs from the number of yes votes");
    if (t == 0) transcript = transcript_to_json(session);
  }

  ordered_json r{{"tally", last.tally}};
  if (honest) {
    r["expected_tally"] = yes % p.modulus();
    r["tally_abs_diff"] = std::abs(last.tally - yes % p.modulus());
  }
  r["raw_expectation"] = last.raw_expectation;
  ordered_json dist = ordered_json::object();
  for (const auto& [n, prob] : last.outcome_distribution) dist[std::to_string(n)] = prob;
  r["outcome_distribution"] = dist;
  ordered_json hist = ordered_json::object();
  for (const auto& [n, k] : counts) hist[std::to_string(n)] = k;
  r["tally_counts"] = hist;
  r["phase_advance_in_votes"] = advances;
  r["returned_tamper_probability"] = returned;
  r["transcript"] = transcript;
  return r;
}

inline ordered_json comparative(const ScenarioConfig& c) {
  const Vote a = parse_vote(c.vote_labels[0], "votes[0]");
  const Vote b = parse_vote(c.vote_labels[1], "votes[1]");
  const Comparison expected = a == b ? Comparison::same : Comparison::different;
  std::size_t correct = 0;
  ComparativeResult last;
  for (std::size_t t = 0; t < c.trials; ++t) {
    auto rng = trial_rng(seed_or_default(c), t);
    last = comparative_run(a, b, rng);
    correct += last.verdict == expected;
  }
  if (correct != c.trials) throw InvariantError("comparative ballot returned the wrong verdict");
  return {{"verdict", to_string(last.verdict)},
          {"probability", last.probability},
          {"analytic_probability", 1.0},
          {"abs_diff", std::abs(last.probability - 1.0)},
          {"correct_runs", correct}};
}

inline ordered_json dcnet_rounds(const ScenarioConfig& c) {
  std::size_t correct = 0;
  std::size_t ones = 0;
  int last_sum = 0;
  const int expected = c.payer ? 1 : 0;
  for (std::size_t t = 0; t < c.trials; ++t) {
    auto rng = trial_rng(seed_or_default(c), t);
    auto round = dcnet::run_round(c.diners, c.payer, rng);
    last_sum = round.broadcast();
    ones += last_sum;
    correct += last_sum == expected;
  }
  if (correct != c.trials) throw InvariantError("DC-net broadcast disagrees with the payer indicator");
  ordered_json r{{"diners", c.diners},
                 {"payer", c.payer ? ordered_json(*c.payer) : ordered_json(nullptr)},
                 {"rounds", c.trials},
                 {"sum", last_sum},
                 {"expected_sum", expected},
                 {"broadcast_ones", ones},
                 {"correct_rounds", correct},
                 {"pads_per_round", dcnet::pad_count(c.diners)}};
  if (c.diners <= 5) {
    auto check = dcnet::anonymity_exhaustive(c.diners);
    r["exhaustive_cases"] = check.cases;
    r["exhaustive_untraceable"] = check.untraceable;
  }
  return r;
}

inline ordered_json complexity(const ScenarioConfig& c) {
  ordered_json rows = ordered_json::array();
  for (auto n : c.voters) {
    auto pc = dcnet::pad_complexity(n);
    rows.push_back({{"voters", n},
                    {"classical_pads", pc.classical_pads},
                    {"classical_pads_per_voter", pc.classical_pads_per_voter},
                    {"quantum_states_per_voter", pc.quantum_states_per_voter},
                    {"analytic_classical_pads", n * (n - 1) / 2}});
  }
  return {{"rows", rows}};
}

inline ordered_json dispatch(const ScenarioConfig& c) {
  const TrialPlan plan{c.trials, seed_or_default(c), c.per_trial};
  if (c.scenario == "comparative") return comparative(c);
  if (c.scenario == "survey") return survey_like(c, false);
  if (c.scenario == "multiparty") return survey_like(c, true);
  if (c.scenario == "binary-ballot") return binary_ballot(c);
  if (c.scenario == "collude" || c.scenario == "collude-detect")
    return report_to_json(collusion_report(BallotParams{c.N, 1}, c.votes, plan), c.per_trial);
  if (c.scenario == "agent-spin")
    return report_to_json(agent_spin_report(parse_vote(c.vote, "vote"), c.width, plan), c.per_trial);
  if (c.scenario == "cheat-voter")
    return report_to_json(cheat_vote_analysis(BallotParams{c.N, 2}, c.width, plan), c.per_trial);
  if (c.scenario == "multiparty-collude")
    return report_to_json(multiparty_collusion_attempt(BallotParams{c.N, c.K}, plan), c.per_trial);
  if (c.scenario == "dcnet") return dcnet_rounds(c);
  return complexity(c);
}

inline int ballot_sites(const ScenarioConfig& c) {
  if (c.scenario == "multiparty" || c.scenario == "multiparty-collude") return c.K;
  if (c.scenario == "binary-ballot") return c.agents;
  if (c.scenario == "cheat-voter") return 2;
  return 1;
}

}  // namespace detail

/// Runs a validated scenario. The report has a stable key order and contains no
/// wall-clock data, so identical configs give identical reports.
inline ordered_json run_scenario(const ScenarioConfig& c) {
  ordered_json report{{"scenario", c.scenario}};
  report["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
  report["trials"] = c.trials;
  try {
    report["result"] = detail::dispatch(c);
  } catch (const CutoffError& e) {
    const int sites = detail::ballot_sites(c);
    const int extra = c.scenario == "binary-ballot" ? static_cast<int>(std::pow(3, c.agents)) : 1;
    throw CutoffError(std::string(e.what()) + "; try N <= " + std::to_string(suggest_smaller_N(c.N, sites, extra)));
  } catch (const ProtocolError& e) {
    throw ConfigError("", e.what());
  }
  return report;
}

inline ordered_json run_scenario(const nlohmann::json& config) { return run_scenario(parse_config(config)); }

}  // namespace qballot
