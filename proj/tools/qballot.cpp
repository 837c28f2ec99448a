// Scenario runner for the quantum ballot simulator.
//
//   qballot survey -N 10 --votes 3,4,2
//   qballot attack --kind collude -N 7 --votes 2,3 --trials 10000 --seed 42
//   qballot --config scenario.json survey --out report.json
//
// Exit codes: 0 success, 2 config error, 3 dimension overflow, 4 invariant violation.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qballot/qballot.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDimension = 3;
constexpr int kExitInvariant = 4;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> trials;
  std::string out;
  bool strict_basis = false;
  bool signed_tally = false;
  bool per_trial = false;
  bool audit = false;
  bool snapshot = false;

  std::optional<int> N, K, agents, width, diners, payer;
  std::vector<std::string> votes;
  std::string kind;
  std::optional<std::string> vote;
  std::vector<std::uint64_t> voters;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json vote_value(const std::string& v) {
  try {
    std::size_t used = 0;
    long long n = std::stoll(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  return v;
}

nlohmann::json build_config(const std::string& scenario, const Options& o) {
  nlohmann::json cfg = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw qballot::ConfigError("--config", "cannot open " + o.config_path);
    try {
      cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw qballot::ConfigError("--config", e.what());
    }
  }
  if (!cfg.is_object()) throw qballot::ConfigError("", "config must be a JSON object");
  if (cfg.contains("scenario") && cfg["scenario"] != scenario &&
      !(scenario == "collude" && cfg["scenario"] == "collude-detect"))
    throw qballot::ConfigError("scenario", "config is for \"" + cfg["scenario"].dump() + "\", not \"" + scenario + "\"");
  if (!cfg.contains("scenario")) cfg["scenario"] = scenario;

  if (o.seed) cfg["seed"] = *o.seed;
  if (o.trials) cfg["trials"] = *o.trials;
  if (!o.out.empty()) cfg["output"] = o.out;
  if (o.strict_basis) cfg["strict_basis"] = true;
  if (o.signed_tally) cfg["signed_tally"] = true;
  if (o.per_trial) cfg["per_trial"] = true;
  if (o.audit) cfg["audit"] = true;
  if (o.snapshot) cfg["snapshot"] = true;
  if (o.N) cfg["N"] = *o.N;
  if (o.K) cfg["K"] = *o.K;
  if (o.agents) cfg["agents"] = *o.agents;
  if (o.width) cfg["width"] = *o.width;
  if (o.diners) cfg["diners"] = *o.diners;
  if (o.payer) cfg["payer"] = *o.payer;
  if (o.vote) cfg["vote"] = *o.vote;
  if (!o.voters.empty()) cfg["voters"] = o.voters;
  if (!o.votes.empty()) {
    cfg["votes"] = nlohmann::json::array();
    for (const auto& v : o.votes) cfg["votes"].push_back(vote_value(v));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum anonymous-ballot simulator: protocols, attacks and DC-net baseline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Options o;

  app.add_option("--config", o.config_path, "Scenario JSON document")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Master seed (per-trial seeds derive from it)");
  app.add_option("--trials", o.trials, "Number of Monte Carlo trials");
  app.add_option("--out", o.out, "Write the report here instead of stdout");
  app.add_flag("--strict-basis", o.strict_basis, "Fail when a measurement basis misses part of the state");
  app.add_flag("--signed-tally", o.signed_tally, "Also report survey tallies as signed residues");
  app.add_flag("--per-trial", o.per_trial, "Include per-trial records in attack reports");
  app.add_flag("--audit", o.audit, "Keep the vote log in session transcripts");
  app.add_flag("--snapshot", o.snapshot, "Include the serialized ballot state in survey reports");

  auto ballot_opts = [&](CLI::App* sub) {
    sub->add_option("-N", o.N, "Particle number (tally modulus N+1)");
    sub->add_option("--votes", o.votes, "Votes, comma separated")->delimiter(',');
  };

  auto* comparative = app.add_subcommand("comparative", "Two-voter same/different ballot");
  comparative->add_option("--votes", o.votes, "Two votes: yes|no")->delimiter(',');

  auto* survey = app.add_subcommand("survey", "Anonymous survey on the two-site ballot");
  ballot_opts(survey);

  auto* multiparty = app.add_subcommand("multiparty", "Anonymous survey on the K-site ballot");
  ballot_opts(multiparty);
  multiparty->add_option("-K", o.K, "Voting sites");

  auto* binary = app.add_subcommand("binary-ballot", "Binary-valued ballot with qutrit ballot agents");
  ballot_opts(binary);
  binary->add_option("--agents", o.agents, "Ballot agents (2 or 3)");

  auto* attack = app.add_subcommand("attack", "Adversary scenarios");
  ballot_opts(attack);
  attack->add_option("--kind", o.kind, "Attack")
      ->required()
      ->check(CLI::IsMember({"collude", "agent-spin", "cheat-voter", "multiparty-collude"}));
  attack->add_option("-K", o.K, "Voting sites (multiparty-collude)");
  attack->add_option("--width", o.width, "Qutrits per vote register (agent-spin)");
  attack->add_option("--vote", o.vote, "Honest vote under attack (agent-spin)");

  auto* dc = app.add_subcommand("dcnet", "Dining-cryptographers broadcast");
  dc->add_option("--diners", o.diners, "Number of diners (>= 3)");
  dc->add_option("--payer", o.payer, "Index of the paying diner; omit for none");

  auto* complexity = app.add_subcommand("complexity", "One-time-pad count versus ballot states");
  complexity->add_option("--voters", o.voters, "Voter counts, comma separated")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::string scenario = app.get_subcommands().front()->get_name();
  if (scenario == "attack") scenario = o.kind;

  try {
    auto config = qballot::parse_config(build_config(scenario, o));
    auto report = qballot::run_scenario(config);
    report["generated_at"] = utc_timestamp();
    const std::string text = report.dump(2) + "\n";
    if (config.output.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(config.output);
      if (!out) throw qballot::ConfigError("output", "cannot write " + config.output);
      out << text;
    }
  } catch (const qballot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qballot::CutoffError& e) {
    std::cerr << "dimension overflow: " << e.what() << "\n";
    return kExitDimension;
  } catch (const qballot::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const qballot::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
