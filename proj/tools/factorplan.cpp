#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "factorplan/analysis.hpp"
#include "factorplan/budgeting.hpp"
#include "factorplan/coverage.hpp"
#include "factorplan/errors.hpp"
#include "factorplan/factor_space.hpp"
#include "factorplan/session.hpp"
#include "factorplan/similarity.hpp"
#include "factorplan/simulator.hpp"
#include "factorplan/strategies.hpp"
#include "factorplan/text_util.hpp"

namespace {

using nlohmann::json;
using namespace factorplan;

json parse_json_file(const std::string& path, const std::string& what) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + " '" + path + "': invalid JSON: " + e.what());
  }
}

FactorSpace load_space(const std::string& path) {
  return parse_space_json(parse_json_file(path, "space spec"));
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

int resolve_factor(const FactorSpace& space, const std::string& text) {
  const int by_name = space.factor_index(text);
  if (by_name >= 0) return by_name;
  try {
    const int index = std::stoi(text);
    if (index >= 0 && index < space.num_factors()) return index;
  } catch (const std::exception&) {
  }
  throw ValidationError("unknown factor '" + text + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& part : split(text, ',')) {
    if (part.empty()) continue;
    seeds.push_back(std::stoull(part));
  }
  if (seeds.empty()) throw ValidationError("--seeds: expected at least one seed");
  return seeds;
}

// --- plan -------------------------------------------------------------------

struct PlanOptions {
  std::string space_path;
  std::string strategy;
  int demos = 0;
  std::uint64_t seed = 0;
  std::optional<int> budget;
  bool no_dedupe = false;
  std::string factor;
  std::optional<std::uint64_t> configs;
  std::string out_path;
};

void run_plan(const PlanOptions& opts) {
  const FactorSpace space = load_space(opts.space_path);
  const Strategy strategy = strategy_from_string(opts.strategy);
  if (opts.configs && strategy != Strategy::kRandom) {
    throw ValidationError("--configs only applies to the random strategy");
  }
  if (!opts.factor.empty() && strategy != Strategy::kSingleFactor) {
    throw ValidationError("--factor only applies to the single_factor strategy");
  }
  std::optional<int> factor_index;
  if (!opts.factor.empty()) factor_index = resolve_factor(space, opts.factor);

  CollectionPlan plan;
  if (opts.budget) {
    if (opts.no_dedupe) {
      throw ValidationError("--no-dedupe cannot be combined with --budget (rate-limited "
                            "plans truncate the deduplicated sequence)");
    }
    plan = plan_at_rate(space, strategy, *opts.budget, opts.demos, opts.seed, factor_index);
  } else {
    GeneratePlanParams params;
    params.factor_index = factor_index;
    params.num_configs = opts.configs;
    params.dedupe = !opts.no_dedupe;
    plan = generate_plan(space, strategy, params, opts.demos, opts.seed);
  }
  write_file(opts.out_path, dump_json(plan_to_json(plan, space)));
  const CostLedger ledger = declared_cost(plan);
  std::cout << "wrote " << opts.out_path << ": " << to_string(plan.strategy) << ", "
            << plan.entries.size() << " entries, " << plan.total_demos()
            << " demos, declared_cost " << ledger.declared_total << ", hamming_cost "
            << ledger.hamming_total << "\n";
}

// --- cost -------------------------------------------------------------------

struct CostOptions {
  std::string plan_path;
  std::string space_path;
  std::optional<int> budget;
  std::string csv_path;
};

void run_cost(const CostOptions& opts) {
  const json doc = parse_json_file(opts.plan_path, "plan");
  CollectionPlan plan;
  std::optional<FactorSpace> space;
  if (!opts.space_path.empty()) {
    space = load_space(opts.space_path);
    plan = plan_from_json(doc, *space);
  } else {
    StandalonePlan standalone = plan_from_json_standalone(doc);
    plan = std::move(standalone.plan);
    space = std::move(standalone.space);
  }
  const CostLedger ledger = declared_cost(plan);
  std::cout << "strategy: " << to_string(plan.strategy) << "\n";
  std::cout << "entries: " << plan.entries.size() << "\n";
  std::cout << "initial_changes: " << ledger.initial_changes << "\n";
  std::cout << "declared_total: " << ledger.declared_total << "\n";
  std::cout << "hamming_total: " << ledger.hamming_total << "\n";
  if (plan.strategy == Strategy::kComplete) {
    // The unit-change convention charges N + k^N - 1 for a full sweep; the
    // usual nominal figure is k^N. Both are printed so neither is silent.
    std::cout << "nominal_complete_changes: " << nominal_complete_changes(*space)
              << " (convention total differs by N-1)\n";
  }
  if (opts.budget) {
    std::cout << "budget: " << *opts.budget
              << (ledger.declared_total <= *opts.budget ? " (within budget)"
                                                        : " (exceeds budget)")
              << "\n";
  }
  if (!opts.csv_path.empty()) {
    write_file(opts.csv_path, cost_report_csv(plan, opts.budget));
    std::cout << "wrote " << opts.csv_path << "\n";
  }
}

// --- coverage ---------------------------------------------------------------

struct CoverageOptions {
  std::string plan_path;
  std::string manifest_path;
  std::string space_path;
  std::string csv_path;
};

void run_coverage(const CoverageOptions& opts) {
  if (opts.plan_path.empty() == opts.manifest_path.empty()) {
    throw ValidationError("coverage needs exactly one of --plan or --manifest");
  }
  const FactorSpace space = load_space(opts.space_path);
  std::vector<FactorConfig> configs;
  if (!opts.plan_path.empty()) {
    const CollectionPlan plan =
        plan_from_json(parse_json_file(opts.plan_path, "plan"), space);
    configs = plan.configs();
  } else {
    for (const EpisodeRecord& record :
         ingest_manifest(read_file(opts.manifest_path), space)) {
      configs.push_back(record.config);
    }
  }
  const CoverageReport report = coverage_report(configs, space);
  std::cout << coverage_report_text(report, space);
  if (!opts.csv_path.empty()) {
    write_file(opts.csv_path, coverage_report_csv(report, space));
    std::cout << "wrote " << opts.csv_path << "\n";
  }
}

// --- grid -------------------------------------------------------------------

struct GridOptions {
  std::string space_path;
  std::string pairs = "all";
  std::optional<std::uint64_t> sample;
  std::uint64_t seed = 0;
  int demos = 1;
  std::string out_path;
};

json configs_as_plan_json(const std::vector<FactorConfig>& configs,
                          const FactorSpace& space, Strategy label, std::uint64_t seed,
                          int demos) {
  CollectionPlan plan;
  plan.strategy = label;
  plan.seed = seed;
  plan.space_name = space.name();
  plan.space_hash = space_spec_hash(space);
  plan.deduped = true;
  for (const FactorConfig& config : configs) {
    plan.entries.push_back(PlanEntry{config, demos});
  }
  return plan_to_json(plan, space);
}

void run_grid(const GridOptions& opts) {
  const FactorSpace space = load_space(opts.space_path);
  std::vector<FactorConfig> configs;
  Strategy label = Strategy::kComplete;
  if (opts.sample) {
    configs = eval_sample(space, *opts.sample, opts.seed);
    label = Strategy::kRandom;
  } else if (opts.pairs == "all") {
    for (int i = 0; i < space.num_factors(); ++i) {
      for (int j = i + 1; j < space.num_factors(); ++j) {
        const auto grid = pairwise_grid(space, i, j);
        configs.insert(configs.end(), grid.begin(), grid.end());
      }
    }
  } else {
    const std::vector<std::string> parts = split(opts.pairs, ',');
    if (parts.size() != 2) {
      throw ValidationError("--pairs expects 'all' or '<factor>,<factor>'");
    }
    configs = pairwise_grid(space, resolve_factor(space, parts[0]),
                            resolve_factor(space, parts[1]));
  }
  if (configs.empty()) {
    throw ValidationError("grid is empty (no non-base values for the requested pair)");
  }
  const json doc = configs_as_plan_json(configs, space, label, opts.seed, opts.demos);
  if (opts.out_path.empty()) {
    std::cout << dump_json(doc);
  } else {
    write_file(opts.out_path, dump_json(doc));
    std::cout << "wrote " << opts.out_path << ": " << configs.size() << " configs\n";
  }
}

// --- select -----------------------------------------------------------------

struct SelectOptions {
  std::string space_path;
  int budget = 0;
  std::string strategy;
  std::string metric = "discrete";
  std::uint64_t seed = 0;
  std::string out_path;
};

void run_select(const SelectOptions& opts) {
  const FactorSpace space = load_space(opts.space_path);
  const Strategy strategy = strategy_from_string(opts.strategy);
  // One metric for every factor, or a comma-separated per-factor list.
  std::vector<MetricKind> metrics;
  const std::vector<std::string> parts = split(opts.metric, ',');
  if (parts.size() == 1) {
    metrics.assign(static_cast<std::size_t>(space.num_factors()),
                   metric_from_string(parts[0]));
  } else {
    if (static_cast<int>(parts.size()) != space.num_factors()) {
      throw ValidationError("--metric lists " + std::to_string(parts.size()) +
                            " metrics for " + std::to_string(space.num_factors()) +
                            " factors");
    }
    for (const std::string& part : parts) metrics.push_back(metric_from_string(part));
  }
  const SelectionResult result =
      select_values_for_budget(space, strategy, opts.budget, metrics, opts.seed);
  std::cout << selection_report_text(space, result);
  if (!opts.out_path.empty()) {
    write_file(opts.out_path, dump_json(space_to_json(result.reduced)));
    std::cout << "wrote " << opts.out_path << "\n";
  }
}

// --- simulate ----------------------------------------------------------------

struct SimulateOptions {
  std::string space_path;
  std::string model_path;
  std::string strategies = "stair,l,diagonal,random";
  std::string budgets;
  int demos = 0;
  std::string seeds = "0";
  std::string method = "auto";
  std::uint64_t samples = 10000;
  std::string out_path;
};

void run_simulate(const SimulateOptions& opts) {
  const FactorSpace space = load_space(opts.space_path);
  const GeneralizationModel model =
      model_from_json(parse_json_file(opts.model_path, "model"), space);
  for (const std::string& warning : model.validate()) {
    std::cerr << "warning: " << warning << "\n";
  }

  std::vector<Strategy> strategies;
  for (const std::string& part : split(opts.strategies, ',')) {
    if (!part.empty()) strategies.push_back(strategy_from_string(part));
  }
  std::vector<int> budgets;
  for (const std::string& part : split(opts.budgets, ',')) {
    if (!part.empty()) budgets.push_back(std::stoi(part));
  }
  const std::vector<std::uint64_t> seeds = parse_seed_list(opts.seeds);

  EvalMethod method = EvalMethod::kExact;
  if (opts.method == "exact") {
    method = EvalMethod::kExact;
  } else if (opts.method == "monte_carlo" || opts.method == "mc") {
    method = EvalMethod::kMonteCarlo;
  } else if (opts.method == "auto") {
    bool exact_feasible = true;
    try {
      exact_feasible = space.combination_count() <= 1'000'000ULL;
    } catch (const ValidationError&) {
      exact_feasible = false;
    }
    method = exact_feasible ? EvalMethod::kExact : EvalMethod::kMonteCarlo;
  } else {
    throw ValidationError("--method expects exact, monte_carlo, or auto");
  }

  const auto rows = compare_strategies(space, model, budgets, opts.demos, strategies,
                                       seeds, method, opts.samples);
  const std::string csv = comparison_csv(rows, model, space, method, opts.samples);
  if (opts.out_path.empty()) {
    std::cout << csv;
  } else {
    write_file(opts.out_path, csv);
    std::cout << "wrote " << opts.out_path << ": " << rows.size() << " rows\n";
  }
}

// --- analyze -----------------------------------------------------------------

struct AnalyzeOptions {
  std::string manifest_path;
  std::string space_path;
  int tiers = 0;  // 0 = no tier report
  std::string csv_path;
};

void run_analyze(const AnalyzeOptions& opts) {
  const FactorSpace space = load_space(opts.space_path);
  const std::vector<EpisodeRecord> records =
      ingest_manifest(read_file(opts.manifest_path), space);
  std::cout << "episodes: " << records.size() << "\n";
  const PairwiseTable table = pairwise_table(records, space);
  std::cout << pairwise_table_text(table, space);
  const PerValueRates rates = per_value_success(records, space);
  std::cout << per_value_rates_text(rates, space);
  if (opts.tiers > 0) {
    TierReport report = tier_values(rates, opts.tiers);
    report.manifest_tag = opts.manifest_path;
    std::cout << tier_report_text(report, space);
  }
  if (!opts.csv_path.empty()) {
    write_file(opts.csv_path, pairwise_table_csv(table, space));
    std::cout << "wrote " << opts.csv_path << "\n";
  }
}

// --- session -----------------------------------------------------------------

struct SessionOptions {
  std::string plan_path;
  std::string state_path;
  std::string event = "demo_done";
};

StandalonePlan load_session_plan(const std::string& plan_path, std::string* hash_out) {
  const std::string text = read_file(plan_path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("plan '" + plan_path + "': invalid JSON: " + e.what());
  }
  if (hash_out) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    *hash_out = buffer;
  }
  return plan_from_json_standalone(doc);
}

void run_session_init(const SessionOptions& opts) {
  std::string plan_hash;
  const StandalonePlan loaded = load_session_plan(opts.plan_path, &plan_hash);
  const SessionState state = session_init(loaded.plan, opts.plan_path, plan_hash);
  write_file(opts.state_path, dump_json(session_to_json(state)));
  std::cout << session_setup_text(loaded.plan, loaded.space);
  std::cout << "wrote " << opts.state_path << "\n";
}

struct LoadedSession {
  SessionState state;
  StandalonePlan plan;
};

LoadedSession load_and_check_state(const std::string& state_path) {
  SessionState state =
      session_from_json(parse_json_file(state_path, "session checkpoint"));
  std::string plan_hash;
  StandalonePlan loaded = load_session_plan(state.plan_path, &plan_hash);
  if (plan_hash != state.plan_hash) {
    throw ValidationError("plan file '" + state.plan_path +
                          "' changed since the session started (hash mismatch)");
  }
  // Event-sourcing check: the log must reproduce the stored cursor exactly.
  const SessionState replayed =
      replay_session(loaded.plan, state.plan_path, state.plan_hash, state.event_log);
  if (replayed.cursor != state.cursor || replayed.demos_done != state.demos_done) {
    throw ValidationError("corrupt session checkpoint: event log does not reproduce "
                          "the stored state");
  }
  return LoadedSession{std::move(state), std::move(loaded)};
}

void run_session_step(const SessionOptions& opts) {
  LoadedSession session = load_and_check_state(opts.state_path);
  const SessionEvent event = session_event_from_string(opts.event);
  const StepResult result =
      session_step(session.state, session.plan.plan, session.plan.space, event);
  write_file(opts.state_path, dump_json(session_to_json(session.state)));
  std::cout << result.message;
}

void run_session_status(const SessionOptions& opts) {
  const LoadedSession session = load_and_check_state(opts.state_path);
  std::cout << session_status_text(session.state, session.plan.plan, session.plan.space);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factorplan: plan, cost, and evaluate data collection over factor spaces"};
  app.require_subcommand(1);

  PlanOptions plan_opts;
  auto* plan_cmd = app.add_subcommand("plan", "generate a collection plan");
  plan_cmd->add_option("--space", plan_opts.space_path, "space spec file")->required();
  plan_cmd->add_option("--strategy", plan_opts.strategy, "collection strategy")->required();
  plan_cmd->add_option("--demos", plan_opts.demos, "total demonstrations")->required();
  plan_cmd->add_option("--seed", plan_opts.seed, "random seed");
  plan_cmd->add_option("--budget", plan_opts.budget, "factor-change budget (rate-limits the plan)");
  plan_cmd->add_flag("--no-dedupe", plan_opts.no_dedupe, "keep repeated configs");
  plan_cmd->add_option("--factor", plan_opts.factor, "factor for single_factor");
  plan_cmd->add_option("--configs", plan_opts.configs, "config count for random");
  plan_cmd->add_option("--out", plan_opts.out_path, "output plan file")->required();
  plan_cmd->callback([&] { run_plan(plan_opts); });

  CostOptions cost_opts;
  auto* cost_cmd = app.add_subcommand("cost", "factor-change cost of a plan");
  cost_cmd->add_option("--plan", cost_opts.plan_path, "plan file")->required();
  cost_cmd->add_option("--space", cost_opts.space_path, "space spec file (optional)");
  cost_cmd->add_option("--budget", cost_opts.budget, "budget to compare against");
  cost_cmd->add_option("--csv", cost_opts.csv_path, "write CSV report here");
  cost_cmd->callback([&] { run_cost(cost_opts); });

  CoverageOptions coverage_opts;
  auto* coverage_cmd = app.add_subcommand("coverage", "coverage statistics of a plan or manifest");
  coverage_cmd->add_option("--plan", coverage_opts.plan_path, "plan file");
  coverage_cmd->add_option("--manifest", coverage_opts.manifest_path, "episode manifest");
  coverage_cmd->add_option("--space", coverage_opts.space_path, "space spec file")->required();
  coverage_cmd->add_option("--csv", coverage_opts.csv_path, "write CSV report here");
  coverage_cmd->callback([&] { run_coverage(coverage_opts); });

  GridOptions grid_opts;
  auto* grid_cmd = app.add_subcommand("grid", "pairwise evaluation grids and eval samples");
  grid_cmd->add_option("--space", grid_opts.space_path, "space spec file")->required();
  grid_cmd->add_option("--pairs", grid_opts.pairs, "'all' or '<factor>,<factor>'");
  grid_cmd->add_option("--sample", grid_opts.sample, "emit n uniform eval configs instead");
  grid_cmd->add_option("--seed", grid_opts.seed, "random seed for --sample");
  grid_cmd->add_option("--demos", grid_opts.demos, "episodes per config (default 1)");
  grid_cmd->add_option("--out", grid_opts.out_path, "output file (stdout if omitted)");
  grid_cmd->callback([&] { run_grid(grid_opts); });

  SelectOptions select_opts;
  auto* select_cmd = app.add_subcommand("select", "similarity-aware value selection under a budget");
  select_cmd->add_option("--space", select_opts.space_path, "space spec file")->required();
  select_cmd->add_option("--budget", select_opts.budget, "factor-change budget")->required();
  select_cmd->add_option("--strategy", select_opts.strategy, "strategy the budget applies to")->required();
  select_cmd->add_option("--metric", select_opts.metric, "euclidean|quaternion_angular|discrete");
  select_cmd->add_option("--seed", select_opts.seed, "seed for PAM tie-breaking");
  select_cmd->add_option("--out", select_opts.out_path, "output reduced space file");
  select_cmd->callback([&] { run_select(select_opts); });

  SimulateOptions simulate_opts;
  auto* simulate_cmd = app.add_subcommand("simulate", "score strategies against a generalization model");
  simulate_cmd->add_option("--space", simulate_opts.space_path, "space spec file")->required();
  simulate_cmd->add_option("--model", simulate_opts.model_path, "generalization model file")->required();
  simulate_cmd->add_option("--strategies", simulate_opts.strategies, "comma-separated strategies");
  simulate_cmd->add_option("--budgets", simulate_opts.budgets, "comma-separated change budgets")->required();
  simulate_cmd->add_option("--demos", simulate_opts.demos, "total demonstrations per plan")->required();
  simulate_cmd->add_option("--seeds", simulate_opts.seeds, "comma-separated seeds");
  simulate_cmd->add_option("--method", simulate_opts.method, "exact|monte_carlo|auto");
  simulate_cmd->add_option("--samples", simulate_opts.samples, "Monte Carlo sample count");
  simulate_cmd->add_option("--out", simulate_opts.out_path, "output CSV (stdout if omitted)");
  simulate_cmd->callback([&] { run_simulate(simulate_opts); });

  AnalyzeOptions analyze_opts;
  auto* analyze_cmd = app.add_subcommand("analyze", "pairwise tables and per-value rates from a manifest");
  analyze_cmd->add_option("--manifest", analyze_opts.manifest_path, "episode manifest")->required();
  analyze_cmd->add_option("--space", analyze_opts.space_path, "space spec file")->required();
  analyze_cmd->add_option("--tiers", analyze_opts.tiers, "tier count for the similarity ranking");
  analyze_cmd->add_option("--csv", analyze_opts.csv_path, "write pairwise CSV here");
  analyze_cmd->callback([&] { run_analyze(analyze_opts); });

  SessionOptions session_opts;
  auto* session_cmd = app.add_subcommand("session", "step-by-step collection session");
  session_cmd->require_subcommand(1);
  auto* init_cmd = session_cmd->add_subcommand("init", "start a session from a plan");
  init_cmd->add_option("--plan", session_opts.plan_path, "plan file")->required();
  init_cmd->add_option("--state", session_opts.state_path, "checkpoint file")->required();
  init_cmd->callback([&] { run_session_init(session_opts); });
  auto* step_cmd = session_cmd->add_subcommand("step", "record an event");
  step_cmd->add_option("--state", session_opts.state_path, "checkpoint file")->required();
  step_cmd->add_option("--event", session_opts.event, "demo_done|skip_entry|status");
  step_cmd->callback([&] { run_session_step(session_opts); });
  auto* status_cmd = session_cmd->add_subcommand("status", "show session progress");
  status_cmd->add_option("--state", session_opts.state_path, "checkpoint file")->required();
  status_cmd->callback([&] { run_session_status(session_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
