#include "snls/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "snls/analysis.hpp"
#include "snls/checkpoint.hpp"
#include "snls/config.hpp"
#include "snls/errors.hpp"
#include "snls/exponents.hpp"
#include "snls/observables.hpp"
#include "snls/output.hpp"
#include "snls/parallel.hpp"

namespace snls {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Flags shared by every run subcommand; unset ones leave the config alone.
struct RunFlags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<unsigned> workers;
  bool force = false;
  std::optional<int> d, n, alpha, log_every;
  std::optional<double> length, lambda, sigma, dt, t_final;
  std::optional<std::string> scheme;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--paths", f.paths, "paths or pairs in the ensemble");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--force", f.force, "run even when the parameter gate rejects");
  cmd->add_option("--d", f.d, "dimension");
  cmd->add_option("--n", f.n, "points per axis");
  cmd->add_option("--L", f.length, "box length");
  cmd->add_option("--lambda", f.lambda, "damping");
  cmd->add_option("--sigma", f.sigma, "nonlinearity power");
  cmd->add_option("--alpha", f.alpha, "+1 focusing, -1 defocusing");
  cmd->add_option("--dt", f.dt, "time step");
  cmd->add_option("--t-final", f.t_final, "horizon");
  cmd->add_option("--log-every", f.log_every, "steps between logged rows");
  cmd->add_option("--scheme", f.scheme, "lie or strang");
}

/// Config document with command-line overrides applied; `overrides` lists
/// every key a flag replaced.
json merged_document(const RunFlags& f, json& overrides) {
  json doc;
  if (f.config.empty()) {
    doc = json{{"grid", {{"d", 2}, {"n", 64}, {"L", 20.0}}}};
  } else {
    std::ifstream in(f.config);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw ConfigError(f.config + ": not valid JSON: " + e.what());
    }
  }
  if (!doc.is_object()) throw ConfigError(f.config + ": expected a table at the top level");
  auto set = [&](const char* block, const char* key, const auto& value) {
    if (!value) return;
    json& target = block ? doc[block] : doc;
    if (!target.is_object()) target = json::object();
    target[key] = *value;
    overrides[block ? std::string(block) + "." + key : std::string(key)] = *value;
  };
  set("grid", "d", f.d);
  set("grid", "n", f.n);
  set("grid", "L", f.length);
  set("params", "lambda", f.lambda);
  set("params", "sigma", f.sigma);
  set("params", "alpha", f.alpha);
  set("params", "dt", f.dt);
  set("params", "t_final", f.t_final);
  set("params", "log_every", f.log_every);
  set("params", "scheme", f.scheme);
  set("params", "seed", f.seed);
  set("experiment", "paths", f.paths);
  set("experiment", "workers", f.workers);
  set(nullptr, "output", f.out);
  if (f.force) overrides["force"] = true;
  return doc;
}

// Everything a run subcommand needs once the config is settled.
struct Run {
  ParsedConfig parsed;
  json overrides = json::object();
  GridPtr grid;
  std::optional<NoiseOperator> noise;
  fs::path dir;
  std::string name;
  json verdicts = json::object();
  json results = json::object();

  const RunConfig& config() const { return parsed.config; }
  const SimParams& params() const { return parsed.config.params; }
  const NoiseOperator* noise_ptr() const { return noise ? &*noise : nullptr; }
  unsigned workers() const { return parsed.config.experiment.workers; }
  fs::path csv(const std::string& suffix = "") const { return dir / (name + suffix + ".csv"); }

  int finish(std::ostream& out) {
    bool pass = true;
    for (const auto& [key, v] : verdicts.items())
      if (v.is_boolean() && !v.get<bool>()) pass = false;
    const int status = pass ? kExitPass : kExitVerdictFail;
    json summary{{"version", version_string()},
                 {"experiment", name},
                 {"seed", params().seed},
                 {"config", serialize_config(config())},
                 {"overrides", overrides},
                 {"gate",
                  {{"verdict", parsed.gate.label()},
                   {"reason", parsed.gate.reason},
                   {"bypassed", parsed.gate_bypassed}}},
                 {"verdicts", verdicts},
                 {"results", results},
                 {"exit_status", status}};
    write_json(dir / "summary.json", summary);
    for (const auto& [key, v] : verdicts.items())
      out << fmt::format("{}: {}\n", key, v.is_boolean() ? (v.get<bool>() ? "pass" : "FAIL") : v.dump());
    out << fmt::format("wrote {}\n", (dir / "summary.json").string());
    return status;
  }
};

Run prepare(const RunFlags& flags, const std::string& subcommand) {
  Run run;
  const json doc = merged_document(flags, run.overrides);
  run.parsed = parse_config(doc, flags.force);
  run.grid = make_grid(run.config().grid);
  run.noise = make_noise(run.grid, run.config());
  run.name = run.config().experiment.name.empty() ? subcommand : run.config().experiment.name;
  run.dir = run.config().output;
  fs::create_directories(run.dir);
  return run;
}

std::vector<Observable> observers_for(const Run& run) {
  std::vector<Observable> out;
  const auto& p = run.params();
  for (const auto& name : run.config().experiment.observables)
    out.push_back(named_observable(name, p.sigma, p.alpha, run.config().experiment.g));
  return out;
}

void write_log(const fs::path& path, const TrajectoryLog& log) {
  std::vector<std::string> header{"time"};
  header.insert(header.end(), log.names.begin(), log.names.end());
  CsvWriter csv(path, header);
  for (std::size_t i = 0; i < log.times.size(); ++i) {
    std::vector<double> row{log.times[i]};
    row.insert(row.end(), log.rows[i].begin(), log.rows[i].end());
    csv.row(row);
  }
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------------------

int cmd_simulate(Run& run, std::ostream& out) {
  const auto& x = run.config().experiment;
  const auto& p = run.params();
  State state{make_initial(run.grid, x.initial), 0.0, RandomStream::derive(p.seed, StreamRole::path, 0)};
  if (x.initial.kind == InitialKind::checkpoint) {
    Checkpoint cp = load_checkpoint(x.initial.path);
    state.t = cp.state.t;
    state.rng = cp.state.rng;
    run.results["resumed_from"] = {{"path", x.initial.path}, {"t", cp.state.t}};
  }
  const double remaining = (p.t_final - state.t) / p.dt;
  if (remaining < -1e-9) throw ConfigError("params.t_final: checkpoint time lies beyond the horizon");
  const auto steps = static_cast<std::size_t>(std::llround(std::max(0.0, remaining)));
  const auto observers = observers_for(run);
  try {
    EvolveResult r = evolve_steps(std::move(state), steps, p, run.noise_ptr(), observers);
    write_log(run.csv(), r.log);
    const fs::path ckpt = run.dir / (run.name + ".ckpt");
    save_checkpoint(r.final_state, p, ckpt.string());
    run.results["final_time"] = r.final_state.t;
    run.results["checkpoint"] = ckpt.string();
    run.results["final"] = json::object();
    for (std::size_t j = 0; j < r.log.names.size(); ++j)
      run.results["final"][r.log.names[j]] = finite_or_null(r.log.rows.back()[j]);
    run.verdicts["completed"] = true;
  } catch (const BlowUpError& e) {
    write_log(run.csv(), e.partial_log);
    run.results["blow_up"] = {{"time", e.time()},
                              {"last_mass", e.last_good_mass()},
                              {"last_linf", e.last_good_linf()}};
    run.verdicts["completed"] = false;
  }
  return run.finish(out);
}

int cmd_moments(Run& run, std::ostream& out) {
  const auto& x = run.config().experiment;
  MomentOptions options;
  options.powers = x.powers;
  options.paths = x.paths;
  options.workers = run.workers();
  options.g = x.g;
  const Field u0 = make_initial(run.grid, x.initial);
  const MomentReport rep = mc_moments(u0, run.params(), run.noise_ptr(), options);

  std::vector<std::string> header{"time"};
  for (const auto& s : rep.series) {
    header.push_back(fmt::format("{}_m{}_mean", s.observable, s.power));
    header.push_back(fmt::format("{}_m{}_se", s.observable, s.power));
  }
  const bool exact = !rep.exact_mean_mass.empty();
  if (exact) header.push_back("exact_mean_mass");
  CsvWriter csv(run.csv(), header);
  for (std::size_t t = 0; t < rep.times.size(); ++t) {
    std::vector<double> row{rep.times[t]};
    for (const auto& s : rep.series) {
      row.push_back(s.mean[t]);
      row.push_back(s.standard_error[t]);
    }
    if (exact) row.push_back(rep.exact_mean_mass[t]);
    csv.row(row);
  }

  run.results["paths_requested"] = rep.paths_requested;
  run.results["paths_used"] = rep.paths_used;
  run.results["paths_excluded"] = rep.paths_excluded;
  run.verdicts["enough_paths"] = !rep.failed;
  if (exact) {
    run.results["max_mass_deviation"] = rep.max_mass_deviation;
    run.results["max_mass_relative_deviation"] = rep.max_mass_relative_deviation;
    run.results["max_mass_deviation_in_se"] = rep.max_mass_deviation_in_se;
    run.verdicts["mean_mass_identity"] = mass_identity_holds(rep);
  }
  json bounds = json::array();
  for (const auto& b : rep.bounds) {
    bounds.push_back({{"observable", b.observable},
                      {"power", b.power},
                      {"multiplicative", b.multiplicative},
                      {"c_least_squares", finite_or_null(b.c_least_squares)},
                      {"c_fit", finite_or_null(b.c_fit)},
                      {"ls_violations", b.ls_violations},
                      {"holds", b.holds}});
    run.verdicts[fmt::format("bound_{}_m{}{}", b.observable, b.power, b.multiplicative ? "_lesssim" : "")] =
        b.holds;
  }
  run.results["bounds"] = bounds;
  return run.finish(out);
}

int cmd_sync(Run& run, std::ostream& out) {
  const auto& x = run.config().experiment;
  const Field x1 = make_initial(run.grid, x.initial);
  const Field x2 = make_initial(run.grid, x.initial_b);
  std::vector<std::optional<SyncReport>> reports(x.paths);
  parallel_for(x.paths, run.workers(), [&](std::size_t i) {
    reports[i] = sync_experiment(x1, x2, run.params(), run.noise_ptr(),
                                 RandomStream::derive(run.params().seed, StreamRole::sync_pair, i),
                                 x.tolerance);
  });
  std::vector<SyncReport> all;
  for (auto& r : reports) all.push_back(std::move(*r));

  CsvWriter csv(run.csv(), {"pair", "time", "w_sq", "r", "envelope", "margin"});
  json pairs = json::array();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& r = all[i];
    for (std::size_t t = 0; t < r.times.size(); ++t)
      csv.row({static_cast<double>(i), r.times[t], r.w_sq[t], r.r[t], r.envelope[t], r.margin[t]});
    pairs.push_back({{"violations", r.violations},
                     {"decay_rate", finite_or_null(r.decay_rate)},
                     {"min_margin", finite_or_null(r.min_margin)},
                     {"trajectory_margin", {r.trajectory_margin[0], r.trajectory_margin[1]}}});
  }
  const SyncSummary s = summarize_sync(all);
  run.results["pairs"] = pairs;
  run.results["violations"] = s.violations;
  run.results["min_trajectory_margin"] = finite_or_null(s.min_trajectory_margin);
  run.results["min_decay_rate"] = finite_or_null(s.min_decay_rate);
  run.results["large_damping"] = s.large_damping;
  run.verdicts["envelope"] = s.violations == 0;
  if (s.large_damping) run.verdicts["synchronization_rate"] = s.rate_ok;
  return run.finish(out);
}

int cmd_birkhoff(Run& run, std::ostream& out) {
  const auto& x = run.config().experiment;
  const Field x0 = make_initial(run.grid, x.initial);
  const auto observers = observers_for(run);
  const auto reports =
      birkhoff_averages(x0, run.params(), run.noise_ptr(), observers,
                        RandomStream::derive(run.params().seed, StreamRole::birkhoff, 0),
                        {x.burn_in, x.batches});
  std::vector<std::string> header{"time"};
  for (const auto& r : reports) header.push_back(r.observable + "_running_average");
  CsvWriter csv(run.csv(), header);
  for (std::size_t t = 0; t < reports.front().times.size(); ++t) {
    std::vector<double> row{reports.front().times[t]};
    for (const auto& r : reports) row.push_back(r.running_average[t]);
    csv.row(row);
  }
  json averages = json::object();
  for (const auto& r : reports) {
    json entry{{"average", r.average}, {"standard_error", r.standard_error}, {"batches", r.batches}};
    if (r.uniqueness_margin) entry["uniqueness_margin"] = *r.uniqueness_margin;
    averages[r.observable] = entry;
  }
  run.results["burn_in"] = reports.front().burn_in;
  run.results["averages"] = averages;
  run.verdicts["completed"] = true;
  return run.finish(out);
}

int cmd_sweep(Run& run, std::ostream& out) {
  const auto& x = run.config().experiment;
  if (!run.noise) throw ConfigError("noise: the lambda sweep needs a nonzero noise spectrum");
  const std::vector<double> lambdas = x.lambdas.empty() ? std::vector<double>{0.5, 1.0, 2.0, 4.0} : x.lambdas;
  const Field x0 = make_initial(run.grid, x.initial);
  const SweepReport rep = lambda_sweep(x0, run.params(), *run.noise, lambdas,
                                       {x.paths, run.workers(), x.batches, 2.0, x.burn_in});
  CsvWriter csv(run.csv(), {"lambda", "v_norm_sq", "v_norm_sq_se", "linf_pow", "linf_pow_se", "mass",
                            "mass_se", "mass_target"});
  for (const auto& r : rep.rows)
    csv.row({r.lambda, r.v_norm_sq.value, r.v_norm_sq.standard_error, r.linf_pow.value,
             r.linf_pow.standard_error, r.mass.value, r.mass.standard_error, r.mass_target});
  if (rep.v_norm_nonincreasing) run.verdicts["v_norm_nonincreasing"] = *rep.v_norm_nonincreasing;
  if (rep.linf_nonincreasing) run.verdicts["linf_nonincreasing"] = *rep.linf_nonincreasing;
  run.verdicts["stationary_mass"] = rep.mass_matches;
  return run.finish(out);
}

int cmd_gn(Run& run, std::ostream& out) {
  const auto& x = run.config().experiment;
  GnOptions options;
  options.restarts = x.restarts;
  options.iterations = x.iterations;
  options.seed = run.params().seed;
  options.workers = run.workers();
  const GNEstimate est = estimate_gn_constant(run.grid, run.params().sigma, options);
  CsvWriter csv(run.csv(), {"iteration", "quotient"});
  for (std::size_t i = 0; i < est.objective_trace.size(); ++i)
    csv.row({static_cast<double>(i), est.objective_trace[i]});
  run.results["sigma"] = est.sigma;
  run.results["d"] = est.d;
  run.results["theta"] = est.theta;
  run.results["c_gn"] = est.c_gn;
  run.results["g"] = est.g ? json(*est.g) : json(nullptr);
  run.results["converged"] = est.converged;
  run.results["warning"] = est.warning;
  run.results["restart_best"] = est.restart_best;
  if (!est.warning.empty()) out << "warning: " << est.warning << '\n';
  out << fmt::format("C_gn = {}\n", format_number(est.c_gn));
  if (est.g) out << fmt::format("G = {}\n", format_number(*est.g));
  const GnCorpusCheck corpus = verify_gn_corpus(run.grid, est, x.corpus_size, run.params().seed, run.workers());
  run.results["corpus"] = {{"fields", corpus.fields},
                           {"max_quotient", corpus.max_quotient},
                           {"quotient_violations", corpus.quotient_violations},
                           {"energy_violations", corpus.energy_violations}};
  run.verdicts["converged"] = est.converged;
  run.verdicts["corpus_quotient"] = corpus.quotient_violations == 0;
  if (corpus.energy_checked) run.verdicts["corpus_modified_energy"] = corpus.energy_violations == 0;
  return run.finish(out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral Monte Carlo simulator for the damped stochastic NLS", "snls"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  using Handler = int (*)(Run&, std::ostream&);
  struct RunCommand {
    const char* name;
    const char* help;
    Handler handler;
  };
  const RunCommand commands[] = {
      {"simulate", "evolve one path and log observables", cmd_simulate},
      {"moments", "ensemble moments and bound checks", cmd_moments},
      {"sync", "shared-noise synchronization pairs", cmd_sync},
      {"birkhoff", "time averages along one path", cmd_birkhoff},
      {"sweep", "stationary estimates across lambda", cmd_sweep},
      {"gn", "estimate the Gagliardo-Nirenberg constant", cmd_gn},
  };
  RunFlags flags;
  std::vector<std::pair<CLI::App*, Handler>> run_commands;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_run_flags(sub, flags);
    run_commands.emplace_back(sub, c.handler);
  }

  int check_d = 0, check_alpha = 0;
  double check_sigma = 0.0;
  CLI::App* check = app.add_subcommand("check", "parameter gate verdict");
  check->add_option("--d", check_d, "dimension")->required();
  check->add_option("--sigma", check_sigma, "nonlinearity power")->required();
  check->add_option("--alpha", check_alpha, "+1 focusing, -1 defocusing")->required();

  int pair_d = 0;
  std::string pair_p, pair_r;
  CLI::App* strichartz = app.add_subcommand("strichartz", "Strichartz admissibility of (p, r)");
  strichartz->add_option("--d", pair_d, "dimension")->required();
  strichartz->add_option("--p", pair_p, "time exponent, e.g. 2, 4/3 or inf")->required();
  strichartz->add_option("--r", pair_r, "space exponent")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (check->parsed()) {
      const AssumptionVerdict v = check_assumptions(check_d, check_sigma, check_alpha);
      out << v.label();
      if (!v.reason.empty()) out << ": " << v.reason;
      out << '\n';
      return v.permitted() ? kExitPass : kExitVerdictFail;
    }
    if (strichartz->parsed()) {
      const bool ok = is_admissible_pair(pair_d, Exponent::parse(pair_p), Exponent::parse(pair_r));
      out << (ok ? "admissible pair" : "not an admissible pair") << '\n';
      return ok ? kExitPass : kExitVerdictFail;
    }
    for (auto& [sub, handler] : run_commands) {
      if (!sub->parsed()) continue;
      Run run = prepare(flags, sub->get_name());
      return handler(run, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace snls
