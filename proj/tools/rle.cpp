// rle: replica-symmetric analysis toolkit for Gaussian random linear
// estimation with discrete priors. Subcommands cover potential scans,
// threshold finding, state evolution (plain and coupled), AMP experiments,
// oracle verification and phase diagrams. All output is deterministic CSV.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rle/amp.hpp"
#include "rle/csv.hpp"
#include "rle/errors.hpp"
#include "rle/oracle.hpp"
#include "rle/potential.hpp"
#include "rle/state_evolution.hpp"
#include "rle/stats.hpp"
#include "rle/verify.hpp"
#include "rle/version.hpp"

namespace {

using namespace rle;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;
constexpr int kExitVerification = 4;

struct Options {
  std::string prior_spec = "binary";
  double alpha = 0.5;
  double delta = 1.0;
  int L = 0;  // 0 = per-command default
  int B = 0;
  int gamma = 0;
  int w = 0;
  std::string kind = "seeded";
  std::uint64_t seed = 1;
  int trials = 1;
  int trials_identity = 1000;
  std::string grid;
  std::string dgrid;
  std::string w_list;
  bool find_threshold = false;
  int snapshot_every = 0;
  int max_iter = 0;  // 0 = per-command default
  double tol = 0.0;  // 0 = per-command default
  double damp = 0.0;
  double d_delta = 0.0;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  std::string out = "-";
};

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) throw ConfigError("empty grid spec");
  std::vector<double> values;
  if (text.find(':') == std::string::npos) {
    // comma list or single value
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
    if (values.empty()) throw ConfigError("grid spec '" + text + "' has no values");
    return values;
  }
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  bool log_scale = false;
  std::size_t base = 0;
  if (parts.size() == 4 && parts[0] == "log") {
    log_scale = true;
    base = 1;
  } else if (parts.size() != 3) {
    throw ConfigError("grid spec '" + text + "': expected lo:hi:n or log:lo:hi:n");
  }
  const double lo = std::stod(parts[base]);
  const double hi = std::stod(parts[base + 1]);
  const int n = std::stoi(parts[base + 2]);
  if (n < 1) throw ConfigError("grid spec '" + text + "': n must be >= 1");
  if (log_scale && !(lo > 0.0 && hi > 0.0))
    throw ConfigError("grid spec '" + text + "': log scale needs positive bounds");
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    values.push_back(log_scale ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
  }
  return values;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) values.push_back(std::stoi(tok));
  if (values.empty()) throw ConfigError("empty integer list");
  return values;
}

DiscretePrior resolve_prior(const Options& opt) {
  DiscretePrior prior = DiscretePrior::parse(opt.prior_spec);
  if (opt.B > 0 && opt.B != prior.dim())
    throw ConfigError("--B=" + std::to_string(opt.B) + " does not match the prior dimension " +
                      std::to_string(prior.dim()));
  return prior;
}

void emit(const CsvWriter& csv, const std::string& out) {
  if (out == "-") {
    std::fputs(csv.str().c_str(), stdout);
  } else {
    csv.write_file(out);
  }
}

// Resolved-config header; the command line is reconstructable from the
// `command=` comment (see README on round-tripping).
void write_header(CsvWriter& csv, const std::string& command, const Options& opt,
                  const DiscretePrior& prior,
                  const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  csv.comment(std::string("rle-version=") + kVersion);
  csv.comment("command=" + command);
  csv.comment("prior=" + opt.prior_spec);
  csv.comment("prior-config=" + prior.to_json());
  for (const auto& [k, v] : extra) csv.comment(k + "=" + v);
  if (prior.dim() >= 2)
    csv.comment("conjectural=true (B >= 2 single-letter predictions are conjectural)");
}

std::string n(double v) { return CsvWriter::num(v); }
std::string n(int v) { return CsvWriter::num(v); }

int cmd_potential(const Options& opt) {
  const DiscretePrior prior = resolve_prior(opt);
  const SystemParams params(prior, opt.alpha, opt.delta);
  int points = 257;
  if (!opt.grid.empty()) points = std::stoi(opt.grid);
  if (points < 2) throw ConfigError("potential: grid must have at least 2 points");

  CsvWriter csv;
  std::ostringstream cmd;
  cmd << "potential --prior " << opt.prior_spec << " --alpha " << n(opt.alpha) << " --delta "
      << n(opt.delta) << " --grid " << points << " --out " << opt.out;
  write_header(csv, cmd.str(), opt, prior,
               {{"alpha", n(opt.alpha)}, {"delta", n(opt.delta)}, {"grid", std::to_string(points)}});
  csv.columns({"E", "psi", "channel_mi", "i_rs"});

  const double v = prior.section_power();
  for (int i = 0; i < points; ++i) {
    const double e = v * i / (points - 1);
    const double ps = psi(e, params);
    const double mi = channel_mi(prior, effective_snr(e, params));
    csv.row({n(e), n(ps), n(mi), n(ps + mi)});
  }
  const PotentialAnalysis analysis = analyze_potential(params);
  csv.comment("footer e_tilde=" + n(analysis.e_tilde) + " i_rs_min=" + n(analysis.i_rs_min) +
              " scenario=" + to_string(analysis.scenario) +
              " stationary_points=" + std::to_string(analysis.stationary_points.size()));
  if (!analysis.note.empty()) csv.comment("note " + analysis.note);
  emit(csv, opt.out);
  return kExitOk;
}

int cmd_thresholds(const Options& opt) {
  const DiscretePrior prior = resolve_prior(opt);
  const double tol = opt.tol > 0.0 ? opt.tol : 1e-4;
  std::vector<double> alphas = opt.grid.empty() ? std::vector<double>{opt.alpha}
                                                : parse_grid(opt.grid);
  CsvWriter csv;
  std::ostringstream cmd;
  cmd << "thresholds --prior " << opt.prior_spec << " --tol " << n(tol);
  if (!opt.grid.empty()) cmd << " --grid " << opt.grid;
  else cmd << " --alpha " << n(opt.alpha);
  cmd << " --jobs " << opt.jobs << " --out " << opt.out;
  write_header(csv, cmd.str(), opt, prior, {{"tol", n(tol)}});
  csv.columns({"alpha", "delta_amp", "delta_rs", "scenario"});

  struct Row { double amp, rs; };
  std::vector<Row> rows(alphas.size());
  parallel_for(static_cast<int>(alphas.size()), opt.jobs, [&](int i) {
    rows[i].amp = delta_amp(prior, alphas[i], prior.dim(), tol);
    rows[i].rs = delta_rs(prior, alphas[i], prior.dim(), tol);
  });
  for (std::size_t i = 0; i < alphas.size(); ++i)
    csv.row({n(alphas[i]), n(rows[i].amp), n(rows[i].rs),
             to_string(classify_thresholds(rows[i].amp, rows[i].rs, tol))});
  emit(csv, opt.out);
  return kExitOk;
}

int cmd_se(const Options& opt) {
  const DiscretePrior prior = resolve_prior(opt);
  const SystemParams params(prior, opt.alpha, opt.delta);
  const int max_iter = opt.max_iter > 0 ? opt.max_iter : 100000;
  const double tol = opt.tol > 0.0 ? opt.tol : 1e-10;

  CsvWriter csv;
  std::ostringstream cmd;
  cmd << "se --prior " << opt.prior_spec << " --alpha " << n(opt.alpha) << " --delta "
      << n(opt.delta) << " --max-iter " << max_iter << " --tol " << n(tol) << " --out " << opt.out;
  write_header(csv, cmd.str(), opt, prior,
               {{"alpha", n(opt.alpha)}, {"delta", n(opt.delta)}, {"max_iter", std::to_string(max_iter)},
                {"tol", n(tol)}});
  csv.columns({"iter", "E"});
  const SeTrajectory traj = run_se(params, max_iter, tol);
  for (std::size_t t = 0; t < traj.profile_history.size(); ++t)
    csv.row({std::to_string(t), n(traj.profile_history[t](0))});
  csv.comment(std::string("footer converged=") + (traj.converged ? "1" : "0") +
              " iterations=" + std::to_string(traj.iterations) + " E_inf=" + n(traj.final_value()));
  emit(csv, opt.out);
  return kExitOk;
}

EnsembleKind parse_kind(const std::string& kind) {
  if (kind == "periodic") return EnsembleKind::kPeriodic;
  if (kind == "seeded") return EnsembleKind::kSeeded;
  throw ConfigError("ensemble kind must be periodic or seeded, got '" + kind + "'");
}

int cmd_se_coupled(const Options& opt) {
  const DiscretePrior prior = resolve_prior(opt);
  if (opt.gamma < 1) throw ConfigError("se-coupled: --gamma is required");
  const EnsembleKind kind = parse_kind(opt.kind);
  const double tol = opt.tol > 0.0 ? opt.tol : 1e-10;
  const int max_iter = opt.max_iter > 0 ? opt.max_iter : 100000;

  CsvWriter csv;
  if (opt.find_threshold) {
    const std::vector<int> ws = opt.w_list.empty() ? std::vector<int>{opt.w}
                                                   : parse_int_list(opt.w_list);
    const double bisect_tol = opt.tol > 0.0 ? opt.tol : 1e-4;
    std::ostringstream cmd;
    cmd << "se-coupled --prior " << opt.prior_spec << " --alpha " << n(opt.alpha) << " --gamma "
        << opt.gamma << " --find-threshold --w-list " << opt.w_list << " --kind " << opt.kind
        << " --tol " << n(bisect_tol) << " --jobs " << opt.jobs << " --out " << opt.out;
    write_header(csv, cmd.str(), opt, prior,
                 {{"alpha", n(opt.alpha)}, {"gamma", std::to_string(opt.gamma)}, {"tol", n(bisect_tol)}});
    csv.columns({"gamma", "w", "delta_amp_coupled"});
    std::vector<double> vals(ws.size());
    parallel_for(static_cast<int>(ws.size()), opt.jobs, [&](int i) {
      vals[i] = delta_amp_coupled(prior, opt.alpha, prior.dim(), opt.gamma, ws[i], bisect_tol, kind);
    });
    for (std::size_t i = 0; i < ws.size(); ++i)
      csv.row({std::to_string(opt.gamma), std::to_string(ws[i]), n(vals[i])});
    emit(csv, opt.out);
    return kExitOk;
  }

  const SystemParams params(prior, opt.alpha, opt.delta);
  const CouplingEnsemble ens = build_ensemble(kind, opt.gamma, opt.w);
  std::ostringstream cmd;
  cmd << "se-coupled --prior " << opt.prior_spec << " --alpha " << n(opt.alpha) << " --delta "
      << n(opt.delta) << " --gamma " << opt.gamma << " --w " << opt.w << " --kind " << opt.kind
      << " --snapshot-every " << opt.snapshot_every << " --max-iter " << max_iter << " --tol "
      << n(tol) << " --out " << opt.out;
  write_header(csv, cmd.str(), opt, prior,
               {{"alpha", n(opt.alpha)}, {"delta", n(opt.delta)},
                {"gamma", std::to_string(opt.gamma)}, {"w", std::to_string(opt.w)},
                {"kind", opt.kind}});
  csv.columns({"iter", "r", "E_r"});
  const SeTrajectory traj =
      run_se_coupled(ens, params, max_iter, tol, opt.snapshot_every, {});
  if (opt.snapshot_every > 0) {
    for (std::size_t k = 0; k < traj.profile_history.size(); ++k) {
      const int iter = std::min(static_cast<int>(k) * opt.snapshot_every, traj.iterations);
      for (int r = 0; r < ens.gamma; ++r)
        csv.row({std::to_string(iter), std::to_string(r), n(traj.profile_history[k](r))});
    }
  } else {
    for (int r = 0; r < ens.gamma; ++r)
      csv.row({std::to_string(traj.iterations), std::to_string(r), n(traj.final_profile(r))});
  }
  csv.comment(std::string("footer converged=") + (traj.converged ? "1" : "0") +
              " iterations=" + std::to_string(traj.iterations));
  emit(csv, opt.out);
  return kExitOk;
}

int cmd_amp(const Options& raw_opt) {
  Options opt = raw_opt;
  if (opt.L <= 0) opt.L = 1000;
  const DiscretePrior prior = resolve_prior(opt);
  const SystemParams params(prior, opt.alpha, opt.delta);
  AmpOptions amp_opts;
  amp_opts.max_iter = opt.max_iter > 0 ? opt.max_iter : 300;
  amp_opts.tol = opt.tol > 0.0 ? opt.tol : 1e-8;
  amp_opts.damp = opt.damp;
  const bool coupled = opt.gamma > 0;
  const EnsembleKind kind = parse_kind(opt.kind);

  CsvWriter csv;
  std::ostringstream cmd;
  cmd << "amp --prior " << opt.prior_spec << " --alpha " << n(opt.alpha) << " --delta "
      << n(opt.delta) << " --L " << opt.L << " --seed " << opt.seed << " --trials " << opt.trials
      << " --max-iter " << amp_opts.max_iter << " --tol " << n(amp_opts.tol) << " --damp "
      << n(amp_opts.damp);
  if (coupled) cmd << " --gamma " << opt.gamma << " --w " << opt.w << " --kind " << opt.kind;
  cmd << " --jobs " << opt.jobs << " --out " << opt.out;
  std::vector<std::pair<std::string, std::string>> extra = {
      {"alpha", n(opt.alpha)}, {"delta", n(opt.delta)}, {"L", std::to_string(opt.L)},
      {"seed", std::to_string(opt.seed)}, {"trials", std::to_string(opt.trials)},
      {"damp", n(amp_opts.damp)}};
  if (coupled) {
    extra.emplace_back("gamma", std::to_string(opt.gamma));
    extra.emplace_back("w", std::to_string(opt.w));
    extra.emplace_back("kind", opt.kind);
  }
  write_header(csv, cmd.str(), opt, prior, extra);
  csv.columns({"trial", "iter", "mse", "ymmse"});

  std::vector<AmpTrajectory> trajs(opt.trials);
  parallel_for(opt.trials, opt.jobs, [&](int t) {
    const ProblemInstance inst =
        coupled ? generate_coupled_instance(build_ensemble(kind, opt.gamma, opt.w), params, opt.L,
                                            opt.seed, t)
                : generate_instance(params, opt.L, opt.seed, t);
    trajs[t] = run_amp(inst, amp_opts);
  });
  for (int t = 0; t < opt.trials; ++t) {
    const AmpTrajectory& traj = trajs[t];
    for (std::size_t it = 0; it < traj.mse_per_iter.size(); ++it)
      csv.row({std::to_string(t), std::to_string(it), n(traj.mse_per_iter[it]),
               n(traj.ymmse_per_iter[it])});
  }
  emit(csv, opt.out);
  return kExitOk;
}

int cmd_verify(const Options& opt) {
  VerifyConfig cfg;
  cfg.L = opt.L > 0 ? opt.L : 12;
  cfg.trials = opt.trials > 1 ? opt.trials : 500;
  cfg.trials_identity = opt.trials_identity;
  cfg.seed = opt.seed;
  cfg.jobs = opt.jobs;

  CsvWriter csv;
  std::ostringstream cmd;
  cmd << "verify --L " << cfg.L << " --trials " << cfg.trials << " --trials-identity "
      << cfg.trials_identity << " --seed " << cfg.seed << " --jobs " << cfg.jobs << " --out "
      << opt.out;
  Options hdr_opt = opt;
  hdr_opt.prior_spec = "binary";
  write_header(csv, cmd.str(), hdr_opt, DiscretePrior::binary(),
               {{"L", std::to_string(cfg.L)}, {"trials", std::to_string(cfg.trials)},
                {"trials_identity", std::to_string(cfg.trials_identity)},
                {"seed", std::to_string(cfg.seed)}});
  const VerifyResult result = run_verification_suite(cfg);
  verify_rows_to_csv(result.rows, csv);
  csv.comment(std::string("footer hard_fail=") + (result.hard_fail ? "1" : "0"));
  emit(csv, opt.out);
  return result.hard_fail ? kExitVerification : kExitOk;
}

int cmd_phase_diagram(const Options& opt) {
  const DiscretePrior prior = resolve_prior(opt);
  if (opt.grid.empty() || opt.dgrid.empty())
    throw ConfigError("phase-diagram: --grid (alpha) and --dgrid (delta) are required");
  const std::vector<double> alphas = parse_grid(opt.grid);
  const std::vector<double> deltas = parse_grid(opt.dgrid);
  for (double a : alphas)
    if (!(a > 0.0)) throw ConfigError("phase-diagram: grid bounds must be positive");
  for (double d : deltas)
    if (!(d > 0.0)) throw ConfigError("phase-diagram: grid bounds must be positive");

  CsvWriter csv;
  std::ostringstream cmd;
  cmd << "phase-diagram --prior " << opt.prior_spec << " --grid " << opt.grid << " --dgrid "
      << opt.dgrid << " --jobs " << opt.jobs << " --out " << opt.out;
  write_header(csv, cmd.str(), opt, prior, {{"grid", opt.grid}, {"dgrid", opt.dgrid}});
  csv.columns({"alpha", "delta", "scenario", "e_tilde", "e_infinity", "ymmse_pred", "status"});

  struct Cell {
    double e_tilde = 0, e_inf = 0, ymmse = 0;
    Scenario scenario = Scenario::kNoTransition;
    std::string status = "ok";
  };
  const int total = static_cast<int>(alphas.size() * deltas.size());
  std::vector<Cell> cells(total);
  parallel_for(total, opt.jobs, [&](int idx) {
    const double alpha = alphas[idx / deltas.size()];
    const double delta = deltas[idx % deltas.size()];
    Cell& cell = cells[idx];
    try {
      const SystemParams params(prior, alpha, delta);
      const PotentialAnalysis analysis = analyze_potential(params);
      cell.e_tilde = analysis.e_tilde;
      cell.scenario = analysis.scenario;
      cell.e_inf = run_se(params, 20000, 1e-10).final_value();
      cell.ymmse = analysis.degenerate
                       ? std::numeric_limits<double>::quiet_NaN()
                       : analysis.e_tilde / (1.0 + analysis.e_tilde / delta);
      if (analysis.degenerate) cell.status = "degenerate";
    } catch (const std::exception& e) {
      cell.status = std::string("failed:") + e.what();
    }
  });
  for (int idx = 0; idx < total; ++idx) {
    const Cell& cell = cells[idx];
    csv.row({n(alphas[idx / deltas.size()]), n(deltas[idx % deltas.size()]),
             to_string(cell.scenario), n(cell.e_tilde), n(cell.e_inf), n(cell.ymmse), cell.status});
  }
  emit(csv, opt.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replica-symmetric analysis toolkit for Gaussian random linear estimation"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--prior", opt.prior_spec, "named prior (binary, bernoulli:<rho>) or JSON file");
    sub->add_option("--alpha", opt.alpha, "measurement rate M/N");
    sub->add_option("--delta", opt.delta, "noise variance");
    sub->add_option("--L", opt.L, "number of sections");
    sub->add_option("--B", opt.B, "section dimension (validated against the prior)");
    sub->add_option("--gamma", opt.gamma, "number of coupling blocks");
    sub->add_option("--w", opt.w, "coupling window");
    sub->add_option("--kind", opt.kind, "ensemble kind: periodic | seeded");
    sub->add_option("--seed", opt.seed, "base RNG seed");
    sub->add_option("--trials", opt.trials, "number of instances / trials");
    sub->add_option("--grid", opt.grid, "grid spec: n | lo:hi:n | log:lo:hi:n | v1,v2,...");
    sub->add_option("--dgrid", opt.dgrid, "delta grid spec (phase-diagram)");
    sub->add_option("--jobs", opt.jobs, "worker threads for sweeps");
    sub->add_option("--out", opt.out, "output path ('-' = stdout)");
    sub->add_option("--max-iter", opt.max_iter, "iteration cap");
    sub->add_option("--tol", opt.tol, "tolerance (bisection or convergence)");
    sub->add_option("--damp", opt.damp, "AMP damping factor in [0,1)");
    sub->add_option("--d-delta", opt.d_delta, "finite-difference step for the I-MMSE check");
    sub->add_option("--trials-identity", opt.trials_identity,
                    "trials for the I-MMSE / Nishimori cells");
    sub->add_option("--w-list", opt.w_list, "comma list of coupling windows");
    sub->add_flag("--find-threshold", opt.find_threshold,
                  "se-coupled: bisect the coupled threshold instead of iterating");
    sub->add_option("--snapshot-every", opt.snapshot_every,
                    "se-coupled: profile snapshot stride (0 = final only)");
  };

  CLI::App* sub_potential = app.add_subcommand("potential", "scan the potential over E in [0, v]");
  CLI::App* sub_thresholds = app.add_subcommand("thresholds", "algorithmic and potential thresholds");
  CLI::App* sub_se = app.add_subcommand("se", "plain state evolution trajectory");
  CLI::App* sub_se_coupled = app.add_subcommand("se-coupled", "coupled state evolution / threshold");
  CLI::App* sub_amp = app.add_subcommand("amp", "AMP on synthetic instances");
  CLI::App* sub_verify = app.add_subcommand("verify", "oracle verification suite");
  CLI::App* sub_phase = app.add_subcommand("phase-diagram", "scenario map over (alpha, delta)");
  for (CLI::App* sub : {sub_potential, sub_thresholds, sub_se, sub_se_coupled, sub_amp, sub_verify,
                        sub_phase})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sub_potential->parsed()) return cmd_potential(opt);
    if (sub_thresholds->parsed()) return cmd_thresholds(opt);
    if (sub_se->parsed()) return cmd_se(opt);
    if (sub_se_coupled->parsed()) return cmd_se_coupled(opt);
    if (sub_amp->parsed()) return cmd_amp(opt);
    if (sub_verify->parsed()) return cmd_verify(opt);
    if (sub_phase->parsed()) return cmd_phase_diagram(opt);
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kExitResource;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return kExitVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
