#include "rle/potential.hpp"

#include <algorithm>
#include <cmath>

namespace rle {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kNoTransition: return "no-transition";
    case Scenario::kHigherOrder: return "higher-order";
    case Scenario::kFirstOrder: return "first-order";
  }
  return "?";
}

double psi(double E, const SystemParams& params) {
  if (std::isnan(E) || E < 0.0) throw std::domain_error("psi: E must be >= 0");
  const double d = params.delta;
  if (d == 0.0) return E == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  if (std::isinf(d)) return 0.0;
  return 0.5 * params.alpha * params.B * (std::log1p(E / d) - E / (E + d));
}

double effective_snr(double E, const SystemParams& params) {
  const double denom = params.delta + E;
  if (!(denom > 0.0)) throw std::domain_error("effective_snr: delta + E must be positive");
  return params.alpha * params.B / denom;
}

double rs_potential(double E, const SystemParams& params, const QuadratureSettings& quad) {
  const double v = params.prior.section_power();
  if (std::isnan(E) || E < 0.0 || E > v * (1.0 + 1e-12) + 1e-300)
    throw std::domain_error("rs_potential: E outside [0, v]");
  E = std::min(E, v);
  if (params.delta == 0.0 && E == 0.0) return params.prior.entropy();
  const double p = psi(E, params);
  if (std::isinf(p)) return p;
  return p + channel_mi(params.prior, effective_snr(E, params), quad);
}

double rs_potential_derivative(double E, const SystemParams& params,
                               const QuadratureSettings& quad) {
  const double d = params.delta + E;
  if (!(d > 0.0)) throw std::domain_error("rs_potential_derivative: delta + E must be positive");
  const double mm = channel_mmse(params.prior, params.alpha * params.B / d, quad);
  return 0.5 * params.alpha * params.B * (E - mm) / (d * d);
}

namespace {

// E - mmse(snr(E)): negative below a fixed point, positive above.
double fp_residual(double E, const SystemParams& params, const QuadratureSettings& quad) {
  return E - channel_mmse(params.prior, effective_snr(E, params), quad);
}

double refine_zero(double lo, double hi, double flo, const SystemParams& params,
                   const QuadratureSettings& quad) {
  // bisection until the potential derivative at the midpoint has magnitude
  // below 1e-10 (or the interval is exhausted)
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = fp_residual(mid, params, quad);
    const double scale = 0.5 * params.alpha * params.B /
                         ((params.delta + mid) * (params.delta + mid));
    if (std::abs(fm * scale) < 1e-10) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace

std::vector<double> find_stationary_points(const SystemParams& params, int grid_size,
                                           const QuadratureSettings& quad) {
  if (grid_size < 64) throw std::domain_error("find_stationary_points: grid_size must be >= 64");
  const double v = params.prior.section_power();
  std::vector<double> zeros;
  if (v == 0.0) {
    zeros.push_back(0.0);
    return zeros;
  }
  const double h = v / grid_size;
  double e_prev = 0.0;
  double f_prev = fp_residual(0.0, params, quad);
  if (f_prev == 0.0) zeros.push_back(0.0);
  for (int i = 1; i <= grid_size; ++i) {
    const double e = (i == grid_size) ? v : i * h;
    const double f = fp_residual(e, params, quad);
    if (f == 0.0) {
      zeros.push_back(e);
    } else if (f_prev != 0.0 && (f_prev < 0.0) != (f < 0.0)) {
      zeros.push_back(refine_zero(e_prev, e, f_prev, params, quad));
    }
    e_prev = e;
    f_prev = f;
  }
  std::sort(zeros.begin(), zeros.end());
  return zeros;
}

PotentialAnalysis analyze_potential(const SystemParams& params, int grid_size,
                                    const QuadratureSettings& quad) {
  if (grid_size < 64) throw std::domain_error("analyze_potential: grid_size must be >= 64");
  PotentialAnalysis out;
  const double v = params.prior.section_power();
  if (v == 0.0 || params.prior.variance() == 0.0) {
    out.e_tilde = 0.0;
    out.i_rs_min = 0.0;
    out.stationary_points = {0.0};
    out.scenario = Scenario::kNoTransition;
    return out;
  }
  if (params.delta == 0.0) {
    out.e_tilde = 0.0;
    out.i_rs_min = params.prior.entropy();
    out.stationary_points = {0.0};
    out.scenario = Scenario::kNoTransition;
    out.note = "delta=0 limit branch";
    return out;
  }
  if (std::isinf(params.delta)) {
    out.e_tilde = params.prior.variance();
    out.i_rs_min = 0.0;
    out.stationary_points = {params.prior.variance()};
    out.scenario = Scenario::kNoTransition;
    out.note = "delta=inf limit branch";
    return out;
  }

  out.stationary_points = find_stationary_points(params, grid_size, quad);

  std::vector<double> candidates = out.stationary_points;
  candidates.push_back(0.0);
  candidates.push_back(v);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<double> values(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    values[i] = rs_potential(candidates[i], params, quad);

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (values[i] < values[best]) best = i;  // ties keep the smaller E
  }
  out.e_tilde = candidates[best];
  out.i_rs_min = values[best];

  const double tie_tol = 1e-10 * std::max(1.0, std::abs(out.i_rs_min));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i == best) continue;
    if (values[i] - values[best] < tie_tol &&
        std::abs(candidates[i] - candidates[best]) > 1e-6 * v) {
      out.degenerate = true;
      out.e_tilde_alt = candidates[i];
      out.note = "two global minima within tie tolerance";
      break;
    }
  }

  const std::size_t n = out.stationary_points.size();
  if (n >= 3) {
    out.scenario = Scenario::kFirstOrder;
    if (n > 3) {
      out.assumption_violated = true;
      out.note = "found " + std::to_string(n) + " stationary points, beyond the standing assumption";
    }
  } else if (n == 2) {
    out.scenario = Scenario::kHigherOrder;
  } else {
    out.scenario = Scenario::kNoTransition;
  }
  return out;
}

namespace {

int stationary_count(const SystemParams& params, int grid_size, const QuadratureSettings& quad) {
  return static_cast<int>(find_stationary_points(params, grid_size, quad).size());
}

struct MultiplicityWindow {
  bool found = false;
  double below = 0.0;   // last delta seen with a unique point, below the window
  double inside = 0.0;  // first delta seen with multiplicity
};

// Scans delta upward: doubling segments split into linear substeps.
MultiplicityWindow scan_for_multiplicity(const SystemParams& base, const ThresholdOptions& opts,
                                         const QuadratureSettings& quad) {
  MultiplicityWindow win;
  double prev = opts.delta_lo;
  if (stationary_count(base.with_delta(prev), opts.grid_size, quad) >= 2) {
    // window starts below the default bracket; walk down
    double lo = prev;
    for (int k = 0; k < 20; ++k) {
      lo *= 0.25;
      if (stationary_count(base.with_delta(lo), opts.grid_size, quad) < 2) {
        win.found = true;
        win.below = lo;
        win.inside = prev;
        return win;
      }
      prev = lo;
    }
    win.found = true;
    win.below = 0.0;
    win.inside = prev;
    return win;
  }
  // octave-by-octave scan with linear substeps inside each doubling segment,
  // from delta_lo up to delta_max
  double seg_lo = opts.delta_lo;
  while (seg_lo < opts.delta_max) {
    const double seg_hi = std::min(2.0 * seg_lo, opts.delta_max);
    for (int step = 1; step <= opts.scan_substeps; ++step) {
      const double d = seg_lo + (seg_hi - seg_lo) * step / opts.scan_substeps;
      if (stationary_count(base.with_delta(d), opts.grid_size, quad) >= 2) {
        win.found = true;
        win.below = prev;
        win.inside = d;
        return win;
      }
      prev = d;
    }
    seg_lo = seg_hi;
  }
  return win;
}

// Bisects a predicate edge: pred(below)=false, pred(inside)=true.
template <typename Pred>
double bisect_edge(double below, double inside, double tol, Pred&& pred) {
  while (inside - below > tol) {
    const double mid = 0.5 * (below + inside);
    if (mid == below || mid == inside) break;
    if (pred(mid)) {
      inside = mid;
    } else {
      below = mid;
    }
  }
  return 0.5 * (below + inside);
}

}  // namespace

double delta_amp(const DiscretePrior& prior, double alpha, int B, double tol,
                 const QuadratureSettings& quad, const ThresholdOptions& opts,
                 std::string* note) {
  if (!(tol > 0.0)) throw std::domain_error("delta_amp: tol must be positive");
  if (B != prior.dim()) throw std::domain_error("delta_amp: B does not match prior dimension");
  if (prior.variance() == 0.0) {
    if (note) *note = "degenerate prior, recursion is identically zero";
    return kInfThreshold;
  }
  SystemParams base(prior, alpha, 1.0);
  const MultiplicityWindow win = scan_for_multiplicity(base, opts, quad);
  if (!win.found) {
    if (note) *note = "no fixed-point multiplicity detected up to delta_max";
    return kInfThreshold;
  }
  return bisect_edge(win.below, win.inside, tol, [&](double d) {
    return stationary_count(base.with_delta(d), opts.grid_size, quad) >= 2;
  });
}

double delta_rs(const DiscretePrior& prior, double alpha, int B, double tol,
                const QuadratureSettings& quad, const ThresholdOptions& opts,
                std::string* note) {
  if (!(tol > 0.0)) throw std::domain_error("delta_rs: tol must be positive");
  if (B != prior.dim()) throw std::domain_error("delta_rs: B does not match prior dimension");
  if (prior.variance() == 0.0) {
    if (note) *note = "degenerate prior";
    return kInfThreshold;
  }
  SystemParams base(prior, alpha, 1.0);
  const MultiplicityWindow win = scan_for_multiplicity(base, opts, quad);
  if (!win.found) {
    if (note) *note = "no first-order window up to delta_max";
    return kInfThreshold;
  }
  const double d_amp = bisect_edge(win.below, win.inside, tol, [&](double d) {
    return stationary_count(base.with_delta(d), opts.grid_size, quad) >= 2;
  });

  // upper spinodal: first delta above the window where the count drops back to 1
  double hi_probe = win.inside;
  while (hi_probe < opts.delta_max &&
         stationary_count(base.with_delta(hi_probe), opts.grid_size, quad) >= 2) {
    hi_probe *= 1.5;
  }
  const double d_up = bisect_edge(
      win.inside, std::min(hi_probe, opts.delta_max), tol,
      [&](double d) { return stationary_count(base.with_delta(d), opts.grid_size, quad) < 2; });

  if (d_up - d_amp <= 4.0 * tol) {
    if (note) *note = "window narrower than resolution; higher-order within tolerance";
    return d_amp;
  }

  // sign of i_rs(lowest branch) - i_rs(highest branch) inside the window
  auto branch_gap = [&](double d) -> double {
    const SystemParams p = base.with_delta(d);
    const auto fps = find_stationary_points(p, opts.grid_size, quad);
    if (fps.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return rs_potential(fps.front(), p, quad) - rs_potential(fps.back(), p, quad);
  };
  const double lo_in = d_amp + tol;
  const double hi_in = d_up - tol;
  const double g_lo = branch_gap(lo_in);
  const double g_hi = branch_gap(hi_in);
  if (std::isnan(g_lo) || std::isnan(g_hi)) {
    if (note) *note = "branch tracking lost inside the window";
    return d_up;
  }
  if (g_lo >= 0.0) {
    if (note) *note = "upper branch already global at the window base";
    return d_amp;
  }
  if (g_hi < 0.0) {
    // the low branch stays global until it disappears: the jump is at the spinodal
    if (note) *note = "global-minimum jump at the upper spinodal";
    return d_up;
  }
  return bisect_edge(lo_in, hi_in, tol, [&](double d) { return branch_gap(d) >= 0.0; });
}

Scenario classify_thresholds(double d_amp, double d_rs, double tol) {
  if (std::isinf(d_amp) && std::isinf(d_rs)) return Scenario::kNoTransition;
  if (d_rs - d_amp <= 2.0 * tol) return Scenario::kHigherOrder;
  return Scenario::kFirstOrder;
}

double predicted_ymmse(const SystemParams& params, const QuadratureSettings& quad) {
  if (params.delta == 0.0) return 0.0;
  const PotentialAnalysis analysis = analyze_potential(params, 1024, quad);
  if (analysis.degenerate)
    throw std::domain_error(
        "predicted_ymmse: potential has two global minima (delta at the first-order "
        "transition); no unique prediction");
  if (std::isinf(params.delta)) return analysis.e_tilde;
  return analysis.e_tilde / (1.0 + analysis.e_tilde / params.delta);
}

double rs_mutual_info(const SystemParams& params, const QuadratureSettings& quad) {
  if (params.delta == 0.0) return params.prior.entropy();
  if (std::isinf(params.delta)) return 0.0;
  return analyze_potential(params, 1024, quad).i_rs_min;
}

}  // namespace rle
