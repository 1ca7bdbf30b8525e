#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "smoothscale/discrepancy.hpp"
#include "smoothscale/error.hpp"
#include "smoothscale/parallel.hpp"
#include "smoothscale/rng.hpp"

namespace smoothscale {

// Solution of the decay equation (1 - p^log_n)/(1 - p) = 2 alpha together
// with the discrepancy bound (1 + sqrt p)/sqrt(1 - p) it yields and the
// large-log_n limit sqrt(2 alpha) + sqrt(2 alpha - 1).  The finite-length
// root exceeds the limit rate 1 - 1/(2 alpha) (the truncated geometric sum
// needs a larger p to reach 2 alpha), so bound >= asymptotic here.
struct DecaySolution {
  double alpha = 0;
  std::uint32_t log_n = 0;
  double p = 0;
  double bound = 0;
  double asymptotic = 0;
  double residual = 0;
};

// Left side of the decay equation, the truncated geometric sum
// 1 + p + ... + p^(log_n - 1); strictly increasing in p on (0,1).
inline double decay_lhs(double p, std::uint32_t log_n) {
  return (1.0 - std::pow(p, static_cast<double>(log_n))) / (1.0 - p);
}

inline double decay_bound(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter("decay bound needs 0 < p < 1");
  return (1.0 + std::sqrt(p)) / std::sqrt(1.0 - p);
}

inline double asymptotic_bound(double alpha) {
  if (!(alpha >= 0.5))
    throw InvalidParameter("asymptotic bound needs alpha >= 1/2");
  return std::sqrt(2.0 * alpha) + std::sqrt(2.0 * alpha - 1.0);
}

inline DecaySolution solve_decay(double alpha, std::uint32_t log_n) {
  if (log_n < 2) throw InvalidParameter("solve_decay needs log_n >= 2");
  if (!(alpha > 1.0 && 2.0 * alpha < static_cast<double>(log_n)))
    throw InvalidParameter(
        "solve_decay requires alpha > 1 and log_n > 2*alpha (got alpha=" +
        std::to_string(alpha) + ", log_n=" + std::to_string(log_n) + ")");
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (decay_lhs(mid, log_n) < 2.0 * alpha ? lo : hi) = mid;
  }
  DecaySolution sol;
  sol.alpha = alpha;
  sol.log_n = log_n;
  sol.p = 0.5 * (lo + hi);
  sol.bound = decay_bound(sol.p);
  sol.asymptotic = asymptotic_bound(alpha);
  sol.residual = std::abs(decay_lhs(sol.p, log_n) - 2.0 * alpha);
  if (sol.residual > 1e-9)
    throw InvariantViolation("decay equation residual " +
                             std::to_string(sol.residual));
  return sol;
}

// A finite nonnegative sequence x_0, x_1, ..., implicitly zero beyond its
// length, for the program: maximize sum sqrt(x_i) subject to x_i >= 0,
// sum x_i <= 1, and 2 alpha x_i >= sum_{j=i}^{i+log_n-1} x_j for all i.
struct ProgramPoint {
  std::vector<double> x;
  double tail_mass = 0;  // mass dropped by truncating an infinite sequence
};

inline ProgramPoint geometric_point(double p, std::size_t length) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidParameter("geometric point needs 0 < p < 1");
  ProgramPoint pt;
  pt.x.resize(length);
  double term = 1.0 - p;
  for (std::size_t i = 0; i < length; ++i) {
    pt.x[i] = term;
    term *= p;
  }
  pt.tail_mass = std::pow(p, static_cast<double>(length));
  return pt;
}

inline double objective(const ProgramPoint& pt) {
  double s = 0;
  for (double v : pt.x) {
    if (v < 0) throw InvalidParameter("program point has a negative entry");
    s += std::sqrt(v);
  }
  return s;
}

// Closed-form objective of the untruncated geometric point (1-p) p^i:
// sum sqrt((1-p) p^i) = sqrt(1-p)/(1-sqrt p) = (1+sqrt p)/sqrt(1-p).
inline double geometric_objective_closed(double p) { return decay_bound(p); }

struct FeasibilityReport {
  double min_value = 0;          // smallest entry (constraint 1)
  double sum_margin = 1;         // 1 - sum x_i (constraint 2)
  double min_window_margin = 0;  // min_i 2 alpha x_i - window sum (constraint 3)
  std::size_t worst_window = 0;  // argmin of the window margin
  bool feasible(double tol = 1e-9) const {
    return min_value >= -tol && sum_margin >= -tol && min_window_margin >= -tol;
  }
};

inline FeasibilityReport check_feasible(const ProgramPoint& pt, double alpha,
                                        std::uint32_t log_n) {
  FeasibilityReport rep;
  const std::size_t len = pt.x.size();
  double sum = 0;
  for (double v : pt.x) sum += v;
  rep.sum_margin = 1.0 - sum;
  rep.min_value = len == 0 ? 0.0 : *std::min_element(pt.x.begin(), pt.x.end());
  // windows starting beyond the support hold trivially (0 >= 0); report the
  // minimum over the supported starts
  for (std::size_t i = 0; i < len; ++i) {
    double win = 0;
    for (std::size_t j = i; j < std::min(len, i + log_n); ++j) win += pt.x[j];
    const double margin = 2.0 * alpha * pt.x[i] - win;
    if (i == 0 || margin < rep.min_window_margin) {
      rep.min_window_margin = margin;
      rep.worst_window = i;
    }
  }
  return rep;
}

// Per-scale check of 2 GD2(ell) >= sum of LD2 over the next log_n scales
// (zero beyond the profile), with Monte-Carlo error propagated.
struct Lemma3Scale {
  std::uint32_t scale = 0;
  double margin = 0;
  double se = 0;
  bool ok = false;  // margin >= -3 se
};

struct Lemma3Report {
  std::vector<Lemma3Scale> scales;
  double min_margin = 0;
  double min_sigma = 0;  // most negative margin/se, 0 when all se vanish
  bool all_ok = true;
};

inline Lemma3Report lemma3_check(const ScaleProfile& profile, std::uint32_t log_n) {
  if (log_n < 1) throw InvalidParameter("lemma3_check needs log_n >= 1");
  const std::uint32_t k = profile.num_scales_k;
  Lemma3Report rep;
  for (std::uint32_t ell = 0; ell < k; ++ell) {
    Lemma3Scale s;
    s.scale = ell;
    double win = 0, var = 0;
    for (std::uint32_t j = ell; j < std::min(k, ell + log_n); ++j) {
      win += profile.ld2[j].mean;
      var += profile.ld2[j].se * profile.ld2[j].se;
    }
    s.margin = 2.0 * profile.gd2[ell].mean - win;
    s.se = std::sqrt(4.0 * profile.gd2[ell].se * profile.gd2[ell].se + var);
    s.ok = s.margin >= -3.0 * s.se;
    rep.all_ok = rep.all_ok && s.ok;
    if (ell == 0 || s.margin < rep.min_margin) rep.min_margin = s.margin;
    if (s.se > 0) rep.min_sigma = std::min(rep.min_sigma, s.margin / s.se);
    rep.scales.push_back(s);
  }
  return rep;
}

// Checks the premise GD2(ell) <= alpha LD2(ell) per scale (with 3 SE slack),
// then the conclusion sum_ell LD1(ell) <= (1+sqrt p)/sqrt(1-p).  Also reports
// the smallest alpha that would satisfy the premise (max of GD2/LD2, scales
// with LD2 = 0 skipped) and the per-scale average sum/k.
struct Theorem2Scale {
  std::uint32_t scale = 0;
  double gd2 = 0;
  double ld2 = 0;
  double slack = 0;  // alpha ld2 + 3 se - gd2
  bool ok = false;
};

struct Theorem2Report {
  DecaySolution decay;
  std::vector<Theorem2Scale> scales;
  bool premise_ok = true;
  double empirical_alpha = 1.0;  // 1 when every scale is 0/0
  double sum_ld1 = 0;
  double sum_ld1_se = 0;
  double ld1_avg = 0;
  bool conclusion_ok = true;  // sum_ld1 <= bound + 3 se
  bool ok = true;             // premise implies conclusion
};

inline Theorem2Report theorem2_check(const ScaleProfile& profile, double alpha,
                                     std::uint32_t log_n) {
  Theorem2Report rep;
  rep.decay = solve_decay(alpha, log_n);
  const std::uint32_t k = profile.num_scales_k;
  bool any_ratio = false;
  double var = 0;
  for (std::uint32_t ell = 0; ell < k; ++ell) {
    Theorem2Scale s;
    s.scale = ell;
    s.gd2 = profile.gd2[ell].mean;
    s.ld2 = profile.ld2[ell].mean;
    const double se = std::sqrt(profile.gd2[ell].se * profile.gd2[ell].se +
                                alpha * alpha * profile.ld2[ell].se *
                                    profile.ld2[ell].se);
    s.slack = alpha * s.ld2 + 3.0 * se - s.gd2;
    s.ok = s.slack >= 0;
    rep.premise_ok = rep.premise_ok && s.ok;
    if (s.ld2 != 0) {
      const double ratio = s.gd2 / s.ld2;
      rep.empirical_alpha = any_ratio ? std::max(rep.empirical_alpha, ratio) : ratio;
      any_ratio = true;
    }
    rep.scales.push_back(s);
    rep.sum_ld1 += profile.ld1[ell].mean;
    var += profile.ld1[ell].se * profile.ld1[ell].se;
  }
  if (!any_ratio) rep.empirical_alpha = 1.0;
  rep.sum_ld1_se = std::sqrt(var);
  rep.ld1_avg = k == 0 ? 0.0 : rep.sum_ld1 / static_cast<double>(k);
  rep.conclusion_ok = rep.sum_ld1 <= rep.decay.bound + 3.0 * rep.sum_ld1_se;
  rep.ok = !rep.premise_ok || rep.conclusion_ok;
  return rep;
}

namespace detail {

// Random feasible point: fresh exponentials capped by a per-sample geometric
// ratio q < p, which enforces the window constraint by construction
// (window sum <= x_i (1-q^L)/(1-q) <= 2 alpha x_i), then normalized so
// constraint 2 is tight.  Scaling preserves the homogeneous constraints.
inline ProgramPoint random_feasible_point(double p, std::size_t length,
                                          CounterRng& rng) {
  ProgramPoint pt;
  pt.x.resize(length);
  const double q = p * rng.next_double();
  double prev = rng.next_exponential();
  pt.x[0] = prev;
  for (std::size_t i = 1; i < length; ++i) {
    prev = std::min(rng.next_exponential(), q * prev);
    pt.x[i] = prev;
  }
  double sum = 0;
  for (double v : pt.x) sum += v;
  if (sum > 0)
    for (double& v : pt.x) v /= sum;
  return pt;
}

// One equalizing pass of mass shifts between adjacent coordinates: for each
// pair (j, j+1) move delta from x_j to x_{j+1}, aiming at the unconstrained
// optimum delta = (x_j - x_{j+1})/2 (equal split maximizes sqrt x_j +
// sqrt x_{j+1} at fixed sum), clamped so every window constraint with a
// nonzero linear coefficient in delta stays satisfied.
inline void climb_pass(std::vector<double>& x, double alpha, std::uint32_t log_n) {
  const std::size_t len = x.size();
  const double two_a = 2.0 * alpha;
  for (std::size_t j = 0; j + 1 < len; ++j) {
    double lo = -x[j + 1], hi = x[j];
    const std::size_t first =
        j + 1 >= log_n ? j + 1 - log_n + 1 : 0;  // windows touching j or j+1
    for (std::size_t i = first; i <= j + 1 && i < len; ++i) {
      double c = 0;
      if (i == j) c -= two_a;
      if (i == j + 1) c += two_a;
      if (i <= j && j < i + log_n) c += 1.0;
      if (i <= j + 1 && j + 1 < i + log_n) c -= 1.0;
      if (c == 0) continue;
      double win = 0;
      for (std::size_t t = i; t < std::min(len, i + log_n); ++t) win += x[t];
      const double slack = two_a * x[i] - win;
      if (c < 0)
        hi = std::min(hi, -slack / c);
      else
        lo = std::max(lo, -slack / c);
    }
    if (lo > hi) continue;
    const double delta = std::clamp((x[j] - x[j + 1]) / 2.0, lo, hi);
    x[j] -= delta;
    x[j + 1] += delta;
  }
  double sum = 0;
  for (double v : x) sum += v;
  if (sum > 0)
    for (double& v : x) v /= sum;
}

}  // namespace detail

struct ProbeOptions {
  std::uint64_t samples = 10000;
  std::uint32_t climbs = 8;          // hill-climb starts
  std::uint32_t passes = 600;        // shift passes per climb
  std::uint32_t support_factor = 4;  // support length = factor * log_n
  std::uint64_t seed = 2024;
  std::uint32_t workers = 1;
};

struct ProbeResult {
  DecaySolution decay;
  double max_objective = 0;  // across seed, random points and climbs
  double best_random = 0;
  double best_climbed = 0;
  std::uint64_t samples = 0;
  std::uint32_t climbs = 0;
  bool within_bound = false;  // max_objective <= bound + 1e-9
};

inline ProbeResult optimality_probe(double alpha, std::uint32_t log_n,
                                    const ProbeOptions& opt) {
  if (opt.samples < 1) throw InvalidParameter("probe needs samples >= 1");
  ProbeResult res;
  res.decay = solve_decay(alpha, log_n);
  res.samples = opt.samples;
  res.climbs = opt.climbs;
  const double p = res.decay.p;
  const std::size_t length =
      static_cast<std::size_t>(opt.support_factor) * log_n;

  std::vector<double> objs(opt.samples, 0.0);
  parallel_for(opt.samples, opt.workers, [&](std::uint64_t t) {
    CounterRng rng(opt.seed, t);
    objs[t] = objective(detail::random_feasible_point(p, length, rng));
  });
  for (double o : objs) res.best_random = std::max(res.best_random, o);

  std::vector<double> climbed(opt.climbs, 0.0);
  parallel_for(opt.climbs, opt.workers, [&](std::uint64_t c) {
    CounterRng rng(opt.seed, (1ull << 32) + c);
    ProgramPoint pt = detail::random_feasible_point(p, length, rng);
    for (std::uint32_t pass = 0; pass < opt.passes; ++pass)
      detail::climb_pass(pt.x, alpha, log_n);
    // audit: discard a climb that drifted out of the feasible set
    if (check_feasible(pt, alpha, log_n).feasible(1e-12))
      climbed[c] = objective(pt);
  });
  for (double o : climbed) res.best_climbed = std::max(res.best_climbed, o);

  // the geometric seed scores as its untruncated closed form, which any
  // finite truncation approaches from below
  const double seed_obj = geometric_objective_closed(p);
  res.max_objective =
      std::max({seed_obj, res.best_random, res.best_climbed});
  res.within_bound = res.max_objective <= res.decay.bound + 1e-9;
  return res;
}

inline ProbeResult optimality_probe(double alpha, std::uint32_t log_n,
                                    std::uint64_t samples) {
  ProbeOptions opt;
  opt.samples = samples;
  return optimality_probe(alpha, log_n, opt);
}

}  // namespace smoothscale
