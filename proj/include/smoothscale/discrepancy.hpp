#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "smoothscale/env.hpp"
#include "smoothscale/error.hpp"
#include "smoothscale/parallel.hpp"
#include "smoothscale/rng.hpp"
#include "smoothscale/sampling.hpp"

namespace smoothscale {

// Mean |difference|^order over horizontally and vertically adjacent pixel
// pairs; images do not wrap, so an n x m image has 2nm - n - m edges.
inline double local_discrepancy(const ImageSample& img, int order) {
  if (order != 1 && order != 2) throw InvalidParameter("order must be 1 or 2");
  const std::uint64_t r = img.rows, c = img.cols;
  const std::uint64_t edges = 2 * r * c - r - c;
  if (edges == 0) throw UndefinedStatistic("a 1x1 image has no adjacent pairs");
  double sum = 0;
  for (std::uint32_t a = 0; a < r; ++a)
    for (std::uint32_t b = 0; b < c; ++b) {
      const double v = img.at(a, b);
      if (b + 1 < c) {
        const double d = std::abs(v - img.at(a, b + 1));
        sum += order == 1 ? d : d * d;
      }
      if (a + 1 < r) {
        const double d = std::abs(v - img.at(a + 1, b));
        sum += order == 1 ? d : d * d;
      }
    }
  return sum / static_cast<double>(edges);
}

inline std::uint64_t edge_count(const ImageSample& img) {
  return 2ull * img.rows * img.cols - img.rows - img.cols;
}

// Mean |difference|^order over all ordered pixel pairs, p = q included.
// Order 2 is twice the population variance (two-pass for stability); order 1
// uses the sorted-values identity
//   sum_{p,q} |y_p - y_q| = 2 * sum_i (2i - M - 1) * y_(i),  i = 1..M.
inline double global_discrepancy(const ImageSample& img, int order) {
  if (order != 1 && order != 2) throw InvalidParameter("order must be 1 or 2");
  const std::size_t m = img.pixels.size();
  if (m == 0) throw InvalidParameter("empty image");
  if (order == 2) {
    // two-pass variance on values shifted by the first pixel, so constant
    // images come out exactly zero
    const double base = img.pixels[0];
    double mean = 0;
    for (double v : img.pixels) mean += v - base;
    mean /= static_cast<double>(m);
    double ss = 0;
    for (double v : img.pixels) {
      const double dev = (v - base) - mean;
      ss += dev * dev;
    }
    return 2.0 * ss / static_cast<double>(m);
  }
  std::vector<double> sorted(img.pixels);
  std::sort(sorted.begin(), sorted.end());
  double sum = 0;
  for (std::size_t i = 0; i < m; ++i)
    sum += (2.0 * static_cast<double>(i + 1) - static_cast<double>(m) - 1.0) * sorted[i];
  return 2.0 * sum / (static_cast<double>(m) * static_cast<double>(m));
}

// All-pairs reference implementation, O(M^2); the fast paths above must
// agree with it to 1e-12.
inline double global_discrepancy_brute(const ImageSample& img, int order) {
  if (order != 1 && order != 2) throw InvalidParameter("order must be 1 or 2");
  const std::size_t m = img.pixels.size();
  if (m == 0) throw InvalidParameter("empty image");
  double sum = 0;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      const double d = std::abs(img.pixels[p] - img.pixels[q]);
      sum += order == 1 ? d : d * d;
    }
  return sum / (static_cast<double>(m) * static_cast<double>(m));
}

// GD2 / LD2 with 0/0 read as 1.  LD2 = 0 forces GD2 = 0 (a zero-edge-gap
// image is constant), so a nonzero GD2 there means a bug.
inline double local_correlation(const ImageSample& img) {
  const double ld2 = local_discrepancy(img, 2);
  const double gd2 = global_discrepancy(img, 2);
  if (ld2 == 0.0) {
    if (gd2 < 1e-12) return 1.0;
    throw InvariantViolation("LD2 = 0 with GD2 = " + std::to_string(gd2));
  }
  return gd2 / ld2;
}

struct DiscrepancyReport {
  double ld1 = 0, ld2 = 0, gd1 = 0, gd2 = 0, lc = 1;
  std::uint64_t edges = 0;
};

inline DiscrepancyReport analyze(const ImageSample& img) {
  DiscrepancyReport r;
  r.ld1 = local_discrepancy(img, 1);
  r.ld2 = local_discrepancy(img, 2);
  r.gd1 = global_discrepancy(img, 1);
  r.gd2 = global_discrepancy(img, 2);
  r.lc = r.ld2 == 0.0 ? (r.gd2 < 1e-12 ? 1.0 : throw InvariantViolation("LD2=0, GD2>0"))
                      : r.gd2 / r.ld2;
  r.edges = edge_count(img);
  return r;
}

// A split of an image's pixels into part_count parts of exactly part_size
// pixels each.
struct Equipartition {
  std::vector<std::uint32_t> part_of;  // pixel index -> part id
  std::uint32_t part_size = 0;
  std::uint32_t part_count = 0;

  void validate(std::size_t pixel_count) const {
    if (part_of.size() != pixel_count ||
        static_cast<std::uint64_t>(part_size) * part_count != pixel_count)
      throw InvalidParameter("partition does not cover the image");
    std::vector<std::uint32_t> sizes(part_count, 0);
    for (std::uint32_t p : part_of) {
      if (p >= part_count) throw InvalidParameter("part id out of range");
      ++sizes[p];
    }
    for (std::uint32_t s : sizes)
      if (s != part_size) throw InvalidParameter("parts must have equal sizes");
  }
};

// Mean part-wise GD2, parts treated as bags of values.
inline double equipartition_discrepancy(const ImageSample& img,
                                        const Equipartition& partition) {
  partition.validate(img.pixels.size());
  const double base = img.pixels[0];  // shared shift keeps constant parts exact
  std::vector<double> sum(partition.part_count, 0.0);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    sum[partition.part_of[i]] += img.pixels[i] - base;
  std::vector<double> ss(partition.part_count, 0.0);
  const double d = partition.part_size;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double dev = (img.pixels[i] - base) - sum[partition.part_of[i]] / d;
    ss[partition.part_of[i]] += dev * dev;
  }
  double total = 0;
  for (double s : ss) total += 2.0 * s / d;
  return total / partition.part_count;
}

// The four perfect matchings of torus-adjacent pixels: horizontal pairs
// starting at even / odd columns, vertical pairs starting at even / odd
// rows (wrapping across the image edge).  Rows and cols must be even.
inline std::array<Equipartition, 4> domino_partitions(std::uint32_t rows,
                                                      std::uint32_t cols) {
  if (rows % 2 != 0 || cols % 2 != 0)
    throw InvalidParameter("domino partitions need even image dimensions");
  std::array<Equipartition, 4> parts;
  const std::uint32_t m = rows * cols;
  for (int which = 0; which < 4; ++which) {
    auto& pt = parts[which];
    pt.part_size = 2;
    pt.part_count = m / 2;
    pt.part_of.assign(m, 0);
  }
  for (std::uint32_t a = 0; a < rows; ++a)
    for (std::uint32_t b = 0; b < cols; ++b) {
      const std::uint32_t idx = a * cols + b;
      parts[0].part_of[idx] = a * (cols / 2) + b / 2;                  // (a, 2t)-(a, 2t+1)
      parts[1].part_of[idx] = a * (cols / 2) + ((b + cols - 1) % cols) / 2;
      parts[2].part_of[idx] = (a / 2) * cols + b;                      // (2t, b)-(2t+1, b)
      parts[3].part_of[idx] = (((a + rows - 1) % rows) / 2) * cols + b;
    }
  return parts;
}

struct ScaleStat {
  double mean = 0;
  double se = 0;
  std::uint64_t trials = 0;
};

// Per-scale Monte-Carlo means of LD1, LD2, GD2 with standard errors, plus
// the unweighted scale aggregates (scales are equiprobable under the
// sampling distribution).
struct ScaleProfile {
  std::uint32_t side_n = 0;
  std::uint32_t num_scales_k = 0;
  std::uint64_t seed = 0;
  std::vector<ScaleStat> ld1, ld2, gd2;  // one entry per scale
  double agg_ld1 = 0, agg_ld2 = 0, agg_gd2 = 0;
  double agg_se_ld1 = 0, agg_se_ld2 = 0, agg_se_gd2 = 0;
};

namespace detail {

inline ScaleStat reduce_stat(const std::vector<double>& xs) {
  ScaleStat s;
  s.trials = xs.size();
  const double base = xs[0];  // shift so zero-variance strata stay exact
  double sum = 0;
  for (double x : xs) sum += x - base;  // fixed order: by trial index
  const double shifted_mean = sum / static_cast<double>(xs.size());
  s.mean = base + shifted_mean;
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) {
      const double dev = (x - base) - shifted_mean;
      ss += dev * dev;
    }
    s.se = std::sqrt(ss / (static_cast<double>(xs.size() - 1) *
                           static_cast<double>(xs.size())));
  }
  return s;
}

}  // namespace detail

// Stratified estimator: ceil(total_trials / k) independent images per scale,
// each drawn from the substream keyed by (seed, scale << 40 | trial), so the
// result is a pure function of (env, config, total_trials) regardless of the
// worker count.
template <EnvironmentLike E>
ScaleProfile estimate_profile(const E& env, const SamplerConfig& cfg,
                              std::uint64_t total_trials, unsigned workers = 1) {
  cfg.validate(env);
  if (total_trials == 0) throw InvalidParameter("need at least one trial");
  const std::uint32_t k = cfg.num_scales_k;
  const std::uint64_t per_scale = (total_trials + k - 1) / k;

  ScaleProfile prof;
  prof.side_n = cfg.side_n;
  prof.num_scales_k = k;
  prof.seed = cfg.seed;

  std::vector<std::vector<double>> ld1s(k), ld2s(k), gd2s(k);
  for (std::uint32_t ell = 0; ell < k; ++ell) {
    ld1s[ell].resize(per_scale);
    ld2s[ell].resize(per_scale);
    gd2s[ell].resize(per_scale);
  }
  parallel_for(static_cast<std::uint64_t>(k) * per_scale, workers,
               [&](std::uint64_t task) {
                 const std::uint32_t ell = static_cast<std::uint32_t>(task / per_scale);
                 const std::uint64_t t = task % per_scale;
                 CounterRng rng(cfg.seed, (static_cast<std::uint64_t>(ell) << 40) | t);
                 const std::uint64_t i = rng.next_below(env.side());
                 const std::uint64_t j = rng.next_below(env.side());
                 const ImageSample img = extract_image(env, ell, i, j, cfg.side_n);
                 ld1s[ell][t] = local_discrepancy(img, 1);
                 ld2s[ell][t] = local_discrepancy(img, 2);
                 gd2s[ell][t] = global_discrepancy(img, 2);
               });

  prof.ld1.resize(k);
  prof.ld2.resize(k);
  prof.gd2.resize(k);
  double v1 = 0, v2 = 0, vg = 0;
  for (std::uint32_t ell = 0; ell < k; ++ell) {
    prof.ld1[ell] = detail::reduce_stat(ld1s[ell]);
    prof.ld2[ell] = detail::reduce_stat(ld2s[ell]);
    prof.gd2[ell] = detail::reduce_stat(gd2s[ell]);
    prof.agg_ld1 += prof.ld1[ell].mean;
    prof.agg_ld2 += prof.ld2[ell].mean;
    prof.agg_gd2 += prof.gd2[ell].mean;
    v1 += prof.ld1[ell].se * prof.ld1[ell].se;
    v2 += prof.ld2[ell].se * prof.ld2[ell].se;
    vg += prof.gd2[ell].se * prof.gd2[ell].se;
  }
  prof.agg_ld1 /= k;
  prof.agg_ld2 /= k;
  prof.agg_gd2 /= k;
  prof.agg_se_ld1 = std::sqrt(v1) / k;
  prof.agg_se_ld2 = std::sqrt(v2) / k;
  prof.agg_se_gd2 = std::sqrt(vg) / k;
  return prof;
}

}  // namespace smoothscale
