#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smoothscale/env.hpp"
#include "smoothscale/error.hpp"
#include "smoothscale/rng.hpp"

namespace smoothscale {

// A 2^(k-1) x 2^k cell region: the region on which the recursive horizontal
// domino tiling lives.  Scale-ell pixels are 2^ell x 2^ell cell blocks; a
// scale-ell domino piece is two horizontally adjacent scale-ell pixels, and
// each scale-ell pixel splits into a top and a bottom scale-(ell-1) piece,
// which makes the pieces at scale ell exactly the 2^ell x 2^(ell+1) grid
// tiles: 4^(k-1-ell) of them.
struct Window {
  std::uint32_t num_scales_k = 1;
  std::vector<double> cells;  // row-major, rows() * cols()

  std::uint32_t rows() const { return 1u << (num_scales_k - 1); }
  std::uint32_t cols() const { return 1u << num_scales_k; }
  double at(std::uint32_t r, std::uint32_t c) const {
    return cells[static_cast<std::size_t>(r) * cols() + c];
  }
};

inline Window make_window(std::uint32_t k, std::vector<double> cells) {
  if (k < 1 || k > 15) throw InvalidParameter("window needs 1 <= k <= 15");
  Window w{k, std::move(cells)};
  if (w.cells.size() != (static_cast<std::size_t>(w.rows()) * w.cols()))
    throw InvalidParameter("window needs 2^(k-1) * 2^k cells");
  for (double v : w.cells)
    if (!(v >= 0.0 && v <= 1.0))
      throw InvalidParameter("window cells must lie in [0,1]");
  return w;
}

template <EnvironmentLike E>
Window window_from_env(const E& env, std::uint64_t anchor_i, std::uint64_t anchor_j,
                       std::uint32_t k) {
  if (k < 1 || k > 15 || (1u << k) > env.side())
    throw InvalidParameter("window of " + std::to_string(k) +
                           " scales does not fit the environment");
  const std::uint64_t n = env.side();
  std::vector<double> cells;
  cells.reserve((1ull << (k - 1)) * (1ull << k));
  for (std::uint64_t r = 0; r < (1ull << (k - 1)); ++r)
    for (std::uint64_t c = 0; c < (1ull << k); ++c)
      cells.push_back(env.block_average((anchor_i + r) % n, (anchor_j + c) % n, 0));
  return make_window(k, std::move(cells));
}

inline Window random_window(std::uint32_t k, CounterRng& rng) {
  std::vector<double> cells((1ull << (k - 1)) * (1ull << k));
  for (double& v : cells) v = rng.next_double();
  return make_window(k, std::move(cells));
}

// Coefficients of the window against the domino partial basis: c0 for the
// constant unit vector, and c[ell][piece] = 2^ell (x_p - x_q) / sqrt(2) for
// the piece's left and right pixel averages, pieces row-major per scale.
struct DominoCoefficients {
  std::uint32_t num_scales_k = 1;
  double c0 = 0;
  std::vector<std::vector<double>> c;

  std::uint32_t piece_grid(std::uint32_t ell) const {
    return 1u << (num_scales_k - 1 - ell);  // pieces per row = rows of pieces
  }
};

namespace detail {

// Pixel-sum pyramid: level ell holds the cell sums of every aligned
// scale-ell pixel, built by 2x2 reduction in O(window size) per level.
inline std::vector<std::vector<double>> sum_pyramid(const Window& w) {
  std::vector<std::vector<double>> levels(w.num_scales_k);
  levels[0] = w.cells;
  std::uint32_t rows = w.rows(), cols = w.cols();
  for (std::uint32_t ell = 1; ell < w.num_scales_k; ++ell) {
    const auto& prev = levels[ell - 1];
    const std::uint32_t pr = rows >> (ell - 1), pc = cols >> (ell - 1);
    const std::uint32_t nr = pr / 2, nc = pc / 2;
    levels[ell].resize(static_cast<std::size_t>(nr) * nc);
    for (std::uint32_t r = 0; r < nr; ++r)
      for (std::uint32_t c = 0; c < nc; ++c)
        levels[ell][static_cast<std::size_t>(r) * nc + c] =
            prev[static_cast<std::size_t>(2 * r) * pc + 2 * c] +
            prev[static_cast<std::size_t>(2 * r) * pc + 2 * c + 1] +
            prev[static_cast<std::size_t>(2 * r + 1) * pc + 2 * c] +
            prev[static_cast<std::size_t>(2 * r + 1) * pc + 2 * c + 1];
  }
  return levels;
}

}  // namespace detail

inline DominoCoefficients transform(const Window& w) {
  const auto pyramid = detail::sum_pyramid(w);
  const std::uint32_t k = w.num_scales_k;
  DominoCoefficients out;
  out.num_scales_k = k;

  double total = 0;
  for (double v : w.cells) total += v;
  out.c0 = std::sqrt(2.0) / static_cast<double>(1u << k) * total;

  out.c.resize(k);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::uint32_t ell = 0; ell < k; ++ell) {
    const std::uint32_t grid = 1u << (k - 1 - ell);  // piece rows == piece cols
    const std::uint32_t pixel_cols = w.cols() >> ell;
    const double scale = static_cast<double>(1u << ell) /
                         static_cast<double>(1ull << (2 * ell));  // 2^ell / 4^ell
    out.c[ell].resize(static_cast<std::size_t>(grid) * grid);
    for (std::uint32_t pr = 0; pr < grid; ++pr)
      for (std::uint32_t pc = 0; pc < grid; ++pc) {
        const double left =
            pyramid[ell][static_cast<std::size_t>(pr) * pixel_cols + 2 * pc];
        const double right =
            pyramid[ell][static_cast<std::size_t>(pr) * pixel_cols + 2 * pc + 1];
        // 2^ell (x_p - x_q)/sqrt 2 with x = sum / 4^ell
        out.c[ell][static_cast<std::size_t>(pr) * grid + pc] =
            scale * (left - right) * inv_sqrt2;
      }
  }
  return out;
}

// Explicit unit vectors of the partial basis over the window's cells, in the
// order [constant, scale 0 pieces row-major, scale 1, ...].  Exponential in
// k, so capped; transform() never materializes these.
inline std::vector<std::vector<double>> build_basis(std::uint32_t k) {
  if (k < 1) throw InvalidParameter("basis needs k >= 1");
  if (k > 6)
    throw ResourceLimit("explicit basis vectors are capped at k = 6 (" +
                        std::to_string(k) + " requested)");
  const std::uint32_t rows = 1u << (k - 1), cols = 1u << k;
  const std::size_t m = static_cast<std::size_t>(rows) * cols;
  std::vector<std::vector<double>> basis;
  basis.emplace_back(m, std::sqrt(2.0) / static_cast<double>(1u << k));
  for (std::uint32_t ell = 0; ell < k; ++ell) {
    const std::uint32_t grid = 1u << (k - 1 - ell);
    const double amp = 1.0 / (static_cast<double>(1u << ell) * std::sqrt(2.0));
    for (std::uint32_t pr = 0; pr < grid; ++pr)
      for (std::uint32_t pc = 0; pc < grid; ++pc) {
        std::vector<double> v(m, 0.0);
        const std::uint32_t r0 = pr << ell, c0 = pc << (ell + 1);
        for (std::uint32_t dr = 0; dr < (1u << ell); ++dr)
          for (std::uint32_t dc = 0; dc < (1u << ell); ++dc) {
            v[static_cast<std::size_t>(r0 + dr) * cols + c0 + dc] = amp;
            v[static_cast<std::size_t>(r0 + dr) * cols + c0 + (1u << ell) + dc] = -amp;
          }
        basis.push_back(std::move(v));
      }
  }
  return basis;
}

// Mean and mean-square cell values of the window.
inline std::pair<double, double> window_moments(const Window& w) {
  double mu = 0, w2 = 0;
  for (double v : w.cells) {
    mu += v;
    w2 += v * v;
  }
  const double m = static_cast<double>(w.cells.size());
  return {mu / m, w2 / m};
}

// Bessel gap of the partial basis:
//   2^(2k-1) w^2 - [2^(2k-1) mu^2 + sum 2^(2ell-1) (x_p - x_q)^2],
// i.e. |W|^2 minus the captured squared mass; nonnegative up to rounding,
// and exactly zero at k = 1 where the basis is complete.
inline double parseval_slack(const Window& w) {
  const auto [mu, w2] = window_moments(w);
  const auto coeffs = transform(w);
  double captured = coeffs.c0 * coeffs.c0;
  for (const auto& per_scale : coeffs.c)
    for (double c : per_scale) captured += c * c;
  const double m = static_cast<double>(w.cells.size());  // 2^(2k-1)
  return m * w2 - captured;
}

// The same gap with both sides divided by 2^(2k-1).
inline double eq3_slack(const Window& w) {
  const auto [mu, w2] = window_moments(w);
  const auto pyramid = detail::sum_pyramid(w);
  const std::uint32_t k = w.num_scales_k;
  double captured = mu * mu;
  for (std::uint32_t ell = 0; ell < k; ++ell) {
    const std::uint32_t grid = 1u << (k - 1 - ell);
    const std::uint32_t pixel_cols = w.cols() >> ell;
    const double inv_area = 1.0 / static_cast<double>(1ull << (2 * ell));
    const double weight = std::pow(2.0, 2.0 * ell - 1.0) /
                          static_cast<double>(1ull << (2 * k - 1));
    for (std::uint32_t pr = 0; pr < grid; ++pr)
      for (std::uint32_t pc = 0; pc < grid; ++pc) {
        const double xp =
            pyramid[ell][static_cast<std::size_t>(pr) * pixel_cols + 2 * pc] * inv_area;
        const double xq =
            pyramid[ell][static_cast<std::size_t>(pr) * pixel_cols + 2 * pc + 1] *
            inv_area;
        captured += weight * (xp - xq) * (xp - xq);
      }
  }
  return w2 - captured;
}

// Scale-weighted quadratic discrepancy of the tiling:
//   (1/k) sum_ell 4^(ell+1-k) sum_pieces (x_p - x_q)^2.
inline double window_ld(const Window& w) {
  const auto pyramid = detail::sum_pyramid(w);
  const std::uint32_t k = w.num_scales_k;
  double total = 0;
  for (std::uint32_t ell = 0; ell < k; ++ell) {
    const std::uint32_t grid = 1u << (k - 1 - ell);
    const std::uint32_t pixel_cols = w.cols() >> ell;
    const double inv_area = 1.0 / static_cast<double>(1ull << (2 * ell));
    double piece_sum = 0;
    for (std::uint32_t pr = 0; pr < grid; ++pr)
      for (std::uint32_t pc = 0; pc < grid; ++pc) {
        const double xp =
            pyramid[ell][static_cast<std::size_t>(pr) * pixel_cols + 2 * pc] * inv_area;
        const double xq =
            pyramid[ell][static_cast<std::size_t>(pr) * pixel_cols + 2 * pc + 1] *
            inv_area;
        piece_sum += (xp - xq) * (xp - xq);
      }
    total += std::pow(4.0, static_cast<double>(ell) + 1.0 - static_cast<double>(k)) *
             piece_sum;
  }
  return total / static_cast<double>(k);
}

struct Theorem1Chain {
  double ld_w = 0;        // LD(W)
  double bound_mid = 0;   // (4/k)(w^2 - mu^2)
  double bound_final = 0; // 1/k
};

// The bound chain LD(W) <= (4/k)(w^2 - mu^2) <= 1/k; a violation beyond
// rounding means the transform or the tiling is wrong.
inline Theorem1Chain theorem1_chain(const Window& w) {
  const auto [mu, w2] = window_moments(w);
  Theorem1Chain chain;
  chain.ld_w = window_ld(w);
  chain.bound_mid = 4.0 / static_cast<double>(w.num_scales_k) * (w2 - mu * mu);
  chain.bound_final = 1.0 / static_cast<double>(w.num_scales_k);
  if (chain.ld_w > chain.bound_mid + 1e-9 || chain.bound_mid > chain.bound_final + 1e-9)
    throw InvariantViolation("window bound chain violated: ld=" +
                             std::to_string(chain.ld_w) + " mid=" +
                             std::to_string(chain.bound_mid) + " final=" +
                             std::to_string(chain.bound_final));
  return chain;
}

}  // namespace smoothscale
