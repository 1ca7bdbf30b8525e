#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smoothscale/env.hpp"
#include "smoothscale/error.hpp"
#include "smoothscale/rng.hpp"

namespace smoothscale {

// A rows x cols pixel array extracted from an environment: pixel (a,b) is
// the block average of the 2^ell x 2^ell cell block at
// (anchor_i + a*2^ell, anchor_j + b*2^ell), coordinates mod N.
struct ImageSample {
  std::uint32_t scale_ell = 0;
  std::uint32_t anchor_i = 0, anchor_j = 0;
  std::uint32_t rows = 0, cols = 0;
  std::vector<double> pixels;  // row-major

  double at(std::uint32_t a, std::uint32_t b) const {
    return pixels[static_cast<std::size_t>(a) * cols + b];
  }
};

template <EnvironmentLike E>
ImageSample extract_rect(const E& env, std::uint32_t ell, std::uint64_t anchor_i,
                         std::uint64_t anchor_j, std::uint32_t rows, std::uint32_t cols) {
  const std::uint64_t n = env.side();
  if (ell >= 32 || rows == 0 || cols == 0 ||
      static_cast<std::uint64_t>(rows) << ell > n ||
      static_cast<std::uint64_t>(cols) << ell > n)
    throw InvalidParameter("image footprint " + std::to_string(rows) + "x" +
                           std::to_string(cols) + " at scale " + std::to_string(ell) +
                           " exceeds environment side " + std::to_string(n));
  ImageSample img;
  img.scale_ell = ell;
  img.anchor_i = static_cast<std::uint32_t>(anchor_i % n);
  img.anchor_j = static_cast<std::uint32_t>(anchor_j % n);
  img.rows = rows;
  img.cols = cols;
  img.pixels.resize(static_cast<std::size_t>(rows) * cols);
  const std::uint64_t step = 1ull << ell;
  for (std::uint32_t a = 0; a < rows; ++a)
    for (std::uint32_t b = 0; b < cols; ++b)
      img.pixels[static_cast<std::size_t>(a) * cols + b] =
          env.block_average((img.anchor_i + a * step) % n,
                            (img.anchor_j + b * step) % n, ell);
  return img;
}

template <EnvironmentLike E>
ImageSample extract_image(const E& env, std::uint32_t ell, std::uint64_t anchor_i,
                          std::uint64_t anchor_j, std::uint32_t n) {
  return extract_rect(env, ell, anchor_i, anchor_j, n, n);
}

// The "half an image" window: n/2 rows by n columns of scale-ell pixels.
template <EnvironmentLike E>
ImageSample extract_window(const E& env, std::uint32_t ell, std::uint64_t anchor_i,
                           std::uint64_t anchor_j, std::uint32_t n) {
  if (n < 2 || n % 2 != 0)
    throw InvalidParameter("window needs an even pixel side >= 2");
  return extract_rect(env, ell, anchor_i, anchor_j, n / 2, n);
}

// Parameters of the sampling distribution: uniform scale in [0, k-1] and a
// uniform torus anchor.
struct SamplerConfig {
  std::uint32_t side_n = 0;
  std::uint32_t num_scales_k = 0;
  std::uint64_t seed = 0;

  template <EnvironmentLike E>
  void validate(const E& env) const {
    if (side_n < 2 || !is_pow2(side_n))
      throw InvalidParameter("image side must be a power of two >= 2, got " +
                             std::to_string(side_n));
    if (num_scales_k < 2)
      throw InvalidParameter("num_scales_k must be >= 2, got " +
                             std::to_string(num_scales_k));
    if (num_scales_k >= 32 ||
        (static_cast<std::uint64_t>(side_n) << (num_scales_k - 1)) > env.side())
      throw InvalidParameter(
          "largest scale footprint n*2^(k-1) exceeds environment side " +
          std::to_string(env.side()));
  }

  // The size constraint is stated both as n*2^k <= N and with k-1; only
  // scales up to k-1 are ever drawn, so n*2^(k-1) <= N is what we enforce.
  // This reports the stricter form's violation so callers can surface it.
  template <EnvironmentLike E>
  std::string footprint_warning(const E& env) const {
    if (num_scales_k < 32 &&
        (static_cast<std::uint64_t>(side_n) << num_scales_k) <= env.side())
      return {};
    return "note: n*2^k = " +
           std::to_string(static_cast<std::uint64_t>(side_n) << num_scales_k) +
           " exceeds side " + std::to_string(env.side()) +
           " (scales stop at k-1, so sampling is still well defined)";
  }
};

// One draw from the distribution: scale first, then anchor row, then anchor
// column (the draw order is part of the reproducibility contract).
template <EnvironmentLike E>
ImageSample sample_image(const E& env, const SamplerConfig& cfg, CounterRng& rng) {
  cfg.validate(env);
  const std::uint32_t ell = static_cast<std::uint32_t>(rng.next_below(cfg.num_scales_k));
  const std::uint64_t i = rng.next_below(env.side());
  const std::uint64_t j = rng.next_below(env.side());
  return extract_image(env, ell, i, j, cfg.side_n);
}

// A uniformly anchored half-image window at a fixed scale.
template <EnvironmentLike E>
ImageSample sample_window(const E& env, std::uint32_t ell, std::uint32_t n,
                          CounterRng& rng) {
  const std::uint64_t i = rng.next_below(env.side());
  const std::uint64_t j = rng.next_below(env.side());
  return extract_window(env, ell, i, j, n);
}

}  // namespace smoothscale
