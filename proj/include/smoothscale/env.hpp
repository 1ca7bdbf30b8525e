#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "smoothscale/error.hpp"
#include "smoothscale/rng.hpp"

namespace smoothscale {

inline constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Anything that exposes a torus side length and exact dyadic block averages.
// Statistics and sampling are templated on this so tests can substitute
// instrumented backends.
template <class E>
concept EnvironmentLike = requires(const E& e, std::uint64_t i, std::uint64_t j,
                                   std::uint32_t ell) {
  { e.side() } -> std::convertible_to<std::uint32_t>;
  { e.block_average(i, j, ell) } -> std::convertible_to<double>;
};

enum class EnvKind { dense, checkerboard, megacell, prefix_walk, row_gradient, constant };

inline const char* kind_name(EnvKind k) {
  switch (k) {
    case EnvKind::dense: return "dense";
    case EnvKind::checkerboard: return "checkerboard";
    case EnvKind::megacell: return "megacell";
    case EnvKind::prefix_walk: return "prefix_walk";
    case EnvKind::row_gradient: return "row_gradient";
    case EnvKind::constant: return "constant";
  }
  return "?";
}

namespace detail {

struct Checkerboard {
  std::uint32_t n;
  double cell(std::uint64_t i, std::uint64_t j) const {
    return static_cast<double>((i % n + j % n) & 1);
  }
  double block_average(std::uint64_t i, std::uint64_t j, std::uint32_t ell) const {
    return ell == 0 ? cell(i, j) : 0.5;  // every 2x2 block holds two 0s and two 1s
  }
};

struct MegaCell {
  std::uint32_t n;
  std::uint32_t k;  // mega-cell side is 2^k cells

  // Number of t in [0,x), x <= n, whose mega index floor(t/2^k) is odd.
  std::uint64_t odd_below(std::uint64_t x) const {
    const std::uint64_t half = 1ull << k, period = half << 1;
    std::uint64_t rem = x % period;
    return (x / period) * half + (rem > half ? rem - half : 0);
  }
  // Same count over the torus interval [a, a+len) mod n, len <= n.
  std::uint64_t odd_in(std::uint64_t a, std::uint64_t len) const {
    a %= n;
    std::uint64_t end = a + len;
    if (end <= n) return odd_below(end) - odd_below(a);
    return odd_below(n) - odd_below(a) + odd_below(end - n);
  }
  double cell(std::uint64_t i, std::uint64_t j) const {
    return static_cast<double>(((i % n >> k) + (j % n >> k)) & 1);
  }
  double block_average(std::uint64_t i, std::uint64_t j, std::uint32_t ell) const {
    const std::uint64_t len = 1ull << ell;
    const std::uint64_t a = odd_in(i, len), b = odd_in(j, len);
    // cell is 1 exactly when the row parity and column parity differ
    const std::uint64_t ones = a * (len - b) + (len - a) * b;
    return static_cast<double>(ones) / static_cast<double>(len * len);
  }
};

// Intensity depends on one coordinate only; values are rationals num/denom
// with 1-D prefix sums, so block averages stay exact at any side length.
struct AxisFn {
  std::uint32_t n;
  bool along_rows;  // true: value is a function of the row index i
  std::uint64_t denom;
  std::shared_ptr<const std::vector<std::uint32_t>> num;     // length n
  std::shared_ptr<const std::vector<std::uint64_t>> prefix;  // length n+1

  double cell(std::uint64_t i, std::uint64_t j) const {
    return static_cast<double>((*num)[(along_rows ? i : j) % n]) /
           static_cast<double>(denom);
  }
  std::uint64_t range_sum(std::uint64_t a, std::uint64_t len) const {
    a %= n;
    const auto& p = *prefix;
    std::uint64_t end = a + len;
    if (end <= n) return p[end] - p[a];
    return p[n] - p[a] + p[end - n];
  }
  double block_average(std::uint64_t i, std::uint64_t j, std::uint32_t ell) const {
    const std::uint64_t len = 1ull << ell;
    const std::uint64_t s = range_sum(along_rows ? i : j, len);
    return static_cast<double>(s) / (static_cast<double>(denom) * static_cast<double>(len));
  }
};

struct Constant {
  std::uint32_t n;
  double v;
  double cell(std::uint64_t, std::uint64_t) const { return v; }
  double block_average(std::uint64_t, std::uint64_t, std::uint32_t) const { return v; }
};

// Fixed-point grid kept only as its summed-area table: sat[i][j] is the sum
// of the numerators of all cells above and left of (i,j), so any cell or
// block sum is an exact integer difference.
struct Dense {
  std::uint32_t n;
  std::uint64_t denom;
  std::shared_ptr<const std::vector<std::uint64_t>> sat;  // (n+1) x (n+1)

  std::uint64_t rect(std::uint64_t r0, std::uint64_t r1, std::uint64_t c0,
                     std::uint64_t c1) const {
    const auto& s = *sat;
    const std::uint64_t w = n + 1;
    return s[r1 * w + c1] - s[r0 * w + c1] - s[r1 * w + c0] + s[r0 * w + c0];
  }
  std::uint64_t block_sum(std::uint64_t i, std::uint64_t j, std::uint64_t len) const {
    i %= n;
    j %= n;
    const std::uint64_t r1 = i + len, c1 = j + len;
    std::uint64_t total = rect(i, std::min<std::uint64_t>(r1, n), j,
                               std::min<std::uint64_t>(c1, n));
    if (r1 > n) total += rect(0, r1 - n, j, std::min<std::uint64_t>(c1, n));
    if (c1 > n) total += rect(i, std::min<std::uint64_t>(r1, n), 0, c1 - n);
    if (r1 > n && c1 > n) total += rect(0, r1 - n, 0, c1 - n);
    return total;
  }
  double cell(std::uint64_t i, std::uint64_t j) const {
    i %= n;
    j %= n;
    return static_cast<double>(rect(i, i + 1, j, j + 1)) / static_cast<double>(denom);
  }
  double block_average(std::uint64_t i, std::uint64_t j, std::uint32_t ell) const {
    const std::uint64_t len = 1ull << ell;
    return static_cast<double>(block_sum(i, j, len)) /
           (static_cast<double>(denom) * static_cast<double>(len) * static_cast<double>(len));
  }
};

}  // namespace detail

// Construction-time facts a caller may want to report; NaN / -1 where not
// applicable.
struct EnvInfo {
  EnvKind kind = EnvKind::constant;
  std::uint32_t side = 0;
  int param_k = -1;                  // megacell / prefix_walk construction k
  double value = std::numeric_limits<double>::quiet_NaN();  // constant's v
  double extreme_fraction = std::numeric_limits<double>::quiet_NaN();  // prefix_walk
  std::uint64_t seed = 0;            // iid_uniform
};

// An immutable N x N torus of cell intensities in [0,1].  Copies are cheap
// (heavy backends share storage) and all reads are thread-safe.
class Environment {
 public:
  std::uint32_t side() const { return side_; }

  double intensity(std::uint64_t i, std::uint64_t j) const {
    return std::visit([&](const auto& b) { return b.cell(i, j); }, backend_);
  }

  // Exact mean intensity of the 2^ell x 2^ell block anchored at (i,j),
  // coordinates wrapping modulo N.
  double block_average(std::uint64_t i, std::uint64_t j, std::uint32_t ell) const {
    if (ell >= 32 || (1ull << ell) > side_)
      throw InvalidParameter("block scale 2^" + std::to_string(ell) +
                             " exceeds environment side " + std::to_string(side_));
    return std::visit([&](const auto& b) { return b.block_average(i, j, ell); },
                      backend_);
  }

  const EnvInfo& info() const { return info_; }
  EnvKind kind() const { return info_.kind; }

  using Backend = std::variant<detail::Checkerboard, detail::MegaCell, detail::AxisFn,
                               detail::Constant, detail::Dense>;

  Environment(Backend b, EnvInfo info)
      : backend_(std::move(b)), info_(info), side_(info.side) {}

 private:
  Backend backend_;
  EnvInfo info_;
  std::uint32_t side_;
};

static_assert(EnvironmentLike<Environment>);

namespace detail {

inline void require_side(std::uint32_t n, std::uint32_t min_side = 2) {
  if (n < min_side || !is_pow2(n))
    throw InvalidParameter("environment side must be a power of two >= " +
                           std::to_string(min_side) + ", got " + std::to_string(n));
}

// Builds the summed-area table from numerators produced row-major by gen.
template <class Gen>
std::shared_ptr<const std::vector<std::uint64_t>> build_sat(std::uint32_t n, Gen&& gen) {
  const std::uint64_t w = static_cast<std::uint64_t>(n) + 1;
  auto sat = std::make_shared<std::vector<std::uint64_t>>(w * w, 0);
  auto& s = *sat;
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j)
      s[(i + 1) * w + (j + 1)] =
          s[i * w + (j + 1)] + s[(i + 1) * w + j] - s[i * w + j] + gen(i, j);
  return sat;
}

}  // namespace detail

inline Environment make_checkerboard(std::uint32_t n) {
  detail::require_side(n);
  EnvInfo info;
  info.kind = EnvKind::checkerboard;
  info.side = n;
  return Environment(detail::Checkerboard{n}, info);
}

inline Environment make_megacell(std::uint32_t n, std::uint32_t k) {
  detail::require_side(n);
  if (k >= 32 || (1ull << k) > n || n % (1ull << k) != 0)
    throw InvalidParameter("mega-cell side 2^" + std::to_string(k) +
                           " must divide environment side " + std::to_string(n));
  EnvInfo info;
  info.kind = EnvKind::megacell;
  info.side = n;
  info.param_k = static_cast<int>(k);
  return Environment(detail::MegaCell{n, k}, info);
}

inline Environment make_constant(std::uint32_t n, double v) {
  detail::require_side(n);
  if (!(v >= 0.0 && v <= 1.0))
    throw InvalidParameter("constant intensity must lie in [0,1], got " +
                           std::to_string(v));
  EnvInfo info;
  info.kind = EnvKind::constant;
  info.side = n;
  info.value = v;
  return Environment(detail::Constant{n, v}, info);
}

inline Environment make_row_gradient(std::uint32_t n) {
  detail::require_side(n);
  auto num = std::make_shared<std::vector<std::uint32_t>>(n);
  auto prefix = std::make_shared<std::vector<std::uint64_t>>(n + 1, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    (*num)[i] = i;  // intensity of row i is i/N
    (*prefix)[i + 1] = (*prefix)[i] + i;
  }
  EnvInfo info;
  info.kind = EnvKind::row_gradient;
  info.side = n;
  return Environment(detail::AxisFn{n, /*along_rows=*/true, n, num, prefix}, info);
}

// Valid prefix-walk parameters: 2*sqrt(log2 k) must be an integer, i.e.
// log2 k a perfect square, so k in {2, 16, 512, 2^16, ...}.
inline bool prefix_walk_valid_k(std::uint32_t k) {
  if (k < 2 || !is_pow2(k)) return false;
  std::uint32_t lg = 0;
  while ((1u << lg) < k) ++lg;
  std::uint32_t m = static_cast<std::uint32_t>(std::lround(std::sqrt(double(lg))));
  return m * m == lg;
}

// Classifies one column pattern: the walk reads the k low bits of j from the
// most significant end, steps +1 on a 1 bit and -1 on a 0 bit, and stops at
// the first prefix sum hitting +-2*sqrt(log2 k) (an "extreme" column, whose
// raw value is that hitting value); otherwise the raw value is the full sum.
// Raw values in [-2m, +2m] map affinely onto numerators {0, ..., 4m}.
inline std::pair<std::uint32_t, bool> prefix_walk_column(std::uint64_t j, std::uint32_t k,
                                                         std::uint32_t two_m) {
  int sum = 0;
  for (std::uint32_t t = 0; t < k; ++t) {
    sum += (j >> (k - 1 - t)) & 1 ? 1 : -1;
    if (sum == static_cast<int>(two_m) || sum == -static_cast<int>(two_m))
      return {static_cast<std::uint32_t>(sum + static_cast<int>(two_m)), true};
  }
  return {static_cast<std::uint32_t>(sum + static_cast<int>(two_m)), false};
}

inline Environment make_prefix_walk(std::uint32_t n, std::uint32_t k) {
  detail::require_side(n);
  if (!prefix_walk_valid_k(k))
    throw InvalidParameter(
        "prefix-walk needs 2*sqrt(log2 k) integral; valid k: 2, 16, 512, 65536, ... "
        "(got " + std::to_string(k) + ")");
  if (k >= 32 || (1ull << k) >= n)
    throw InvalidParameter("prefix-walk needs side > 2^k, got side " +
                           std::to_string(n) + " with k " + std::to_string(k));
  std::uint32_t lg = 0;
  while ((1u << lg) < k) ++lg;
  const std::uint32_t two_m = 2 * static_cast<std::uint32_t>(std::lround(std::sqrt(double(lg))));

  auto num = std::make_shared<std::vector<std::uint32_t>>(n);
  auto prefix = std::make_shared<std::vector<std::uint64_t>>(n + 1, 0);
  std::uint64_t extreme = 0;
  for (std::uint64_t j = 0; j < n; ++j) {
    auto [v, ext] = prefix_walk_column(j, k, two_m);
    (*num)[j] = v;
    (*prefix)[j + 1] = (*prefix)[j] + v;
    extreme += ext;
  }
  EnvInfo info;
  info.kind = EnvKind::prefix_walk;
  info.side = n;
  info.param_k = static_cast<int>(k);
  info.extreme_fraction = static_cast<double>(extreme) / n;
  return Environment(detail::AxisFn{n, /*along_rows=*/false, 2ull * two_m, num, prefix},
                     info);
}

inline constexpr std::uint32_t kDenseSideCap = 1u << 13;

inline Environment make_iid_uniform(std::uint32_t n, std::uint64_t seed) {
  detail::require_side(n);
  if (n > kDenseSideCap)
    throw ResourceLimit("dense environment capped at side " +
                        std::to_string(kDenseSideCap));
  CounterRng rng(seed);
  // 30-bit fixed point: resolution 2^-30, uniform on {0, ..., 2^30 - 1}.
  auto sat = detail::build_sat(
      n, [&](std::uint64_t, std::uint64_t) { return rng.next_u64() >> 34; });
  EnvInfo info;
  info.kind = EnvKind::dense;
  info.side = n;
  info.seed = seed;
  return Environment(detail::Dense{n, 1ull << 30, sat}, info);
}

// Dense environment from explicit numerators (row-major) over a denominator.
inline Environment make_dense(std::uint32_t n, std::uint64_t denom,
                              const std::vector<std::uint32_t>& numerators) {
  detail::require_side(n);
  if (n > kDenseSideCap)
    throw ResourceLimit("dense environment capped at side " +
                        std::to_string(kDenseSideCap));
  if (denom == 0 || numerators.size() != static_cast<std::size_t>(n) * n)
    throw InvalidParameter("dense grid needs n*n numerators and denom > 0");
  for (std::uint32_t v : numerators)
    if (v > denom) throw InvalidParameter("dense numerator exceeds denominator");
  auto sat = detail::build_sat(n, [&](std::uint64_t i, std::uint64_t j) {
    return numerators[i * n + j];
  });
  EnvInfo info;
  info.kind = EnvKind::dense;
  info.side = n;
  return Environment(detail::Dense{n, denom, sat}, info);
}

}  // namespace smoothscale
