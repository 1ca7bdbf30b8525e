#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "smoothscale/env.hpp"
#include "smoothscale/error.hpp"

namespace smoothscale {

namespace detail {

struct PgmCursor {
  const std::string& data;
  std::size_t pos = 0;

  bool at_ws() const {
    char c = data[pos];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  }
  void skip_ws() {
    while (pos < data.size() && at_ws()) ++pos;
  }
  std::uint64_t read_uint(const char* what) {
    skip_ws();
    if (pos >= data.size() || data[pos] < '0' || data[pos] > '9')
      throw FormatError(std::string("expected ") + what, pos);
    std::uint64_t v = 0;
    while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
      v = v * 10 + static_cast<std::uint64_t>(data[pos] - '0');
      if (v > 0xffffffffull) throw FormatError(std::string(what) + " out of range", pos);
      ++pos;
    }
    return v;
  }
};

}  // namespace detail

// Reads a binary PGM (P5).  The environment side must be square and a power
// of two; samples become fixed-point intensities over the file's maxval.
inline Environment load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  detail::PgmCursor cur{data};
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    throw FormatError("not a binary PGM (P5 magic missing)", 0);
  cur.pos = 2;
  const std::uint64_t width = cur.read_uint("width");
  const std::size_t height_at = cur.pos;
  const std::uint64_t height = cur.read_uint("height");
  const std::uint64_t maxval = cur.read_uint("maxval");
  if (maxval == 0 || maxval > 65535)
    throw FormatError("maxval must be in [1, 65535]", cur.pos);
  if (cur.pos >= data.size() || !cur.at_ws())
    throw FormatError("expected single whitespace after maxval", cur.pos);
  ++cur.pos;  // exactly one whitespace byte separates header from samples

  if (width != height)
    throw FormatError("image must be square, got " + std::to_string(width) + "x" +
                          std::to_string(height),
                      height_at);
  if (width < 2 || !is_pow2(width))
    throw FormatError("side must be a power of two >= 2, got " + std::to_string(width),
                      height_at);

  const std::uint32_t n = static_cast<std::uint32_t>(width);
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(n) * n * bytes_per;
  if (data.size() - cur.pos < need)
    throw FormatError("sample data truncated", data.size());

  std::vector<std::uint32_t> numerators(static_cast<std::size_t>(n) * n);
  const unsigned char* raw = reinterpret_cast<const unsigned char*>(data.data() + cur.pos);
  for (std::size_t idx = 0; idx < numerators.size(); ++idx) {
    std::uint32_t v = bytes_per == 2
                          ? (static_cast<std::uint32_t>(raw[2 * idx]) << 8) | raw[2 * idx + 1]
                          : raw[idx];
    if (v > maxval)
      throw FormatError("sample exceeds maxval", cur.pos + idx * bytes_per);
    numerators[idx] = v;
  }
  return make_dense(n, maxval, numerators);
}

inline constexpr std::uint32_t kPgmMaxval = 65535;

// Writes env as a 16-bit binary PGM; intensities quantize to
// round(v * 65535).  Side is capped so a stray procedural environment cannot
// ask for a terabyte render.
inline void save_pgm(const Environment& env, const std::string& path,
                     std::uint32_t side_cap = kDenseSideCap) {
  if (env.side() > side_cap)
    throw ResourceLimit("render of side " + std::to_string(env.side()) +
                        " exceeds cap " + std::to_string(side_cap));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const std::uint32_t n = env.side();
  out << "P5\n" << n << " " << n << "\n" << kPgmMaxval << "\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(n) * 2);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      double v = env.intensity(i, j);
      long q = std::lround(v * kPgmMaxval);
      if (q < 0) q = 0;
      if (q > kPgmMaxval) q = kPgmMaxval;
      row[2 * j] = static_cast<unsigned char>(q >> 8);
      row[2 * j + 1] = static_cast<unsigned char>(q & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace smoothscale
