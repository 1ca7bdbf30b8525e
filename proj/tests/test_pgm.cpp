#include "smoothscale/pgm.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "smoothscale/env.hpp"

using namespace smoothscale;

namespace {

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("constant 1.0 saves as all-maxval samples") {
  auto path = tmp_file("smoothscale_const.pgm");
  save_pgm(make_constant(4, 1.0), path.string());
  std::string bytes = slurp(path);
  const std::string header = "P5\n4 4\n65535\n";
  REQUIRE(bytes.substr(0, header.size()) == header);
  REQUIRE(bytes.size() == header.size() + 4 * 4 * 2);
  for (std::size_t i = header.size(); i < bytes.size(); ++i)
    REQUIRE(static_cast<unsigned char>(bytes[i]) == 0xff);
}

TEST_CASE("round trip reproduces quantized intensities exactly") {
  auto path = tmp_file("smoothscale_rt.pgm");
  auto env = make_iid_uniform(64, 2024);
  save_pgm(env, path.string());
  auto back = load_pgm(path.string());
  REQUIRE(back.side() == 64);
  for (std::uint32_t i = 0; i < 64; ++i)
    for (std::uint32_t j = 0; j < 64; ++j) {
      double quantized = std::round(env.intensity(i, j) * 65535.0) / 65535.0;
      REQUIRE(back.intensity(i, j) == quantized);
    }
  // a second save of the loaded environment is byte-identical
  auto path2 = tmp_file("smoothscale_rt2.pgm");
  save_pgm(back, path2.string());
  REQUIRE(slurp(path) == slurp(path2));
}

TEST_CASE("malformed files are rejected with a byte offset") {
  auto path = tmp_file("smoothscale_bad.pgm");

  spit(path, "P6\n4 4\n255\nxxxx");
  REQUIRE_THROWS_AS(load_pgm(path.string()), FormatError);

  // non-square 3x5
  spit(path, std::string("P5\n3 5\n255\n") + std::string(15, '\x00'));
  try {
    load_pgm(path.string());
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    REQUIRE(std::string(e.what()).find("square") != std::string::npos);
    REQUIRE(e.byte_offset == 4);  // points at the height token
  }

  // non-power-of-two side
  spit(path, std::string("P5\n6 6\n255\n") + std::string(36, '\x00'));
  REQUIRE_THROWS_WITH(load_pgm(path.string()),
                      Catch::Matchers::ContainsSubstring("power of two"));

  // truncated payload
  spit(path, std::string("P5\n4 4\n65535\n") + std::string(10, '\x00'));
  REQUIRE_THROWS_WITH(load_pgm(path.string()),
                      Catch::Matchers::ContainsSubstring("truncated"));

  // absurd maxval
  spit(path, std::string("P5\n4 4\n70000\n") + std::string(32, '\x00'));
  REQUIRE_THROWS_AS(load_pgm(path.string()), FormatError);

  REQUIRE_THROWS_AS(load_pgm((tmp_file("smoothscale_missing.pgm")).string()), IoError);
}

TEST_CASE("8-bit PGM files load with maxval as the denominator") {
  auto path = tmp_file("smoothscale_8bit.pgm");
  // 2x2 samples 0, 85, 170, 255 over maxval 255
  spit(path, std::string("P5\n2 2\n255\n") + '\x00' + '\x55' + '\xaa' + '\xff');
  auto env = load_pgm(path.string());
  REQUIRE(env.intensity(0, 0) == 0.0);
  REQUIRE(env.intensity(0, 1) == Catch::Approx(85.0 / 255).epsilon(0).margin(1e-15));
  REQUIRE(env.intensity(1, 1) == 1.0);
  REQUIRE(env.block_average(0, 0, 1) ==
          Catch::Approx((85.0 + 170.0 + 255.0) / (4 * 255.0)).epsilon(0).margin(1e-15));
}

TEST_CASE("render cap refuses oversize saves") {
  auto env = make_checkerboard(1u << 10);
  REQUIRE_THROWS_AS(save_pgm(env, tmp_file("smoothscale_cap.pgm").string(), 512),
                    ResourceLimit);
}
