#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "rvlab/config.hpp"
#include "rvlab/error.hpp"

using namespace rvlab;

TEST_CASE("flat key=value parsing with comments and later wins") {
  auto c = Config::from_string("# comment\nd = 3\n\nvlasov.dt=0.001  # trailing\nharness.N=16, 64,256\nd=2\n");
  CHECK(c.get_int("d", 0) == 2);
  CHECK(c.get_double("vlasov.dt", 0) == doctest::Approx(0.001));
  CHECK(c.get_doubles("harness.N", {}) == std::vector<double>{16, 64, 256});
  CHECK(c.get_double("missing", 7.5) == 7.5);
}

TEST_CASE("overrides take precedence and are recorded") {
  auto c = Config::from_string("gamma=1\n");
  c.set("gamma=-0.5");
  CHECK(c.get_double("gamma", 0) == -0.5);
  REQUIRE(c.overrides().size() == 1);
  CHECK(c.overrides()[0] == "gamma=-0.5");
  CHECK_THROWS_AS(c.set("no_equals_sign"), ConfigError);
}

TEST_CASE("malformed values and unknown keys name the key") {
  auto c = Config::from_string("d=two\nbogus.key=1\n");
  try {
    c.get_int("d", 2);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'d'") != std::string::npos);
  }
  try {
    c.require_known({"d"});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus.key") != std::string::npos);
  }
}

TEST_CASE("booleans, u64 and file loading") {
  const std::string path = "rvlab_test_config.cfg";
  std::ofstream(path) << "output.checkpoints=true\nseed=18446744073709551615\n";
  auto c = Config::from_file(path);
  CHECK(c.get_bool("output.checkpoints", false));
  CHECK(c.get_u64("seed", 0) == 18446744073709551615ull);
  std::remove(path.c_str());
  CHECK_THROWS_AS(Config::from_file("does/not/exist.cfg"), ConfigError);
}
