#include <doctest.h>

#include <cmath>
#include <vector>

#include "cylk/numeric.hpp"
#include "cylk/rng.hpp"

using namespace cylk;

TEST_CASE("streams are reproducible and position-independent") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u32() == b.next_u32());

  RngStream c(42, 8);
  int same = 0;
  RngStream a2(42, 7);
  for (int i = 0; i < 1000; ++i)
    if (a2.next_u32() == c.next_u32()) ++same;
  CHECK(same < 5);
}

TEST_CASE("substreams differ from their parent") {
  RngStream a(1, 0);
  RngStream s1 = a.substream(1);
  RngStream s2 = a.substream(2);
  CHECK(s1.stream() != s2.stream());
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("uniform stays in [0,1) with roughly correct moments") {
  RngStream r(3, 0);
  RunningStats st;
  for (int i = 0; i < 200000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    st.add(u);
  }
  CHECK(std::abs(st.mean - 0.5) < 4 * st.std_error());
  CHECK(st.variance() == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("normal moments") {
  RngStream r(4, 0);
  RunningStats st;
  for (int i = 0; i < 200000; ++i) st.add(r.normal());
  CHECK(std::abs(st.mean) < 4 * st.std_error());
  CHECK(st.variance() == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("poisson mean and variance, small and chunked large") {
  RngStream r(5, 0);
  for (double mean : {3.0, 200.0}) {
    RunningStats st;
    for (int i = 0; i < 40000; ++i) st.add(static_cast<double>(r.poisson(mean)));
    CHECK(std::abs(st.mean - mean) < 4 * st.std_error());
    CHECK(st.variance() == doctest::Approx(mean).epsilon(0.05));
  }
  CHECK(r.poisson(0.0) == 0);
}

TEST_CASE("gamma distribution passes a KS check") {
  RngStream r(6, 0);
  std::vector<double> draws;
  for (int i = 0; i < 50000; ++i) draws.push_back(r.gamma(11.0, 3.0));
  const KsResult ks = ks_test(draws, [](double x) { return gamma_cdf(x, 11.0, 3.0); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("uniform_index covers the range") {
  RngStream r(7, 0);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) ++counts[r.uniform_index(5)];
  for (int c : counts) CHECK(c > 800);
}
