// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "typodr/stats.hpp"

namespace typodr {

TEST_CASE("paired t-test matches a reference implementation") {
  // 20 synthetic paired observations; t and p frozen from an independent
  // statistics package.
  std::vector<double> a = {0.6824, 0.0538, 0.2204, 0.1844, 0.1759,
                           0.8121, 0.9233, 0.2766, 0.8198, 0.8899,
                           0.513,  0.245,  0.8242, 0.2138, 0.7415,
                           0.6299, 0.9274, 0.2319, 0.7991, 0.5182};
  std::vector<double> b = {0.5117, 0.1866, 0.4246, 0.3471, 0.3014,
                           0.8475, 1.1015, 0.434,  0.9091, 0.9404,
                           0.5268, 0.172,  0.9968, 0.0466, 0.7545,
                           0.6963, 1.0634, 0.4581, 0.9484, 0.539};
  TTestResult r = paired_t_test(a, b);
  REQUIRE(r.n == 20);
  REQUIRE(r.t == Catch::Approx(-3.010339378829586).margin(1e-9));
  REQUIRE(r.p == Catch::Approx(0.007195047717150858).margin(1e-6));
  // symmetric: swapping the samples flips t, keeps p
  TTestResult rs = paired_t_test(b, a);
  REQUIRE(rs.t == Catch::Approx(-r.t).margin(1e-12));
  REQUIRE(rs.p == Catch::Approx(r.p).margin(1e-12));
}

TEST_CASE("paired t-test degenerate cases") {
  // identical samples: zero differences
  TTestResult same = paired_t_test({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3});
  REQUIRE(same.t == 0.0);
  REQUIRE(same.p == 1.0);
  // constant nonzero difference: sd = 0, limiting p = 0
  TTestResult shift = paired_t_test({1.0, 2.0, 3.0}, {0.5, 1.5, 2.5});
  REQUIRE(std::isinf(shift.t));
  REQUIRE(shift.t > 0);
  REQUIRE(shift.p == 0.0);
  REQUIRE(shift.mean_diff == Catch::Approx(0.5).margin(1e-12));

  REQUIRE_THROWS_AS(paired_t_test({1.0}, {2.0}), ValidationError);
  REQUIRE_THROWS_AS(paired_t_test({1.0, 2.0}, {1.0}), DimensionMismatch);
}

TEST_CASE("two-tailed t p-values at known quantiles") {
  // t = 0 gives p = 1 for any df
  REQUIRE(t_two_tailed_p(0.0, 5.0) == Catch::Approx(1.0).margin(1e-12));
  // df=1 (Cauchy): p(t=1) = 0.5
  REQUIRE(t_two_tailed_p(1.0, 1.0) == Catch::Approx(0.5).margin(1e-10));
  // large |t| drives p toward 0; monotone decreasing in |t|
  REQUIRE(t_two_tailed_p(10.0, 10.0) < t_two_tailed_p(2.0, 10.0));
  REQUIRE(t_two_tailed_p(-2.0, 10.0) ==
          Catch::Approx(t_two_tailed_p(2.0, 10.0)).margin(1e-12));
}

TEST_CASE("bonferroni adjustment clamps at 1") {
  REQUIRE(bonferroni(0.01, 3) == Catch::Approx(0.03).margin(1e-15));
  REQUIRE(bonferroni(0.6, 4) == 1.0);
  REQUIRE(bonferroni(0.0, 100) == 0.0);
}

TEST_CASE("spearman correlation with ties matches reference") {
  // frozen from an independent statistics package (average ranks on ties)
  REQUIRE(spearman({1, 2, 2, 4, 5}, {2, 1, 3, 4, 4}) ==
          Catch::Approx(0.7894736842105264).margin(1e-12));
  REQUIRE(spearman({3.1, 0.2, 5.5, 2.2, 9.0, 1.1},
                   {1.0, 0.0, 2.0, 1.5, 3.0, 0.5}) ==
          Catch::Approx(0.942857142857143).margin(1e-12));
}

TEST_CASE("spearman edge cases") {
  // perfect monotone relationships
  REQUIRE(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) ==
          Catch::Approx(1.0).margin(1e-12));
  REQUIRE(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) ==
          Catch::Approx(-1.0).margin(1e-12));
  // a constant sample has no rank variance
  REQUIRE(spearman({1, 1, 1}, {1, 2, 3}) == 0.0);
  REQUIRE_THROWS_AS(spearman({1.0}, {1.0}), ValidationError);
  REQUIRE_THROWS_AS(spearman({1.0, 2.0}, {1.0}), ValidationError);
}

}  // namespace typodr
