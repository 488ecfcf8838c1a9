#include <doctest.h>

#include <cmath>

#include "pclqr/config.hpp"
#include "pclqr/errors.hpp"
#include "pclqr/model.hpp"
#include "pclqr/rng.hpp"

using namespace pclqr;

namespace {

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

UncertainLTI scalar_system(std::vector<double> a_coeffs, double b0 = 1.0) {
  UncertainLTI sys;
  sys.n = 1;
  sys.m = 1;
  sys.basis.model_order = static_cast<int>(a_coeffs.size()) - 1;
  sys.basis.approx_order = sys.basis.model_order;
  for (double a : a_coeffs) sys.A.push_back(m1(a));
  sys.B.assign(a_coeffs.size(), m1(0.0));
  sys.B[0] = m1(b0);
  return sys;
}

}  // namespace

TEST_CASE("realize: constant expansion ignores the parameter") {
  auto sys = scalar_system({0.7});
  for (double d : {-1.0, -0.3, 0.0, 0.9}) {
    auto [a, b] = realize(sys, d);
    CHECK(a(0, 0) == doctest::Approx(0.7));
    CHECK(b(0, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("realize: linear and quadratic anchors") {
  auto lin = scalar_system({1.0, 0.5});
  CHECK(realize(lin, 1.0).first(0, 0) == doctest::Approx(1.5));

  auto quad = scalar_system({0.0, 0.0, 1.0});
  CHECK(realize(quad, 0.0).first(0, 0) == doctest::Approx(-0.5));

  CHECK_THROWS_AS(realize(lin, 1.1), DomainError);
}

TEST_CASE("realize is linear in the coefficient matrices") {
  SplitMix64 gen(7);
  auto rand_sys = [&](int n_ord) {
    UncertainLTI sys;
    sys.n = 2;
    sys.m = 1;
    sys.basis.model_order = n_ord;
    sys.basis.approx_order = n_ord;
    for (int i = 0; i <= n_ord; ++i) {
      Matrix a(2, 2), b(2, 1);
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) a(r, c) = gen.uniform_pm1();
        b(r, 0) = gen.uniform_pm1();
      }
      sys.A.push_back(a);
      sys.B.push_back(b);
    }
    return sys;
  };
  auto s1 = rand_sys(3);
  auto s2 = rand_sys(3);
  const double alpha = 0.7, beta = -1.3;
  UncertainLTI mix = s1;
  for (int i = 0; i <= 3; ++i) {
    mix.A[i] = alpha * s1.A[i] + beta * s2.A[i];
    mix.B[i] = alpha * s1.B[i] + beta * s2.B[i];
  }
  for (double d : {-0.8, 0.15, 0.99}) {
    auto [am, bm] = realize(mix, d);
    auto [a1, b1] = realize(s1, d);
    auto [a2, b2] = realize(s2, d);
    CHECK((am - (alpha * a1 + beta * a2)).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((bm - (alpha * b1 + beta * b2)).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("fit_from_grid: two points determine the affine expansion") {
  std::vector<GridPoint> pts = {{-1.0, m1(1.0), m1(0.0)}, {1.0, m1(2.0), m1(0.0)}};
  auto sys = fit_from_grid(pts, 1);
  CHECK(sys.A[0](0, 0) == doctest::Approx(1.5));
  CHECK(sys.A[1](0, 0) == doctest::Approx(0.5));
}

TEST_CASE("fit_from_grid: single point at order zero copies the matrix") {
  std::vector<GridPoint> pts = {{0.3, m1(0.42), m1(1.5)}};
  auto sys = fit_from_grid(pts, 0);
  CHECK(sys.A[0](0, 0) == doctest::Approx(0.42));
  CHECK(sys.B[0](0, 0) == doctest::Approx(1.5));
}

TEST_CASE("fit_from_grid interpolates a degree-5 family exactly at 6 points") {
  // Ground truth expansion with known coefficients.
  auto truth = scalar_system({0.4, 0.1, -0.05, 0.02, 0.01, -0.004});
  std::vector<GridPoint> pts;
  for (int j = 0; j < 6; ++j) {
    const double d = -1.0 + 2.0 * j / 5.0;
    auto [a, b] = realize(truth, d);
    pts.push_back({d, a, b});
  }
  auto fitted = fit_from_grid(pts, 5);
  for (int i = 0; i <= 5; ++i) {
    CHECK((fitted.A[i] - truth.A[i]).norm() <= 1e-10);
  }
  // Interpolation property at the grid points.
  for (const auto& p : pts) {
    CHECK((realize(fitted, p.delta).first - p.A).norm() <= 1e-10);
  }
}

TEST_CASE("fit_from_grid rejects short or degenerate grids") {
  std::vector<GridPoint> two = {{-1.0, m1(1.0), m1(0.0)}, {1.0, m1(2.0), m1(0.0)}};
  CHECK_THROWS_AS(fit_from_grid(two, 2), InputError);

  std::vector<GridPoint> dup = {{0.5, m1(1.0), m1(0.0)}, {0.5, m1(2.0), m1(0.0)}};
  CHECK_THROWS_AS(fit_from_grid(dup, 1), InputError);
}

TEST_CASE("scale_param maps the physical range onto [-1, 1]") {
  ParamScale scale{400.0, 900.0};
  CHECK(scale_param(400.0, scale) == doctest::Approx(-1.0));
  CHECK(scale_param(900.0, scale) == doctest::Approx(1.0));
  CHECK(scale_param(650.0, scale) == doctest::Approx(0.0));
  CHECK_THROWS_AS(scale_param(399.0, scale), DomainError);

  // Affine: midpoints map to midpoints.
  const double a = scale_param(500.0, scale);
  const double b = scale_param(700.0, scale);
  CHECK(scale_param(600.0, scale) == doctest::Approx(0.5 * (a + b)));
}

TEST_CASE("sample_params is deterministic, in-range, and unbiased") {
  auto s1 = sample_params(1000, 42);
  auto s2 = sample_params(1000, 42);
  CHECK(s1 == s2);

  auto other = sample_params(1000, 43);
  CHECK(s1 != other);

  auto big = sample_params(100000, 42);
  double mean = 0.0;
  for (double v : big) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
    mean += v;
  }
  mean /= static_cast<double>(big.size());
  CHECK(std::abs(mean) < 0.01);
}

TEST_CASE("load_system accepts the reference configuration shape") {
  const std::string doc = R"json({
    "name": "demo",
    "n": 4, "m": 2,
    "basis": {"family": "legendre", "nOrd": 1, "N": 3},
    "A": [
      [[0.9,0,0,0],[0,0.8,0,0],[0,0,0.7,0],[0,0,0,0.6]],
      [[0.01,0,0,0],[0,0.01,0,0],[0,0,0.01,0],[0,0,0,0.01]]
    ],
    "B": [
      [[1,0],[0,1],[0,0],[0,1]],
      [[0,0],[0,0],[0,0],[0,0]]
    ],
    "C": [[1,0,0,0],[0,1,0,0],[0,-1,1,0]],
    "Qy": [0.1, 10, 10],
    "R": [1e-4, 0.1],
    "param_scale": {"vmin": 400, "vmax": 900},
    "x0": [0, 0, 0.5236, 0]
  })json";
  auto loaded = load_system(doc);
  CHECK(loaded.system.n == 4);
  CHECK(loaded.system.basis.approx_order == 3);
  CHECK(loaded.weights.Qy.has_value());
  CHECK((*loaded.weights.Qy)(1, 1) == doctest::Approx(10.0));
  // Q = C' Qy C picks up the gamma = theta - alpha coupling.
  CHECK(loaded.weights.Q(1, 2) == doctest::Approx(-10.0));
  CHECK(loaded.x0.has_value());
  CHECK((*loaded.x0)[2] == doctest::Approx(0.5236));
  CHECK(loaded.scale.has_value());
}

TEST_CASE("load_system names the offending field") {
  const std::string base = R"json({
    "n": 2, "m": 1,
    "basis": {"family": "legendre", "nOrd": 0, "N": 1},
    "A": [[[0.5, 0],[0, 0.5]]],
    "B": [[[1],[0]]],
    "Q": [1, 1],
    "R": [[1]]
  })json";
  CHECK_NOTHROW(load_system(base));

  SUBCASE("wrong matrix shape") {
    std::string bad = base;
    bad.replace(bad.find("[[[0.5, 0],[0, 0.5]]]"), 21, "[[[0.5, 0, 1],[0, 0.5, 1]]]");
    try {
      load_system(bad);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("A[0]") != std::string::npos);
    }
  }
  SUBCASE("R not positive definite") {
    std::string bad = base;
    bad.replace(bad.find("\"R\": [[1]]"), 10, "\"R\": [[0]]");
    try {
      load_system(bad);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("R") != std::string::npos);
    }
  }
  SUBCASE("unknown basis family") {
    std::string bad = base;
    bad.replace(bad.find("legendre"), 8, "hermite!");
    CHECK_THROWS_AS(load_system(bad), InputError);
  }
  SUBCASE("malformed JSON") { CHECK_THROWS_AS(load_system("{ not json"), InputError); }
}

TEST_CASE("load_system fits grid documents and realize reproduces the grid") {
  const std::string doc = R"json({
    "n": 1, "m": 1,
    "basis": {"nOrd": 1, "N": 2},
    "grid": [
      {"v": 400, "A": [[1.0]], "B": [[1.0]]},
      {"v": 900, "A": [[2.0]], "B": [[1.0]]}
    ],
    "Q": [[1]],
    "R": [[1]],
    "param_scale": {"vmin": 400, "vmax": 900}
  })json";
  auto loaded = load_system(doc);
  CHECK(loaded.system.A[0](0, 0) == doctest::Approx(1.5));
  CHECK(loaded.system.A[1](0, 0) == doctest::Approx(0.5));
  CHECK(realize(loaded.system, -1.0).first(0, 0) == doctest::Approx(1.0));
  CHECK(realize(loaded.system, 1.0).first(0, 0) == doctest::Approx(2.0));
}
