#include <doctest.h>

#include <cmath>

#include "pclqr/errors.hpp"
#include "pclqr/rng.hpp"
#include "pclqr/stability.hpp"

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

UncertainLTI random_system(SplitMix64& gen, int n, int m, int n_ord, double base_radius,
                           double perturbation) {
  UncertainLTI sys;
  sys.n = n;
  sys.m = m;
  sys.basis.model_order = n_ord;
  sys.basis.approx_order = n_ord;
  for (int i = 0; i <= n_ord; ++i) {
    Matrix a(n, n), b(n, m);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) a(r, c) = gen.uniform_pm1();
      for (int c = 0; c < m; ++c) b(r, c) = gen.uniform_pm1();
    }
    if (i == 0) {
      a *= base_radius / spectrum(a).spectral_radius;
    } else {
      a *= perturbation;
    }
    sys.A.push_back(a);
    sys.B.push_back(b);
  }
  return sys;
}

Matrix random_symmetric(SplitMix64& gen, int dim) {
  Matrix s(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) s(i, j) = gen.uniform_pm1();
  }
  return Matrix(0.5 * (s + s.transpose()));
}

/// Independent oracle: block (i,l) of the inequality matrix equals
/// E[phi_i phi_l (C(d)' P(d) C(d) - P(d))] by direct quadrature over the
/// realized closed loop and Lyapunov function.
Matrix quadrature_w(const std::vector<Matrix>& coeffs, const Matrix& p_bar,
                    const BasisSpec& spec, int order) {
  const int n = static_cast<int>(coeffs.front().rows());
  const int n_ord = static_cast<int>(coeffs.size()) - 1;
  const int degree = 4 * order + 2 * n_ord;
  auto rule = quadrature_rule((degree + 1 + 1) / 2 + 1);

  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n) * (order + 1),
                          static_cast<Eigen::Index>(n) * (order + 1));
  for (int q = 0; q < rule.nodes.size(); ++q) {
    const double d = rule.nodes[q];
    const auto phi = eval_basis(spec, d, std::max(order, n_ord));
    Matrix c = Matrix::Zero(n, n);
    for (int k = 0; k <= n_ord; ++k) c += phi[static_cast<std::size_t>(k)] * coeffs[k];
    Matrix p = Matrix::Zero(n, n);
    for (int j = 0; j <= order; ++j) {
      for (int k = 0; k <= order; ++k) {
        p += phi[static_cast<std::size_t>(j)] * phi[static_cast<std::size_t>(k)] *
             p_bar.block(static_cast<Eigen::Index>(j) * n, static_cast<Eigen::Index>(k) * n,
                         n, n);
      }
    }
    Matrix inner = c.transpose() * p * c - p;
    for (int i = 0; i <= order; ++i) {
      for (int l = 0; l <= order; ++l) {
        w.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(l) * n, n, n) +=
            rule.weights[q] * phi[static_cast<std::size_t>(i)] *
            phi[static_cast<std::size_t>(l)] * inner;
      }
    }
  }
  return w;
}

}  // namespace

TEST_CASE("closed_loop_coeffs anchors") {
  auto sys = scalar_system({0.5, 0.1});
  auto open = closed_loop_coeffs(sys, std::nullopt);
  CHECK(open[0](0, 0) == doctest::Approx(0.5));
  CHECK(open[1](0, 0) == doctest::Approx(0.1));

  auto zero_gain = closed_loop_coeffs(sys, Matrix::Zero(1, 1));
  CHECK(zero_gain[0](0, 0) == doctest::Approx(0.5));

  auto dare_gain = closed_loop_coeffs(sys, m1(-0.26557));
  CHECK(dare_gain[0](0, 0) == doctest::Approx(0.23443));
  CHECK(dare_gain[1](0, 0) == doctest::Approx(0.1));  // B_1 = 0

  // No input authority: coefficients ignore the gain.
  auto no_b = scalar_system({0.5, 0.1}, 0.0);
  auto k_any = closed_loop_coeffs(no_b, m1(123.0));
  CHECK(k_any[0](0, 0) == doctest::Approx(0.5));
  CHECK(k_any[1](0, 0) == doctest::Approx(0.1));
}

TEST_CASE("assemble_w scalar anchors") {
  BasisSpec spec;
  SUBCASE("order zero, deterministic") {
    for (double a : {0.3, 0.9, 1.2}) {
      Matrix w = assemble_w({m1(a)}, Matrix::Identity(1, 1), spec, 0);
      CHECK(w(0, 0) == doctest::Approx(a * a - 1.0));
    }
  }
  SUBCASE("order zero, affine model: cross terms vanish by parity") {
    const double a = 0.8, b = 0.3;
    Matrix w = assemble_w({m1(a), m1(b)}, Matrix::Identity(1, 1), spec, 0);
    CHECK(w(0, 0) == doctest::Approx(a * a + b * b / 3.0 - 1.0));
  }
  SUBCASE("zero dynamics, identity Lyapunov matrix") {
    // At order zero the mass term is exactly -G (x) I.
    Matrix w0 = assemble_w({Matrix::Zero(2, 2)}, Matrix::Identity(2, 2), spec, 0);
    CHECK((w0 + Matrix::Identity(2, 2)).norm() <= 1e-14);
    // Higher orders stay negative definite, below the Gram floor.
    for (int order : {1, 2, 3}) {
      Matrix w = assemble_w({Matrix::Zero(2, 2)},
                            Matrix::Identity(2 * (order + 1), 2 * (order + 1)), spec, order);
      Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().maxCoeff() <= -1.0 / (2.0 * order + 1.0) + 1e-12);
    }
  }
}

TEST_CASE("assemble_w is linear in the Lyapunov matrix") {
  SplitMix64 gen(31);
  auto sys = random_system(gen, 2, 1, 2, 0.8, 0.15);
  auto coeffs = closed_loop_coeffs(sys, std::nullopt);
  const int order = 2;
  const int dim = 2 * (order + 1);
  Matrix p1 = random_symmetric(gen, dim);
  Matrix p2 = random_symmetric(gen, dim);
  const double alpha = 1.7, beta = -0.4;
  Matrix lhs = assemble_w(coeffs, Matrix(alpha * p1 + beta * p2), sys.basis, order);
  Matrix rhs = alpha * assemble_w(coeffs, p1, sys.basis, order) +
               beta * assemble_w(coeffs, p2, sys.basis, order);
  CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
}

TEST_CASE("assemble_w matches the quadrature oracle on random instances") {
  SplitMix64 gen(77);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + static_cast<int>(gen.next() % 3);
    const int n_ord = static_cast<int>(gen.next() % 3);
    const int order = static_cast<int>(gen.next() % 3);
    auto sys = random_system(gen, n, 1, n_ord, 0.9, 0.2);
    auto coeffs = closed_loop_coeffs(sys, std::nullopt);
    Matrix p_bar = random_symmetric(gen, n * (order + 1));
    Matrix got = assemble_w(coeffs, p_bar, sys.basis, order);
    Matrix want = quadrature_w(coeffs, p_bar, sys.basis, order);
    CHECK((got - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("EmsOperator adjoint satisfies the inner-product identity") {
  SplitMix64 gen(13);
  auto sys = random_system(gen, 2, 1, 1, 0.8, 0.2);
  auto coeffs = closed_loop_coeffs(sys, std::nullopt);
  const int order = 2;
  EmsOperator op(coeffs, sys.basis, order);
  const int dim = op.dimension();
  for (int trial = 0; trial < 5; ++trial) {
    Matrix p = random_symmetric(gen, dim);
    Matrix v = random_symmetric(gen, dim);
    const double lhs = (op.apply(p).cwiseProduct(v)).sum();
    const double rhs = (p.cwiseProduct(op.adjoint(v))).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("certify_ems: zero dynamics are certified immediately") {
  auto sys = scalar_system({0.0}, 0.0);
  for (int order : {0, 2}) {
    auto cert = certify_ems(sys, std::nullopt, order);
    CHECK(cert.feasible);
    CHECK(cert.margin <= -1.0 / (2.0 * order + 1.0) + 1e-9);
    CHECK(cert.pbar_min_eig > 0.0);
  }
}

TEST_CASE("certify_ems: a deterministic unstable scalar has no certificate") {
  auto sys = scalar_system({1.1}, 0.0);
  for (int order : {0, 1, 2}) {
    auto cert = certify_ems(sys, std::nullopt, order);
    CHECK_FALSE(cert.feasible);
    CHECK(cert.margin > 1e-8);
  }
}

TEST_CASE("certify_ems: stable affine scalar family is certified") {
  auto sys = scalar_system({0.5, 0.1}, 0.0);
  auto cert = certify_ems(sys, std::nullopt, 2);
  CHECK(cert.feasible);
  CHECK(cert.margin < -1e-8);

  // Corroborate with the sampled second moment: worst-case step ratio 0.36.
  Vector x0(1);
  x0 << 1.0;
  auto trace = mc_second_moment(sys, std::nullopt, 10000, 200, 7, x0);
  CHECK(trace.divergent_samples == 0);
  CHECK(trace.moments.back() <= 1e-20 * trace.moments.front());
}

TEST_CASE("certify_ems at order zero agrees with the spectral radius test") {
  SplitMix64 gen(4242);
  int feasible_count = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) a(i, j) = gen.uniform_pm1();
    }
    const double target = trial % 2 == 0 ? 0.3 + 0.55 * gen.uniform01()   // clearly stable
                                         : 1.02 + 0.4 * gen.uniform01();  // clearly unstable
    a *= target / spectrum(a).spectral_radius;

    UncertainLTI sys;
    sys.n = 4;
    sys.m = 1;
    sys.basis.model_order = 0;
    sys.basis.approx_order = 0;
    sys.A = {a};
    sys.B = {Matrix::Zero(4, 1)};

    auto cert = certify_ems(sys, std::nullopt, 0);
    const bool stable = target < 1.0 - 1e-6;
    CHECK(cert.feasible == stable);
    feasible_count += cert.feasible;
  }
  CHECK(feasible_count == 25);
}

TEST_CASE("a parameter-dependent Lyapunov function certifies where the common one fails") {
  // Uniformly stable family (sampled radius < 0.97) with NO order-zero
  // certificate: the mean-square operator P -> A_0'PA_0 + A_1'PA_1/3 has
  // spectral radius above one, so no single P > 0 satisfies the expected
  // contraction. The parameter-dependent blocks entering at order one do.
  UncertainLTI sys;
  sys.n = 2;
  sys.m = 1;
  sys.basis.model_order = 1;
  sys.basis.approx_order = 1;
  Matrix a0(2, 2), a1(2, 2);
  a0 << 0.26186387655607102, -1.1278961476529707,
        0.55189558129653549, 1.1344442206465633;
  a1 << 0.21908912528621158, -0.39448901861310914,
        -0.37470621366971946, -0.42666486920918223;
  sys.A = {a0, a1};
  sys.B = {Matrix::Zero(2, 1), Matrix::Zero(2, 1)};

  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(-1.0 + 2.0 * i / 100.0);
  for (const auto& sr : pole_sweep(sys, std::nullopt, grid)) {
    CHECK(sr.spectral_radius < 0.97);
  }
  Matrix ms_op = kron(a0.transpose(), a0.transpose()) +
                 kron(a1.transpose(), a1.transpose()) / 3.0;
  CHECK(spectrum(ms_op).spectral_radius > 1.0);  // order-0 infeasible for real

  auto c0 = certify_ems(sys, std::nullopt, 0);
  CHECK_FALSE(c0.feasible);
  auto c1 = certify_ems(sys, std::nullopt, 1);
  CHECK(c1.feasible);
  CHECK(c1.margin < -1e-3);

  Vector x0 = Vector::Ones(2);
  auto trace = mc_second_moment(sys, std::nullopt, 5000, 400, 17, x0);
  CHECK(trace.divergent_samples == 0);
  CHECK(trace.moments.back() <= 1e-6 * trace.moments.front());
}

TEST_CASE("mc_second_moment anchors") {
  SUBCASE("stable deterministic decay is geometric") {
    auto sys = scalar_system({0.5}, 0.0);
    Vector x0(1);
    x0 << 2.0;
    auto trace = mc_second_moment(sys, std::nullopt, 100, 20, 3, x0);
    CHECK(trace.moments[0] == doctest::Approx(4.0));
    for (std::size_t t = 1; t < trace.moments.size(); ++t) {
      CHECK(trace.moments[t] == doctest::Approx(0.25 * trace.moments[t - 1]));
    }
  }
  SUBCASE("unstable deterministic growth is visible") {
    auto sys = scalar_system({1.05}, 0.0);
    Vector x0(1);
    x0 << 1.0;
    auto trace = mc_second_moment(sys, std::nullopt, 10, 100, 3, x0);
    CHECK(trace.moments.back() > trace.moments.front());
  }
  SUBCASE("divergence step is reported for very explosive systems") {
    auto sys = scalar_system({1e200}, 0.0);
    Vector x0(1);
    x0 << 1.0;
    auto trace = mc_second_moment(sys, std::nullopt, 4, 10, 3, x0);
    CHECK(trace.divergent_samples == 4);
    CHECK(trace.first_divergence_step.has_value());
  }
}

TEST_CASE("pole_sweep anchors") {
  SUBCASE("deterministic system: identical spectra on the grid") {
    auto sys = scalar_system({0.5}, 0.0);
    std::vector<double> grid{-1.0, 0.0, 1.0};
    auto spectra = pole_sweep(sys, std::nullopt, grid);
    for (const auto& sr : spectra) CHECK(sr.spectral_radius == doctest::Approx(0.5));
  }
  SUBCASE("affine scalar family: radius follows the realization") {
    auto sys = scalar_system({0.5, 0.1}, 0.0);
    std::vector<double> grid{-1.0, 0.0, 1.0};
    auto spectra = pole_sweep(sys, Matrix::Zero(1, 1), grid);
    CHECK(spectra[0].spectral_radius == doctest::Approx(0.4));
    CHECK(spectra[1].spectral_radius == doctest::Approx(0.5));
    CHECK(spectra[2].spectral_radius == doctest::Approx(0.6));
  }
  SUBCASE("empty grid is rejected") {
    auto sys = scalar_system({0.5});
    CHECK_THROWS_AS(pole_sweep(sys, std::nullopt, std::vector<double>{}), InputError);
  }
}

TEST_CASE("feasible certificates are corroborated by sampled radii") {
  SplitMix64 gen(808);
  for (int trial = 0; trial < 5; ++trial) {
    auto sys = random_system(gen, 2, 1, 1, 0.7, 0.08);
    auto cert = certify_ems(sys, std::nullopt, 2);
    if (!cert.feasible) continue;
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(-1.0 + 2.0 * i / 100.0);
    for (const auto& sr : pole_sweep(sys, std::nullopt, grid)) {
      CHECK(sr.spectral_radius < 1.0 + 1e-6);
    }
  }
}
