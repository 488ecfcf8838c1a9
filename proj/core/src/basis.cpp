#include "pclqr/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pclqr/errors.hpp"

namespace pclqr {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr double kSnapTol = 1e-14;

double clamp_to_domain(double delta, const char* who) {
  if (std::abs(delta) > 1.0 + kDomainSlack) {
    throw DomainError(std::string(who) + ": parameter " + std::to_string(delta) +
                      " outside [-1, 1]");
  }
  return std::clamp(delta, -1.0, 1.0);
}

/// Legendre P_n(x) and its derivative, for the Newton root solve.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {p0, 0.0};
  for (int k = 1; k < n; ++k) {
    double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

MomentTensor::MomentTensor(int arity, int max_index, std::vector<double> entries)
    : arity_(arity), dim_(max_index + 1), entries_(std::move(entries)) {
  std::size_t expected = 1;
  for (int d = 0; d < arity_; ++d) expected *= static_cast<std::size_t>(dim_);
  if (entries_.size() != expected) {
    throw InputError("MomentTensor: entry count does not match arity and max_index");
  }
}

double MomentTensor::operator()(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != arity_) {
    throw InputError("MomentTensor: index arity mismatch");
  }
  std::size_t flat = 0;
  for (int d = 0; d < arity_; ++d) {
    if (idx[d] < 0 || idx[d] >= dim_) throw InputError("MomentTensor: index out of range");
    flat = flat * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx[d]);
  }
  return entries_[flat];
}

std::vector<double> eval_basis(const BasisSpec&, double delta, int up_to) {
  if (up_to < 0) throw InputError("eval_basis: up_to must be non-negative");
  double x = clamp_to_domain(delta, "eval_basis");
  std::vector<double> phi(static_cast<std::size_t>(up_to) + 1);
  phi[0] = 1.0;
  if (up_to >= 1) phi[1] = x;
  for (int k = 1; k < up_to; ++k) {
    phi[k + 1] = ((2 * k + 1) * x * phi[k] - k * phi[k - 1]) / (k + 1);
  }
  return phi;
}

QuadratureRule quadrature_rule(int point_count) {
  if (point_count < 1) throw InputError("quadrature_rule: point_count must be >= 1");
  const int n = point_count;
  Vector nodes(n);
  Vector weights(n);

  // Newton on P_n from the Chebyshev-like initial guess; nodes come out in
  // descending order and are mirrored afterwards to enforce exact symmetry.
  for (int i = 1; i <= (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre_with_derivative(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre_with_derivative(n, x);
    (void)p;
    // Standard weight 2/((1-x^2) P'_n^2), halved by the density 1/2.
    double w = 1.0 / ((1.0 - x * x) * dp * dp);
    nodes[i - 1] = x;
    weights[i - 1] = w;
    nodes[n - i] = -x;
    weights[n - i] = w;
  }
  if (n % 2 == 1) nodes[(n - 1) / 2] = 0.0;

  // Ascending order.
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](int a, int b) { return nodes[a] < nodes[b]; });
  Vector sn(n), sw(n);
  for (int i = 0; i < n; ++i) {
    sn[i] = nodes[perm[i]];
    sw[i] = weights[perm[i]];
  }
  return {sn, sw};
}

MomentTensor moment_tensor(const BasisSpec& spec, int arity, int max_index) {
  if (arity != 2 && arity != 3 && arity != 4 && arity != 6) {
    throw InputError("moment_tensor: arity must be one of {2, 3, 4, 6}");
  }
  if (max_index < 0) throw InputError("moment_tensor: max_index must be non-negative");

  const int dim = max_index + 1;
  const int degree = arity * max_index;
  const int point_count = (degree + 1 + 1) / 2 + 1;  // ceil((degree+1)/2) + 1
  QuadratureRule rule = quadrature_rule(point_count);

  // Basis values per node.
  std::vector<std::vector<double>> phi(static_cast<std::size_t>(point_count));
  for (int q = 0; q < point_count; ++q) {
    phi[q] = eval_basis(spec, rule.nodes[q], max_index);
  }

  std::size_t total = 1;
  for (int d = 0; d < arity; ++d) total *= static_cast<std::size_t>(dim);
  std::vector<double> entries(total, 0.0);

  auto flat_of = [dim, arity](std::span<const int> idx) {
    std::size_t f = 0;
    for (int d = 0; d < arity; ++d) f = f * static_cast<std::size_t>(dim) + idx[d];
    return f;
  };

  // Each entry is computed once on its sorted index tuple and scattered to all
  // permutations, so the stored tensor is symmetric by construction.
  std::vector<int> idx(static_cast<std::size_t>(arity), 0);
  while (true) {
    double value = 0.0;
    for (int q = 0; q < point_count; ++q) {
      double prod = rule.weights[q];
      for (int d = 0; d < arity; ++d) prod *= phi[q][idx[d]];
      value += prod;
    }
    if (std::abs(value) < kSnapTol) value = 0.0;

    std::vector<int> perm = idx;
    do {
      entries[flat_of(perm)] = value;
    } while (std::next_permutation(perm.begin(), perm.end()));

    // Advance the non-decreasing odometer.
    int d = arity - 1;
    while (d >= 0 && idx[d] == max_index) --d;
    if (d < 0) break;
    int v = idx[d] + 1;
    for (int e = d; e < arity; ++e) idx[e] = v;
  }

  return MomentTensor(arity, max_index, std::move(entries));
}

Matrix gram(const BasisSpec&, int order) {
  if (order < 0) throw InputError("gram: order must be non-negative");
  Matrix g = Matrix::Zero(order + 1, order + 1);
  for (int i = 0; i <= order; ++i) g(i, i) = 1.0 / (2.0 * i + 1.0);
  return g;
}

}  // namespace pclqr
