#include "pclqr/synthesis.hpp"

#include <cmath>
#include <limits>

#include "pclqr/errors.hpp"
#include "pclqr/numerics.hpp"

namespace pclqr {

namespace {

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

Matrix block_gain(const Matrix& K, int blocks) {
  return kron(Matrix::Identity(blocks, blocks), K);
}

}  // namespace

ValueResult solve_value(const ReducedModel& red) {
  DareResult sol = dare(red.A, red.B, red.Q, red.R);

  // Block LMI of the value problem, assembled with the returned P.
  const Matrix& P = sol.P;
  Matrix top_left = red.A.transpose() * P * red.A + red.Q - P;
  Matrix top_right = red.A.transpose() * P * red.B;
  Matrix bottom_right = red.R + red.B.transpose() * P * red.B;
  const Eigen::Index d1 = top_left.rows();
  const Eigen::Index d2 = bottom_right.rows();
  Matrix lmi(d1 + d2, d1 + d2);
  lmi.topLeftCorner(d1, d1) = top_left;
  lmi.topRightCorner(d1, d2) = top_right;
  lmi.bottomLeftCorner(d2, d1) = top_right.transpose();
  lmi.bottomRightCorner(d2, d2) = bottom_right;

  PsdCheck check = is_psd(lmi, 1e-8);
  return {std::move(sol.P), sol.residual, check.min_eig};
}

std::pair<Matrix, Matrix> extraction_normal_matrices(const ReducedModel& red,
                                                     const Matrix& P_pc) {
  const int blocks = red.order + 1;
  const Matrix S = symmetrize(red.R + red.B.transpose() * P_pc * red.B);
  const Matrix T = red.B.transpose() * P_pc * red.A;
  Matrix s_bar = Matrix::Zero(red.m, red.m);
  Matrix t_bar = Matrix::Zero(red.m, red.n);
  for (int i = 0; i < blocks; ++i) {
    s_bar += S.block(static_cast<Eigen::Index>(i) * red.m,
                     static_cast<Eigen::Index>(i) * red.m, red.m, red.m);
    t_bar += T.block(static_cast<Eigen::Index>(i) * red.m,
                     static_cast<Eigen::Index>(i) * red.n, red.m, red.n);
  }
  return {symmetrize(s_bar), std::move(t_bar)};
}

double gain_objective(const ReducedModel& red, const Matrix& P_pc, const Matrix& K) {
  const int blocks = red.order + 1;
  const Matrix S = symmetrize(red.R + red.B.transpose() * P_pc * red.B);
  const Matrix T = red.B.transpose() * P_pc * red.A;
  Eigen::LDLT<Matrix> sf(S);
  Matrix residual = block_gain(K, blocks) + sf.solve(T);
  return (residual.transpose() * S * residual).trace();
}

GainExtraction extract_gain(const ReducedModel& red, const Matrix& P_pc) {
  const int blocks = red.order + 1;
  auto [s_bar, t_bar] = extraction_normal_matrices(red, P_pc);
  Eigen::LDLT<Matrix> sf(s_bar);
  if (sf.info() != Eigen::Success || !sf.isPositive()) {
    throw Error("extract_gain: diagonal-block sum of S is not positive definite");
  }
  GainExtraction out;
  out.K = -sf.solve(t_bar);
  out.lmi2_gap = gain_objective(red, P_pc, out.K);

  // Slack-form block LMI [[X, H2], [H2', H4]] with the slack set to the
  // achieved quadratic form and H4 the inverse curvature.
  const Matrix S = symmetrize(red.R + red.B.transpose() * P_pc * red.B);
  const Matrix T = red.B.transpose() * P_pc * red.A;
  Eigen::LDLT<Matrix> full(S);
  Matrix residual = block_gain(out.K, blocks) + full.solve(T);  // m(N+1) x n(N+1)
  Matrix X = symmetrize(residual.transpose() * S * residual);
  Matrix H2 = residual.transpose();
  Matrix H4 = full.solve(Matrix::Identity(S.rows(), S.cols()));
  const Eigen::Index d1 = X.rows();
  const Eigen::Index d2 = H4.rows();
  Matrix lmi(d1 + d2, d1 + d2);
  lmi.topLeftCorner(d1, d1) = X;
  lmi.topRightCorner(d1, d2) = H2;
  lmi.bottomLeftCorner(d2, d1) = H2.transpose();
  lmi.bottomRightCorner(d2, d2) = symmetrize(H4);
  out.lmi2_min_eig = is_psd(lmi, 1e-8).min_eig;
  return out;
}

GainResult synthesize(const UncertainLTI& sys, const CostWeights& w, int order,
                      bool certify) {
  sys.validate();
  const ReducedModel red = build_reduced(sys, w, order);
  ValueResult value = solve_value(red);
  GainExtraction gain = extract_gain(red, value.P);

  GainResult out;
  out.P_pc = std::move(value.P);
  out.riccati_residual = value.riccati_residual;
  out.lmi1_min_eig = value.lmi1_min_eig;
  out.lmi2_gap = gain.lmi2_gap;
  out.order = order;
  out.closed_loop_radius =
      spectrum(red.A + red.B * block_gain(gain.K, order + 1)).spectral_radius;
  out.surrogate_radius_warning = out.closed_loop_radius >= 1.0;
  out.K = std::move(gain.K);
  if (certify) {
    out.ems_certificate = certify_ems(sys, out.K, order);
  }
  return out;
}

McCost mc_cost(const UncertainLTI& sys, const CostWeights& w, const Matrix& K,
               const Vector& x0, int samples, int horizon, std::uint64_t seed) {
  if (samples < 1) throw InputError("samples: must be >= 1");
  if (horizon < 1) throw InputError("horizon: must be >= 1");
  w.validate(sys.n, sys.m);
  const std::vector<double> deltas = sample_params(samples, seed);
  const int cap = std::max(horizon, 200000);

  double sum = 0.0;
  double sum_sq = 0.0;
  McCost out;
  for (double delta : deltas) {
    auto [a, b] = realize(sys, delta);
    const Matrix closed = a + b * K;
    Vector x = x0;
    double cost = 0.0;
    bool diverged = false;
    for (int t = 0; t < cap; ++t) {
      const Vector u = K * x;
      const double stage = x.dot(w.Q * x) + u.dot(w.R * u);
      cost += stage;
      if (!std::isfinite(cost) || x.norm() > 1e12) {
        diverged = true;
        break;
      }
      // Past the requested horizon, stop once the tail is negligible.
      if (t + 1 >= horizon && stage <= 1e-10 * std::max(cost, 1e-300)) break;
      x = closed * x;
    }
    if (diverged) {
      ++out.divergent_samples;
      continue;
    }
    sum += cost;
    sum_sq += cost * cost;
  }
  const int good = samples - out.divergent_samples;
  if (good > 0) {
    out.mean_cost = sum / good;
    if (good > 1) {
      const double var = std::max(0.0, (sum_sq - sum * sum / good) / (good - 1));
      out.std_err = std::sqrt(var / good);
    }
  } else {
    out.mean_cost = std::numeric_limits<double>::infinity();
  }
  out.unstable_warning = out.divergent_samples * 100 > samples;
  return out;
}

std::vector<OrderReportRow> gain_vs_order(const UncertainLTI& sys, const CostWeights& w,
                                          std::span<const int> orders) {
  if (orders.empty()) throw InputError("orders: must be non-empty");
  std::vector<OrderReportRow> rows;
  rows.reserve(orders.size());
  for (int order : orders) {
    OrderReportRow row;
    row.order = order;
    try {
      GainResult res = synthesize(sys, w, order, /*certify=*/false);
      row.gain_norm = res.K.operatorNorm();
      row.surrogate_radius = res.closed_loop_radius;
      row.feasible = true;
    } catch (const Error& e) {
      row.feasible = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pclqr
