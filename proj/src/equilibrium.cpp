#include "safecct/equilibrium.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace safecct {

Mat laplacian(const StageModel& stage) {
  const Mat& K = stage.K();
  Mat L = -K;
  for (int i = 0; i < stage.size(); ++i) L(i, i) = K.row(i).sum();
  return L;
}

Mat pseudoinverse(const Mat& L) {
  const auto n = L.rows();
  if (L.cols() != n) throw SolverError("pseudoinverse: matrix is not square");
  if (n == 0) return L;
  if (!L.isApprox(L.transpose(), 1e-12) && !(L - L.transpose()).isZero(1e-12))
    throw SolverError("pseudoinverse: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (L + L.transpose()));
  if (es.info() != Eigen::Success) throw SolverError("pseudoinverse: eigendecomposition failed");
  const Vec& lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  if (scale == 0.0) return Mat::Zero(n, n);
  const double zero_below = 1e-10 * scale;
  const double keep_above = 1e-7 * scale;
  Vec inv = Vec::Zero(n);
  std::vector<double> grey;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = std::abs(lam[k]);
    if (a >= keep_above)
      inv[k] = 1.0 / lam[k];
    else if (a > zero_below)
      grey.push_back(lam[k]);
  }
  if (!grey.empty()) {
    std::ostringstream msg;
    msg << "pseudoinverse: numerical rank is ambiguous; eigenvalues";
    for (double g : grey) msg << " " << g;
    msg << " (largest " << scale << ")";
    throw SolverError(msg.str());
  }
  const Mat& V = es.eigenvectors();
  return V * inv.asDiagonal() * V.transpose();
}

double edge_dissimilarity(const StageModel& stage, const Vec& y) {
  double worst = 0.0;
  for (const Edge& e : stage.edges()) worst = std::max(worst, std::abs(y[e.i] - y[e.j]));
  return worst;
}

Certificate sync_certificate(const StageModel& stage, double gamma) {
  if (!(gamma > 0.0 && gamma <= std::numbers::pi / 2 + 1e-6))
    throw ValidationError("gamma must lie in (0, pi/2]");
  gamma = std::min(gamma, std::numbers::pi / 2);
  Certificate c;
  c.gamma = gamma;
  c.lhs = edge_dissimilarity(stage, pseudoinverse(laplacian(stage)) * stage.p());
  c.rhs = std::sin(gamma);
  c.margin = c.rhs - c.lhs;
  c.passed = c.lhs <= c.rhs + 1e-12;
  return c;
}

namespace {

Vec mismatch(const StageModel& stage, const Vec& x) {
  Vec r = stage.p();
  const Mat& K = stage.K();
  for (const Edge& e : stage.edges()) {
    const double f = K(e.i, e.j) * std::sin(x[e.i] - x[e.j]);
    r[e.i] -= f;
    r[e.j] += f;
  }
  return r;
}

Mat mismatch_jacobian(const StageModel& stage, const Vec& x) {
  const int m = stage.size();
  Mat J = Mat::Zero(m, m);
  const Mat& K = stage.K();
  for (const Edge& e : stage.edges()) {
    const double c = K(e.i, e.j) * std::cos(x[e.i] - x[e.j]);
    J(e.i, e.i) -= c;
    J(e.i, e.j) += c;
    J(e.j, e.j) -= c;
    J(e.j, e.i) += c;
  }
  return J;
}

Vec drop(const Vec& v, int g) {
  Vec out(v.size() - 1);
  for (Eigen::Index k = 0, o = 0; k < v.size(); ++k)
    if (k != g) out[o++] = v[k];
  return out;
}

Mat drop(const Mat& A, int g) {
  const auto n = A.rows() - 1;
  Mat out(n, n);
  for (Eigen::Index r = 0, orow = 0; r < A.rows(); ++r) {
    if (r == g) continue;
    for (Eigen::Index c = 0, ocol = 0; c < A.cols(); ++c) {
      if (c == g) continue;
      out(orow, ocol++) = A(r, c);
    }
    ++orow;
  }
  return out;
}

}  // namespace

EquilibriumResult find_equilibrium(const StageModel& stage, const Vec& guess, int gauge, const NewtonOptions& opts) {
  const int m = stage.size();
  if (guess.size() != m) throw ValidationError("equilibrium guess has the wrong length");
  if (!guess.allFinite()) throw ValidationError("equilibrium guess is not finite");
  if (gauge < 0 || gauge >= m) throw ValidationError("gauge index out of range");

  EquilibriumResult res;
  Vec x = guess;
  auto norm_of = [&](const Vec& xx) {
    const Vec r = mismatch(stage, xx);
    return m == 1 ? std::abs(r[0]) : drop(r, gauge).cwiseAbs().maxCoeff();
  };
  double r = norm_of(x);
  int it = 0;
  for (; it < opts.max_iterations && r >= opts.tolerance; ++it) {
    if (m == 1) break;
    const Mat J = drop(mismatch_jacobian(stage, x), gauge);
    Eigen::FullPivLU<Mat> lu(J);
    if (!lu.isInvertible()) throw SolverError("equilibrium: singular Jacobian at iteration " + std::to_string(it));
    const Vec step = lu.solve(-drop(mismatch(stage, x), gauge));
    double lambda = 1.0;
    Vec trial;
    double rt = r;
    for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
      trial = x;
      for (int k = 0, o = 0; k < m; ++k)
        if (k != gauge) trial[k] += lambda * step[o++];
      rt = norm_of(trial);
      if (rt < r) break;
    }
    if (!(rt < r)) break;
    x = trial;
    r = rt;
  }
  res.iterations = it;
  res.angles = x;
  res.residual = mismatch(stage, x).cwiseAbs().maxCoeff();
  if (!(res.residual < opts.tolerance))
    throw SolverError("equilibrium: Newton did not converge (residual " + std::to_string(res.residual) + " after " +
                      std::to_string(it) + " iterations)");
  res.cohesive_gamma = edge_dissimilarity(stage, x);
  return res;
}

std::vector<double> linearization_spectrum(const StageModel& stage, const Vec& angles) {
  const int m = stage.size();
  Mat A = Mat::Zero(2 * m, 2 * m);
  A.topRightCorner(m, m).setIdentity();
  A.bottomLeftCorner(m, m) = mismatch_jacobian(stage, angles);
  A.bottomRightCorner(m, m) = -Mat(stage.d().asDiagonal());
  Eigen::EigenSolver<Mat> es(A, false);
  std::vector<double> re;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) re.push_back(es.eigenvalues()[k].real());
  std::sort(re.begin(), re.end());
  return re;
}

bool linearization_stable(const StageModel& stage, const Vec& angles, double tol) {
  // The uniform-rotation mode contributes one zero eigenvalue; everything else must be strictly negative.
  const auto re = linearization_spectrum(stage, angles);
  int zeros = 0;
  for (double v : re) {
    if (v > tol) return false;
    if (v > -tol) ++zeros;
  }
  return zeros <= 1;
}

}  // namespace safecct
