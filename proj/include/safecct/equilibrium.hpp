#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "safecct/model.hpp"

namespace safecct {

struct Certificate {
  double gamma = std::numbers::pi / 2;
  double lhs = 0.0;  // ‖L†p‖ over edges
  double rhs = 1.0;  // sin(gamma)
  bool passed = true;
  double margin = 1.0;
};

struct EquilibriumResult {
  Vec angles;
  double residual = 0.0;
  double cohesive_gamma = 0.0;
  int iterations = 0;
};

Mat laplacian(const StageModel& stage);

/// Moore-Penrose inverse of a symmetric matrix via its eigendecomposition.
/// Eigenvalues in the grey zone between clearly-zero and clearly-nonzero raise a SolverError.
Mat pseudoinverse(const Mat& L);

/// max over edges of |y_i - y_j|
double edge_dissimilarity(const StageModel& stage, const Vec& y);

Certificate sync_certificate(const StageModel& stage, double gamma = std::numbers::pi / 2);

struct NewtonOptions {
  int max_iterations = 100;
  double tolerance = 1e-10;
};

/// Damped Newton on the reduced system with machine `gauge` pinned at guess[gauge].
EquilibriumResult find_equilibrium(const StageModel& stage, const Vec& guess, int gauge = 0,
                                   const NewtonOptions& opts = {});

/// Real parts of the linearization about (angles, 0), gauge mode removed; all ≤ 0 when stable.
std::vector<double> linearization_spectrum(const StageModel& stage, const Vec& angles);
bool linearization_stable(const StageModel& stage, const Vec& angles, double tol = 1e-9);

}  // namespace safecct
