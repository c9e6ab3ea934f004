#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace vilab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest singular value of `m` by power iteration on mᵀm.
/// Iterates until the relative change of the Rayleigh quotient drops below
/// `rel_tol` (or `max_iter` is hit).
double spectral_norm(const Matrix& m, double rel_tol = 1e-10, int max_iter = 200000);

/// Smallest eigenvalue of the symmetric part (m + mᵀ)/2.
double min_sym_eigenvalue(const Matrix& m);

/// Largest eigenvalue of the symmetric part (m + mᵀ)/2.
double max_sym_eigenvalue(const Matrix& m);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

}  // namespace vilab
