#include "vilab/linalg.hpp"

#include <cmath>

#include "vilab/errors.hpp"

namespace vilab {

double spectral_norm(const Matrix& m, double rel_tol, int max_iter) {
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.transpose() * m;
  // A deterministic start with every coordinate populated avoids landing
  // orthogonal to the dominant singular vector.
  Vector v(gram.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.01 * static_cast<double>(i + 1);
  v.normalize();
  double lambda = v.dot(gram * v);
  for (int it = 0; it < max_iter; ++it) {
    Vector w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = v.dot(gram * v);
    const bool done = std::abs(next - lambda) <= rel_tol * 1e-3 * std::abs(next);
    lambda = next;
    if (done) break;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

double min_sym_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed");
  return es.eigenvalues().minCoeff();
}

double max_sym_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed");
  return es.eigenvalues().maxCoeff();
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace vilab
