#pragma once

#include "spectral/frame.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectral {

// Reference answers for the iterative solvers. Everything here is direct and
// independent of the descent machinery: dense factorizations, finite
// differences, exhaustive enumeration.

struct DenseEigResult {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // Euclidean-orthonormal columns
  double backend_residual = 0.0; // max_j ||A v_j - l_j v_j|| / scale(A)
};

// Full symmetric eigendecomposition with a self-check: the reconstruction
// Q L Q^T must match the input to 1e-9 relative Frobenius, otherwise the
// backend answer is not trusted and this throws.
inline DenseEigResult dense_eig(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("dense_eig: matrix must be square");
  const double entry_scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * entry_scale)
    throw std::invalid_argument("dense_eig: matrix is not symmetric to 1e-12");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw std::runtime_error("dense_eig: backend failed");

  DenseEigResult r;
  r.eigenvalues = es.eigenvalues();
  r.eigenvectors = es.eigenvectors();

  const Eigen::MatrixXd recon =
      r.eigenvectors * r.eigenvalues.asDiagonal() * r.eigenvectors.transpose();
  const double fro_scale = std::max(1.0, a.norm());
  if ((recon - a).norm() > 1e-9 * fro_scale)
    throw std::runtime_error("dense_eig: reconstruction self-check failed");

  const double op_scale =
      std::max({std::abs(r.eigenvalues[0]), std::abs(r.eigenvalues[a.rows() - 1]), 1e-300});
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    const double res = (a * r.eigenvectors.col(j) - r.eigenvalues[j] * r.eigenvectors.col(j)).norm();
    r.backend_residual = std::max(r.backend_residual, res / op_scale);
  }
  return r;
}

inline DenseEigResult dense_eig(const Eigen::SparseMatrix<double>& a) {
  return dense_eig(Eigen::MatrixXd(a));
}

// First m eigenvectors as a frame under the weighted inner product.
inline Frame eigen_frame(const DenseEigResult& r, double volume, Eigen::Index m) {
  if (m > r.eigenvectors.cols())
    throw std::invalid_argument("eigen_frame: fewer eigenvectors than requested states");
  return Frame{r.eigenvectors.leftCols(m) / std::sqrt(volume), volume};
}

// Central difference of a functional along a retraction curve.
template <typename Functional>
double fd_directional_derivative(const Functional& j, const Frame& f, const SkewDirection& d,
                                 double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_directional_derivative: step must be > 0");
  const double plus = j(retract(f, d, step));
  const double minus = j(retract(f, d, -step));
  return (plus - minus) / (2.0 * step);
}

// All signed permutation frames of R^n (2^n n! of them): the finite candidate
// set over which the trace functional on a diagonal operator attains its
// minimum. Feasible only for small n.
inline std::vector<Frame> enumerate_permutation_frames(int n) {
  if (n < 1 || n > 6)
    throw std::invalid_argument("enumerate_permutation_frames: n must lie in [1,6]");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  std::vector<Frame> frames;
  do {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
      for (int j = 0; j < n; ++j) m(perm[j], j) = (mask >> j) & 1u ? -1.0 : 1.0;
      frames.push_back(Frame{std::move(m), 1.0});
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return frames;
}

}  // namespace spectral
