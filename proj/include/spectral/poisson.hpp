#pragma once

#include "spectral/frame.hpp"
#include "spectral/grid.hpp"
#include "spectral/operator.hpp"
#include "spectral/weights.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace spectral {

// Discrete Dirichlet energy (1/2) sum |grad_h V|^2 by edge quadrature, with the
// boundary edges included (V = 0 outside). Chosen so that summation by parts is
// exact: dirichlet_energy(V) == (1/2) <(-Lap_h V), V> algebraically.
inline double dirichlet_energy(const GridDomain& domain, const Eigen::VectorXd& v) {
  if (v.size() != domain.size)
    throw std::invalid_argument("dirichlet_energy: sample count does not match the domain");
  double acc = 0.0;
  for (int a = 0; a < domain.dim; ++a) {
    const double w = domain.cell_volume / (domain.spacing[a] * domain.spacing[a]);
    for (Eigen::Index i = 0; i < domain.size; ++i) {
      const auto m = domain.to_multi(i);
      const double vi = v[i];
      double left = 0.0;
      if (m[a] > 0) {
        auto nb = m;
        nb[a] -= 1;
        left = v[domain.to_linear(nb)];
      }
      acc += w * (vi - left) * (vi - left);
      if (m[a] == domain.points[a] - 1) acc += w * vi * vi;  // edge to the right boundary
    }
  }
  return 0.5 * acc;
}

// Factorize-once solver for -Lap_h V = f with homogeneous Dirichlet data.
// Direct sparse Cholesky for 1D/2D up to 1e5 nodes, conjugate gradients
// beyond (3D). The residual post-check is scale-aware:
// ||Lap V + f||_inf <= tolerance * max(1, ||f||_inf).
class PoissonSolver {
 public:
  explicit PoissonSolver(const GridDomain& domain, double tolerance = 1e-10)
      : domain_(domain), tolerance_(tolerance), lap_(assemble_laplacian(domain)) {
    if (!(tolerance > 0.0))
      throw std::invalid_argument("PoissonSolver: tolerance must be positive");
    direct_ = domain.dim <= 2 && domain.size <= 100000;
    if (direct_) {
      llt_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
      llt_->compute(lap_);
      if (llt_->info() != Eigen::Success)
        throw std::runtime_error("PoissonSolver: Cholesky factorization failed");
    }
  }

  const GridDomain& domain() const { return domain_; }
  double tolerance() const { return tolerance_; }
  bool direct() const { return direct_; }
  const Eigen::SparseMatrix<double>& laplacian() const { return lap_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& f) const {
    if (f.size() != domain_.size)
      throw std::invalid_argument("PoissonSolver: source size does not match the domain");
    if (!f.allFinite()) throw std::invalid_argument("PoissonSolver: source must be finite");

    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    Eigen::VectorXd v;
    if (direct_) {
      v = llt_->solve(f);
      double res = (lap_ * v - f).cwiseAbs().maxCoeff();
      if (res > tolerance_ * scale) {
        v += llt_->solve(f - lap_ * v);  // one step of iterative refinement
        res = (lap_ * v - f).cwiseAbs().maxCoeff();
        if (res > tolerance_ * scale)
          throw std::runtime_error("PoissonSolver: direct solve residual " + std::to_string(res) +
                                   " exceeds tolerance");
      }
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(tolerance_ * 1e-2);
      cg.setMaxIterations(20000);
      cg.compute(lap_);
      v = cg.solve(f);
      const double res = (lap_ * v - f).cwiseAbs().maxCoeff();
      if (res > tolerance_ * scale)
        throw std::runtime_error(
            "PoissonSolver: iteration limit exceeded, achieved residual " + std::to_string(res) +
            " (inf-norm) after " + std::to_string(cg.iterations()) + " iterations");
    }
    return v;
  }

 private:
  GridDomain domain_;
  double tolerance_ = 1e-10;
  Eigen::SparseMatrix<double> lap_;
  bool direct_ = true;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

inline Eigen::VectorXd solve_poisson(const GridDomain& domain, const Eigen::VectorXd& f,
                                     double tolerance = 1e-10) {
  return PoissonSolver(domain, tolerance).solve(f);
}

struct HartreePotentialResult {
  GridFunction potential;      // V, the repulsion field generated by the density
  GridFunction source;         // sum_j rho_j u_j^2
  double dirichlet_energy = 0.0;  // (1/2) integral |grad V|^2, the J1 value
};

// Weighted density of the frame and the field it generates. The energy is
// computed both by edge quadrature and by the duality value (1/2)<f,V>; a
// disagreement beyond 1e-10 relative means the solve went wrong, so it throws.
inline HartreePotentialResult hartree_potential(const Frame& frame, const WeightSequence& weights,
                                                const PoissonSolver& solver) {
  const GridDomain& domain = solver.domain();
  if (frame.points() != domain.size)
    throw std::invalid_argument("hartree_potential: frame does not live on the solver's domain");
  if (frame.states() != weights.count())
    throw std::invalid_argument("hartree_potential: weight count does not match frame states");

  Eigen::VectorXd f = Eigen::VectorXd::Zero(domain.size);
  for (Eigen::Index j = 0; j < frame.states(); ++j)
    f += weights.values[j] * frame.cols.col(j).cwiseAbs2();

  HartreePotentialResult out{GridFunction(domain, Eigen::VectorXd::Zero(domain.size)),
                             GridFunction(domain, f), 0.0};
  if (frame.states() == 0) return out;

  Eigen::VectorXd v = solver.solve(f);
  // The system matrix is an M-matrix, so f >= 0 forces V >= 0. Exact for the
  // factorized path; the CG path is only accurate to its residual tolerance.
  const double sign_slack =
      solver.direct() ? 0.0 : solver.tolerance() * std::max(1.0, f.maxCoeff());
  if (v.minCoeff() < -sign_slack)
    throw std::runtime_error("hartree_potential: maximum principle violated (negative potential)");

  const double e_grad = dirichlet_energy(domain, v);
  const double e_dual = 0.5 * domain.cell_volume * f.dot(v);
  if (std::abs(e_grad - e_dual) > 1e-10 * std::max({std::abs(e_grad), std::abs(e_dual), 1e-300}))
    throw std::runtime_error("hartree_potential: quadrature and duality energies disagree");

  out.potential = GridFunction(domain, std::move(v));
  out.dirichlet_energy = e_grad;
  return out;
}

inline HartreePotentialResult hartree_potential(const Frame& frame, const WeightSequence& weights,
                                                const GridDomain& domain,
                                                double tolerance = 1e-10) {
  return hartree_potential(frame, weights, PoissonSolver(domain, tolerance));
}

}  // namespace spectral
