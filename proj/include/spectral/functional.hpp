#pragma once

#include "spectral/frame.hpp"
#include "spectral/poisson.hpp"
#include "spectral/weights.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace spectral {

// J0 = sum_j rho_j <u_j, A u_j>, J1 = (1/2) integral |grad V[U]|^2 with
// -Lap V[U] = sum_j rho_j u_j^2. The per-state Rayleigh quotients are taken
// under the effective Hamiltonian A + diag(V[U]).
struct FunctionalValue {
  double j0 = 0.0;
  double j1 = 0.0;
  double total = 0.0;
  Eigen::VectorXd per_state_rayleigh;
};

// One functional evaluation. (A + diag V) U is kept because the gradient and
// the residuals reuse it; the Hartree solve is the expensive part and must
// happen exactly once per evaluated frame.
struct CoupledEvaluation {
  FunctionalValue value;
  HartreePotentialResult hartree;  // empty potential in the linear case
  Eigen::MatrixXd h_cols;          // (A + diag V[U]) * cols
  bool coupled = false;
};

namespace detail {
template <typename Op>
void check_operator_frame(const Op& a, const Frame& f) {
  if (a.rows() != f.points() || a.cols() != f.points())
    throw std::invalid_argument("functional: operator shape does not match the frame");
}
}  // namespace detail

// Weighted Frobenius pairing <X,Y> = volume * tr(X^T Y); the metric behind
// gradient/direction duality.
inline double pair_tangent(const Frame& f, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return f.volume * x.cwiseProduct(y).sum();
}

// Pass solver = nullptr for the linear functional (J0 alone, no field).
template <typename Op>
CoupledEvaluation evaluate(const Frame& f, const Op& a, const WeightSequence& w,
                           const PoissonSolver* solver) {
  detail::check_operator_frame(a, f);
  if (w.count() != f.states())
    throw std::invalid_argument("functional: weight count does not match frame states");

  CoupledEvaluation ev;
  const Eigen::MatrixXd a_cols = a * f.cols;
  if (solver != nullptr) {
    ev.coupled = true;
    ev.hartree = hartree_potential(f, w, *solver);
    ev.h_cols = a_cols + ev.hartree.potential.values.asDiagonal() * f.cols;
    ev.value.j1 = ev.hartree.dirichlet_energy;
  } else {
    ev.h_cols = a_cols;
  }

  ev.value.per_state_rayleigh.resize(f.states());
  for (Eigen::Index j = 0; j < f.states(); ++j) {
    ev.value.j0 += w.values[j] * f.dot(j, a_cols.col(j));
    ev.value.per_state_rayleigh[j] = f.dot(j, ev.h_cols.col(j));
  }
  ev.value.total = ev.value.j0 + ev.value.j1;
  return ev;
}

template <typename Op>
double eval_j0(const Frame& f, const Op& a, const WeightSequence& w) {
  return evaluate(f, a, w, nullptr).value.j0;
}

inline double eval_j1(const Frame& f, const WeightSequence& w, const PoissonSolver& solver) {
  return hartree_potential(f, w, solver).dirichlet_energy;
}

inline double eval_j1(const Frame& f, const WeightSequence& w, const GridDomain& domain,
                      double tolerance = 1e-10) {
  return eval_j1(f, w, PoissonSolver(domain, tolerance));
}

template <typename Op>
FunctionalValue eval_total(const Frame& f, const Op& a, const WeightSequence& w,
                           const PoissonSolver& solver) {
  return evaluate(f, a, w, &solver).value;
}

struct GradientReport {
  Eigen::MatrixXd gradient;    // tangent matrix at the frame
  double norm = 0.0;           // weighted Frobenius norm
  double scaled_norm = 0.0;    // max_j ||g_j|| / (2 rho_j); weight-scale free
  Eigen::VectorXd hartree;     // V[U] samples behind the gradient (empty if linear)
};

inline GradientReport gradient_from(const Frame& f, const WeightSequence& w,
                                    const CoupledEvaluation& ev) {
  GradientReport rep;
  const Eigen::MatrixXd ambient = 2.0 * ev.h_cols * w.values.asDiagonal();
  rep.gradient = project_tangent(f, ambient);
  rep.norm = std::sqrt(f.volume) * rep.gradient.norm();
  rep.scaled_norm = 0.0;
  for (Eigen::Index j = 0; j < f.states(); ++j) {
    const double colnorm = std::sqrt(f.volume) * rep.gradient.col(j).norm();
    rep.scaled_norm = std::max(rep.scaled_norm, colnorm / (2.0 * w.values[j]));
  }
  if (ev.coupled) rep.hartree = ev.hartree.potential.values;
  return rep;
}

// Riemannian gradient: tangent projection of 2 (A + diag V[U]) U D. The field
// contributes through V[U] alone; the 1/2 in J1 cancels against the chain rule
// (the density is quadratic in U), which the finite-difference tests pin down.
template <typename Op>
GradientReport riemannian_gradient(const Frame& f, const Op& a, const WeightSequence& w,
                                   const PoissonSolver* solver) {
  const CoupledEvaluation ev = evaluate(f, a, w, solver);
  return gradient_from(f, w, ev);
}

// ||(A + diag V) u_j - lambda_j u_j|| with lambda_j the Rayleigh quotient; the
// direct measure of how far each state is from an eigenpair.
inline Eigen::VectorXd residuals_from(const Frame& f, const CoupledEvaluation& ev) {
  Eigen::VectorXd r(f.states());
  for (Eigen::Index j = 0; j < f.states(); ++j) {
    const double lambda = ev.value.per_state_rayleigh[j];
    r[j] = std::sqrt(f.volume) * (ev.h_cols.col(j) - lambda * f.cols.col(j)).norm();
  }
  return r;
}

template <typename Op>
Eigen::VectorXd stationarity_residual(const Frame& f, const Op& h) {
  detail::check_operator_frame(h, f);
  const Eigen::MatrixXd h_cols = h * f.cols;
  Eigen::VectorXd r(f.states());
  for (Eigen::Index j = 0; j < f.states(); ++j) {
    const double lambda = f.dot(j, h_cols.col(j));
    r[j] = std::sqrt(f.volume) * (h_cols.col(j) - lambda * f.cols.col(j)).norm();
  }
  return r;
}

template <typename Op>
Eigen::VectorXd stationarity_residual(const Frame& f, const Op& a, const WeightSequence& w,
                                      const PoissonSolver& solver) {
  return residuals_from(f, evaluate(f, a, w, &solver));
}

}  // namespace spectral
