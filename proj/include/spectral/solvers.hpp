#pragma once

#include "spectral/frame.hpp"
#include "spectral/functional.hpp"
#include "spectral/operator.hpp"
#include "spectral/oracle.hpp"
#include "spectral/poisson.hpp"
#include "spectral/weights.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spectral {

struct SolverOptions {
  int max_iterations = 50000;        // per descent run
  double gradient_tolerance = 1e-8;  // on the weight-scaled gradient norm
  bool armijo = true;                // false: fixed-step steepest descent
  double armijo_c1 = 1e-4;
  double armijo_backtrack = 0.5;
  double fixed_step = 1e-3;
  int reorthonormalize_every = 50;
  std::uint64_t seed = 0;
  int restarts = 3;
  double poisson_tolerance = 1e-10;
  double degeneracy_tolerance = 1e-12;  // relative tie detection on weights

  void validate() const {
    if (max_iterations < 1) throw std::invalid_argument("SolverOptions: max_iterations >= 1");
    if (!(gradient_tolerance > 0.0))
      throw std::invalid_argument("SolverOptions: gradient_tolerance must be positive");
    if (!(armijo_c1 > 0.0) || !(armijo_c1 <= 0.5))
      throw std::invalid_argument("SolverOptions: armijo_c1 must lie in (0, 0.5]");
    if (!(armijo_backtrack > 0.0) || !(armijo_backtrack < 1.0))
      throw std::invalid_argument("SolverOptions: armijo_backtrack must lie in (0,1)");
    if (!(fixed_step > 0.0)) throw std::invalid_argument("SolverOptions: fixed_step must be positive");
    if (reorthonormalize_every < 1)
      throw std::invalid_argument("SolverOptions: reorthonormalize_every >= 1");
    if (restarts < 1) throw std::invalid_argument("SolverOptions: restarts >= 1");
    if (!(poisson_tolerance > 0.0))
      throw std::invalid_argument("SolverOptions: poisson_tolerance must be positive");
  }
};

struct SelfConsistentSolution {
  Frame frame{Eigen::MatrixXd(), 1.0};
  Eigen::VectorXd eigenvalues;  // Rayleigh quotients under A + diag V, column order
  Eigen::VectorXd residuals;    // ||(A + diag V) u_j - lambda_j u_j||
  Eigen::VectorXd hartree;      // V samples; empty for the linear functional
  WeightSequence weights;
  double j0 = 0.0;
  double j1 = 0.0;
  double j_total = 0.0;
  std::vector<double> functional_history;  // accepted iterates, winning restart
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;         // weighted Frobenius norm at the end
  double gradient_scaled_norm = 0.0;  // convergence metric at the end
  double gram_error = 0.0;            // final orthonormality defect
  double gram_drift_max = 0.0;        // worst defect seen at any iterate
  double poisson_residual = 0.0;      // final ||Lap V + f||_inf (coupled only)
};

namespace detail {

// Column permutation pairing the largest weight with the smallest Rayleigh
// quotient (stable on ties). Identity iff the pairing is already optimal.
inline std::vector<int> optimal_pairing(const Eigen::VectorXd& rho, const Eigen::VectorXd& lambda) {
  const int m = static_cast<int>(rho.size());
  std::vector<int> slots(m), by_lambda(m), perm(m);
  std::iota(slots.begin(), slots.end(), 0);
  std::iota(by_lambda.begin(), by_lambda.end(), 0);
  std::stable_sort(slots.begin(), slots.end(),
                   [&](int i, int j) { return rho[i] > rho[j]; });
  std::stable_sort(by_lambda.begin(), by_lambda.end(),
                   [&](int i, int j) { return lambda[i] < lambda[j]; });
  for (int k = 0; k < m; ++k) perm[slots[k]] = by_lambda[k];
  return perm;
}

inline bool is_identity(const std::vector<int>& perm) {
  for (int i = 0; i < static_cast<int>(perm.size()); ++i)
    if (perm[i] != i) return false;
  return true;
}

// A + diag(v) applied lazily; keeps block rotations matrix-free on grids.
template <typename Op>
struct ShiftedOperator {
  const Op& a;
  const Eigen::VectorXd& v;
  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index cols() const { return a.cols(); }
  Eigen::MatrixXd operator*(const Eigen::MatrixXd& x) const {
    return a * x + v.asDiagonal() * x;
  }
};

struct DescentRun {
  Frame frame{Eigen::MatrixXd(), 1.0};
  CoupledEvaluation ev;
  GradientReport grad;
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
  double gram_drift_max = 0.0;
};

// Monotone Riemannian descent: direction -gradient, trial step from a
// safeguarded Barzilai-Borwein estimate, Armijo backtracking on top. The
// rounding slack lets steps through once J differences drop below double
// resolution; convergence is still decided by the gradient alone.
template <typename Op>
DescentRun descend(const Op& a, const WeightSequence& w, const PoissonSolver* solver, Frame u,
                   const SolverOptions& opt) {
  DescentRun run;
  run.ev = evaluate(u, a, w, solver);
  run.grad = gradient_from(u, w, run.ev);
  run.history.push_back(run.ev.value.total);
  run.gram_drift_max = u.gram_error();

  double t_prev = 1.0;
  Eigen::MatrixXd cols_prev, grad_prev;
  bool have_prev = false;
  int reanchors_left = 3;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    if (run.grad.scaled_norm <= opt.gradient_tolerance) {
      run.converged = true;
      break;
    }

    const SkewDirection d = split_tangent(u, -run.grad.gradient);
    const double gg = run.grad.norm * run.grad.norm;
    if (!(gg > 0.0)) break;

    double t = opt.fixed_step;
    if (opt.armijo) {
      t = 2.0 * t_prev;
      if (have_prev) {
        const Eigen::MatrixXd s = u.cols - cols_prev;
        const Eigen::MatrixXd y = run.grad.gradient - grad_prev;
        const double sy = s.cwiseProduct(y).sum();
        const double ss = s.squaredNorm();
        if (sy > 0.0 && std::isfinite(sy) && ss > 0.0) {
          const double bb = ss / sy;
          if (std::isfinite(bb) && bb > 0.0) t = std::min(std::max(bb, 1e-18), 1e18);
        }
      }
    }

    // Rounding slack: once true decreases fall below the resolution of J, the
    // measured difference is noise and the search must be allowed through;
    // convergence is still decided by the gradient alone. The resolution of J
    // is set by the weighted absolute trace, not by |J| - the Rayleigh terms
    // rho_j*lambda_j enter with both signs and each carries its own rounding,
    // so nearly identical frames can legitimately measure several hundred ulps
    // of that trace apart.
    double noise_scale = std::abs(run.ev.value.j1);
    for (Eigen::Index j = 0; j < w.count(); ++j)
      noise_scale += w.values[j] * std::abs(run.ev.value.per_state_rayleigh[j]);
    const double slack = 1e-14 * std::max(1.0, std::abs(run.ev.value.total)) +
                         256.0 * std::numeric_limits<double>::epsilon() * noise_scale;
    Frame candidate{Eigen::MatrixXd(), u.volume};
    CoupledEvaluation ev_c;
    bool accepted = false;
    for (int bt = 0; bt < 64; ++bt) {
      candidate = retract(u, d, t);
      ev_c = evaluate(candidate, a, w, solver);
      const double target = run.ev.value.total - opt.armijo_c1 * t * gg + slack;
      if (ev_c.value.total <= target) {
        accepted = true;
        break;
      }
      if (!opt.armijo) break;  // fixed step either decreases J or we stop
      t *= opt.armijo_backtrack;
    }
    if (!accepted) {
      // The slack lets accepted values drift a few ulps below what an honest
      // re-evaluation of the same frame yields; once every candidate is gated
      // against that stale baseline the search starves even at t -> 0.
      // Re-anchor: clean the frame, restate the baseline, drop BB memory.
      if (!opt.armijo || reanchors_left == 0) break;
      --reanchors_left;
      u = reorthonormalize(u);
      run.gram_drift_max = std::max(run.gram_drift_max, u.gram_error());
      run.ev = evaluate(u, a, w, solver);
      run.grad = gradient_from(u, w, run.ev);
      run.history.push_back(run.ev.value.total);
      have_prev = false;
      continue;
    }
    reanchors_left = 3;

    cols_prev = u.cols;
    grad_prev = run.grad.gradient;
    have_prev = true;
    t_prev = t;

    u = std::move(candidate);
    run.iterations += 1;
    if (run.iterations % opt.reorthonormalize_every == 0) u = reorthonormalize(u);
    run.gram_drift_max = std::max(run.gram_drift_max, u.gram_error());

    run.ev = std::move(ev_c);
    run.grad = gradient_from(u, w, run.ev);
    run.history.push_back(run.ev.value.total);
  }

  run.frame = std::move(u);
  return run;
}

// Descent plus the two post-passes that turn a critical frame into the
// reported minimizer: block rotation inside degenerate weight blocks, and a
// column re-pairing escape. A non-optimal weight/Rayleigh pairing is a saddle
// of the trace functional; permuting columns strictly lowers J, so descent is
// resumed after each applied permutation.
template <typename Op>
DescentRun descend_with_escapes(const Op& a, const WeightSequence& w, const PoissonSolver* solver,
                                Frame u, const SolverOptions& opt,
                                const std::vector<DegenerateBlock>& blocks) {
  DescentRun run = descend(a, w, solver, std::move(u), opt);
  const bool any_block = std::any_of(blocks.begin(), blocks.end(),
                                     [](const DegenerateBlock& b) { return b.size > 1; });

  for (int round = 0; round < 8; ++round) {
    bool changed = false;

    if (any_block) {
      Frame rotated{Eigen::MatrixXd(), run.frame.volume};
      if (solver != nullptr) {
        // Diagonalize blocks against the effective Hamiltonian at the current V.
        const ShiftedOperator<Op> h{a, run.ev.hartree.potential.values};
        rotated = block_rotate(run.frame, h, blocks);
      } else {
        rotated = block_rotate(run.frame, a, blocks);
      }
      if ((rotated.cols - run.frame.cols).norm() > 0.0) {
        run.frame = std::move(rotated);
        run.ev = evaluate(run.frame, a, w, solver);
        run.grad = gradient_from(run.frame, w, run.ev);
      }
    }

    const std::vector<int> perm = optimal_pairing(w.values, run.ev.value.per_state_rayleigh);
    if (!is_identity(perm)) {
      Frame permuted = run.frame;
      for (Eigen::Index j = 0; j < permuted.states(); ++j)
        permuted.cols.col(j) = run.frame.cols.col(perm[j]);
      const CoupledEvaluation ev_p = evaluate(permuted, a, w, solver);
      if (ev_p.value.total <
          run.ev.value.total - 1e-14 * std::max(1.0, std::abs(run.ev.value.total))) {
        DescentRun resumed = descend(a, w, solver, std::move(permuted), opt);
        run.frame = std::move(resumed.frame);
        run.ev = std::move(resumed.ev);
        run.grad = std::move(resumed.grad);
        run.iterations += resumed.iterations;
        run.converged = resumed.converged;
        run.gram_drift_max = std::max(run.gram_drift_max, resumed.gram_drift_max);
        run.history.insert(run.history.end(), resumed.history.begin(), resumed.history.end());
        changed = true;
      }
    }

    if (!changed) break;
  }
  return run;
}

template <typename Op>
SelfConsistentSolution finalize(const Op& a, const WeightSequence& w, const PoissonSolver* solver,
                                DescentRun run, const SolverOptions& opt) {
  SelfConsistentSolution sol;
  sol.frame = std::move(run.frame);
  sol.weights = w;
  sol.eigenvalues = run.ev.value.per_state_rayleigh;
  sol.residuals = residuals_from(sol.frame, run.ev);
  sol.j0 = run.ev.value.j0;
  sol.j1 = run.ev.value.j1;
  sol.j_total = run.ev.value.total;
  sol.functional_history = std::move(run.history);
  sol.iterations = run.iterations;
  sol.gradient_norm = run.grad.norm;
  sol.gradient_scaled_norm = run.grad.scaled_norm;
  sol.gram_error = sol.frame.gram_error();
  sol.gram_drift_max = run.gram_drift_max;

  const double max_residual = sol.residuals.size() > 0 ? sol.residuals.maxCoeff() : 0.0;
  sol.converged = run.converged && max_residual <= 10.0 * opt.gradient_tolerance;

  if (solver != nullptr) {
    sol.hartree = run.ev.hartree.potential.values;
    const Eigen::VectorXd& f = run.ev.hartree.source.values;
    sol.poisson_residual =
        (solver->laplacian() * sol.hartree - f).cwiseAbs().maxCoeff();
  }
  return sol;
}

}  // namespace detail

// Minimizes J0 over orthonormal frames of a symmetric operator given as a
// plain matrix (volume is the inner-product weight; 1 for synthetic matrices).
// Runs `restarts` seeded descents and keeps the lowest final value.
template <typename Op>
SelfConsistentSolution minimize_linear(const Op& a, double volume, const WeightSequence& w,
                                       const SolverOptions& opt = {},
                                       const std::optional<Frame>& initial = std::nullopt) {
  opt.validate();
  if (a.rows() != a.cols()) throw std::invalid_argument("minimize_linear: operator must be square");
  if (w.count() > a.rows())
    throw std::invalid_argument("minimize_linear: more weights than operator dimensions");
  const auto blocks = detect_degeneracy(w, opt.degeneracy_tolerance);

  std::optional<detail::DescentRun> best;
  const int runs = initial.has_value() ? 1 : opt.restarts;
  for (int r = 0; r < runs; ++r) {
    Frame u0 = initial.has_value()
                   ? *initial
                   : random_frame(a.rows(), w.count(), volume, opt.seed + static_cast<std::uint64_t>(r));
    detail::DescentRun run = detail::descend_with_escapes(a, w, nullptr, std::move(u0), opt, blocks);
    if (!best || run.ev.value.total < best->ev.value.total) best = std::move(run);
  }
  return detail::finalize(a, w, nullptr, std::move(*best), opt);
}

inline SelfConsistentSolution minimize_linear(const SchrodingerOperator& op,
                                              const WeightSequence& w,
                                              const SolverOptions& opt = {},
                                              const std::optional<Frame>& initial = std::nullopt) {
  return minimize_linear(op.matrix, op.domain.cell_volume, w, opt, initial);
}

// Minimizes J = J0 + J1 with the Hartree field resolved at every evaluation.
inline SelfConsistentSolution minimize_coupled(const SchrodingerOperator& op,
                                               const WeightSequence& w,
                                               const SolverOptions& opt = {},
                                               const std::optional<Frame>& initial = std::nullopt) {
  opt.validate();
  if (w.count() > op.domain.size)
    throw std::invalid_argument("minimize_coupled: more weights than grid points");
  const PoissonSolver solver(op.domain, opt.poisson_tolerance);
  const auto blocks = detect_degeneracy(w, opt.degeneracy_tolerance);

  std::optional<detail::DescentRun> best;
  const int runs = initial.has_value() ? 1 : opt.restarts;
  for (int r = 0; r < runs; ++r) {
    Frame u0 = initial.has_value()
                   ? *initial
                   : random_frame(op.domain, w.count(), opt.seed + static_cast<std::uint64_t>(r));
    detail::DescentRun run =
        detail::descend_with_escapes(op.matrix, w, &solver, std::move(u0), opt, blocks);
    if (!best || run.ev.value.total < best->ev.value.total) best = std::move(run);
  }
  return detail::finalize(op.matrix, w, &solver, std::move(*best), opt);
}

struct HomotopyOptions {
  int theta_steps = 5;    // stages theta = i/theta_steps, i = 0..theta_steps
  double damping = 0.5;   // update fraction per fixed-point sweep
  double tolerance = 1e-10;  // stage stop: ||V_next - V||_inf
  int max_stage_iterations = 1000;
  double poisson_tolerance = 1e-10;

  void validate() const {
    if (theta_steps < 1) throw std::invalid_argument("HomotopyOptions: theta_steps >= 1");
    if (!(damping > 0.0) || !(damping <= 1.0))
      throw std::invalid_argument("HomotopyOptions: damping must lie in (0,1]");
    if (!(tolerance > 0.0)) throw std::invalid_argument("HomotopyOptions: tolerance must be positive");
    if (max_stage_iterations < 1)
      throw std::invalid_argument("HomotopyOptions: max_stage_iterations >= 1");
  }
};

struct HomotopyStage {
  double theta = 0.0;
  int iterations = 0;
  double update_delta = 0.0;  // last ||V_next - V||_inf of the stage
};

struct HomotopySolution {
  Eigen::VectorXd potential;   // V at theta = 1
  Eigen::VectorXd eigenvalues; // first M eigenvalues of A + diag V
  Frame states{Eigen::MatrixXd(), 1.0};
  WeightSequence weights;
  std::vector<HomotopyStage> path;
  double fixed_point_residual = 0.0;  // ||V - B(F(V))||_inf at the end
  bool converged = false;
};

// Fixed-point cross-check for 1D problems: V is driven to V = B(F(V)) along a
// homotopy in theta, where F(V) is the weighted density of the first M
// eigenfunctions of A + diag(V) (exact dense eigensolve, eigenvalues are
// simple in 1D) and B inverts the Dirichlet Laplacian. Completely independent
// of the descent path: no frames, no gradients, no line search.
inline HomotopySolution scf_homotopy_1d(const SchrodingerOperator& op, const WeightSequence& w,
                                        const HomotopyOptions& opt = {}) {
  opt.validate();
  if (op.domain.dim != 1)
    throw std::invalid_argument("scf_homotopy_1d: requires a one-dimensional domain");
  if (op.domain.size > 2048)
    throw std::invalid_argument("scf_homotopy_1d: dense eigensolve capped at 2048 points");
  if (w.count() < 1) throw std::invalid_argument("scf_homotopy_1d: needs at least one weight");
  if (w.count() > op.domain.size)
    throw std::invalid_argument("scf_homotopy_1d: more weights than grid points");

  const GridDomain& domain = op.domain;
  const PoissonSolver poisson(domain, opt.poisson_tolerance);
  const Eigen::MatrixXd a_dense(op.matrix);
  const int m = w.count();

  // Weighted density of the first m eigenfunctions, discrete-L2 normalized.
  const auto density_of = [&](const Eigen::VectorXd& v, Eigen::VectorXd* lambdas,
                              Eigen::MatrixXd* vectors) {
    Eigen::MatrixXd h = a_dense;
    h.diagonal() += v;
    const DenseEigResult eig = dense_eig(h);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(domain.size);
    for (int k = 0; k < m; ++k)
      f += w.values[k] * eig.eigenvectors.col(k).cwiseAbs2() / domain.cell_volume;
    if (lambdas) *lambdas = eig.eigenvalues.head(m);
    if (vectors) *vectors = eig.eigenvectors.leftCols(m) / std::sqrt(domain.cell_volume);
    return f;
  };

  HomotopySolution sol;
  sol.weights = w;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(domain.size);
  bool all_stages_converged = true;

  for (int stage = 0; stage <= opt.theta_steps; ++stage) {
    const double theta = static_cast<double>(stage) / opt.theta_steps;
    HomotopyStage rec;
    rec.theta = theta;
    for (int it = 0; it < opt.max_stage_iterations; ++it) {
      const Eigen::VectorXd f = density_of(v, nullptr, nullptr);
      const Eigen::VectorXd tv = poisson.solve(f);
      const Eigen::VectorXd v_next = (1.0 - opt.damping) * v + opt.damping * theta * tv;
      rec.update_delta = (v_next - v).cwiseAbs().maxCoeff();
      v = v_next;
      rec.iterations = it + 1;
      if (rec.update_delta <= opt.tolerance) break;
    }
    if (rec.update_delta > opt.tolerance) all_stages_converged = false;
    sol.path.push_back(rec);
  }

  Eigen::VectorXd lambdas;
  Eigen::MatrixXd vectors;
  const Eigen::VectorXd f_final = density_of(v, &lambdas, &vectors);
  const Eigen::VectorXd tv_final = poisson.solve(f_final);
  sol.fixed_point_residual = (v - tv_final).cwiseAbs().maxCoeff();

  // Sign convention: first interior sample positive (discrete phi'(0) > 0);
  // fall back to the largest-magnitude entry if the first sample vanishes.
  for (int k = 0; k < m; ++k) {
    double lead = vectors(0, k);
    if (lead == 0.0) {
      Eigen::Index imax = 0;
      vectors.col(k).cwiseAbs().maxCoeff(&imax);
      lead = vectors(imax, k);
    }
    if (lead < 0.0) vectors.col(k) = -vectors.col(k);
  }

  sol.potential = std::move(v);
  sol.eigenvalues = std::move(lambdas);
  sol.states = Frame{std::move(vectors), domain.cell_volume};
  sol.converged = all_stages_converged;
  return sol;
}

struct SpectrumReport {
  Eigen::VectorXd natural;     // eigenvalues in column (weight) order
  std::vector<int> ascending;  // natural[ascending[k]] is the k-th smallest
  bool weights_non_increasing = false;
  bool lambda_non_decreasing = false;
  bool ordering_consistent = false;  // non-increasing weights forced ascending lambda
};

inline SpectrumReport extract_spectrum(const SelfConsistentSolution& sol) {
  SpectrumReport rep;
  rep.natural = sol.eigenvalues;
  rep.ascending.resize(sol.eigenvalues.size());
  std::iota(rep.ascending.begin(), rep.ascending.end(), 0);
  std::stable_sort(rep.ascending.begin(), rep.ascending.end(),
                   [&](int i, int j) { return sol.eigenvalues[i] < sol.eigenvalues[j]; });

  rep.weights_non_increasing = sol.weights.non_increasing();
  rep.lambda_non_decreasing = true;
  for (Eigen::Index j = 1; j < rep.natural.size(); ++j) {
    const double slack = 1e-12 * std::max(1.0, std::abs(rep.natural[j - 1]));
    if (rep.natural[j] < rep.natural[j - 1] - slack) rep.lambda_non_decreasing = false;
  }
  rep.ordering_consistent = !rep.weights_non_increasing || rep.lambda_non_decreasing;
  return rep;
}

}  // namespace spectral
