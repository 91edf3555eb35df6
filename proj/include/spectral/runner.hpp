#pragma once

#include "spectral/config.hpp"
#include "spectral/functional.hpp"
#include "spectral/oracle.hpp"
#include "spectral/solvers.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spectral {

struct ProblemSetup {
  GridDomain domain;
  SchrodingerOperator op;
  WeightSequence weights;
  SolverOptions solver_options;
  HomotopyOptions homotopy_options;
};

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline ExternalPotential build_potential(const ExperimentConfig& cfg) {
  if (cfg.potential == "zero") return ExternalPotential::zero();
  if (cfg.potential == "harmonic")
    return ExternalPotential::harmonic(cfg.potential_center, cfg.potential_stiffness);
  if (cfg.potential == "square_well")
    return ExternalPotential::square_well(cfg.potential_depth, cfg.potential_well_lo,
                                          cfg.potential_well_hi);
  // custom: whitespace-separated samples, one per interior grid point
  std::ifstream in(cfg.potential_file);
  if (!in) throw ConfigError("config: cannot open potential_file '" + cfg.potential_file + "'");
  std::vector<double> vals;
  double x = 0.0;
  while (in >> x) vals.push_back(x);
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
  return ExternalPotential::custom(std::move(v));
}

inline WeightSequence build_weights(const ExperimentConfig& cfg, const SchrodingerOperator& op) {
  try {
    if (cfg.rho_scheme == "geometric") return geometric_weights(cfg.rho_ratio, cfg.rho_count);
    if (cfg.rho_scheme == "power") return power_weights(cfg.rho_exponent, cfg.rho_count, cfg.dim);
    if (cfg.rho_scheme == "explicit") {
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(cfg.rho_values.data(),
                                                            cfg.rho_values.size());
      return explicit_weights(std::move(v));
    }
    // boltzmann: base spectrum from the reference eigendecomposition of A
    if (op.domain.size > 2048)
      throw ConfigError("config: rho_scheme = boltzmann needs a dense eigensolve, capped at 2048 "
                        "grid points");
    const DenseEigResult eig = dense_eig(op.matrix);
    return boltzmann_weights(eig.eigenvalues, cfg.rho_beta, cfg.rho_count);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline SolverOptions build_solver_options(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.max_iterations = cfg.max_iterations;
  o.gradient_tolerance = cfg.gradient_tolerance;
  o.armijo = cfg.line_search == "armijo";
  o.armijo_c1 = cfg.armijo_c1;
  o.armijo_backtrack = cfg.armijo_backtrack;
  o.fixed_step = cfg.fixed_step;
  o.reorthonormalize_every = cfg.reorthonormalize_every;
  o.seed = cfg.seed;
  o.restarts = cfg.restarts;
  o.poisson_tolerance = cfg.poisson_tolerance;
  o.degeneracy_tolerance = cfg.degeneracy_tolerance;
  return o;
}

inline HomotopyOptions build_homotopy_options(const ExperimentConfig& cfg) {
  HomotopyOptions o;
  o.theta_steps = cfg.theta_steps;
  o.damping = cfg.damping;
  o.tolerance = cfg.scf_tolerance;
  o.max_stage_iterations = cfg.scf_max_stage_iterations;
  o.poisson_tolerance = cfg.poisson_tolerance;
  return o;
}

}  // namespace detail

inline ProblemSetup build_problem(const ExperimentConfig& cfg) {
  validate_config(cfg);
  ProblemSetup p;
  try {
    p.domain = build_domain(cfg.dim, cfg.extent, cfg.points);
    p.op = assemble_operator(p.domain, detail::build_potential(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  p.weights = detail::build_weights(cfg, p.op);
  if (p.weights.count() > p.domain.size)
    throw ConfigError("config: more weights than grid points");
  p.solver_options = detail::build_solver_options(cfg);
  p.homotopy_options = detail::build_homotopy_options(cfg);
  return p;
}

struct RunOutcome {
  nlohmann::ordered_json report;
  std::string csv;
  std::string history_csv;
  std::string potential_csv;
  bool converged = false;
  std::string summary;  // one line for the console
};

namespace detail {

inline nlohmann::ordered_json json_ordering(const SpectrumReport& rep) {
  return {{"weights_non_increasing", rep.weights_non_increasing},
          {"lambda_non_decreasing", rep.lambda_non_decreasing},
          {"consistent", rep.ordering_consistent}};
}

inline nlohmann::ordered_json json_solution(const SelfConsistentSolution& sol, bool coupled) {
  nlohmann::ordered_json j;
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["eigenvalues"] = to_std(sol.eigenvalues);
  j["residuals"] = to_std(sol.residuals);
  j["residual_max"] = sol.residuals.size() > 0 ? sol.residuals.maxCoeff() : 0.0;
  j["j0_final"] = sol.j0;
  j["j1_final"] = sol.j1;
  j["j_final"] = sol.j_total;
  j["gradient_norm"] = sol.gradient_norm;
  j["gradient_scaled_norm"] = sol.gradient_scaled_norm;
  j["gram_error"] = sol.gram_error;
  j["gram_drift_max"] = sol.gram_drift_max;
  j["ordering"] = json_ordering(extract_spectrum(sol));
  j["functional_history"] = sol.functional_history;
  if (coupled) {
    j["potential"] = to_std(sol.hartree);
    j["poisson_residual"] = sol.poisson_residual;
  }
  return j;
}

inline nlohmann::ordered_json json_homotopy(const HomotopySolution& sol) {
  nlohmann::ordered_json j;
  j["converged"] = sol.converged;
  j["eigenvalues"] = to_std(sol.eigenvalues);
  j["potential"] = to_std(sol.potential);
  j["fixed_point_residual"] = sol.fixed_point_residual;
  nlohmann::ordered_json path = nlohmann::ordered_json::array();
  for (const auto& s : sol.path)
    path.push_back({{"theta", s.theta}, {"iterations", s.iterations},
                    {"update_delta", s.update_delta}});
  j["theta_path"] = std::move(path);
  return j;
}

inline std::string csv_table(const WeightSequence& w, const Eigen::VectorXd& lambdas,
                             const Eigen::VectorXd& residuals, const nlohmann::ordered_json& top) {
  std::string out =
      "index,rho,lambda,residual,j0,j1,j_total,converged,iterations,fixed_point_residual,"
      "potential_linf_gap,eigenvalue_gap_max\n";
  for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
    out += std::to_string(j + 1) + ',' + fmt_double(w.values[j]) + ',' +
           fmt_double(lambdas[j]) + ',';
    if (residuals.size() > j) out += fmt_double(residuals[j]);
    out += ",,,,,,,,\n";
  }
  const auto opt = [&](const char* key) {
    return top.contains(key) ? fmt_double(top[key].get<double>()) : std::string();
  };
  out += "summary,,,," + opt("j0_final") + ',' + opt("j1_final") + ',' + opt("j_final") + ',';
  out += top.contains("converged") ? (top["converged"].get<bool>() ? "1" : "0") : "";
  out += ',';
  out += top.contains("iterations") ? std::to_string(top["iterations"].get<int>()) : "";
  out += ',' + opt("fixed_point_residual") + ',' + opt("potential_linf_gap") + ',' +
         opt("eigenvalue_gap_max") + "\n";
  return out;
}

inline std::string csv_history(const std::vector<double>& history) {
  std::string out = "iteration,j_total\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    out += std::to_string(i) + ',' + fmt_double(history[i]) + '\n';
  return out;
}

inline std::string csv_potential(const GridDomain& domain, const Eigen::VectorXd& v) {
  std::string out;
  for (int a = 0; a < domain.dim; ++a) out += "x" + std::to_string(a) + ",";
  out += "V\n";
  for (Eigen::Index i = 0; i < domain.size; ++i) {
    const auto x = domain.position(i);
    for (int a = 0; a < domain.dim; ++a) out += fmt_double(x[a]) + ",";
    out += fmt_double(v[i]) + '\n';
  }
  return out;
}

}  // namespace detail

inline RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const ProblemSetup p = build_problem(cfg);
  RunOutcome out;

  nlohmann::ordered_json& j = out.report;
  j["schema"] = "1";
  j["mode"] = cfg.mode;
  j["dim"] = cfg.dim;
  j["extent"] = cfg.extent;
  j["points"] = cfg.points;
  j["potential"] = cfg.potential;
  j["seed"] = cfg.seed;
  j["weights"] = {{"scheme", cfg.rho_scheme},
                  {"values", detail::to_std(p.weights.values)},
                  {"tail_diagnostic", tail_diagnostic(p.weights, cfg.dim)},
                  {"non_increasing", p.weights.non_increasing()}};

  char summary[256];

  if (cfg.mode == "linear" || cfg.mode == "coupled") {
    const bool coupled = cfg.mode == "coupled";
    const SelfConsistentSolution sol =
        coupled ? minimize_coupled(p.op, p.weights, p.solver_options)
                : minimize_linear(p.op, p.weights, p.solver_options);
    j.update(detail::json_solution(sol, coupled));
    out.converged = sol.converged;
    out.csv = detail::csv_table(p.weights, sol.eigenvalues, sol.residuals, j);
    out.history_csv = detail::csv_history(sol.functional_history);
    if (coupled) out.potential_csv = detail::csv_potential(p.domain, sol.hartree);
    std::snprintf(summary, sizeof summary,
                  "%s: converged=%d iterations=%d J=%.12g residual_max=%.3g", cfg.mode.c_str(),
                  sol.converged, sol.iterations, sol.j_total,
                  sol.residuals.size() ? sol.residuals.maxCoeff() : 0.0);
  } else if (cfg.mode == "scf-1d") {
    const HomotopySolution sol = scf_homotopy_1d(p.op, p.weights, p.homotopy_options);
    j.update(detail::json_homotopy(sol));
    out.converged = sol.converged;
    out.csv = detail::csv_table(p.weights, sol.eigenvalues, Eigen::VectorXd(), j);
    out.potential_csv = detail::csv_potential(p.domain, sol.potential);
    std::snprintf(summary, sizeof summary, "scf-1d: converged=%d fixed_point_residual=%.3g",
                  sol.converged, sol.fixed_point_residual);
  } else {  // cross-validate
    const SelfConsistentSolution svar = minimize_coupled(p.op, p.weights, p.solver_options);
    const HomotopySolution sfix = scf_homotopy_1d(p.op, p.weights, p.homotopy_options);

    const double v_gap = (svar.hartree - sfix.potential).cwiseAbs().maxCoeff();
    // Compare spectra in ascending order; the variational side reports
    // eigenvalues in column (weight) order.
    Eigen::VectorXd lam_var = svar.eigenvalues;
    std::sort(lam_var.data(), lam_var.data() + lam_var.size());
    const double lam_gap = (lam_var - sfix.eigenvalues).cwiseAbs().maxCoeff();

    j["coupled"] = detail::json_solution(svar, true);
    j["scf"] = detail::json_homotopy(sfix);
    j["potential_linf_gap"] = v_gap;
    j["eigenvalue_gap_max"] = lam_gap;
    j["converged"] = svar.converged && sfix.converged;
    out.converged = svar.converged && sfix.converged;
    out.csv = detail::csv_table(p.weights, svar.eigenvalues, svar.residuals, j);
    out.history_csv = detail::csv_history(svar.functional_history);
    out.potential_csv = detail::csv_potential(p.domain, svar.hartree);
    std::snprintf(summary, sizeof summary,
                  "cross-validate: converged=%d potential_linf_gap=%.3g eigenvalue_gap_max=%.3g",
                  out.converged, v_gap, lam_gap);
  }

  out.summary = summary;
  return out;
}

// --- output files ----------------------------------------------------------

inline void check_writable(const std::string& path) {
  if (path.empty()) return;
  const std::string probe = path + ".tmp";
  std::ofstream f(probe, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("output path is not writable: " + path);
  f.close();
  std::remove(probe.c_str());
}

inline void check_outputs_writable(const ExperimentConfig& cfg) {
  check_writable(cfg.output_json);
  check_writable(cfg.output_csv);
  check_writable(cfg.output_history_csv);
  check_writable(cfg.output_potential_csv);
}

// Write-then-rename so that a crash or a full disk never leaves a truncated
// report behind the final name.
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    f << content;
    f.flush();
    if (!f) {
      std::remove(tmp.c_str());
      throw std::runtime_error("write failed for '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

inline std::vector<std::string> write_outputs(const ExperimentConfig& cfg, const RunOutcome& out) {
  std::vector<std::string> written;
  if (!cfg.output_json.empty()) {
    atomic_write(cfg.output_json, out.report.dump(2) + "\n");
    written.push_back(cfg.output_json);
  }
  if (!cfg.output_csv.empty()) {
    atomic_write(cfg.output_csv, out.csv);
    written.push_back(cfg.output_csv);
  }
  if (!cfg.output_history_csv.empty()) {
    atomic_write(cfg.output_history_csv, out.history_csv);
    written.push_back(cfg.output_history_csv);
  }
  if (!cfg.output_potential_csv.empty()) {
    atomic_write(cfg.output_potential_csv, out.potential_csv);
    written.push_back(cfg.output_potential_csv);
  }
  return written;
}

// --- verify ---------------------------------------------------------------

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOutcome {
  std::vector<VerifyCheck> checks;
  bool all_pass = true;

  void add(const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
    all_pass = all_pass && pass;
  }
};

namespace detail {

inline std::string num(double x) { return fmt_double(x); }

inline void verify_solution_invariants(VerifyOutcome& v, const SelfConsistentSolution& sol,
                                       bool coupled) {
  const double rmax = sol.residuals.size() ? sol.residuals.maxCoeff() : 0.0;
  v.add("converged", sol.converged, "iterations=" + std::to_string(sol.iterations));
  v.add("stationarity residuals <= 1e-6", rmax <= 1e-6, "max=" + num(rmax));
  v.add("frame orthonormal (gram error <= 1e-8)", sol.gram_error <= 1e-8,
        "gram_error=" + num(sol.gram_error));
  const SpectrumReport rep = extract_spectrum(sol);
  v.add("weight/eigenvalue ordering consistent", rep.ordering_consistent, "");
  bool monotone = true;
  double worst = 0.0;
  for (std::size_t i = 1; i < sol.functional_history.size(); ++i) {
    const double rise = sol.functional_history[i] - sol.functional_history[i - 1];
    const double slack = 1e-10 * std::max(1.0, std::abs(sol.functional_history[i - 1]));
    if (rise > slack) {
      monotone = false;
      worst = std::max(worst, rise);
    }
  }
  v.add("functional history non-increasing", monotone,
        monotone ? "" : "worst rise=" + num(worst));
  if (coupled) {
    const double vmin = sol.hartree.size() ? sol.hartree.minCoeff() : 0.0;
    v.add("field non-negative", vmin >= 0.0, "min V=" + num(vmin));
    v.add("poisson residual <= 1e-8", sol.poisson_residual <= 1e-8,
          "residual=" + num(sol.poisson_residual));
  }
}

}  // namespace detail

// Independent cross-checks sized to the configured problem: reference
// eigendecompositions where dense solves are feasible, finite-difference
// gradient probes, and the solver's own postcondition checks.
inline VerifyOutcome verify_experiment(const ExperimentConfig& cfg) {
  const ProblemSetup p = build_problem(cfg);
  VerifyOutcome v;

  if (cfg.mode == "linear") {
    const SelfConsistentSolution sol = minimize_linear(p.op, p.weights, p.solver_options);
    detail::verify_solution_invariants(v, sol, false);
    if (p.domain.size <= 512) {
      const DenseEigResult eig = dense_eig(p.op.matrix);
      const SpectrumReport rep = extract_spectrum(sol);
      double worst = 0.0;
      for (int k = 0; k < p.weights.count(); ++k) {
        const double lhs = sol.eigenvalues[rep.ascending[k]];
        const double ref = eig.eigenvalues[k];
        worst = std::max(worst, std::abs(lhs - ref) / std::max(1.0, std::abs(ref)));
      }
      v.add("eigenvalues match dense reference to 1e-8", worst <= 1e-8, "max rel err=" +
            detail::num(worst));
      double j_ref = 0.0;
      Eigen::VectorXd rho_sorted = p.weights.values;
      std::sort(rho_sorted.data(), rho_sorted.data() + rho_sorted.size(),
                std::greater<double>());
      for (int k = 0; k < p.weights.count(); ++k) j_ref += rho_sorted[k] * eig.eigenvalues[k];
      v.add("J0 equals sorted-pairing reference to 1e-9",
            std::abs(sol.j0 - j_ref) <= 1e-9 * std::max(1.0, std::abs(j_ref)),
            "J0=" + detail::num(sol.j0) + " ref=" + detail::num(j_ref));
    }
  } else if (cfg.mode == "coupled" || cfg.mode == "cross-validate") {
    const SelfConsistentSolution sol = minimize_coupled(p.op, p.weights, p.solver_options);
    detail::verify_solution_invariants(v, sol, true);

    // Closure: rebuild the field from the final frame and re-evaluate.
    const PoissonSolver solver(p.domain, p.solver_options.poisson_tolerance);
    const CoupledEvaluation ev = evaluate(sol.frame, p.op.matrix, p.weights, &solver);
    const double lam_gap =
        (ev.value.per_state_rayleigh - sol.eigenvalues).cwiseAbs().maxCoeff();
    v.add("re-evaluation reproduces eigenvalues to 1e-10", lam_gap <= 1e-10,
          "gap=" + detail::num(lam_gap));

    // Gradient versus central differences along random directions.
    const auto j_of = [&](const Frame& f) {
      return evaluate(f, p.op.matrix, p.weights, &solver).value.total;
    };
    const GradientReport g = gradient_from(sol.frame, p.weights, ev);
    double fd_worst = 0.0;
    for (int probe = 0; probe < 3; ++probe) {
      const SkewDirection d = random_direction(sol.frame, cfg.seed + 1000 + probe);
      const double fd = fd_directional_derivative(j_of, sol.frame, d, 1e-4);
      const double pairing = pair_tangent(sol.frame, g.gradient, tangent(sol.frame, d));
      fd_worst = std::max(fd_worst,
                          std::abs(fd - pairing) / std::max({std::abs(fd), std::abs(pairing), 1.0}));
    }
    v.add("gradient matches finite differences to 1e-5", fd_worst <= 1e-5,
          "max rel err=" + detail::num(fd_worst));

    if (cfg.mode == "cross-validate") {
      const HomotopySolution sfix = scf_homotopy_1d(p.op, p.weights, p.homotopy_options);
      v.add("fixed-point stages converged", sfix.converged, "");
      const double v_gap = (sol.hartree - sfix.potential).cwiseAbs().maxCoeff();
      Eigen::VectorXd lam_var = sol.eigenvalues;
      std::sort(lam_var.data(), lam_var.data() + lam_var.size());
      const double e_gap = (lam_var - sfix.eigenvalues).cwiseAbs().maxCoeff();
      v.add("descent and fixed-point fields agree to 1e-4", v_gap <= 1e-4,
            "linf gap=" + detail::num(v_gap));
      v.add("descent and fixed-point spectra agree to 1e-5", e_gap <= 1e-5,
            "max gap=" + detail::num(e_gap));
    }
  } else {  // scf-1d
    const HomotopySolution sol = scf_homotopy_1d(p.op, p.weights, p.homotopy_options);
    v.add("fixed-point stages converged", sol.converged, "");
    const double res_cap = 10.0 * p.homotopy_options.tolerance / p.homotopy_options.damping;
    v.add("fixed-point residual small", sol.fixed_point_residual <= res_cap,
          "residual=" + detail::num(sol.fixed_point_residual));
    const double vmin = sol.potential.minCoeff();
    v.add("field non-negative", vmin >= 0.0, "min V=" + detail::num(vmin));
    bool ascending = true;
    for (Eigen::Index k = 1; k < sol.eigenvalues.size(); ++k)
      ascending = ascending && sol.eigenvalues[k] >= sol.eigenvalues[k - 1];
    v.add("reported spectrum ascending", ascending, "");
    const double mass = p.domain.cell_volume * sol.states.cols.cwiseAbs2().sum();
    v.add("states normalized", std::abs(mass - p.weights.count()) <= 1e-8 * p.weights.count(),
          "total mass=" + detail::num(mass));
  }

  return v;
}

}  // namespace spectral
