#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spectral {

// Occupation weights rho_1..rho_M attached to the frame columns. Generated
// schemes are strictly decreasing; explicit lists only need positivity.
struct WeightSequence {
  Eigen::VectorXd values;

  int count() const { return static_cast<int>(values.size()); }

  bool non_increasing() const {
    for (Eigen::Index j = 1; j < values.size(); ++j)
      if (values[j] > values[j - 1]) return false;
    return true;
  }
};

namespace detail {
inline void check_positive_finite(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (!(v[j] > 0.0) || !std::isfinite(v[j]))
      throw std::invalid_argument(std::string(what) + ": weight " + std::to_string(j + 1) +
                                  " is not strictly positive and finite");
}
}  // namespace detail

inline WeightSequence geometric_weights(double alpha, int count) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("geometric_weights: ratio must lie in (0,1)");
  if (count < 1) throw std::invalid_argument("geometric_weights: count must be at least 1");
  WeightSequence w;
  w.values.resize(count);
  double r = 1.0;
  for (int j = 0; j < count; ++j) {
    r *= alpha;
    w.values[j] = r;
  }
  detail::check_positive_finite(w.values, "geometric_weights");
  return w;
}

// rho_j = j^{-p}. The summability threshold grows with dimension: the trace
// functional needs sum_j j^{2/dim} rho_j < infinity, hence p > 1 + 2/dim.
inline WeightSequence power_weights(double exponent, int count, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("power_weights: dim must be 1, 2 or 3");
  const double threshold = 1.0 + 2.0 / dim;
  if (!(exponent > threshold))
    throw std::invalid_argument("power_weights: exponent must exceed 1 + 2/dim = " +
                                std::to_string(threshold));
  if (count < 1) throw std::invalid_argument("power_weights: count must be at least 1");
  WeightSequence w;
  w.values.resize(count);
  for (int j = 0; j < count; ++j) w.values[j] = std::pow(j + 1.0, -exponent);
  detail::check_positive_finite(w.values, "power_weights");
  return w;
}

// rho_j = exp(-beta * lambda_j) over a given ascending positive spectrum.
inline WeightSequence boltzmann_weights(const Eigen::VectorXd& base_eigenvalues, double beta,
                                        int count) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("boltzmann_weights: beta must be positive and finite");
  if (count < 1) throw std::invalid_argument("boltzmann_weights: count must be at least 1");
  if (base_eigenvalues.size() < count)
    throw std::invalid_argument("boltzmann_weights: need at least `count` base eigenvalues");
  for (Eigen::Index j = 0; j < count; ++j) {
    if (!(base_eigenvalues[j] > 0.0))
      throw std::invalid_argument("boltzmann_weights: base eigenvalues must be positive");
    if (j > 0 && base_eigenvalues[j] < base_eigenvalues[j - 1])
      throw std::invalid_argument("boltzmann_weights: base eigenvalues must be ascending");
  }
  WeightSequence w;
  w.values.resize(count);
  for (int j = 0; j < count; ++j) w.values[j] = std::exp(-beta * base_eigenvalues[j]);
  detail::check_positive_finite(w.values, "boltzmann_weights");
  return w;
}

inline WeightSequence explicit_weights(Eigen::VectorXd values) {
  detail::check_positive_finite(values, "explicit_weights");
  WeightSequence w;
  w.values = std::move(values);
  return w;
}

// Maximal run of (relatively) equal weights: columns inside one block may be
// freely recombined without changing the trace functional.
struct DegenerateBlock {
  int start = 0;  // zero-based column index
  int size = 1;
};

inline std::vector<DegenerateBlock> detect_degeneracy(const WeightSequence& w,
                                                      double rel_tol = 1e-12) {
  if (!(rel_tol >= 0.0)) throw std::invalid_argument("detect_degeneracy: tolerance must be >= 0");
  std::vector<DegenerateBlock> blocks;
  const int m = w.count();
  int start = 0;
  for (int j = 1; j <= m; ++j) {
    bool tied = false;
    if (j < m) {
      const double a = w.values[j - 1], b = w.values[j];
      tied = std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
    }
    if (!tied) {
      blocks.push_back({start, j - start});
      start = j;
    }
  }
  return blocks;
}

// T(M) = M^{2/dim} * rho_M. A usable truncation has T decreasing in M; the
// reports surface it so under-resolved weight tails are visible.
inline double tail_diagnostic(const WeightSequence& w, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("tail_diagnostic: dim must be 1, 2 or 3");
  if (w.count() == 0) return 0.0;
  const double m = static_cast<double>(w.count());
  return std::pow(m, 2.0 / dim) * w.values[w.count() - 1];
}

}  // namespace spectral
