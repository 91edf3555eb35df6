#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectral {

// Uniform tensor grid of interior points on the box (0,L_0) x ... x (0,L_{d-1})
// with homogeneous Dirichlet boundary. Boundary points are not stored; axis a
// has points[a] interior nodes at coordinates (i+1)*spacing[a], i = 0..points[a]-1,
// with spacing[a] = extent[a] / (points[a] + 1).
//
// Linear indexing runs axis 0 fastest: idx = i0 + points[0]*(i1 + points[1]*i2).
struct GridDomain {
  int dim = 0;
  std::array<double, 3> extent{};
  std::array<int, 3> points{};
  std::array<double, 3> spacing{};
  Eigen::Index size = 0;     // total interior point count
  double cell_volume = 0.0;  // quadrature weight of a single node

  std::array<int, 3> to_multi(Eigen::Index idx) const {
    std::array<int, 3> m{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      m[a] = static_cast<int>(idx % points[a]);
      idx /= points[a];
    }
    return m;
  }

  Eigen::Index to_linear(const std::array<int, 3>& m) const {
    Eigen::Index idx = 0;
    for (int a = dim - 1; a >= 0; --a) idx = idx * points[a] + m[a];
    return idx;
  }

  double coordinate(int axis, int index) const {
    return (index + 1) * spacing[axis];
  }

  // Coordinates of the interior node behind a linear index.
  std::array<double, 3> position(Eigen::Index idx) const {
    const auto m = to_multi(idx);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) x[a] = coordinate(a, m[a]);
    return x;
  }

  bool same_as(const GridDomain& other) const {
    if (dim != other.dim) return false;
    for (int a = 0; a < dim; ++a)
      if (extent[a] != other.extent[a] || points[a] != other.points[a]) return false;
    return true;
  }
};

inline GridDomain build_domain(int dim, const std::vector<double>& extent,
                               const std::vector<int>& points) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("build_domain: dim must be 1, 2 or 3, got " +
                                std::to_string(dim));
  if (static_cast<int>(extent.size()) != dim || static_cast<int>(points.size()) != dim)
    throw std::invalid_argument("build_domain: extent/points must each have dim entries");

  GridDomain g;
  g.dim = dim;
  g.size = 1;
  g.cell_volume = 1.0;
  for (int a = 0; a < dim; ++a) {
    if (!(extent[a] > 0.0) || !std::isfinite(extent[a]))
      throw std::invalid_argument("build_domain: extent[" + std::to_string(a) +
                                  "] must be positive and finite");
    if (points[a] < 3)
      throw std::invalid_argument("build_domain: points[" + std::to_string(a) +
                                  "] must be at least 3");
    g.extent[a] = extent[a];
    g.points[a] = points[a];
    g.spacing[a] = extent[a] / (points[a] + 1);
    g.size *= points[a];
    g.cell_volume *= g.spacing[a];
  }
  return g;
}

// Samples of a scalar field at the interior nodes of a domain.
struct GridFunction {
  GridDomain domain;
  Eigen::VectorXd values;

  GridFunction() = default;
  GridFunction(const GridDomain& d, Eigen::VectorXd v) : domain(d), values(std::move(v)) {
    if (values.size() != domain.size)
      throw std::invalid_argument("GridFunction: expected " + std::to_string(domain.size) +
                                  " samples, got " + std::to_string(values.size()));
    if (!values.allFinite())
      throw std::invalid_argument("GridFunction: samples must be finite");
  }
};

// Discrete L2 inner product <u,v> = cell_volume * sum_i u_i v_i.
inline double dot(const GridDomain& d, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return d.cell_volume * u.dot(v);
}

inline double norm(const GridDomain& d, const Eigen::VectorXd& u) {
  return std::sqrt(d.cell_volume) * u.norm();
}

}  // namespace spectral
