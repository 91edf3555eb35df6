#pragma once

#include "spectral/grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace spectral {

// External potential prescriptions for the operator -Laplacian + V0.
// `harmonic` is stiffness * |x - center|^2; `square_well` is `depth` inside the
// closed sub-box [lo, hi] and 0 outside; `custom` carries explicit samples.
struct ExternalPotential {
  enum class Kind { zero, harmonic, square_well, custom };

  Kind kind = Kind::zero;
  std::array<double, 3> center{};       // harmonic
  double stiffness = 0.0;               // harmonic
  double depth = 0.0;                   // square_well
  std::array<double, 3> well_lo{};      // square_well
  std::array<double, 3> well_hi{};      // square_well
  Eigen::VectorXd samples;              // custom

  static ExternalPotential zero() { return ExternalPotential{}; }

  static ExternalPotential harmonic(const std::vector<double>& center, double stiffness) {
    ExternalPotential p;
    p.kind = Kind::harmonic;
    if (center.size() > 3)
      throw std::invalid_argument("harmonic potential: center has more than 3 entries");
    for (std::size_t a = 0; a < center.size(); ++a) {
      if (!std::isfinite(center[a]))
        throw std::invalid_argument("harmonic potential: center must be finite");
      p.center[a] = center[a];
    }
    if (!std::isfinite(stiffness))
      throw std::invalid_argument("harmonic potential: stiffness must be finite");
    p.stiffness = stiffness;
    return p;
  }

  static ExternalPotential square_well(double depth, const std::vector<double>& lo,
                                       const std::vector<double>& hi) {
    ExternalPotential p;
    p.kind = Kind::square_well;
    if (!std::isfinite(depth))
      throw std::invalid_argument("square_well potential: depth must be finite");
    if (lo.size() != hi.size() || lo.size() > 3)
      throw std::invalid_argument("square_well potential: lo/hi must have matching size <= 3");
    p.depth = depth;
    for (std::size_t a = 0; a < lo.size(); ++a) {
      if (!(lo[a] < hi[a]))
        throw std::invalid_argument("square_well potential: requires lo < hi on every axis");
      p.well_lo[a] = lo[a];
      p.well_hi[a] = hi[a];
    }
    return p;
  }

  static ExternalPotential custom(Eigen::VectorXd samples) {
    ExternalPotential p;
    p.kind = Kind::custom;
    if (!samples.allFinite())
      throw std::invalid_argument("custom potential: samples must be finite");
    p.samples = std::move(samples);
    return p;
  }
};

inline GridFunction realize_potential(const ExternalPotential& p, const GridDomain& domain) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(domain.size);
  switch (p.kind) {
    case ExternalPotential::Kind::zero:
      break;
    case ExternalPotential::Kind::harmonic:
      for (Eigen::Index i = 0; i < domain.size; ++i) {
        const auto x = domain.position(i);
        double r2 = 0.0;
        for (int a = 0; a < domain.dim; ++a) {
          const double d = x[a] - p.center[a];
          r2 += d * d;
        }
        v[i] = p.stiffness * r2;
      }
      break;
    case ExternalPotential::Kind::square_well:
      for (int a = 0; a < domain.dim; ++a) {
        if (p.well_lo[a] < 0.0 || p.well_hi[a] > domain.extent[a])
          throw std::invalid_argument("square_well potential: sub-box leaves the domain on axis " +
                                      std::to_string(a));
      }
      for (Eigen::Index i = 0; i < domain.size; ++i) {
        const auto x = domain.position(i);
        bool inside = true;
        for (int a = 0; a < domain.dim; ++a)
          inside = inside && x[a] >= p.well_lo[a] && x[a] <= p.well_hi[a];
        if (inside) v[i] = p.depth;
      }
      break;
    case ExternalPotential::Kind::custom:
      if (p.samples.size() != domain.size)
        throw std::invalid_argument("custom potential: expected " + std::to_string(domain.size) +
                                    " samples, got " + std::to_string(p.samples.size()));
      v = p.samples;
      break;
  }
  return GridFunction(domain, std::move(v));
}

}  // namespace spectral
