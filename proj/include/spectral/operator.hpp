#pragma once

#include "spectral/grid.hpp"
#include "spectral/potential.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <vector>

namespace spectral {

// Second-order finite-difference Schrodinger operator -Laplacian + V0 on the
// interior nodes of a domain, homogeneous Dirichlet boundary. Symmetric by
// construction: each neighbor pair receives the same coupling coefficient.
struct SchrodingerOperator {
  GridDomain domain;
  Eigen::SparseMatrix<double> matrix;
};

// Dirichlet Laplacian part alone (the `A` of the Poisson problem -Lap V = f).
inline Eigen::SparseMatrix<double> assemble_laplacian(const GridDomain& domain) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(domain.size) * (2 * domain.dim + 1));

  double diag = 0.0;
  for (int a = 0; a < domain.dim; ++a) diag += 2.0 / (domain.spacing[a] * domain.spacing[a]);

  for (Eigen::Index i = 0; i < domain.size; ++i) {
    trip.emplace_back(i, i, diag);
    const auto m = domain.to_multi(i);
    for (int a = 0; a < domain.dim; ++a) {
      const double coupling = -1.0 / (domain.spacing[a] * domain.spacing[a]);
      if (m[a] + 1 < domain.points[a]) {
        auto nb = m;
        nb[a] += 1;
        const Eigen::Index j = domain.to_linear(nb);
        trip.emplace_back(i, j, coupling);
        trip.emplace_back(j, i, coupling);
      }
    }
  }

  Eigen::SparseMatrix<double> L(domain.size, domain.size);
  L.setFromTriplets(trip.begin(), trip.end());
  L.makeCompressed();
  return L;
}

inline SchrodingerOperator assemble_operator(const GridDomain& domain,
                                             const ExternalPotential& potential) {
  SchrodingerOperator op;
  op.domain = domain;
  op.matrix = assemble_laplacian(domain);
  const GridFunction v0 = realize_potential(potential, domain);
  for (Eigen::Index i = 0; i < domain.size; ++i)
    op.matrix.coeffRef(i, i) += v0.values[i];
  op.matrix.makeCompressed();
  return op;
}

inline SchrodingerOperator assemble_operator(const GridDomain& domain,
                                             const GridFunction& potential) {
  if (!potential.domain.same_as(domain))
    throw std::invalid_argument("assemble_operator: potential was realized on a different domain");
  SchrodingerOperator op;
  op.domain = domain;
  op.matrix = assemble_laplacian(domain);
  for (Eigen::Index i = 0; i < domain.size; ++i)
    op.matrix.coeffRef(i, i) += potential.values[i];
  op.matrix.makeCompressed();
  return op;
}

}  // namespace spectral
