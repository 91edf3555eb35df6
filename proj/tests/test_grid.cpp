#include "spectral/grid.hpp"
#include "spectral/operator.hpp"
#include "spectral/oracle.hpp"
#include "spectral/potential.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

using namespace spectral;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("1d domain basics", "[grid]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  CHECK(d.dim == 1);
  CHECK(d.size == 3);
  CHECK(d.spacing[0] == Catch::Approx(0.25).epsilon(1e-15));
  CHECK(d.cell_volume == Catch::Approx(0.25).epsilon(1e-15));
  CHECK(d.coordinate(0, 0) == Catch::Approx(0.25));
  CHECK(d.coordinate(0, 2) == Catch::Approx(0.75));
}

TEST_CASE("2d domain basics", "[grid]") {
  const GridDomain d = build_domain(2, {1.0, 1.0}, {4, 4});
  CHECK(d.size == 16);
  CHECK(d.spacing[0] == Catch::Approx(0.2).epsilon(1e-15));
  CHECK(d.spacing[1] == Catch::Approx(0.2).epsilon(1e-15));
  CHECK(d.cell_volume == Catch::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("domain rejects bad arguments", "[grid]") {
  CHECK_THROWS_WITH(build_domain(4, {1.0, 1.0, 1.0, 1.0}, {3, 3, 3, 3}),
                    Catch::Matchers::ContainsSubstring("dim"));
  CHECK_THROWS(build_domain(0, {}, {}));
  CHECK_THROWS(build_domain(1, {-1.0}, {3}));
  CHECK_THROWS(build_domain(1, {0.0}, {3}));
  CHECK_THROWS(build_domain(1, {1.0}, {2}));
  CHECK_THROWS(build_domain(2, {1.0}, {3, 3}));    // extent count mismatch
  CHECK_THROWS(build_domain(2, {1.0, 1.0}, {3}));  // points count mismatch
}

TEST_CASE("linear index runs axis 0 fastest", "[grid]") {
  const GridDomain d = build_domain(2, {1.0, 2.0}, {3, 4});
  REQUIRE(d.size == 12);
  // neighbors along axis 0 are adjacent in memory
  const auto m0 = d.to_multi(0);
  const auto m1 = d.to_multi(1);
  CHECK(m0[0] + 1 == m1[0]);
  CHECK(m0[1] == m1[1]);
  for (Eigen::Index i = 0; i < d.size; ++i) CHECK(d.to_linear(d.to_multi(i)) == i);
}

TEST_CASE("positions combine per-axis coordinates", "[grid]") {
  const GridDomain d = build_domain(2, {1.0, 2.0}, {3, 3});
  // axis 1 spacing = 2/4 = 0.5
  const auto x = d.position(d.to_linear({1, 2}));
  CHECK(x[0] == Catch::Approx(0.5));
  CHECK(x[1] == Catch::Approx(1.5));
}

TEST_CASE("grid function validates against domain", "[grid]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  CHECK_NOTHROW(GridFunction(d, Eigen::VectorXd::Zero(3)));
  CHECK_THROWS(GridFunction(d, Eigen::VectorXd::Zero(4)));
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  bad[1] = std::nan("");
  CHECK_THROWS(GridFunction(d, bad));
}

TEST_CASE("zero potential samples to zeros", "[potential]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  const GridFunction v = realize_potential(ExternalPotential::zero(), d);
  CHECK(v.values.isZero(0.0));
}

TEST_CASE("harmonic potential samples quadratically", "[potential]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  const GridFunction v = realize_potential(ExternalPotential::harmonic({0.5}, 100.0), d);
  CHECK(v.values[0] == Catch::Approx(6.25).epsilon(1e-14));
  CHECK(v.values[1] == Catch::Approx(0.0).margin(1e-14));
  CHECK(v.values[2] == Catch::Approx(6.25).epsilon(1e-14));
}

TEST_CASE("square well samples as indicator", "[potential]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  const GridFunction v =
      realize_potential(ExternalPotential::square_well(-50.0, {0.25}, {0.75}), d);
  CHECK(v.values[0] == -50.0);
  CHECK(v.values[1] == -50.0);
  CHECK(v.values[2] == -50.0);
}

TEST_CASE("square well outside the domain is rejected", "[potential]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  CHECK_THROWS(realize_potential(ExternalPotential::square_well(-50.0, {0.5}, {1.5}), d));
  CHECK_THROWS(ExternalPotential::square_well(-50.0, {0.75}, {0.25}));  // inverted box
  CHECK_THROWS(ExternalPotential::harmonic({0.5}, std::nan("")));
}

TEST_CASE("custom potential needs matching sample count", "[potential]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  CHECK_NOTHROW(realize_potential(ExternalPotential::custom(Eigen::VectorXd::Ones(3)), d));
  CHECK_THROWS(realize_potential(ExternalPotential::custom(Eigen::VectorXd::Ones(4)), d));
}

TEST_CASE("1d laplacian stencil entries", "[operator]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  const SchrodingerOperator a = assemble_operator(d, ExternalPotential::zero());
  const Eigen::MatrixXd m(a.matrix);
  CHECK(m(0, 0) == 32.0);
  CHECK(m(1, 1) == 32.0);
  CHECK(m(2, 2) == 32.0);
  CHECK(m(0, 1) == -16.0);
  CHECK(m(1, 0) == -16.0);
  CHECK(m(0, 2) == 0.0);
}

TEST_CASE("potential shifts only the diagonal", "[operator]") {
  const GridDomain d = build_domain(1, {1.0}, {3});
  const SchrodingerOperator a =
      assemble_operator(d, ExternalPotential::custom(Eigen::VectorXd::Constant(3, 5.0)));
  const Eigen::MatrixXd m(a.matrix);
  CHECK(m(0, 0) == 37.0);
  CHECK(m(1, 1) == 37.0);
  CHECK(m(0, 1) == -16.0);
}

TEST_CASE("assembled operator is exactly symmetric", "[operator]") {
  const GridDomain d = build_domain(3, {1.0, 1.3, 0.7}, {4, 3, 5});
  const SchrodingerOperator a = assemble_operator(d, ExternalPotential::harmonic(
                                                         {0.5, 0.65, 0.35}, 10.0));
  const Eigen::SparseMatrix<double> t = a.matrix.transpose();
  CHECK((Eigen::MatrixXd(a.matrix) - Eigen::MatrixXd(t)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("row sparsity bounded by 2*dim+1", "[operator]") {
  for (int dim = 1; dim <= 3; ++dim) {
    std::vector<double> ext(dim, 1.0);
    std::vector<int> pts(dim, 4);
    const GridDomain d = build_domain(dim, ext, pts);
    const SchrodingerOperator a = assemble_operator(d, ExternalPotential::zero());
    const Eigen::MatrixXd m(a.matrix);
    for (Eigen::Index i = 0; i < d.size; ++i) {
      int nz = 0;
      for (Eigen::Index j = 0; j < d.size; ++j) nz += m(i, j) != 0.0;
      CHECK(nz <= 2 * dim + 1);
    }
  }
}

TEST_CASE("operator and potential must share a domain", "[operator]") {
  const GridDomain d = build_domain(1, {1.0}, {5});
  const GridDomain other = build_domain(1, {1.0}, {7});
  const GridFunction v(other, Eigen::VectorXd::Zero(7));
  CHECK_THROWS(assemble_operator(d, v));
}

TEST_CASE("discrete sine modes are exact eigenvectors", "[operator]") {
  const GridDomain d = build_domain(1, {1.0}, {199});
  const SchrodingerOperator a = assemble_operator(d, ExternalPotential::zero());
  const double h = d.spacing[0];
  for (int m : {1, 2, 7, 50}) {
    Eigen::VectorXd s(d.size);
    for (Eigen::Index i = 0; i < d.size; ++i) s[i] = std::sin(m * kPi * d.coordinate(0, i));
    const double lambda = 4.0 / (h * h) * std::pow(std::sin(m * kPi * h / 2.0), 2);
    const Eigen::VectorXd r = a.matrix * s - lambda * s;
    // rounding floor scales with the stencil magnitude 4/h^2, not with lambda
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * 4.0 / (h * h);
    CHECK(r.norm() <= floor * s.norm());
  }
}

TEST_CASE("ground eigenvalue near pi^2 at n=199", "[operator][oracle]") {
  const GridDomain d = build_domain(1, {1.0}, {199});
  const SchrodingerOperator a = assemble_operator(d, ExternalPotential::zero());
  const DenseEigResult eig = dense_eig(a.matrix);
  CHECK(std::abs(eig.eigenvalues[0] - kPi * kPi) <= 1e-3 * kPi * kPi);
}

TEST_CASE("nonnegative potential keeps the operator positive", "[operator][oracle]") {
  const GridDomain d = build_domain(2, {1.0, 1.0}, {6, 6});
  const SchrodingerOperator a =
      assemble_operator(d, ExternalPotential::harmonic({0.5, 0.5}, 100.0));
  const DenseEigResult eig = dense_eig(a.matrix);
  CHECK(eig.eigenvalues[0] > 0.0);
}

TEST_CASE("weyl growth law on a fine 1d grid", "[operator][oracle]") {
  const GridDomain d = build_domain(1, {1.0}, {400});
  const SchrodingerOperator a = assemble_operator(d, ExternalPotential::zero());
  const DenseEigResult eig = dense_eig(a.matrix);
  for (int m = 1; m <= 40; ++m) {
    const double ratio = eig.eigenvalues[m - 1] / (static_cast<double>(m) * m);
    CHECK(ratio >= 9.0);
    CHECK(ratio <= 10.5);
  }
}

TEST_CASE("discrete l2 helpers use the cell volume", "[grid]") {
  const GridDomain d = build_domain(1, {1.0}, {199});
  Eigen::VectorXd u(d.size);
  for (Eigen::Index i = 0; i < d.size; ++i)
    u[i] = std::sqrt(2.0) * std::sin(kPi * d.coordinate(0, i));
  // sqrt(2) sin(pi x) has exactly unit discrete L2 norm on this grid
  CHECK(norm(d, u) == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(dot(d, u, u) == Catch::Approx(1.0).epsilon(1e-13));
}
