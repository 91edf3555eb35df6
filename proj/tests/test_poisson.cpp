#include "spectral/frame.hpp"
#include "spectral/grid.hpp"
#include "spectral/poisson.hpp"
#include "spectral/weights.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace spectral;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Fourier-series reference for the unit-square torsion problem -lap V = 1:
// V(x,y) = sum_{odd j,k} 16 sin(j pi x) sin(k pi y) / (pi^4 j k (j^2+k^2)).
double torsion_value(double x, double y) {
  double s = 0.0;
  for (int j = 99; j >= 1; j -= 2)
    for (int k = 99; k >= 1; k -= 2)
      s += 16.0 * std::sin(j * kPi * x) * std::sin(k * kPi * y) /
           (std::pow(kPi, 4) * j * k * (j * j + k * k));
  return s;
}
}  // namespace

TEST_CASE("1d unit source reproduces the parabola nodally", "[poisson]") {
  const GridDomain d = build_domain(1, {1.0}, {199});
  const Eigen::VectorXd f = Eigen::VectorXd::Ones(d.size);
  const Eigen::VectorXd v = solve_poisson(d, f, 1e-10);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d.size; ++i) {
    const double x = d.coordinate(0, i);
    worst = std::max(worst, std::abs(v[i] - 0.5 * x * (1.0 - x)));
  }
  CHECK(worst <= 2e-5);
  // the standard stencil is nodally exact for this data, so the real gap is
  // solver tolerance only
  CHECK(worst <= 1e-11);
}

TEST_CASE("zero source gives the zero field", "[poisson]") {
  const GridDomain d = build_domain(1, {1.0}, {17});
  const Eigen::VectorXd v = solve_poisson(d, Eigen::VectorXd::Zero(d.size), 1e-10);
  CHECK(v.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("2d unit source peaks at the torsion value", "[poisson]") {
  const GridDomain d = build_domain(2, {1.0, 1.0}, {49, 49});
  const Eigen::VectorXd v = solve_poisson(d, Eigen::VectorXd::Ones(d.size), 1e-10);
  const double peak = v.maxCoeff();
  const double ref = torsion_value(0.5, 0.5);
  CHECK(std::abs(peak - ref) <= 0.01 * ref);
}

TEST_CASE("solver residual postcondition holds", "[poisson]") {
  const GridDomain d = build_domain(2, {1.0, 1.3}, {12, 9});
  NormalSampler s(5);
  Eigen::VectorXd f(d.size);
  for (Eigen::Index i = 0; i < d.size; ++i) f[i] = s();
  const PoissonSolver solver(d, 1e-10);
  const Eigen::VectorXd v = solver.solve(f);
  const Eigen::VectorXd lap = assemble_laplacian(d) * v;
  CHECK((lap - f).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, f.cwiseAbs().maxCoeff()));
}

TEST_CASE("solve is linear in the source", "[poisson]") {
  const GridDomain d = build_domain(1, {1.0}, {63});
  NormalSampler s(8);
  Eigen::VectorXd f(d.size), g(d.size);
  for (Eigen::Index i = 0; i < d.size; ++i) {
    f[i] = s();
    g[i] = s();
  }
  const PoissonSolver solver(d, 1e-10);
  const Eigen::VectorXd combo = solver.solve(2.5 * f - 1.25 * g);
  const Eigen::VectorXd parts = 2.5 * solver.solve(f) - 1.25 * solver.solve(g);
  CHECK((combo - parts).cwiseAbs().maxCoeff() <= 1e-10 * combo.cwiseAbs().maxCoeff());
}

TEST_CASE("maximum principle holds exactly for random nonnegative sources", "[poisson]") {
  const GridDomain d = build_domain(1, {1.0}, {49});
  const PoissonSolver solver(d, 1e-10);
  for (int trial = 0; trial < 100; ++trial) {
    NormalSampler s(100 + trial);
    Eigen::VectorXd f(d.size);
    for (Eigen::Index i = 0; i < d.size; ++i) f[i] = std::abs(s());
    const Eigen::VectorXd v = solver.solve(f);
    REQUIRE(v.minCoeff() >= 0.0);
  }
}

TEST_CASE("sup bound against the 1d and 2d torsion constants", "[poisson]") {
  // For -lap V = f with 0 <= f <= ||f||_inf, comparison gives
  // ||V||_inf <= ||f||_inf * max(torsion solution of the domain).
  const GridDomain d1 = build_domain(1, {1.0}, {99});
  const PoissonSolver solver1(d1, 1e-10);
  const GridDomain d2 = build_domain(2, {1.0, 1.0}, {31, 31});
  const PoissonSolver solver2(d2, 1e-10);
  const double cap1 = 0.125 * 1.05;
  const double cap2 = torsion_value(0.5, 0.5) * 1.05;
  for (int trial = 0; trial < 10; ++trial) {
    NormalSampler s(500 + trial);
    Eigen::VectorXd f1(d1.size), f2(d2.size);
    for (Eigen::Index i = 0; i < d1.size; ++i) f1[i] = std::abs(s());
    for (Eigen::Index i = 0; i < d2.size; ++i) f2[i] = std::abs(s());
    CHECK(solver1.solve(f1).cwiseAbs().maxCoeff() <= cap1 * f1.maxCoeff());
    CHECK(solver2.solve(f2).cwiseAbs().maxCoeff() <= cap2 * f2.maxCoeff());
  }
}

TEST_CASE("dirichlet energy matches the duality form", "[poisson]") {
  const GridDomain d = build_domain(2, {1.0, 1.0}, {15, 15});
  NormalSampler s(9);
  Eigen::VectorXd f(d.size);
  for (Eigen::Index i = 0; i < d.size; ++i) f[i] = s();
  const PoissonSolver solver(d, 1e-10);
  const Eigen::VectorXd v = solver.solve(f);
  const double grad_form = dirichlet_energy(d, v);
  const double dual_form = 0.5 * d.cell_volume * f.dot(v);
  CHECK(std::abs(grad_form - dual_form) <= 1e-10 * std::max(1.0, std::abs(grad_form)));
}

TEST_CASE("hartree field of the ground sine mode", "[poisson]") {
  const GridDomain d = build_domain(1, {1.0}, {199});
  Frame f{Eigen::MatrixXd(d.size, 1), d.cell_volume};
  for (Eigen::Index i = 0; i < d.size; ++i)
    f.cols(i, 0) = std::sqrt(2.0) * std::sin(kPi * d.coordinate(0, i));
  const WeightSequence w = explicit_weights(Eigen::VectorXd::Ones(1));
  const PoissonSolver solver(d, 1e-10);
  const HartreePotentialResult h = hartree_potential(f, w, solver);

  // source is 2 sin^2(pi x)
  for (Eigen::Index i : {Eigen::Index(0), Eigen::Index(99), Eigen::Index(198)}) {
    const double x = d.coordinate(0, i);
    CHECK(h.source.values[i] == Catch::Approx(2.0 * std::pow(std::sin(kPi * x), 2)).margin(1e-12));
  }

  // symbolic solve of -V'' = 2 sin^2(pi x) = 1 - cos(2 pi x), V(0)=V(1)=0:
  //   V(x) = x(1-x)/2 + (1 - cos(2 pi x)) / (4 pi^2)
  double worst = 0.0, vmax = 0.0;
  for (Eigen::Index i = 0; i < d.size; ++i) {
    const double x = d.coordinate(0, i);
    const double ref = 0.5 * x * (1.0 - x) + (1.0 - std::cos(2.0 * kPi * x)) / (4.0 * kPi * kPi);
    worst = std::max(worst, std::abs(h.potential.values[i] - ref));
    vmax = std::max(vmax, std::abs(ref));
  }
  CHECK(worst <= 0.01 * vmax);

  // energy against the closed form 1/24 + 5/(16 pi^2)
  const double ref_energy = 1.0 / 24.0 + 5.0 / (16.0 * kPi * kPi);
  CHECK(std::abs(h.dirichlet_energy - ref_energy) <= 0.01 * ref_energy);
  CHECK(h.potential.values.minCoeff() >= 0.0);
}

TEST_CASE("hartree with no states is the zero field", "[poisson]") {
  const GridDomain d = build_domain(1, {1.0}, {9});
  const Frame f{Eigen::MatrixXd(d.size, 0), d.cell_volume};
  const WeightSequence w = explicit_weights(Eigen::VectorXd());
  const PoissonSolver solver(d, 1e-10);
  const HartreePotentialResult h = hartree_potential(f, w, solver);
  CHECK(h.potential.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.dirichlet_energy == 0.0);
}

TEST_CASE("hartree field stays nonnegative for random frames", "[poisson]") {
  const GridDomain d = build_domain(1, {1.0}, {39});
  const PoissonSolver solver(d, 1e-10);
  const WeightSequence w = geometric_weights(0.5, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const Frame f = random_frame(d, 3, 900 + trial);
    const HartreePotentialResult h = hartree_potential(f, w, solver);
    REQUIRE(h.potential.values.minCoeff() >= 0.0);
  }
}

TEST_CASE("hartree energy agrees between quadrature and duality", "[poisson]") {
  const GridDomain d = build_domain(2, {1.0, 1.0}, {11, 11});
  const PoissonSolver solver(d, 1e-10);
  const WeightSequence w = geometric_weights(0.5, 2);
  const Frame f = random_frame(d, 2, 31);
  const HartreePotentialResult h = hartree_potential(f, w, solver);
  const double dual = 0.5 * d.cell_volume * h.source.values.dot(h.potential.values);
  CHECK(std::abs(h.dirichlet_energy - dual) <=
        1e-10 * std::max(1.0, std::abs(h.dirichlet_energy)));
}

TEST_CASE("3d path solves through conjugate gradients", "[poisson]") {
  const GridDomain d = build_domain(3, {1.0, 1.0, 1.0}, {7, 7, 7});
  const PoissonSolver solver(d, 1e-10);
  CHECK_FALSE(solver.direct());
  const Eigen::VectorXd f = Eigen::VectorXd::Ones(d.size);
  const Eigen::VectorXd v = solver.solve(f);
  const Eigen::VectorXd lap = assemble_laplacian(d) * v;
  CHECK((lap - f).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, f.cwiseAbs().maxCoeff()));
}

TEST_CASE("dirichlet energy of a known linear-in-pieces field", "[poisson]") {
  // V = x on the first half then mirrored down: use the exact hat function.
  // On a 1d grid with h = 1/(n+1), the discrete Dirichlet energy of the hat
  // peaked at node k (value 1) is (1/h^2 + 1/h^2) * h / 2 = 1/h.
  const GridDomain d = build_domain(1, {1.0}, {9});
  Eigen::VectorXd hat = Eigen::VectorXd::Zero(d.size);
  hat[4] = 1.0;
  CHECK(dirichlet_energy(d, hat) == Catch::Approx(1.0 / d.spacing[0]).epsilon(1e-13));
}
