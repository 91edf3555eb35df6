#include "spectral/weights.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace spectral;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("geometric weights", "[weights]") {
  const WeightSequence w = geometric_weights(0.5, 3);
  REQUIRE(w.count() == 3);
  CHECK(w.values[0] == 0.5);
  CHECK(w.values[1] == 0.25);
  CHECK(w.values[2] == 0.125);
  CHECK(w.non_increasing());
  const auto blocks = detect_degeneracy(w, 0.0);
  REQUIRE(blocks.size() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(blocks[j].start == j);
    CHECK(blocks[j].size == 1);
  }
}

TEST_CASE("geometric ratio must sit in (0,1)", "[weights]") {
  CHECK_THROWS(geometric_weights(0.0, 3));
  CHECK_THROWS(geometric_weights(1.0, 3));
  CHECK_THROWS(geometric_weights(-0.5, 3));
  CHECK_THROWS(geometric_weights(0.5, 0));
}

TEST_CASE("explicit weights detect equal runs", "[weights]") {
  const WeightSequence w = explicit_weights(Eigen::Vector3d(1.0, 1.0, 0.5));
  const auto blocks = detect_degeneracy(w, 0.0);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].start == 0);
  CHECK(blocks[0].size == 2);
  CHECK(blocks[1].start == 2);
  CHECK(blocks[1].size == 1);
}

TEST_CASE("explicit weights reject non-positive entries", "[weights]") {
  CHECK_THROWS(explicit_weights(Eigen::Vector3d(1.0, 0.0, 0.5)));
  CHECK_THROWS(explicit_weights(Eigen::Vector3d(1.0, -2.0, 0.5)));
  CHECK_THROWS(explicit_weights(Eigen::Vector3d(1.0, std::nan(""), 0.5)));
}

TEST_CASE("power weights reject exponents at or below 1 + 2/dim", "[weights]") {
  CHECK_THROWS(power_weights(3.0, 4, 1));      // needs > 3 in 1d
  CHECK_THROWS(power_weights(2.0, 4, 2));      // needs > 2 in 2d
  CHECK_NOTHROW(power_weights(3.01, 4, 1));
  const WeightSequence w = power_weights(4.0, 3, 1);
  CHECK(w.values[0] == 1.0);
  CHECK(w.values[1] == Catch::Approx(1.0 / 16.0));
  CHECK(w.values[2] == Catch::Approx(1.0 / 81.0));
  CHECK(w.non_increasing());
}

TEST_CASE("boltzmann weights from a reference spectrum", "[weights]") {
  Eigen::Vector3d base(kPi * kPi, 4.0 * kPi * kPi, 9.0 * kPi * kPi);
  const WeightSequence w = boltzmann_weights(base, 1.0, 3);
  CHECK(std::abs(w.values[0] - std::exp(-kPi * kPi)) <= 1e-12 * w.values[0]);
  CHECK(std::abs(w.values[1] - std::exp(-4.0 * kPi * kPi)) <= 1e-12 * w.values[1]);
  CHECK(std::abs(w.values[2] - std::exp(-9.0 * kPi * kPi)) <= 1e-12 * w.values[2]);
  CHECK(w.non_increasing());
}

TEST_CASE("boltzmann weights validate their inputs", "[weights]") {
  Eigen::Vector3d base(1.0, 2.0, 3.0);
  CHECK_THROWS(boltzmann_weights(base, 0.0, 3));   // beta must be positive
  CHECK_THROWS(boltzmann_weights(base, 1.0, 4));   // more weights than eigenvalues
  Eigen::Vector3d unsorted(2.0, 1.0, 3.0);
  CHECK_THROWS(boltzmann_weights(unsorted, 1.0, 3));
  Eigen::Vector3d nonpositive(-1.0, 2.0, 3.0);
  CHECK_THROWS(boltzmann_weights(nonpositive, 1.0, 3));
}

TEST_CASE("degeneracy detection is relative", "[weights]") {
  const WeightSequence w = explicit_weights(Eigen::Vector3d(2.0, 1.0, 1.0 + 1e-15));
  const auto tight = detect_degeneracy(w, 1e-12);
  REQUIRE(tight.size() == 2);
  CHECK(tight[0].size == 1);
  CHECK(tight[1].size == 2);
  const auto exact = detect_degeneracy(w, 0.0);
  CHECK(exact.size() == 3);
}

TEST_CASE("distinct weights give singleton blocks", "[weights]") {
  const WeightSequence w = explicit_weights(Eigen::Vector3d(3.0, 2.0, 1.0));
  CHECK(detect_degeneracy(w, 0.0).size() == 3);
}

TEST_CASE("degeneracy detection is scale invariant", "[weights]") {
  const WeightSequence w = explicit_weights(Eigen::Vector4d(2.0, 1.0, 1.0, 0.25));
  const WeightSequence s = explicit_weights(Eigen::Vector4d(2.0, 1.0, 1.0, 0.25) * 7.25);
  const auto b1 = detect_degeneracy(w, 1e-12);
  const auto b2 = detect_degeneracy(s, 1e-12);
  REQUIRE(b1.size() == b2.size());
  for (std::size_t k = 0; k < b1.size(); ++k) {
    CHECK(b1[k].start == b2[k].start);
    CHECK(b1[k].size == b2[k].size);
  }
}

TEST_CASE("tail diagnostic shrinks for summable schemes", "[weights]") {
  for (int m : {4, 8, 16}) {
    const double t1 = tail_diagnostic(geometric_weights(0.5, m), 1);
    const double t2 = tail_diagnostic(geometric_weights(0.5, 2 * m), 1);
    CHECK(t2 < t1);
    const double p1 = tail_diagnostic(power_weights(4.0, m, 1), 1);
    const double p2 = tail_diagnostic(power_weights(4.0, 2 * m, 1), 1);
    CHECK(p2 < p1);
  }
  // explicit value: T(M) = M^2 * 0.5^M in 1d
  CHECK(tail_diagnostic(geometric_weights(0.5, 4), 1) ==
        Catch::Approx(16.0 * 0.0625).epsilon(1e-14));
}

TEST_CASE("empty weight list is a valid edge case", "[weights]") {
  const WeightSequence w = explicit_weights(Eigen::VectorXd());
  CHECK(w.count() == 0);
  CHECK(w.non_increasing());
  CHECK(detect_degeneracy(w, 0.0).empty());
}
