#pragma once

#include "spectral/grid.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spectral/weights.hpp"

namespace spectral {

// Deterministic standard normals: Box-Muller over explicit mt19937_64 draws.
// std::normal_distribution is implementation-defined, which would break
// bit-reproducible frames across toolchains.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }  // [0,1)

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// M orthonormal columns of R^n under the weighted inner product
// <u,v> = volume * u.v (volume = cell_volume on grids, 1 for synthetic
// matrices). Orthonormality is a maintained invariant, not a per-call check.
struct Frame {
  Eigen::MatrixXd cols;  // n x M
  double volume = 1.0;

  Eigen::Index states() const { return cols.cols(); }
  Eigen::Index points() const { return cols.rows(); }

  Eigen::MatrixXd gram() const { return volume * (cols.transpose() * cols); }

  double gram_error() const {
    return (gram() - Eigen::MatrixXd::Identity(states(), states())).norm();
  }

  double dot(Eigen::Index i, const Eigen::VectorXd& v) const { return volume * cols.col(i).dot(v); }
};

// Restores orthonormality by Householder QR in the weighted metric. Preserves
// the column span and is a no-op (to rounding) on an already orthonormal frame:
// sign-fixing the R diagonal keeps each column's orientation.
inline Frame reorthonormalize(const Frame& f) {
  const Eigen::Index n = f.points(), m = f.states();
  if (m == 0) return f;
  const double s = std::sqrt(f.volume);
  Eigen::MatrixXd c = s * f.cols;

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
  const Eigen::MatrixXd& qrm = qr.matrixQR();

  double diag_scale = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) diag_scale = std::max(diag_scale, std::abs(qrm(j, j)));
  for (Eigen::Index j = 0; j < m; ++j) {
    const double rjj = qrm(j, j);
    if (std::abs(rjj) <= 1e-12 * diag_scale || rjj == 0.0)
      throw std::runtime_error("reorthonormalize: rank-deficient frame (column " +
                               std::to_string(j + 1) + ")");
    if (rjj < 0.0) q.col(j) = -q.col(j);
  }
  return Frame{q / s, f.volume};
}

inline Frame random_frame(Eigen::Index n, Eigen::Index m, double volume, std::uint64_t seed) {
  if (m < 0 || m > n) throw std::invalid_argument("random_frame: need 0 <= states <= points");
  if (!(volume > 0.0)) throw std::invalid_argument("random_frame: volume must be positive");
  NormalSampler normal(seed);
  Eigen::MatrixXd c(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) c(i, j) = normal();
  if (m == 0) return Frame{c, volume};
  return reorthonormalize(Frame{c, volume});
}

inline Frame random_frame(const GridDomain& domain, Eigen::Index m, std::uint64_t seed) {
  return random_frame(domain.size, m, domain.cell_volume, seed);
}

// Coordinate vectors scaled to unit weighted norm; a valid basis argument for
// identity_frame.
inline Eigen::MatrixXd coordinate_basis(Eigen::Index n, double volume, Eigen::Index k) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, k);
  const double s = 1.0 / std::sqrt(volume);
  for (Eigen::Index j = 0; j < k; ++j) b(j, j) = s;
  return b;
}

inline Frame identity_frame(Eigen::Index m, double volume, const Eigen::MatrixXd& basis) {
  if (m < 0 || m > basis.cols())
    throw std::invalid_argument("identity_frame: basis supplies fewer columns than requested");
  if (m > basis.rows()) throw std::invalid_argument("identity_frame: need states <= points");
  Frame f{basis.leftCols(m), volume};
  if (f.gram_error() > 1e-10)
    throw std::invalid_argument("identity_frame: basis columns are not orthonormal");
  return f;
}

inline Frame identity_frame(const GridDomain& domain, Eigen::Index m, const Eigen::MatrixXd& basis) {
  return identity_frame(m, domain.cell_volume, basis);
}

// Tangent direction at a frame: an in-span antisymmetric generator plus an
// out-of-span component orthogonal to the frame columns. The curve it induces
// is U exp(t K) + t Z, re-orthonormalized when Z != 0.
struct SkewDirection {
  Eigen::MatrixXd generator;  // M x M, exactly antisymmetric
  Eigen::MatrixXd normal;     // n x M, or 0 x 0 when absent
};

inline Eigen::MatrixXd skew_part(const Eigen::MatrixXd& raw) {
  return 0.5 * (raw - raw.transpose());
}

// Builds a valid direction from raw ingredients: antisymmetrizes the generator
// and projects the normal part against the frame columns.
inline SkewDirection make_direction(const Frame& f, const Eigen::MatrixXd& raw_generator,
                                    const Eigen::MatrixXd& raw_normal = Eigen::MatrixXd()) {
  if (raw_generator.rows() != f.states() || raw_generator.cols() != f.states())
    throw std::invalid_argument("make_direction: generator must be states x states");
  SkewDirection d;
  d.generator = skew_part(raw_generator);
  if (raw_normal.size() > 0) {
    if (raw_normal.rows() != f.points() || raw_normal.cols() != f.states())
      throw std::invalid_argument("make_direction: normal part must be points x states");
    d.normal = raw_normal - f.cols * (f.volume * (f.cols.transpose() * raw_normal));
  }
  return d;
}

inline SkewDirection random_direction(const Frame& f, std::uint64_t seed, bool with_normal = true) {
  NormalSampler normal(seed);
  const Eigen::Index n = f.points(), m = f.states();
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = normal();
  Eigen::MatrixXd z;
  if (with_normal && n > m) {
    z.resize(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < n; ++i) z(i, j) = normal();
  }
  return make_direction(f, g, z);
}

// First-order realization of a direction: d/dt retract(f, d, t) at t = 0.
inline Eigen::MatrixXd tangent(const Frame& f, const SkewDirection& d) {
  Eigen::MatrixXd t = f.cols * d.generator;
  if (d.normal.size() > 0) t += d.normal;
  return t;
}

inline void check_direction(const Frame& f, const SkewDirection& d) {
  if (d.generator.rows() != f.states() || d.generator.cols() != f.states())
    throw std::invalid_argument("retract: generator shape does not match the frame");
  if ((d.generator + d.generator.transpose()).cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("retract: generator is not exactly antisymmetric");
  if (d.normal.size() > 0 &&
      (d.normal.rows() != f.points() || d.normal.cols() != f.states()))
    throw std::invalid_argument("retract: normal part shape does not match the frame");
}

// Moves along the curve induced by a direction. The in-span part uses the
// exact matrix exponential of the small generator, so a pure in-span retract
// is a one-parameter group; the out-of-span part is a QR retraction.
inline Frame retract(const Frame& f, const SkewDirection& d, double t) {
  check_direction(f, d);
  if (t == 0.0) return f;
  Eigen::MatrixXd w;
  if (f.states() == 0) return f;
  const Eigen::MatrixXd e = (t * d.generator).exp();
  w = f.cols * e;
  if (d.normal.size() > 0) {
    w += t * d.normal;
    return reorthonormalize(Frame{std::move(w), f.volume});
  }
  return Frame{std::move(w), f.volume};
}

// Orthogonal projection of an ambient n x M matrix onto the tangent space at f.
inline Eigen::MatrixXd project_tangent(const Frame& f, const Eigen::MatrixXd& ambient) {
  Eigen::MatrixXd s = f.volume * (f.cols.transpose() * ambient);
  Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  return ambient - f.cols * sym;
}

// Splits a tangent matrix into (generator, normal) so that
// tangent(f, split) == T. Descent directions are built from -gradient here.
inline SkewDirection split_tangent(const Frame& f, const Eigen::MatrixXd& t) {
  SkewDirection d;
  d.generator = skew_part(f.volume * (f.cols.transpose() * t));
  d.normal = t - f.cols * (f.volume * (f.cols.transpose() * t));
  return d;
}

// Diagonalizes the frame against H inside each degenerate weight block:
// columns of a block are recombined by the eigenvectors of the block Gram
// matrix G[i][j] = <u_i, H u_j>, ordered by ascending Rayleigh quotient. The
// trace functional and the weighted density are invariant because weights are
// equal inside a block. Singleton blocks are left untouched.
template <typename OperatorT>
Frame block_rotate(const Frame& f, const OperatorT& h, const std::vector<DegenerateBlock>& blocks) {
  Frame out = f;
  for (const auto& b : blocks) {
    if (b.size < 2) continue;
    if (b.start < 0 || b.start + b.size > f.states())
      throw std::invalid_argument("block_rotate: block leaves the frame");
    const Eigen::MatrixXd ub = f.cols.middleCols(b.start, b.size);
    Eigen::MatrixXd g = f.volume * (ub.transpose() * (h * ub));
    g = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("block_rotate: block Gram eigendecomposition failed");
    Eigen::MatrixXd rotated = ub * es.eigenvectors();
    for (Eigen::Index j = 0; j < rotated.cols(); ++j) {
      Eigen::Index imax = 0;
      rotated.col(j).cwiseAbs().maxCoeff(&imax);
      if (rotated(imax, j) < 0.0) rotated.col(j) = -rotated.col(j);
    }
    out.cols.middleCols(b.start, b.size) = rotated;
  }
  return out;
}

}  // namespace spectral
