#pragma once

// Discrete exterior calculus on a closed oriented triangle mesh: incidence
// operators d0/d1, diagonal Hodge stars on the barycentric dual, the
// cotangent stiffness matrix for scalar potentials, Poisson solvers aware of
// the constant-function kernel, a discrete Green operator, Hodge
// decomposition of 1-cochains, and harmonic 1-form bases.
//
// Conventions: 0-cochains live on vertices; 1-cochains store integrals along
// edges in the canonical orientation E(e,0) -> E(e,1); 2-cochains store
// integrals over oriented faces. The scalar stiffness L0 is the cotangent
// (finite element) matrix; the stars are barycentric-dual and strictly
// positive, so every 1-form operator built from them is definite.

#include "surface.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <utility>

namespace glv {

using SpMat = Eigen::SparseMatrix<double>;

// Solves A x = b for symmetric positive semidefinite A whose kernel is the
// constant vector (closed connected surface). The right-hand side is
// projected onto the range, the solve uses a slightly shifted factorization
// plus iterative refinement against the unshifted matrix, and the result is
// normalized to zero weighted mean with the supplied positive weights.
class ZeroMeanSolver {
 public:
  ZeroMeanSolver() = default;

  void init(SpMat A, VectorXd weights) {
    A_ = std::move(A);
    w_ = std::move(weights);
    wsum_ = w_.sum();
    const double scale = A_.diagonal().cwiseAbs().mean();
    const double shift = 1e-8 * scale / w_.mean();
    SpMat M = A_;
    for (int i = 0; i < M.rows(); ++i) M.coeffRef(i, i) += shift * w_[i];
    fact_.compute(M);
    if (fact_.info() != Eigen::Success)
      throw std::runtime_error("ZeroMeanSolver: factorization failed");
  }

  VectorXd solve(const VectorXd& b) const {
    VectorXd r = (b.array() - b.mean()).matrix();
    VectorXd x = fact_.solve(r);
    for (int k = 0; k < 3; ++k) x += fact_.solve(r - A_ * x);
    x.array() -= x.dot(w_) / wsum_;
    return x;
  }

  const SpMat& matrix() const { return A_; }

 private:
  SpMat A_;
  VectorXd w_;
  double wsum_ = 1.0;
  Eigen::SimplicialLDLT<SpMat> fact_;
};

struct DecOperators {
  SpMat d0;        // ne x nv
  SpMat d1;        // nf x ne
  VectorXd star0;  // nv: barycentric dual cell area
  VectorXd star1;  // ne: dual length / primal length (always positive)
  VectorXd star2;  // nf: 1 / face area
  SpMat L0;        // cotangent stiffness, PSD, kernel = constants
  SpMat Lw;        // d0^T diag(star1) d0
  SpMat A2;        // d1 diag(1/star1) d1^T, acts on face potentials
  ZeroMeanSolver poisson;  // L0, weights = star0
  ZeroMeanSolver exact;    // Lw, weights = star0
  ZeroMeanSolver flux;     // A2, weights = face areas

  explicit DecOperators(const SurfaceGeometry& g) {
    const int nv = g.nv(), ne = g.ne(), nf = g.nf();

    std::vector<Eigen::Triplet<double>> t0, t1;
    t0.reserve(2 * ne);
    for (int e = 0; e < ne; ++e) {
      t0.emplace_back(e, g.E(e, 0), -1.0);
      t0.emplace_back(e, g.E(e, 1), 1.0);
    }
    d0.resize(ne, nv);
    d0.setFromTriplets(t0.begin(), t0.end());

    t1.reserve(3 * nf);
    for (int f = 0; f < nf; ++f)
      for (int c = 0; c < 3; ++c)
        t1.emplace_back(f, g.FE(f, c), static_cast<double>(g.FS(f, c)));
    d1.resize(nf, ne);
    d1.setFromTriplets(t1.begin(), t1.end());

    star0 = g.vertex_area;
    star1.resize(ne);
    for (int e = 0; e < ne; ++e) {
      const Vector3d a = g.vpos(g.E(e, 0)), b = g.vpos(g.E(e, 1));
      const Vector3d mid = 0.5 * (a + b);
      double dual = 0.0;
      for (int k = 0; k < 2; ++k) {
        const int f = g.EF(e, k);
        const Vector3d cen =
            (g.vpos(g.F(f, 0)) + g.vpos(g.F(f, 1)) + g.vpos(g.F(f, 2))) / 3.0;
        dual += (cen - mid).norm();
      }
      star1[e] = dual / (b - a).norm();
    }
    star2 = g.face_area.cwiseInverse();

    const SpMat d0t = d0.transpose();
    L0 = d0t * g.cotan_weight.asDiagonal() * d0;
    Lw = d0t * star1.asDiagonal() * d0;
    A2 = d1 * star1.cwiseInverse().asDiagonal() * SpMat(d1.transpose());

    poisson.init(L0, star0);
    exact.init(Lw, star0);
    flux.init(A2, g.face_area);
  }
};

// Column of the discrete Green operator: L0 y = delta_src - mass / area,
// normalized to zero mass-weighted mean. Symmetric in (source, sample).
inline VectorXd green_column(const DecOperators& dec, const SurfaceGeometry& g,
                             int src) {
  VectorXd rhs = -g.vertex_area / g.total_area;
  rhs[src] += 1.0;
  return dec.poisson.solve(rhs);
}

// omega = d0 alpha + star1^{-1} d1^T beta + harmonic, the three parts
// mutually orthogonal in the star1 inner product.
struct HodgeParts {
  VectorXd alpha;     // nv, potential of the exact part
  VectorXd beta;      // nf, potential of the coexact part
  VectorXd harmonic;  // ne
};

inline HodgeParts hodge_decompose(const DecOperators& dec,
                                  const VectorXd& omega) {
  HodgeParts p;
  p.alpha = dec.exact.solve(dec.d0.transpose() * (dec.star1.asDiagonal() * omega));
  p.beta = dec.flux.solve(dec.d1 * omega);
  p.harmonic = omega - dec.d0 * p.alpha -
               dec.star1.cwiseInverse().asDiagonal() *
                   (dec.d1.transpose() * p.beta);
  return p;
}

// Harmonic representatives of the given cycles, orthonormalized in the star1
// inner product. Throws if the projections are (numerically) dependent.
inline MatrixXd harmonic_basis(const DecOperators& dec,
                               const std::vector<VectorXd>& cycles) {
  const int ne = static_cast<int>(dec.star1.size());
  MatrixXd H(ne, static_cast<int>(cycles.size()));
  int k = 0;
  for (const auto& cyc : cycles) {
    VectorXd h = hodge_decompose(dec, cyc).harmonic;
    const double before = std::sqrt(h.dot(dec.star1.asDiagonal() * h));
    for (int j = 0; j < k; ++j)
      h -= H.col(j).dot(dec.star1.asDiagonal() * h) * H.col(j);
    const double after = std::sqrt(h.dot(dec.star1.asDiagonal() * h));
    if (after <= 1e-8 * before)
      throw std::runtime_error("harmonic_basis: dependent cycles");
    H.col(k++) = h / after;
  }
  return H;
}

}  // namespace glv
