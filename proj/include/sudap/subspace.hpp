#ifndef SUDAP_SUBSPACE_HPP
#define SUDAP_SUBSPACE_HPP

#include <Eigen/Cholesky>

#include "sudap/model.hpp"
#include "sudap/parallel.hpp"

namespace sudap {

inline constexpr double kDefaultRankTol = 1e-12;

// Map U = DA with D'D = E'E. Under it the abundance constraints become the
// hyperplane S = {u : b'u = 1} and the half-spaces N_i = {u : d_i'u >= 0}.
// Everything the per-set projections need is precomputed here once.
template <typename Scalar = double>
struct SubspaceTransform {
  Matrix<Scalar> D;      // upper-triangular Cholesky factor
  Matrix<Scalar> D_inv;  // row i is d_i
  Vector<Scalar> b;      // b' = 1'D^-1
  Vector<Scalar> c;      // b / |b|^2, the point of S closest to the origin
  Matrix<Scalar> s;      // column i: P d_i / |P d_i|, with P = I - bb'/|b|^2
  Vector<Scalar> f;      // f_i = -d_i'c / |P d_i|
  Vector<Scalar> p_norms;

  Index size() const { return D.rows(); }
  auto d(Index i) const { return D_inv.row(i).transpose(); }
};

namespace detail {

// Cholesky of a Gram matrix, rejecting pivots below rank_tol * trace / m.
template <typename Scalar>
Eigen::LLT<Matrix<Scalar>> factor_gram(const Matrix<Scalar>& G, double rank_tol) {
  const Index m = G.rows();
  Eigen::LLT<Matrix<Scalar>> llt(G);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::RankDeficient, "Gram matrix is not positive definite");
  const Scalar threshold = Scalar(rank_tol) * G.trace() / Scalar(m);
  const Matrix<Scalar> L = llt.matrixL();
  for (Index i = 0; i < m; ++i) {
    if (!(L(i, i) * L(i, i) > threshold)) {
      throw Error(ErrorCode::RankDeficient, "pivot " + std::to_string(i) + " below relative tolerance");
    }
  }
  return llt;
}

}  // namespace detail

template <typename Scalar>
SubspaceTransform<Scalar> build_transform(const EndmemberMatrix<Scalar>& E, double rank_tol = kDefaultRankTol) {
  const Index m = E.n_endmembers();
  if (m < 2) {
    throw Error(ErrorCode::DegenerateProblem, "a single endmember admits only the abundance 1");
  }
  const Matrix<Scalar> G = E.data().transpose() * E.data();
  const auto llt = detail::factor_gram<Scalar>(G, rank_tol);

  SubspaceTransform<Scalar> T;
  T.D = llt.matrixU();
  T.D_inv = T.D.template triangularView<Eigen::Upper>().solve(Matrix<Scalar>::Identity(m, m));
  T.b = T.D_inv.colwise().sum().transpose();
  T.c = T.b / T.b.squaredNorm();

  T.s.resize(m, m);
  T.f.resize(m);
  T.p_norms.resize(m);
  for (Index i = 0; i < m; ++i) {
    const Vector<Scalar> d = T.d(i);
    const Vector<Scalar> pd = d - T.c * T.b.dot(d);
    const Scalar p = pd.norm();
    if (!(p > Scalar(0))) throw Error(ErrorCode::RankDeficient, "half-space normal parallel to the hyperplane normal");
    T.p_norms(i) = p;
    T.s.col(i) = pd / p;
    T.f(i) = -d.dot(T.c) / p;
  }
  return T;
}

template <typename Scalar>
ConstraintSets<Scalar> constraint_sets(const SubspaceTransform<Scalar>& T) {
  ConstraintSets<Scalar> sets;
  sets.b = T.b;
  for (Index i = 0; i < T.size(); ++i) sets.half_spaces.emplace_back(T.d(i));
  return sets;
}

// Y = D^-T E'X, computed as a triangular solve against E'X.
template <typename Scalar>
CoefficientMatrix<Scalar> forward_transform(const SubspaceTransform<Scalar>& T, const EndmemberMatrix<Scalar>& E,
                                            const ImageCube<Scalar>& X) {
  validate_dimensions(E, X);
  if (E.n_endmembers() != T.size()) throw DimensionMismatch(T.size(), E.n_endmembers(), "endmember count");
  const Index n = X.n_pixels();
  CoefficientMatrix<Scalar> Y(T.size(), n);
  const auto Dt = T.D.transpose().template triangularView<Eigen::Lower>();
  for_each_chunk(n, [&](Index, Index first, Index count) {
    auto block = Y.middleCols(first, count);
    block.noalias() = E.data().transpose() * X.data().middleCols(first, count);
    Dt.solveInPlace(block);
  });
  return Y;
}

// A = D^-1 U, computed as a triangular solve.
template <typename Scalar, typename Derived>
AbundanceMatrix<Scalar> inverse_transform(const SubspaceTransform<Scalar>& T, const Eigen::MatrixBase<Derived>& U,
                                          std::optional<Shape> shape = std::nullopt) {
  if (U.rows() != T.size()) throw DimensionMismatch(T.size(), U.rows(), "coefficient rows");
  const Index n = U.cols();
  Matrix<Scalar> A = U;
  const auto Du = T.D.template triangularView<Eigen::Upper>();
  for_each_chunk(n, [&](Index, Index first, Index count) {
    auto block = A.middleCols(first, count);
    Du.solveInPlace(block);
  });
  return AbundanceMatrix<Scalar>(std::move(A), shape.value_or(Shape{1, n}));
}

}  // namespace sudap

#endif  // SUDAP_SUBSPACE_HPP
