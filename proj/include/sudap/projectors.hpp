#ifndef SUDAP_PROJECTORS_HPP
#define SUDAP_PROJECTORS_HPP

#include <algorithm>

#include "sudap/subspace.hpp"

namespace sudap {

// Test-only sabotage: builds compiled with SUDAP_INJECT_PROJECTOR_FAULT flip
// the sign of f_i in the geometric projector.
#ifdef SUDAP_INJECT_PROJECTOR_FAULT
inline constexpr int kGeometricOffsetSign = -1;
#else
inline constexpr int kGeometricOffsetSign = 1;
#endif

// Column kernels. Half-space indices are 0-based throughout the C++ API.

template <typename Scalar, typename Column>
inline void project_hyperplane_column(const SubspaceTransform<Scalar>& T, Column&& z) {
  z.noalias() -= T.c * (T.b.dot(z) - Scalar(1));
}

// Pi_{S & N_i}(z) = Pi_S(z) + tau s_i with tau = max(0, f_i - s_i'z).
// Since s_i is orthogonal to b, s_i'z equals s_i'Pi_S(z) and tau can be read
// off before the hyperplane step. Returns tau.
template <typename Scalar, typename Column>
inline Scalar project_intersection_column_geometric(const SubspaceTransform<Scalar>& T, Index i, Column&& z,
                                                    bool z_on_S) {
  const Scalar tau = std::max(Scalar(0), Scalar(kGeometricOffsetSign) * T.f(i) - T.s.col(i).dot(z));
  if (!z_on_S) project_hyperplane_column(T, z);
  z.noalias() += tau * T.s.col(i);
  return tau;
}

// One Dykstra step on a column: z = u + q, u <- Pi_{S & N_i}(z), q <- z - u.
// Same arithmetic as the geometric projector with the correction update fused in.
template <typename Scalar, typename UCol, typename QCol>
inline void dykstra_step_column(const SubspaceTransform<Scalar>& T, Index i, UCol&& u, QCol&& q, bool z_on_S) {
  const Index m = T.size();
  const Scalar* s = T.s.col(i).data();
  Scalar sz = 0;
  Scalar bz = 0;
  for (Index r = 0; r < m; ++r) {
    u(r) += q(r);
    sz += s[r] * u(r);
  }
  if (!z_on_S) {
    for (Index r = 0; r < m; ++r) bz += T.b(r) * u(r);
  }
  const Scalar tau = std::max(Scalar(0), Scalar(kGeometricOffsetSign) * T.f(i) - sz);
  const Scalar excess = z_on_S ? Scalar(0) : bz - Scalar(1);
  for (Index r = 0; r < m; ++r) {
    q(r) = excess * T.c(r) - tau * s[r];
    u(r) -= q(r);
  }
}

// Same projection through the KKT route: z - z~ with z~ = c(b'z - 1), then
// tau = max(0, -d_i'(z - z~) / |P d_i|).
template <typename Scalar, typename Column>
inline Scalar project_intersection_column_kkt(const SubspaceTransform<Scalar>& T, Index i, Column&& z) {
  const Scalar excess = T.b.dot(z) - Scalar(1);
  z.noalias() -= T.c * excess;
  const Scalar tau = std::max(Scalar(0), -T.d(i).dot(z) / T.p_norms(i));
  z.noalias() += tau * T.s.col(i);
  return tau;
}

namespace detail {

template <typename Scalar>
void require_rows(const SubspaceTransform<Scalar>& T, Index rows) {
  if (rows != T.size()) throw DimensionMismatch(T.size(), rows, "coefficient rows");
}

template <typename Scalar>
void require_set_index(const SubspaceTransform<Scalar>& T, Index i) {
  if (i < 0 || i >= T.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "half-space " + std::to_string(i) + " outside [0, " + std::to_string(T.size()) + ")");
  }
}

}  // namespace detail

// Column-wise Euclidean projection onto S, as the rank-1 update Z - c(b'Z - 1').
template <typename Scalar, typename Derived>
CoefficientMatrix<Scalar> project_hyperplane(const SubspaceTransform<Scalar>& T,
                                             const Eigen::MatrixBase<Derived>& Z) {
  detail::require_rows(T, Z.rows());
  CoefficientMatrix<Scalar> out = Z;
  for_each_chunk(out.cols(), [&](Index, Index first, Index count) {
    for (Index j = first; j < first + count; ++j) project_hyperplane_column(T, out.col(j));
  });
  return out;
}

// tau_i and the mask of columns it moves.
template <typename Scalar = double>
struct HalfspaceProjection {
  Vector<Scalar> tau;
  Eigen::Array<bool, Eigen::Dynamic, 1> moved_mask;
};

template <typename Scalar, typename Derived>
HalfspaceProjection<Scalar> halfspace_step(const SubspaceTransform<Scalar>& T, Index i,
                                           const Eigen::MatrixBase<Derived>& Z) {
  detail::require_rows(T, Z.rows());
  detail::require_set_index(T, i);
  HalfspaceProjection<Scalar> step;
  step.tau = ((Scalar(kGeometricOffsetSign) * T.f(i)) - (T.s.col(i).transpose() * Z).array())
                 .max(Scalar(0))
                 .transpose()
                 .matrix();
  step.moved_mask = step.tau.array() > Scalar(0);
  return step;
}

// Pi_{S & N_i}(Z) column-wise. With z_on_S the caller guarantees b'z = 1 for
// every column and the hyperplane step is skipped.
template <typename Scalar, typename Derived>
CoefficientMatrix<Scalar> project_intersection_geometric(const SubspaceTransform<Scalar>& T, Index i,
                                                         const Eigen::MatrixBase<Derived>& Z, bool z_on_S = false) {
  detail::require_rows(T, Z.rows());
  detail::require_set_index(T, i);
  CoefficientMatrix<Scalar> out = Z;
  for_each_chunk(out.cols(), [&](Index, Index first, Index count) {
    for (Index j = first; j < first + count; ++j) project_intersection_column_geometric(T, i, out.col(j), z_on_S);
  });
  return out;
}

template <typename Scalar, typename Derived>
CoefficientMatrix<Scalar> project_intersection_kkt(const SubspaceTransform<Scalar>& T, Index i,
                                                   const Eigen::MatrixBase<Derived>& Z) {
  detail::require_rows(T, Z.rows());
  detail::require_set_index(T, i);
  CoefficientMatrix<Scalar> out = Z;
  for_each_chunk(out.cols(), [&](Index, Index first, Index count) {
    for (Index j = first; j < first + count; ++j) project_intersection_column_kkt(T, i, out.col(j));
  });
  return out;
}

}  // namespace sudap

#endif  // SUDAP_PROJECTORS_HPP
