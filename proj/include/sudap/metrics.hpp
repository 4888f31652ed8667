#ifndef SUDAP_METRICS_HPP
#define SUDAP_METRICS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sudap/dykstra.hpp"

namespace sudap {

namespace detail {

template <typename A, typename B>
double relative_squared_error(const Eigen::MatrixBase<A>& estimate, const Eigen::MatrixBase<B>& reference) {
  if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "estimate is " + std::to_string(estimate.rows()) + "x" +
                                              std::to_string(estimate.cols()) + ", reference is " +
                                              std::to_string(reference.rows()) + "x" +
                                              std::to_string(reference.cols()));
  }
  const double ref = static_cast<double>(reference.squaredNorm());
  if (ref == 0.0) throw Error(ErrorCode::ZeroReference, "reference has zero Frobenius norm");
  return static_cast<double>((estimate - reference).squaredNorm()) / ref;
}

inline double to_db(double ratio) {
  if (ratio == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ratio);
}

}  // namespace detail

// 10 log10(|A_hat - A_star|_F^2 / |A_star|_F^2); -inf on an exact match.
template <typename A, typename B>
double relative_error_db(const Eigen::MatrixBase<A>& A_hat, const Eigen::MatrixBase<B>& A_star) {
  return detail::to_db(detail::relative_squared_error(A_hat, A_star));
}

template <typename Scalar>
double relative_error_db(const AbundanceMatrix<Scalar>& A_hat, const AbundanceMatrix<Scalar>& A_star) {
  return relative_error_db(A_hat.data(), A_star.data());
}

// Same ratio against the ground-truth abundances.
template <typename A, typename B>
double nmse_db(const Eigen::MatrixBase<A>& A_hat, const Eigen::MatrixBase<B>& A_true) {
  return detail::to_db(detail::relative_squared_error(A_hat, A_true));
}

template <typename Scalar>
double nmse_db(const AbundanceMatrix<Scalar>& A_hat, const AbundanceMatrix<Scalar>& A_true) {
  return nmse_db(A_hat.data(), A_true.data());
}

// |X - E A|_F^2
template <typename Scalar, typename Derived>
double objective(const EndmemberMatrix<Scalar>& E, const ImageCube<Scalar>& X, const Eigen::MatrixBase<Derived>& A) {
  validate_dimensions(E, X);
  if (A.rows() != E.n_endmembers()) throw DimensionMismatch(E.n_endmembers(), A.rows(), "abundance rows");
  if (A.cols() != X.n_pixels()) throw DimensionMismatch(X.n_pixels(), A.cols(), "pixel count");
  std::vector<double> partial(static_cast<std::size_t>(chunk_count(X.n_pixels())));
  for_each_chunk(X.n_pixels(), [&](Index chunk, Index first, Index count) {
    partial[static_cast<std::size_t>(chunk)] = static_cast<double>(
        (X.data().middleCols(first, count) - E.data() * A.middleCols(first, count)).squaredNorm());
  });
  double total = 0.0;
  for (const double p : partial) total += p;
  return total;
}

template <typename Scalar>
double objective(const EndmemberMatrix<Scalar>& E, const ImageCube<Scalar>& X, const AbundanceMatrix<Scalar>& A) {
  return objective(E, X, A.data());
}

struct CurveRow {
  int sweep = 0;
  double time_s = 0.0;
  double objective = 0.0;
  std::optional<double> re_db;
  std::optional<double> nmse_db;
  std::optional<long> unconverged;

  bool operator==(const CurveRow&) const = default;
};

struct ConvergenceCurve {
  std::vector<CurveRow> rows;
};

template <typename Scalar = double>
struct CurveReferences {
  const Matrix<Scalar>* A_star = nullptr;  // exact optimum, for RE
  const Matrix<Scalar>* A_true = nullptr;  // ground truth, for NMSE
};

template <typename Scalar, typename Derived>
CurveRow curve_row(int sweep, double time_s, const Eigen::MatrixBase<Derived>& U, const SubspaceTransform<Scalar>& T,
                   const CurveReferences<Scalar>& refs, const EndmemberMatrix<Scalar>& E,
                   const ImageCube<Scalar>& X) {
  const auto A = inverse_transform(T, U);
  CurveRow row;
  row.sweep = sweep;
  row.time_s = time_s;
  row.objective = objective(E, X, A.data());
  if (refs.A_star) row.re_db = relative_error_db(A.data(), *refs.A_star);
  if (refs.A_true) row.nmse_db = nmse_db(A.data(), *refs.A_true);
  return row;
}

// One row per stored snapshot.
template <typename Scalar>
ConvergenceCurve build_curve(const DykstraTrace<Scalar>& trace, const SubspaceTransform<Scalar>& T,
                             const CurveReferences<Scalar>& refs, const EndmemberMatrix<Scalar>& E,
                             const ImageCube<Scalar>& X) {
  ConvergenceCurve curve;
  for (const auto& snap : trace.snapshots) {
    auto row = curve_row(snap.sweep, snap.elapsed_s, snap.U, T, refs, E, X);
    const auto k = static_cast<std::size_t>(snap.sweep);
    if (k >= 1 && k <= trace.records.size()) row.unconverged = trace.records[k - 1].unconverged;
    curve.rows.push_back(row);
  }
  return curve;
}

}  // namespace sudap

#endif  // SUDAP_METRICS_HPP
