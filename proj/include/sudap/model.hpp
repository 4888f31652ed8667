#ifndef SUDAP_MODEL_HPP
#define SUDAP_MODEL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sudap/errors.hpp"

namespace sudap {

using Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Subspace coefficients U = DA, or the transformed observations Y.
template <typename Scalar>
using CoefficientMatrix = Matrix<Scalar>;

// Default verification tolerances for abundance feasibility.
inline constexpr double kDefaultEpsSum = 1e-9;
inline constexpr double kDefaultEpsFeas = 1e-7;

// Spatial layout of a pixel set. Metadata only: all math sees n = rows * cols
// columns.
struct Shape {
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " contains non-finite entries");
}

inline void require_shape(Shape shape, Index n, const char* what) {
  if (shape.rows < 0 || shape.cols < 0 || shape.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": shape " + std::to_string(shape.rows) + "x" +
                                              std::to_string(shape.cols) + " does not cover " +
                                              std::to_string(n) + " pixels");
  }
}

}  // namespace detail

// Spectral signatures, one endmember per column (n_bands x m).
template <typename Scalar = double>
class EndmemberMatrix {
 public:
  EndmemberMatrix() = default;

  explicit EndmemberMatrix(Matrix<Scalar> data, std::optional<Vector<Scalar>> wavelengths = std::nullopt,
                           std::vector<std::string> names = {})
      : data_(std::move(data)), wavelengths_(std::move(wavelengths)), names_(std::move(names)) {
    if (data_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "endmember matrix needs at least one column");
    if (data_.rows() < data_.cols()) {
      throw Error(ErrorCode::InvalidArgument, "endmember matrix has fewer bands (" + std::to_string(data_.rows()) +
                                                  ") than endmembers (" + std::to_string(data_.cols()) + ")");
    }
    detail::require_finite(data_, "endmember matrix");
    if (wavelengths_ && wavelengths_->size() != data_.rows()) {
      throw DimensionMismatch(data_.rows(), wavelengths_->size(), "wavelength count");
    }
    if (!names_.empty() && static_cast<Index>(names_.size()) != data_.cols()) {
      throw DimensionMismatch(data_.cols(), static_cast<Index>(names_.size()), "endmember name count");
    }
  }

  const Matrix<Scalar>& data() const { return data_; }
  const std::optional<Vector<Scalar>>& wavelengths() const { return wavelengths_; }
  const std::vector<std::string>& names() const { return names_; }
  Index n_bands() const { return data_.rows(); }
  Index n_endmembers() const { return data_.cols(); }

 private:
  Matrix<Scalar> data_;
  std::optional<Vector<Scalar>> wavelengths_;
  std::vector<std::string> names_;
};

// Observations X, one pixel per column (n_bands x n).
template <typename Scalar = double>
class ImageCube {
 public:
  ImageCube() = default;

  ImageCube(Matrix<Scalar> data, Shape shape, std::optional<Vector<Scalar>> wavelengths = std::nullopt)
      : data_(std::move(data)), shape_(shape), wavelengths_(std::move(wavelengths)) {
    if (data_.cols() < 1) throw Error(ErrorCode::InvalidArgument, "image cube has no pixels");
    detail::require_shape(shape_, data_.cols(), "image cube");
    detail::require_finite(data_, "image cube");
    if (wavelengths_ && wavelengths_->size() != data_.rows()) {
      throw DimensionMismatch(data_.rows(), wavelengths_->size(), "wavelength count");
    }
  }

  // Single-row layout.
  explicit ImageCube(Matrix<Scalar> data) : ImageCube(data, Shape{1, data.cols()}) {}

  const Matrix<Scalar>& data() const { return data_; }
  Shape shape() const { return shape_; }
  const std::optional<Vector<Scalar>>& wavelengths() const { return wavelengths_; }
  Index n_bands() const { return data_.rows(); }
  Index n_pixels() const { return data_.cols(); }

 private:
  Matrix<Scalar> data_;
  Shape shape_;
  std::optional<Vector<Scalar>> wavelengths_;
};

// Fractional abundances, one pixel per column (m x n).
template <typename Scalar = double>
class AbundanceMatrix {
 public:
  AbundanceMatrix() = default;

  AbundanceMatrix(Matrix<Scalar> data, Shape shape) : data_(std::move(data)), shape_(shape) {
    detail::require_shape(shape_, data_.cols(), "abundance matrix");
  }

  explicit AbundanceMatrix(Matrix<Scalar> data) : AbundanceMatrix(data, Shape{1, data.cols()}) {}

  const Matrix<Scalar>& data() const { return data_; }
  Matrix<Scalar>& data() { return data_; }
  Shape shape() const { return shape_; }
  Index n_endmembers() const { return data_.rows(); }
  Index n_pixels() const { return data_.cols(); }

 private:
  Matrix<Scalar> data_;
  Shape shape_;
};

// S = {u : b'u = 1} and N_i = {u : d_i'u >= 0}, with d_i the rows of D^-1.
template <typename Scalar = double>
struct ConstraintSets {
  Vector<Scalar> b;
  std::vector<Vector<Scalar>> half_spaces;
};

template <typename Scalar>
void validate_dimensions(const EndmemberMatrix<Scalar>& E, const ImageCube<Scalar>& X) {
  if (E.n_bands() != X.n_bands()) throw DimensionMismatch(E.n_bands(), X.n_bands());
}

struct FeasibilityReport {
  double max_sum_violation = 0.0;
  double min_entry = 0.0;
  bool feasible = false;
};

template <typename Derived>
FeasibilityReport column_feasibility(const Eigen::MatrixBase<Derived>& A, double eps_sum = kDefaultEpsSum,
                                     double eps_neg = kDefaultEpsFeas) {
  FeasibilityReport report;
  if (A.size() == 0) {
    report.feasible = true;
    return report;
  }
  using std::abs;
  report.max_sum_violation = static_cast<double>((A.colwise().sum().array() - 1).abs().maxCoeff());
  report.min_entry = static_cast<double>(A.minCoeff());
  report.feasible = report.max_sum_violation <= eps_sum && report.min_entry >= -eps_neg;
  return report;
}

template <typename Scalar>
FeasibilityReport column_feasibility(const AbundanceMatrix<Scalar>& A, double eps_sum = kDefaultEpsSum,
                                     double eps_neg = kDefaultEpsFeas) {
  return column_feasibility(A.data(), eps_sum, eps_neg);
}

}  // namespace sudap

#endif  // SUDAP_MODEL_HPP
