#ifndef SUDAP_TESTS_HELPERS_HPP
#define SUDAP_TESTS_HELPERS_HPP

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "sudap/sudap.hpp"

namespace testing {

using sudap::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

#define CHECK_THROWS_CODE(expr, expected)                  \
  do {                                                     \
    bool thrown_ = false;                                  \
    try {                                                  \
      (void)(expr);                                        \
    } catch (const sudap::Error& e_) {                     \
      thrown_ = true;                                      \
      CHECK(e_.code() == (expected));                      \
    }                                                      \
    CHECK_MESSAGE(thrown_, "expected a sudap::Error");     \
  } while (0)

inline MatrixXd uniform_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  MatrixXd M(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) M(r, c) = dist(rng);
  return M;
}

inline MatrixXd normal_matrix(Index rows, Index cols, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> dist(0.0, sigma);
  MatrixXd M(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) M(r, c) = dist(rng);
  return M;
}

inline sudap::EndmemberMatrix<double> random_endmembers(Index bands, Index m, std::mt19937_64& rng) {
  return sudap::EndmemberMatrix<double>(uniform_matrix(bands, m, rng));
}

// Columns on the simplex, independent of sample_abundances.
inline MatrixXd random_simplex(Index m, Index n, std::mt19937_64& rng) {
  MatrixXd A = uniform_matrix(m, n, rng, 1e-3, 1.0);
  for (Index j = 0; j < n; ++j) A.col(j) /= A.col(j).sum();
  return A;
}

inline double rel_fro(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sudap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

#endif  // SUDAP_TESTS_HELPERS_HPP
