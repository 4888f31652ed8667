#ifndef SUDAP_SOLVER_HPP
#define SUDAP_SOLVER_HPP

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>

#include "sudap/dykstra.hpp"

namespace sudap {

enum class SolverId { sudap, ls, ls_sum1, oracle };

inline const char* to_string(SolverId id) {
  switch (id) {
    case SolverId::sudap: return "sudap";
    case SolverId::ls: return "ls";
    case SolverId::ls_sum1: return "ls-sum1";
    case SolverId::oracle: return "oracle";
  }
  return "unknown";
}

template <typename Scalar = double>
struct SolveResult {
  AbundanceMatrix<Scalar> A_hat;
  DykstraTrace<Scalar> trace;  // empty for the direct solvers
  SolverId solver_id = SolverId::sudap;
  double wall_time = 0.0;
};

// Enumeration in the oracle costs up to 2^m - 1 subsets per pixel.
inline constexpr Index kOracleMaxEndmembers = 14;

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename Scalar>
AbundanceMatrix<Scalar> all_ones(Index n, Shape shape) {
  return AbundanceMatrix<Scalar>(Matrix<Scalar>::Ones(1, n), shape);
}

// A_LS = (E'E)^-1 E'X through the normal equations.
template <typename Scalar>
Matrix<Scalar> least_squares(const Eigen::LLT<Matrix<Scalar>>& gram, const EndmemberMatrix<Scalar>& E,
                             const ImageCube<Scalar>& X) {
  Matrix<Scalar> A(E.n_endmembers(), X.n_pixels());
  for_each_chunk(X.n_pixels(), [&](Index, Index first, Index count) {
    auto block = A.middleCols(first, count);
    block.noalias() = E.data().transpose() * X.data().middleCols(first, count);
    gram.solveInPlace(block);
  });
  return A;
}

}  // namespace detail

// Subspace transform, Dykstra projection, inverse transform.
template <typename Scalar>
SolveResult<Scalar> solve_sudap(const EndmemberMatrix<Scalar>& E, const ImageCube<Scalar>& X,
                                const DykstraConfig<Scalar>& cfg = {}, double rank_tol = kDefaultRankTol) {
  validate_dimensions(E, X);
  SolveResult<Scalar> result;
  result.solver_id = SolverId::sudap;
  const auto start = std::chrono::steady_clock::now();
  if (E.n_endmembers() == 1) {
    result.A_hat = detail::all_ones<Scalar>(X.n_pixels(), X.shape());
  } else {
    const auto T = build_transform(E, rank_tol);
    const auto Y = forward_transform(T, E, X);
    auto projected = dykstra_project(T, Y, cfg);
    result.A_hat = inverse_transform(T, projected.U_hat, X.shape());
    result.trace = std::move(projected.trace);
  }
  result.wall_time = detail::seconds_since(start);
  return result;
}

template <typename Scalar>
SolveResult<Scalar> solve_ls(const EndmemberMatrix<Scalar>& E, const ImageCube<Scalar>& X,
                             double rank_tol = kDefaultRankTol) {
  validate_dimensions(E, X);
  const auto start = std::chrono::steady_clock::now();
  const Matrix<Scalar> G = E.data().transpose() * E.data();
  const auto gram = detail::factor_gram<Scalar>(G, rank_tol);
  SolveResult<Scalar> result;
  result.solver_id = SolverId::ls;
  result.A_hat = AbundanceMatrix<Scalar>(detail::least_squares(gram, E, X), X.shape());
  result.wall_time = detail::seconds_since(start);
  return result;
}

// Sum-to-one only: a = a_LS - G^-1 1 (1'a_LS - 1) / (1'G^-1 1).
template <typename Scalar>
SolveResult<Scalar> solve_ls_sum1(const EndmemberMatrix<Scalar>& E, const ImageCube<Scalar>& X,
                                  double rank_tol = kDefaultRankTol) {
  validate_dimensions(E, X);
  const auto start = std::chrono::steady_clock::now();
  const Index m = E.n_endmembers();
  const Matrix<Scalar> G = E.data().transpose() * E.data();
  const auto gram = detail::factor_gram<Scalar>(G, rank_tol);
  Matrix<Scalar> A = detail::least_squares(gram, E, X);
  const Vector<Scalar> v = gram.solve(Vector<Scalar>::Ones(m));
  const Scalar v_sum = v.sum();
  for_each_chunk(A.cols(), [&](Index, Index first, Index count) {
    for (Index j = first; j < first + count; ++j) A.col(j) -= v * ((A.col(j).sum() - Scalar(1)) / v_sum);
  });
  SolveResult<Scalar> result;
  result.solver_id = SolverId::ls_sum1;
  result.A_hat = AbundanceMatrix<Scalar>(std::move(A), X.shape());
  result.wall_time = detail::seconds_since(start);
  return result;
}

struct OracleTolerances {
  double primal = 1e-12;  // free abundances >= -primal
  double dual = 1e-10;    // bound multipliers >= -dual * max(1, trace(E'E)/m)
};

namespace detail {

// Equality-constrained LS restricted to the free coordinates of one subset.
template <typename Scalar>
struct FreeSetSystem {
  std::uint32_t zero_mask = 0;
  std::vector<Index> free;
  std::vector<Index> zeroed;
  Eigen::LLT<Matrix<Scalar>> gram;
  Vector<Scalar> ones_solution;  // G_FF^-1 1
  Scalar ones_sum = 0;
};

}  // namespace detail

// Exact FCLS by enumerating which abundances sit at zero. Works in abundance
// space on E directly.
template <typename Scalar>
SolveResult<Scalar> solve_oracle_activeset(const EndmemberMatrix<Scalar>& E, const ImageCube<Scalar>& X,
                                           OracleTolerances tol = {}) {
  validate_dimensions(E, X);
  const Index m = E.n_endmembers();
  const Index n = X.n_pixels();
  if (m > kOracleMaxEndmembers) {
    throw Error(ErrorCode::TooManyEndmembers, std::to_string(m) + " endmembers exceed the oracle limit of " +
                                                  std::to_string(kOracleMaxEndmembers));
  }
  const auto start = std::chrono::steady_clock::now();
  SolveResult<Scalar> result;
  result.solver_id = SolverId::oracle;
  if (m == 1) {
    result.A_hat = detail::all_ones<Scalar>(n, X.shape());
    result.wall_time = detail::seconds_since(start);
    return result;
  }

  const Matrix<Scalar> G = E.data().transpose() * E.data();
  const Scalar dual_tol = Scalar(tol.dual) * std::max(Scalar(1), G.trace() / Scalar(m));
  const Scalar primal_tol = Scalar(tol.primal);

  // Candidate active sets, smallest first.
  const std::uint32_t full = (std::uint32_t{1} << m) - 1;
  std::vector<std::uint32_t> masks;
  for (std::uint32_t mask = 0; mask < full; ++mask) masks.push_back(mask);
  std::stable_sort(masks.begin(), masks.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });

  std::vector<detail::FreeSetSystem<Scalar>> systems;
  systems.reserve(masks.size());
  for (const auto mask : masks) {
    detail::FreeSetSystem<Scalar> sys;
    sys.zero_mask = mask;
    for (Index k = 0; k < m; ++k) ((mask >> k) & 1u ? sys.zeroed : sys.free).push_back(k);
    const auto nf = static_cast<Index>(sys.free.size());
    Matrix<Scalar> G_ff(nf, nf);
    for (Index r = 0; r < nf; ++r)
      for (Index c = 0; c < nf; ++c) G_ff(r, c) = G(sys.free[r], sys.free[c]);
    sys.gram.compute(G_ff);
    if (sys.gram.info() != Eigen::Success) throw Error(ErrorCode::RankDeficient, "Gram submatrix not positive definite");
    sys.ones_solution = sys.gram.solve(Vector<Scalar>::Ones(nf));
    sys.ones_sum = sys.ones_solution.sum();
    systems.push_back(std::move(sys));
  }

  Matrix<Scalar> A = Matrix<Scalar>::Zero(m, n);
  std::atomic<Index> failed{-1};
  for_each_chunk(n, [&](Index, Index first, Index count) {
    Vector<Scalar> h(m), w, a_free;
    for (Index j = first; j < first + count; ++j) {
      h.noalias() = E.data().transpose() * X.data().col(j);
      bool found = false;
      for (const auto& sys : systems) {
        const auto nf = static_cast<Index>(sys.free.size());
        w.resize(nf);
        for (Index r = 0; r < nf; ++r) w(r) = h(sys.free[r]);
        sys.gram.solveInPlace(w);
        const Scalar nu = (w.sum() - Scalar(1)) / sys.ones_sum;
        a_free = w - nu * sys.ones_solution;
        if (a_free.minCoeff() < -primal_tol) continue;
        bool dual_ok = true;
        for (const Index k : sys.zeroed) {
          Scalar lambda = nu - h(k);
          for (Index r = 0; r < nf; ++r) lambda += G(k, sys.free[r]) * a_free(r);
          if (lambda < -dual_tol) {
            dual_ok = false;
            break;
          }
        }
        if (!dual_ok) continue;
        for (Index r = 0; r < nf; ++r) A(sys.free[r], j) = a_free(r);
        found = true;
        break;
      }
      if (!found) {
        Index expected = -1;
        failed.compare_exchange_strong(expected, j);
      }
    }
  });
  if (failed.load() >= 0) {
    throw Error(ErrorCode::NoKKTPoint, "no active set satisfies the KKT conditions at pixel " +
                                           std::to_string(failed.load()));
  }
  result.A_hat = AbundanceMatrix<Scalar>(std::move(A), X.shape());
  result.wall_time = detail::seconds_since(start);
  return result;
}

// Optional cleanup: entries in [-eps_feas, 0) become 0, then columns are
// rescaled to sum to one.
template <typename Scalar>
void clip_abundances(AbundanceMatrix<Scalar>& A, double eps_feas = kDefaultEpsFeas) {
  auto& data = A.data();
  for (Index j = 0; j < data.cols(); ++j) {
    auto col = data.col(j);
    for (Index i = 0; i < col.size(); ++i) {
      if (col(i) < Scalar(0) && col(i) >= Scalar(-eps_feas)) col(i) = Scalar(0);
    }
    const Scalar sum = col.sum();
    if (sum > Scalar(0)) col /= sum;
  }
}

}  // namespace sudap

#endif  // SUDAP_SOLVER_HPP
