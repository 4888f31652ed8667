#ifndef SUDAP_DYKSTRA_HPP
#define SUDAP_DYKSTRA_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "sudap/projectors.hpp"

namespace sudap {

struct SweepRecord {
  int sweep = 0;
  double elapsed_s = 0.0;   // solver time since start, excluding hooks
  double rel_change = 0.0;  // |U(k) - U(k-1)|_F / |U(k)|_F
  double objective = 0.0;   // |Y - U(k)|_F^2
  std::optional<long> unconverged;
};

template <typename Scalar = double>
struct Snapshot {
  int sweep = 0;
  double elapsed_s = 0.0;
  CoefficientMatrix<Scalar> U;
};

template <typename Scalar = double>
struct DykstraTrace {
  std::vector<SweepRecord> records;
  std::vector<Snapshot<Scalar>> snapshots;
  bool converged = false;  // stopped on rel_tol rather than on the sweep cap or a hook

  int sweeps() const { return records.empty() ? 0 : records.back().sweep; }
};

template <typename Scalar = double>
struct DykstraConfig {
  int max_sweeps = 2000;
  // Stop once the relative change between sweeps drops to rel_tol. Zero
  // disables the test and always runs max_sweeps.
  double rel_tol = 1e-10;

  // Per-pixel telemetry against a reference solution in coefficient space.
  bool track_per_pixel = false;
  double pixel_tol_db = -100.0;
  const CoefficientMatrix<Scalar>* pixel_reference = nullptr;

  // Snapshot cadence in sweeps; 0 disables snapshots. The last sweep is
  // always snapshotted when snapshots are on.
  int snapshot_every = 0;
  bool keep_snapshots = false;
  // Called on every snapshot; returning false stops the run.
  std::function<bool(const SweepRecord&, const CoefficientMatrix<Scalar>&)> on_snapshot;
};

// Iterate and corrections. Corrections are indexed by the set they belong to:
// slot i holds the residual of the last projection onto S & N_i, stacked in
// one (m*m) x n matrix.
template <typename Scalar = double>
class DykstraState {
 public:
  DykstraState() = default;

  template <typename Derived>
  explicit DykstraState(const Eigen::MatrixBase<Derived>& Y)
      : U(Y), Q(CoefficientMatrix<Scalar>::Zero(Y.rows() * Y.rows(), Y.cols())) {}

  auto correction(Index i) { return Q.middleRows(i * U.rows(), U.rows()); }
  auto correction(Index i) const { return Q.middleRows(i * U.rows(), U.rows()); }

  CoefficientMatrix<Scalar> U;
  CoefficientMatrix<Scalar> Q;
  int sweep = 0;
  double last_delta = 0.0;
};

template <typename Scalar = double>
struct DykstraResult {
  CoefficientMatrix<Scalar> U_hat;
  DykstraTrace<Scalar> trace;
};

namespace detail {

template <typename Scalar>
struct SweepSums {
  Scalar delta2 = 0;
  Scalar norm2 = 0;
  Scalar objective = 0;
  long unconverged = 0;
};

template <typename Scalar, typename A, typename B>
bool pixel_unconverged(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& u_star, double tol_db) {
  const double err = static_cast<double>((u - u_star).squaredNorm());
  const double ref = static_cast<double>(u_star.squaredNorm());
  if (err == 0.0) return false;
  if (ref == 0.0) return true;
  return 10.0 * std::log10(err / ref) > tol_db;
}

}  // namespace detail

// One full pass over the m sets for every pixel, column by column.
template <typename Scalar, typename Derived>
detail::SweepSums<Scalar> dykstra_sweep(const SubspaceTransform<Scalar>& T, const Eigen::MatrixBase<Derived>& Y,
                                        DykstraState<Scalar>& state, const DykstraConfig<Scalar>& cfg = {}) {
  const Index m = T.size();
  const Index n = state.U.cols();
  const bool track = cfg.track_per_pixel && cfg.pixel_reference != nullptr;
  std::vector<detail::SweepSums<Scalar>> partial(static_cast<std::size_t>(chunk_count(n)));

  for_each_chunk(n, [&](Index chunk, Index first, Index count) {
    Vector<Scalar> u(m), prev(m);
    detail::SweepSums<Scalar> sums;
    for (Index j = first; j < first + count; ++j) {
      u = state.U.col(j);
      prev = u;
      // Set 0 keeps the normal component of Y in its correction, so its
      // input is off the hyperplane; every later input is on it.
      for (Index i = 0; i < m; ++i) dykstra_step_column(T, i, u, state.Q.col(j).segment(i * m, m), i != 0);
      state.U.col(j) = u;
      sums.delta2 += (u - prev).squaredNorm();
      sums.norm2 += u.squaredNorm();
      sums.objective += (Y.col(j) - u).squaredNorm();
      if (track && detail::pixel_unconverged<Scalar>(u, cfg.pixel_reference->col(j), cfg.pixel_tol_db)) {
        ++sums.unconverged;
      }
    }
    partial[static_cast<std::size_t>(chunk)] = sums;
  });

  detail::SweepSums<Scalar> total;
  for (const auto& p : partial) {
    total.delta2 += p.delta2;
    total.norm2 += p.norm2;
    total.objective += p.objective;
    total.unconverged += p.unconverged;
  }
  ++state.sweep;
  using std::sqrt;
  state.last_delta = static_cast<double>(sqrt(total.delta2)) /
                     std::max(static_cast<double>(sqrt(total.norm2)), 1e-300);
  return total;
}

// Dykstra's alternating projection of Y onto S & N_1 & ... & N_m.
template <typename Scalar, typename Derived>
DykstraResult<Scalar> dykstra_project(const SubspaceTransform<Scalar>& T, const Eigen::MatrixBase<Derived>& Y,
                                      const DykstraConfig<Scalar>& cfg = {}) {
  using Clock = std::chrono::steady_clock;
  detail::require_rows(T, Y.rows());
  if (cfg.max_sweeps < 1) throw Error(ErrorCode::InvalidArgument, "max_sweeps must be at least 1");
  if (!(cfg.rel_tol >= 0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must be non-negative");
  if (cfg.pixel_reference && (cfg.pixel_reference->rows() != Y.rows() || cfg.pixel_reference->cols() != Y.cols())) {
    throw Error(ErrorCode::ShapeMismatch, "per-pixel reference does not match Y");
  }

  DykstraResult<Scalar> result;
  DykstraState<Scalar> state(Y);
  const bool track = cfg.track_per_pixel && cfg.pixel_reference != nullptr;
  const bool snapshots = cfg.snapshot_every > 0;

  double excluded = 0.0;
  const auto start = Clock::now();
  for (int k = 1; k <= cfg.max_sweeps; ++k) {
    const auto sums = dykstra_sweep(T, Y, state, cfg);

    SweepRecord record;
    record.sweep = state.sweep;
    record.rel_change = state.last_delta;
    record.objective = static_cast<double>(sums.objective);
    if (track) record.unconverged = sums.unconverged;
    const auto now = Clock::now();
    record.elapsed_s = std::chrono::duration<double>(now - start).count() - excluded;

    if (!std::isfinite(record.rel_change) || !std::isfinite(record.objective)) {
      throw Error(ErrorCode::NonFinite, "iterate became non-finite at sweep " + std::to_string(k));
    }
    result.trace.records.push_back(record);

    const bool converged = cfg.rel_tol > 0 && record.rel_change <= cfg.rel_tol;
    const bool last = converged || k == cfg.max_sweeps;
    bool keep_going = true;
    if (snapshots && (k % cfg.snapshot_every == 0 || last)) {
      const auto hook_start = Clock::now();
      if (cfg.keep_snapshots) result.trace.snapshots.push_back({record.sweep, record.elapsed_s, state.U});
      if (cfg.on_snapshot) keep_going = cfg.on_snapshot(record, state.U);
      excluded += std::chrono::duration<double>(Clock::now() - hook_start).count();
    }
    if (converged) {
      result.trace.converged = true;
      break;
    }
    if (!keep_going) break;
  }
  result.U_hat = std::move(state.U);
  return result;
}

// Number of columns whose error against U_star exceeds tol_db, per snapshot.
template <typename Scalar, typename Derived>
long count_unconverged(const CoefficientMatrix<Scalar>& U, const Eigen::MatrixBase<Derived>& U_star, double tol_db) {
  if (U.rows() != U_star.rows() || U.cols() != U_star.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "snapshot and reference differ in shape");
  }
  long count = 0;
  for (Index j = 0; j < U.cols(); ++j) {
    if (detail::pixel_unconverged<Scalar>(U.col(j), U_star.col(j), tol_db)) ++count;
  }
  return count;
}

template <typename Scalar, typename Derived>
std::vector<long> per_pixel_unconverged(const std::vector<Snapshot<Scalar>>& snapshots,
                                        const Eigen::MatrixBase<Derived>& U_star, double tol_db = -100.0) {
  std::vector<long> counts;
  counts.reserve(snapshots.size());
  for (const auto& snap : snapshots) counts.push_back(count_unconverged(snap.U, U_star, tol_db));
  return counts;
}

}  // namespace sudap

#endif  // SUDAP_DYKSTRA_HPP
