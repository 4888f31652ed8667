#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sudap/sudap.hpp"

using namespace sudap;
using Eigen::MatrixXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pinned tolerances.
constexpr int kOracleInstances = 50;
constexpr double kOracleReDb = -120.0;
constexpr int kProjectorTriples = 1000;
constexpr double kProjectorTol = 1e-12;
constexpr double kSumTol = 1e-9;
constexpr double kMinAbundance = -1e-7;
constexpr double kHyperplaneTol = 1e-9;
constexpr double kDecayFactor = 1e-10;
constexpr int kDecaySweeps = 1000;
constexpr double kTailCutoff = 1e-12;
constexpr double kRatioLow = 2.5;
constexpr double kRatioHigh = 6.0;
constexpr double kGapTol = 1e-8;
constexpr double kLsIdentityTol = 1e-10;
constexpr double kNoiselessNmseDb = -160.0;
constexpr double kSmokeReDb = -100.0;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

struct Line {
  int id = 0;
  bool pass = false;
  std::string text;
};

std::vector<Line> lines;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  lines.push_back({id, pass, fmt("criterion %d %s  %-28s %s", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str())});
}

struct Scene {
  EndmemberMatrix<double> E;
  AbundanceMatrix<double> A;
  ImageCube<double> X;
};

Scene make_scene(const SpectralLibrary& lib, Index m, Shape shape, double snr_db, std::uint64_t seed) {
  auto E = select_endmembers(lib, m, 10.0, derive_seed(seed, 0));
  auto A = sample_abundances(m, shape, derive_seed(seed, 1));
  auto X = synthesize_cube(E, A, NoiseSpec{snr_db, derive_seed(seed, 2)}, shape);
  return {std::move(E), std::move(A), std::move(X)};
}

double hyperplane_deviation(const SubspaceTransform<double>& T, const MatrixXd& U) {
  return ((T.b.transpose() * U).array() - 1.0).abs().maxCoeff();
}

// Slope of the least-squares line through (k, log e_k) over k >= 5 with e_k
// above 1e-12; infinite when fewer than two points qualify.
double tail_slope(const std::vector<double>& e) {
  double sk = 0, sy = 0, skk = 0, sky = 0, count = 0;
  for (std::size_t idx = 4; idx < e.size(); ++idx) {
    if (!(e[idx] > kTailCutoff)) continue;
    const double x = static_cast<double>(idx + 1);
    const double y = std::log(e[idx]);
    sk += x;
    sy += y;
    skk += x * x;
    sky += x * y;
    count += 1;
  }
  if (count < 2) return kInf;
  return (count * sky - sk * sy) / (count * skk - sk * sk);
}

void oracle_feasibility_and_decay(const SpectralLibrary& lib) {
  const auto start = std::chrono::steady_clock::now();
  double worst_re = -kInf, worst_sum = 0.0, worst_min = kInf, worst_plane = 0.0;
  double worst_slope = -kInf, worst_decay = 0.0;
  int decay_misses = 0, exact_first = 0, fitted = 0;
  for (int k = 0; k < kOracleInstances; ++k) {
    const Index m = 3 + k % 6;
    const auto s = make_scene(lib, m, Shape{32, 32}, 30.0, derive_seed(1000, static_cast<std::uint64_t>(k)));
    const auto oracle = solve_oracle_activeset(s.E, s.X);
    const auto T = build_transform(s.E);
    const MatrixXd Y = forward_transform(T, s.E, s.X);

    DykstraConfig<double> cfg;
    cfg.rel_tol = 1e-12;
    cfg.max_sweeps = 5000;
    cfg.snapshot_every = 1;
    cfg.on_snapshot = [&](const SweepRecord&, const CoefficientMatrix<double>& U) {
      worst_plane = std::max(worst_plane, hyperplane_deviation(T, U));
      return true;
    };
    const auto run = dykstra_project(T, Y, cfg);
    const auto A_hat = inverse_transform(T, run.U_hat);
    worst_re = std::max(worst_re, relative_error_db(A_hat.data(), oracle.A_hat.data()));
    const auto feas = column_feasibility(A_hat, kSumTol, -kMinAbundance);
    worst_sum = std::max(worst_sum, feas.max_sum_violation);
    worst_min = std::min(worst_min, feas.min_entry);

    std::vector<double> err;
    DykstraConfig<double> decay;
    decay.rel_tol = 0.0;
    decay.max_sweeps = std::min(kDecaySweeps, run.trace.sweeps());
    decay.snapshot_every = 1;
    decay.on_snapshot = [&](const SweepRecord&, const CoefficientMatrix<double>& U) {
      err.push_back((U - run.U_hat).norm());
      return err.back() > kDecayFactor * err.front();
    };
    dykstra_project(T, Y, decay);
    if (err.front() == 0.0) ++exact_first;
    const double ratio = err.front() > 0.0 ? err.back() / err.front() : 0.0;
    worst_decay = std::max(worst_decay, ratio);
    if (!(err.back() <= kDecayFactor * err.front())) ++decay_misses;
    const double slope = tail_slope(err);
    if (std::isfinite(slope)) {
      ++fitted;
      worst_slope = std::max(worst_slope, slope);
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(1, worst_re <= kOracleReDb, "oracle equivalence",
         fmt("%d instances, worst RE %.1f dB (<= %.0f), %.1f s", kOracleInstances, worst_re, kOracleReDb, seconds));
  report(3, worst_sum <= kSumTol && worst_min >= kMinAbundance && worst_plane <= kHyperplaneTol,
         "feasibility structure",
         fmt("sum dev %.2e (<= %.0e), min %.2e (>= %.0e), hyperplane %.2e (<= %.0e)", worst_sum, kSumTol, worst_min,
             kMinAbundance, worst_plane, kHyperplaneTol));
  report(4, worst_slope < 0.0 && decay_misses == 0, "geometric convergence",
         fmt("tail slope worst %.3g (< 0, %d fits), e_K/e_1 worst %.2e (<= %.0e in %d sweeps), misses %d, "
             "exact after sweep 1: %d",
             worst_slope, fitted, worst_decay, kDecayFactor, kDecaySweeps, decay_misses, exact_first));
}

void projector_equivalence() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> m_dist(2, 10);
  std::uniform_int_distribution<int> n_dist(1, 64);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < kProjectorTriples; ++k) {
    const Index m = m_dist(rng);
    const Index n = n_dist(rng);
    MatrixXd E(2 * m + 10, m);
    for (Index c = 0; c < E.cols(); ++c)
      for (Index r = 0; r < E.rows(); ++r) E(r, c) = unit(rng);
    MatrixXd Z(m, n);
    for (Index c = 0; c < n; ++c)
      for (Index r = 0; r < m; ++r) Z(r, c) = 3.0 * normal(rng);
    const Index i = std::uniform_int_distribution<Index>(0, m - 1)(rng);
    const auto T = build_transform(EndmemberMatrix<double>(E));
    const MatrixXd g = project_intersection_geometric(T, i, Z);
    const MatrixXd h = project_intersection_kkt(T, i, Z);
    worst = std::max(worst, (g - h).cwiseAbs().maxCoeff());
  }
  report(2, worst <= kProjectorTol, "projector equivalence",
         fmt("%d triples, max |geometric - kkt| %.2e (<= %.0e)", kProjectorTriples, worst, kProjectorTol));
}

struct TimingCase {
  SubspaceTransform<double> T;
  MatrixXd Y;
};

TimingCase timing_case(const SpectralLibrary& lib, Index m, Index n) {
  const auto s = make_scene(lib, m, Shape{1, n}, 30.0, derive_seed(77, static_cast<std::uint64_t>(m * 1000003 + n)));
  auto T = build_transform(s.E);
  MatrixXd Y = forward_transform(T, s.E, s.X);
  return {std::move(T), std::move(Y)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

void complexity_scaling(const SpectralLibrary& lib) {
  const int saved = num_threads();
  set_num_threads(1);
  const std::vector<TimingCase> cases{timing_case(lib, 8, 10000), timing_case(lib, 8, 40000),
                                      timing_case(lib, 16, 10000)};
  DykstraConfig<double> cfg;
  cfg.rel_tol = 0.0;
  cfg.max_sweeps = 30;
  // Each round times all three cases back to back; ratios are taken within a round.
  std::vector<double> base, rn, rm;
  for (int round = 0; round < 11; ++round) {
    double t[3];
    for (int k = 0; k < 3; ++k) {
      const auto run = dykstra_project(cases[k].T, cases[k].Y, cfg);
      t[k] = run.trace.records.back().elapsed_s / run.trace.sweeps();
    }
    base.push_back(t[0]);
    rn.push_back(t[1] / t[0]);
    rm.push_back(t[2] / t[0]);
  }
  set_num_threads(saved);
  const double n_ratio = median(rn);
  const double m_ratio = median(rm);
  const bool ok = n_ratio >= kRatioLow && n_ratio <= kRatioHigh && m_ratio >= kRatioLow && m_ratio <= kRatioHigh;
  report(5, ok, "complexity scaling",
         fmt("median t(4n)/t(n) %.2f, t(m=16)/t(m=8) %.2f, both in [%.1f, %.1f]; t(n=1e4, m=8) %.3g s/sweep",
             n_ratio, m_ratio, kRatioLow, kRatioHigh, median(base)));
}

void reduced_problem(const SpectralLibrary& lib) {
  const auto s = make_scene(lib, 6, Shape{20, 20}, 30.0, 606);
  const auto T = build_transform(s.E);
  const MatrixXd Y = forward_transform(T, s.E, s.X);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> gaps;
  double worst_gap = 0.0;
  for (int k = 0; k < 100; ++k) {
    MatrixXd A(6, s.X.n_pixels());
    for (Index c = 0; c < A.cols(); ++c)
      for (Index r = 0; r < A.rows(); ++r) A(r, c) = normal(rng);
    const double full = (s.X.data() - s.E.data() * A).squaredNorm();
    const double reduced = (Y - T.D * A).squaredNorm();
    gaps.push_back(full - reduced);
    worst_gap = std::max(worst_gap, std::abs(gaps.back() - gaps.front()) / full);
  }
  const MatrixXd A_ls = solve_ls(s.E, s.X).A_hat.data();
  const double identity = (Y - T.D * A_ls).norm() / Y.norm();
  report(6, worst_gap <= kGapTol && identity <= kLsIdentityTol, "reduced-problem equivalence",
         fmt("gap spread %.2e (<= %.0e relative), |Y - D A_LS| %.2e (<= %.0e relative)", worst_gap, kGapTol, identity,
             kLsIdentityTol));
}

void noiseless_recovery(const SpectralLibrary& lib) {
  const auto s = make_scene(lib, 6, Shape{32, 32}, kInf, 707);
  DykstraConfig<double> cfg;
  cfg.rel_tol = 1e-12;
  cfg.max_sweeps = 5000;
  const auto r = solve_sudap(s.E, s.X, cfg);
  const double nmse = nmse_db(r.A_hat.data(), s.A.data());
  report(7, nmse <= kNoiselessNmseDb, "noiseless recovery", fmt("NMSE %.1f dB (<= %.0f)", nmse, kNoiselessNmseDb));
}

void smoke_benchmark(const SpectralLibrary& lib) {
  const auto s = make_scene(lib, 5, Shape{100, 100}, 30.0, 7);
  const auto oracle = solve_oracle_activeset(s.E, s.X);
  const auto start = std::chrono::steady_clock::now();
  const auto T = build_transform(s.E);
  const MatrixXd Y = forward_transform(T, s.E, s.X);
  double re = kInf;
  int sweeps = 0;
  double hook_s = 0.0;
  DykstraConfig<double> cfg;
  cfg.rel_tol = 0.0;
  cfg.max_sweeps = 5000;
  cfg.snapshot_every = 1;
  cfg.on_snapshot = [&](const SweepRecord& rec, const CoefficientMatrix<double>& U) {
    const auto t0 = std::chrono::steady_clock::now();
    re = relative_error_db(inverse_transform(T, U).data(), oracle.A_hat.data());
    sweeps = rec.sweep;
    hook_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return re > kSmokeReDb;
  };
  dykstra_project(T, Y, cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() - hook_s;
  report(8, re <= kSmokeReDb, "smoke benchmark",
         fmt("m=5, 100x100, 224 bands: RE %.1f dB (<= %.0f) after %d sweeps, %.3f s (oracle %.3f s)", re, kSmokeReDb,
             sweeps, wall, oracle.wall_time));
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void cli_determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("sudap_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string exe = std::string("'") + SUDAP_CLI_PATH + "'";
  const auto q = [](const std::filesystem::path& p) { return "'" + p.string() + "'"; };
  bool ok = shell(exe + " library --out " + q(dir / "lib.csv")) == 0 &&
            shell(exe + " simulate --library " + q(dir / "lib.csv") +
                  " --m 6 --min-angle 10 --rows 64 --cols 64 --snr-db 30 --seed 9 --out-prefix " + q(dir / "s")) == 0;
  const std::vector<std::pair<const char*, const char*>> runs{{"4", "a"}, {"4", "b"}, {"1", "c"}};
  for (const auto& [threads, name] : runs) {
    ok = ok && shell(exe + " --threads " + threads + " unmix --cube " + q(dir / "s.cube") + " --endmembers " +
                     q(dir / "s.endmembers.csv") + " --solver sudap --out " + q(dir / (std::string(name) + ".ab"))) == 0;
  }
  std::string detail = "CLI runs failed";
  if (ok) {
    const auto a = file_bytes(dir / "a.ab");
    const auto b = file_bytes(dir / "b.ab");
    const auto c = file_bytes(dir / "c.ab");
    ok = !a.empty() && a == b && a == c;
    detail = fmt("threads 4, 4, 1: %s (%zu bytes)", ok ? "identical" : "differ", a.size());
  }
  std::filesystem::remove_all(dir);
  report(9, ok, "determinism", detail);
}

}  // namespace

int main() {
  try {
    const auto lib = synthetic_library();
    oracle_feasibility_and_decay(lib);
    projector_equivalence();
    complexity_scaling(lib);
    reduced_problem(lib);
    noiseless_recovery(lib);
    smoke_benchmark(lib);
    cli_determinism();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int failures = 0;
  for (const auto& line : lines) {
    std::printf("%s\n", line.text.c_str());
    failures += line.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failures, lines.size());
  return failures == 0 ? 0 : 1;
}
