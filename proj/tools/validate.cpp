#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "commands.hpp"
#include "sudap/sudap.hpp"

namespace sudap::cli {

namespace {

struct Property {
  std::string name;
  double threshold = 0.0;
  double worst = 0.0;
  int checked = 0;

  void observe(double err) {
    worst = std::max(worst, std::isnan(err) ? INFINITY : err);
    ++checked;
  }
  bool pass() const { return checked > 0 && worst <= threshold; }
};

// Well-conditioned random endmembers and coefficients for the projector checks.
struct ProjectorCase {
  SubspaceTransform<double> T;
  Eigen::MatrixXd Z;
  Index i = 0;
};

ProjectorCase projector_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> m_dist(2, 10);
  std::uniform_int_distribution<int> n_dist(1, 64);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index m = m_dist(rng);
  const Index bands = 2 * m + 10;
  Eigen::MatrixXd E(bands, m);
  for (Index c = 0; c < m; ++c)
    for (Index r = 0; r < bands; ++r) E(r, c) = unit(rng);
  ProjectorCase pc;
  pc.T = build_transform(EndmemberMatrix<double>(E));
  const Index n = n_dist(rng);
  pc.Z.resize(m, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < m; ++r) pc.Z(r, c) = 3.0 * normal(rng);
  pc.i = std::uniform_int_distribution<Index>(0, m - 1)(rng);
  return pc;
}

double column_scale(const Eigen::MatrixXd& Z) { return std::max(1.0, Z.cwiseAbs().maxCoeff()); }

}  // namespace

int cmd_validate(const ValidateOptions& opt) {
  if (opt.instances < 1) throw Error(ErrorCode::InvalidArgument, "--instances must be at least 1");

  Property equivalence{"projector-equivalence", 1e-12};
  Property membership{"projection-membership", 1e-10};
  Property idempotence{"projection-idempotence", 1e-12};
  Property oracle{"oracle-equivalence", -120.0, -INFINITY};
  Property confinement{"hyperplane-confinement", 1e-9};
  Property feasibility{"abundance-feasibility", 1.0};

  for (int k = 0; k < opt.instances; ++k) {
    const auto pc = projector_case(derive_seed(opt.seed, static_cast<std::uint64_t>(k)));
    const auto& T = pc.T;
    const double scale = column_scale(pc.Z);
    const auto geometric = project_intersection_geometric(T, pc.i, pc.Z);
    const auto kkt = project_intersection_kkt(T, pc.i, pc.Z);
    equivalence.observe((geometric - kkt).cwiseAbs().maxCoeff() / scale);

    const double on_S = ((T.b.transpose() * geometric).array() - 1.0).abs().maxCoeff();
    const double in_N = std::max(0.0, -(T.d(pc.i).transpose() * geometric).minCoeff());
    membership.observe(std::max(on_S, in_N) / scale);

    const auto twice = project_intersection_geometric(T, pc.i, geometric);
    idempotence.observe((twice - geometric).cwiseAbs().maxCoeff() / scale);
  }

  const auto lib = synthetic_library();
  const int solver_instances = std::max(1, opt.instances / 4);
  for (int k = 0; k < solver_instances; ++k) {
    const std::uint64_t seed = derive_seed(opt.seed, 1000000u + static_cast<std::uint64_t>(k));
    const Index m = 3 + k % 4;
    const Shape shape{8, 8};
    const auto E = select_endmembers(lib, m, 10.0, derive_seed(seed, 0));
    const auto A = sample_abundances(m, shape, derive_seed(seed, 1));
    const auto X = synthesize_cube(E, A, NoiseSpec{30.0, derive_seed(seed, 2)}, shape);

    DykstraConfig<double> cfg;
    cfg.rel_tol = 1e-12;
    cfg.max_sweeps = 20000;
    cfg.snapshot_every = 1;
    const auto T = build_transform(E);
    const auto Y = forward_transform(T, E, X);
    double worst_sum = 0.0;
    cfg.on_snapshot = [&](const SweepRecord&, const CoefficientMatrix<double>& U) {
      worst_sum = std::max(worst_sum, ((T.b.transpose() * U).array() - 1.0).abs().maxCoeff());
      return true;
    };
    const auto projected = dykstra_project(T, Y, cfg);
    const auto A_hat = inverse_transform(T, projected.U_hat, shape);
    const auto exact = solve_oracle_activeset(E, X);
    oracle.observe(relative_error_db(A_hat, exact.A_hat));
    confinement.observe(worst_sum);
    const auto report = column_feasibility(A_hat);
    // Worst violation as a fraction of its tolerance.
    feasibility.observe(std::max(report.max_sum_violation / kDefaultEpsSum, -report.min_entry / kDefaultEpsFeas));
  }

  const std::vector<const Property*> table{&equivalence, &membership, &idempotence, &oracle, &confinement,
                                           &feasibility};
  bool all = true;
  std::printf("%-26s %9s %14s %14s  %s\n", "property", "instances", "worst", "threshold", "result");
  for (const auto* p : table) {
    std::printf("%-26s %9d %14.3e %14.3e  %s\n", p->name.c_str(), p->checked, p->worst, p->threshold,
                p->pass() ? "PASS" : "FAIL");
    all = all && p->pass();
  }
  std::fflush(stdout);
  if (!all) {
    std::cerr << "validate: failed:";
    for (const auto* p : table)
      if (!p->pass()) std::cerr << ' ' << p->name;
    std::cerr << '\n';
  }
  return all ? kExitOk : kExitValidationFailed;
}

}  // namespace sudap::cli
