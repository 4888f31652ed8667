#include "helpers.hpp"

using namespace sudap;
using namespace testing;

namespace {

double objective_of(const MatrixXd& E, const MatrixXd& X, const MatrixXd& A) { return (X - E * A).squaredNorm(); }

DykstraConfig<double> tight() {
  DykstraConfig<double> cfg;
  cfg.rel_tol = 1e-12;
  cfg.max_sweeps = 20000;
  return cfg;
}

}  // namespace

TEST_CASE("solve_sudap recovers fixed points") {
  std::mt19937_64 rng(41);
  const auto E = random_endmembers(50, 5, rng);

  SUBCASE("pure pixels") {
    const ImageCube<double> X(E.data());
    const auto r = solve_sudap(E, X, tight());
    CHECK(r.solver_id == SolverId::sudap);
    CHECK((r.A_hat.data() - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-8);
  }

  SUBCASE("noiseless mixtures") {
    const MatrixXd A = random_simplex(5, 400, rng);
    const ImageCube<double> X(E.data() * A, Shape{20, 20});
    const auto r = solve_sudap(E, X, tight());
    CHECK((r.A_hat.data() - A).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(r.A_hat.shape() == Shape{20, 20});
  }

  SUBCASE("single endmember") {
    const EndmemberMatrix<double> E1(MatrixXd::Ones(6, 1));
    const auto r = solve_sudap(E1, ImageCube<double>(uniform_matrix(6, 9, rng)));
    CHECK(r.A_hat.data() == MatrixXd::Ones(1, 9));
  }

  SUBCASE("rank deficiency propagates") {
    MatrixXd Ed = E.data();
    Ed.col(4) = Ed.col(3);
    CHECK_THROWS_CODE(solve_sudap(EndmemberMatrix<double>(Ed), ImageCube<double>(uniform_matrix(50, 3, rng))),
                      ErrorCode::RankDeficient);
  }
}

TEST_CASE("solve_sudap agrees with the oracle on synthetic scenes") {
  const auto lib = synthetic_library();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto E = select_endmembers(lib, 5, 10.0, derive_seed(seed, 0));
    const auto A = sample_abundances(5, Shape{32, 32}, derive_seed(seed, 1));
    const auto X = synthesize_cube(E, A, NoiseSpec{30.0, derive_seed(seed, 2)}, Shape{32, 32});
    const auto sudap = solve_sudap(E, X, tight());
    const auto oracle = solve_oracle_activeset(E, X);
    CHECK(relative_error_db(sudap.A_hat, oracle.A_hat) <= -120.0);
    const auto report = column_feasibility(sudap.A_hat);
    CHECK(report.max_sum_violation <= 1e-9);
    CHECK(report.min_entry >= -1e-7);
  }
}

TEST_CASE("solve_ls") {
  std::mt19937_64 rng(42);

  SUBCASE("consistent system") {
    const auto E = random_endmembers(30, 4, rng);
    const MatrixXd A = normal_matrix(4, 25, rng);
    const auto r = solve_ls(E, ImageCube<double>(E.data() * A));
    CHECK(r.solver_id == SolverId::ls);
    CHECK(rel_fro(r.A_hat.data(), A) <= 1e-10);
  }

  SUBCASE("orthonormal endmembers") {
    const Eigen::HouseholderQR<MatrixXd> qr(normal_matrix(12, 4, rng));
    const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(12, 4);
    const MatrixXd X = uniform_matrix(12, 10, rng);
    const auto r = solve_ls(EndmemberMatrix<double>(Q), ImageCube<double>(X));
    CHECK((r.A_hat.data() - Q.transpose() * X).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("optimality and residual orthogonality") {
    const auto E = random_endmembers(30, 5, rng);
    const ImageCube<double> X(uniform_matrix(30, 20, rng));
    const MatrixXd A = solve_ls(E, X).A_hat.data();
    const MatrixXd G = E.data().transpose() * E.data();
    const MatrixXd h = E.data().transpose() * X.data();
    CHECK((h - G * A).norm() <= 1e-9 * h.norm());
    const double best = objective_of(E.data(), X.data(), A);
    for (int k = 0; k < 100; ++k) {
      const MatrixXd other = A + normal_matrix(5, 20, rng, 0.1);
      CHECK(best <= objective_of(E.data(), X.data(), other));
    }
  }
}

TEST_CASE("solve_ls_sum1") {
  std::mt19937_64 rng(43);
  const auto E = random_endmembers(30, 5, rng);

  SUBCASE("recovers feasible noiseless pixels") {
    const MatrixXd A = random_simplex(5, 30, rng);
    const auto r = solve_ls_sum1(E, ImageCube<double>(E.data() * A));
    CHECK(r.solver_id == SolverId::ls_sum1);
    CHECK((r.A_hat.data() - A).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SUBCASE("column sums and hyperplane equivalence") {
    const ImageCube<double> X(uniform_matrix(30, 200, rng, -1.0, 2.0));
    const auto r = solve_ls_sum1(E, X);
    CHECK((r.A_hat.data().colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    const auto T = build_transform(E);
    const MatrixXd via_S = inverse_transform(T, project_hyperplane(T, forward_transform(T, E, X))).data();
    CHECK((r.A_hat.data() - via_S).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SUBCASE("matches the oracle on interior pixels") {
    const auto X = ImageCube<double>(E.data() * random_simplex(5, 100, rng) + normal_matrix(30, 100, rng, 1e-4));
    const auto ls1 = solve_ls_sum1(E, X).A_hat.data();
    const auto exact = solve_oracle_activeset(E, X).A_hat.data();
    int interior = 0;
    for (Index j = 0; j < X.n_pixels(); ++j) {
      if (exact.col(j).minCoeff() > 0.0) {
        ++interior;
        CHECK((ls1.col(j) - exact.col(j)).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
    CHECK(interior > 50);
  }
}

TEST_CASE("solve_oracle_activeset") {
  std::mt19937_64 rng(44);

  SUBCASE("interior LS solution is returned unchanged") {
    const auto E = random_endmembers(20, 4, rng);
    const MatrixXd A = random_simplex(4, 5, rng);
    const auto r = solve_oracle_activeset(E, ImageCube<double>(E.data() * A));
    CHECK((r.A_hat.data() - A).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SUBCASE("canonical two-endmember case") {
    MatrixXd E = MatrixXd::Zero(3, 2);
    E.topRows(2) = MatrixXd::Identity(2, 2);
    MatrixXd x = MatrixXd::Zero(3, 1);
    x(0, 0) = 1.6;
    x(1, 0) = 0.2;
    const auto r = solve_oracle_activeset(EndmemberMatrix<double>(E), ImageCube<double>(x));
    CHECK(std::abs(r.A_hat.data()(0, 0) - 1.0) <= 1e-14);
    CHECK(r.A_hat.data()(1, 0) == 0.0);
  }

  SUBCASE("beats random feasible points") {
    const auto E = random_endmembers(25, 6, rng);
    const ImageCube<double> X(uniform_matrix(25, 10, rng, -0.2, 1.2));
    const MatrixXd A = solve_oracle_activeset(E, X).A_hat.data();
    CHECK(column_feasibility(A).feasible);
    for (Index j = 0; j < X.n_pixels(); ++j) {
      const double best = (X.data().col(j) - E.data() * A.col(j)).squaredNorm();
      const MatrixXd candidates = random_simplex(6, 1000, rng);
      for (Index k = 0; k < candidates.cols(); ++k) {
        CHECK(best <= (X.data().col(j) - E.data() * candidates.col(k)).squaredNorm() + 1e-12);
      }
    }
  }

  SUBCASE("endmember limit") {
    const auto E = random_endmembers(40, 20, rng);
    CHECK_THROWS_CODE(solve_oracle_activeset(E, ImageCube<double>(uniform_matrix(40, 2, rng))),
                      ErrorCode::TooManyEndmembers);
  }

  SUBCASE("single endmember") {
    const EndmemberMatrix<double> E1(MatrixXd::Ones(4, 1));
    CHECK(solve_oracle_activeset(E1, ImageCube<double>(uniform_matrix(4, 3, rng))).A_hat.data() ==
          MatrixXd::Ones(1, 3));
  }
}

TEST_CASE("objective ordering follows constraint nesting") {
  std::mt19937_64 rng(45);
  for (int k = 0; k < 10; ++k) {
    const auto E = random_endmembers(30, 3 + k % 5, rng);
    const ImageCube<double> X(uniform_matrix(30, 40, rng, -0.2, 1.0));
    const double j_ls = objective(E, X, solve_ls(E, X).A_hat);
    const double j_sum1 = objective(E, X, solve_ls_sum1(E, X).A_hat);
    const double j_sudap = objective(E, X, solve_sudap(E, X, tight()).A_hat);
    const double j_oracle = objective(E, X, solve_oracle_activeset(E, X).A_hat);
    CHECK(j_sum1 - j_ls >= -1e-9);
    CHECK(j_sudap - j_sum1 >= -1e-9);
    CHECK(std::abs(j_sudap - j_oracle) <= 1e-9 * std::max(1.0, j_oracle));
  }
}

TEST_CASE("structural column sums at loose tolerance") {
  std::mt19937_64 rng(46);
  const auto E = random_endmembers(30, 6, rng);
  const ImageCube<double> X(uniform_matrix(30, 100, rng, -0.5, 1.5));
  DykstraConfig<double> loose;
  loose.rel_tol = 1e-2;
  const auto r = solve_sudap(E, X, loose);
  CHECK(r.trace.sweeps() < 50);
  CHECK(column_feasibility(r.A_hat).max_sum_violation <= 1e-9);
}

TEST_CASE("clip_abundances") {
  MatrixXd A(3, 2);
  A << 0.5, -0.2, 0.5 + 5e-8, 0.7, -5e-8, 0.5;
  AbundanceMatrix<double> Am(A);
  clip_abundances(Am);
  CHECK(Am.data()(2, 0) == 0.0);
  CHECK(std::abs(Am.data().col(0).sum() - 1.0) <= 1e-15);
  // Entries below -eps_feas are left alone.
  CHECK(Am.data()(0, 1) < 0.0);
}
