#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>

#include "sudap/sudap.hpp"

namespace sudap::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double parse_snr(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "Inf" || text == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::InvalidArgument, "--snr-db expects a number or 'inf', got '" + text + "'");
  }
  return value;
}

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Shape square_or_strip(long n) {
  const auto side = static_cast<long>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side == n) return Shape{side, side};
  return Shape{1, n};
}

void require_abundance_shape(const AbundanceMatrix<double>& A, Index m, Index n, const std::string& what) {
  if (A.n_endmembers() != m || A.n_pixels() != n) {
    throw Error(ErrorCode::ShapeMismatch, what + " is " + std::to_string(A.n_endmembers()) + "x" +
                                              std::to_string(A.n_pixels()) + ", expected " + std::to_string(m) +
                                              "x" + std::to_string(n));
  }
}

std::string db_text(double value) {
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value;
  return out.str();
}

// SUDAP with optional per-snapshot observation; curve timing excludes the
// observer and starts before the transform is built.
struct SudapRun {
  AbundanceMatrix<double> A;
  DykstraTrace<double> trace;
  double seconds = 0.0;
};

SudapRun run_sudap(const EndmemberMatrix<double>& E, const ImageCube<double>& X, DykstraConfig<double> cfg,
                   const std::function<bool(const SweepRecord&, double, const CoefficientMatrix<double>&,
                                            const SubspaceTransform<double>&)>& observe) {
  SudapRun run;
  const auto start = Clock::now();
  if (E.n_endmembers() == 1) {
    run.A = AbundanceMatrix<double>(Eigen::MatrixXd::Ones(1, X.n_pixels()), X.shape());
    run.seconds = seconds_since(start);
    return run;
  }
  const auto T = build_transform(E);
  const auto Y = forward_transform(T, E, X);
  const double setup = seconds_since(start);
  if (observe) {
    if (cfg.snapshot_every < 1) cfg.snapshot_every = 1;
    cfg.on_snapshot = [&](const SweepRecord& rec, const CoefficientMatrix<double>& U) {
      return observe(rec, setup + rec.elapsed_s, U, T);
    };
  }
  auto projected = dykstra_project(T, Y, cfg);
  const double finish_start = projected.trace.records.empty() ? 0.0 : projected.trace.records.back().elapsed_s;
  const auto inverse_start = Clock::now();
  run.A = inverse_transform(T, projected.U_hat, X.shape());
  run.seconds = setup + finish_start + seconds_since(inverse_start);
  run.trace = std::move(projected.trace);
  return run;
}

}  // namespace

int cmd_library(const LibraryOptions& opt) {
  const auto lib = synthetic_library(opt.bands, opt.count, opt.seed);
  io::write_library_csv(opt.out, lib);
  std::cout << "wrote " << lib.size() << " signatures x " << lib.n_bands() << " bands to " << opt.out << '\n';
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& opt) {
  const double snr = parse_snr(opt.snr_db);
  const auto lib = io::read_library_csv(opt.library);
  const Shape shape{opt.rows, opt.cols};
  const auto E = select_endmembers(lib, opt.m, opt.min_angle_deg, derive_seed(opt.seed, 0));
  const auto A = sample_abundances(E.n_endmembers(), shape, derive_seed(opt.seed, 1));
  const auto X = synthesize_cube(E, A, NoiseSpec{snr, derive_seed(opt.seed, 2)}, shape);

  io::write_cube(opt.out_prefix + ".cube", X);
  io::write_abundance(opt.out_prefix + ".truth", A);
  io::write_library_csv(opt.out_prefix + ".endmembers.csv", io::as_library(E));

  std::cout << "endmembers:";
  for (const auto& name : E.names()) std::cout << ' ' << name;
  std::cout << '\n';
  std::cout << "measured SNR (dB): " << db_text(measured_snr_db(E.data() * A.data(), X.data())) << '\n';
  return kExitOk;
}

int cmd_unmix(const UnmixOptions& opt) {
  const auto X = io::read_cube(opt.cube);
  const auto E = io::read_endmembers_csv(opt.endmembers);
  validate_dimensions(E, X);
  const Index m = E.n_endmembers();
  const Index n = X.n_pixels();

  std::optional<AbundanceMatrix<double>> reference;
  std::optional<AbundanceMatrix<double>> truth;
  if (opt.reference) {
    reference = io::read_abundance(*opt.reference);
    require_abundance_shape(*reference, m, n, "reference");
  }
  if (opt.truth) {
    truth = io::read_abundance(*opt.truth);
    require_abundance_shape(*truth, m, n, "truth");
  }
  CurveReferences<double> refs;
  if (reference) refs.A_star = &reference->data();
  if (truth) refs.A_true = &truth->data();

  ConvergenceCurve curve;
  SolveResult<double> result;
  if (opt.solver == "sudap") {
    DykstraConfig<double> cfg;
    cfg.rel_tol = opt.rel_tol;
    cfg.max_sweeps = opt.max_sweeps;
    cfg.snapshot_every = opt.curve ? opt.snapshot_every : 0;
    std::function<bool(const SweepRecord&, double, const CoefficientMatrix<double>&, const SubspaceTransform<double>&)>
        observe;
    if (opt.curve) {
      observe = [&](const SweepRecord& rec, double t, const CoefficientMatrix<double>& U,
                    const SubspaceTransform<double>& T) {
        curve.rows.push_back(curve_row(rec.sweep, t, U, T, refs, E, X));
        return true;
      };
    }
    auto run = run_sudap(E, X, cfg, observe);
    result.A_hat = std::move(run.A);
    result.trace = std::move(run.trace);
    result.wall_time = run.seconds;
    result.solver_id = SolverId::sudap;
  } else if (opt.solver == "ls") {
    result = solve_ls(E, X);
  } else if (opt.solver == "ls-sum1") {
    result = solve_ls_sum1(E, X);
  } else {
    result = solve_oracle_activeset(E, X);
  }
  if (opt.clip) clip_abundances(result.A_hat);

  if (opt.curve && result.solver_id != SolverId::sudap) {
    CurveRow row;
    row.time_s = result.wall_time;
    row.objective = objective(E, X, result.A_hat);
    if (refs.A_star) row.re_db = relative_error_db(result.A_hat.data(), *refs.A_star);
    if (refs.A_true) row.nmse_db = nmse_db(result.A_hat.data(), *refs.A_true);
    curve.rows.push_back(row);
  }

  io::write_abundance(opt.out, result.A_hat);
  if (opt.curve) io::write_curve_csv(*opt.curve, curve);

  const auto report = column_feasibility(result.A_hat);
  std::cout << "solver: " << to_string(result.solver_id) << '\n';
  if (result.solver_id == SolverId::sudap) {
    std::cout << "sweeps: " << result.trace.sweeps() << (result.trace.converged ? " (converged)" : "") << '\n';
  }
  std::cout << std::setprecision(10);
  std::cout << "objective: " << objective(E, X, result.A_hat) << '\n';
  std::cout << "wall time (s): " << result.wall_time << '\n';
  std::cout << "max column-sum deviation: " << report.max_sum_violation << '\n';
  std::cout << "min abundance: " << report.min_entry << '\n';
  std::cout << "feasible: " << (report.feasible ? "yes" : "no") << '\n';
  if (reference) std::cout << "RE (dB): " << db_text(relative_error_db(result.A_hat, *reference)) << '\n';
  if (truth) std::cout << "NMSE (dB): " << db_text(nmse_db(result.A_hat, *truth)) << '\n';
  return kExitOk;
}

namespace {

struct BenchRow {
  double value = 0.0;
  int repeat = 0;
  long m = 0;
  long pixels = 0;
  double snr_db = 0.0;
  double oracle_s = 0.0;
  double sudap_s = 0.0;
  int sweeps = 0;
  double final_re_db = 0.0;
  double nmse_db = 0.0;
  std::string status;
};

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments mo;
  if (xs.empty()) return mo;
  for (const double x : xs) mo.mean += x;
  mo.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - mo.mean) * (x - mo.mean);
    mo.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return mo;
}

}  // namespace

int cmd_benchmark(const BenchmarkOptions& opt) {
  const auto lib = io::read_library_csv(opt.library);
  fs::create_directories(opt.out_dir);
  const fs::path rows_path = fs::path(opt.out_dir) / ("benchmark_" + opt.sweep_var + ".csv");
  const fs::path summary_path = fs::path(opt.out_dir) / ("benchmark_" + opt.sweep_var + "_summary.csv");
  std::ofstream rows_out(rows_path);
  if (!rows_out) throw Error(ErrorCode::IoError, "cannot open " + rows_path.string());
  rows_out << "sweep_var,value,repeat,m,pixels,snr_db,oracle_s,sudap_s,sweeps,final_re_db,nmse_db,status\n";

  std::vector<BenchRow> rows;
  bool all_ok = true;
  for (std::size_t vi = 0; vi < opt.values.size(); ++vi) {
    const double value = opt.values[vi];
    for (int r = 0; r < opt.repeats; ++r) {
      BenchRow row;
      row.value = value;
      row.repeat = r;
      row.m = opt.sweep_var == "m" ? static_cast<long>(std::llround(value)) : opt.m;
      const Shape shape = opt.sweep_var == "pixels" ? square_or_strip(static_cast<long>(std::llround(value)))
                                                    : Shape{opt.rows, opt.cols};
      row.pixels = shape.size();
      row.snr_db = opt.sweep_var == "snr" ? value : opt.snr_db;
      try {
        const std::uint64_t seed = derive_seed(opt.seed, vi * 100003u + static_cast<std::uint64_t>(r));
        const auto E = select_endmembers(lib, row.m, opt.min_angle_deg, derive_seed(seed, 0));
        const auto A = sample_abundances(E.n_endmembers(), shape, derive_seed(seed, 1));
        const auto X = synthesize_cube(E, A, NoiseSpec{row.snr_db, derive_seed(seed, 2)}, shape);

        const auto oracle = solve_oracle_activeset(E, X);
        row.oracle_s = oracle.wall_time;

        DykstraConfig<double> cfg;
        cfg.rel_tol = 0.0;
        cfg.max_sweeps = opt.max_sweeps;
        cfg.snapshot_every = 1;
        double re_at_stop = std::numeric_limits<double>::infinity();
        double time_at_stop = 0.0;
        bool reached = false;
        auto run = run_sudap(E, X, cfg,
                             [&](const SweepRecord&, double t, const CoefficientMatrix<double>& U,
                                 const SubspaceTransform<double>& T) {
                               const auto Ak = inverse_transform(T, U);
                               re_at_stop = relative_error_db(Ak.data(), oracle.A_hat.data());
                               time_at_stop = t;
                               reached = re_at_stop <= opt.stop_re_db;
                               return !reached;
                             });
        row.sweeps = run.trace.sweeps();
        if (E.n_endmembers() == 1) {
          re_at_stop = relative_error_db(run.A.data(), oracle.A_hat.data());
          time_at_stop = run.seconds;
          reached = re_at_stop <= opt.stop_re_db;
        }
        row.sudap_s = time_at_stop;
        row.final_re_db = re_at_stop;
        row.nmse_db = nmse_db(run.A, A);
        row.status = reached ? "ok" : "max-sweeps";
        if (!reached) all_ok = false;
      } catch (const Error& e) {
        row.status = std::string("failed: ") + to_string(e.code());
        all_ok = false;
      }
      rows_out << opt.sweep_var << ',' << io::format_double(row.value) << ',' << row.repeat << ',' << row.m << ','
               << row.pixels << ',' << io::format_double(row.snr_db) << ',' << io::format_double(row.oracle_s) << ','
               << io::format_double(row.sudap_s) << ',' << row.sweeps << ',' << io::format_double(row.final_re_db)
               << ',' << io::format_double(row.nmse_db) << ',' << row.status << '\n';
      rows_out.flush();
      std::cout << opt.sweep_var << '=' << io::format_double(value) << " repeat " << r << ": " << row.status
                << ", sudap " << row.sudap_s << " s, " << row.sweeps << " sweeps, RE " << db_text(row.final_re_db)
                << " dB\n";
      rows.push_back(row);
    }
  }

  std::ofstream summary(summary_path);
  if (!summary) throw Error(ErrorCode::IoError, "cannot open " + summary_path.string());
  summary << "sweep_var,value,count,sudap_s_mean,sudap_s_std,oracle_s_mean,oracle_s_std,sweeps_mean,sweeps_std,"
             "final_re_db_mean,final_re_db_std\n";
  std::map<double, std::vector<const BenchRow*>> by_value;
  for (const auto& row : rows) {
    if (row.status == "ok") by_value[row.value].push_back(&row);
  }
  for (const double value : opt.values) {
    const auto& group = by_value[value];
    std::vector<double> sudap_s, oracle_s, sweeps, re;
    for (const auto* row : group) {
      sudap_s.push_back(row->sudap_s);
      oracle_s.push_back(row->oracle_s);
      sweeps.push_back(row->sweeps);
      re.push_back(row->final_re_db);
    }
    const auto a = moments(sudap_s), b = moments(oracle_s), c = moments(sweeps), d = moments(re);
    summary << opt.sweep_var << ',' << io::format_double(value) << ',' << group.size() << ','
            << io::format_double(a.mean) << ',' << io::format_double(a.stddev) << ',' << io::format_double(b.mean)
            << ',' << io::format_double(b.stddev) << ',' << io::format_double(c.mean) << ','
            << io::format_double(c.stddev) << ',' << io::format_double(d.mean) << ',' << io::format_double(d.stddev)
            << '\n';
  }
  std::cout << "wrote " << rows_path.string() << " and " << summary_path.string() << '\n';
  return all_ok ? kExitOk : kExitValidationFailed;
}

}  // namespace sudap::cli
