#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "commands.hpp"
#include "sudap/errors.hpp"
#include "sudap/parallel.hpp"

int main(int argc, char** argv) {
  using namespace sudap::cli;

  CLI::App app{"Fully constrained least-squares unmixing by Dykstra projection in the endmember subspace"};
  app.require_subcommand(1);

  int threads = 0;
  if (const char* env = std::getenv("SUDAP_THREADS")) threads = std::atoi(env);
  app.add_option("--threads", threads, "Worker threads (0: all cores; default from SUDAP_THREADS)")
      ->check(CLI::NonNegativeNumber);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cube with known abundances");
  simulate->add_option("--library", sim.library, "Spectral library CSV")->required()->check(CLI::ExistingFile);
  simulate->add_option("--m", sim.m, "Number of endmembers")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--min-angle", sim.min_angle_deg, "Minimum pairwise spectral angle (degrees)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--rows", sim.rows, "Image rows")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--cols", sim.cols, "Image columns")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--snr-db", sim.snr_db, "Signal-to-noise ratio in dB, or inf")->required();
  simulate->add_option("--seed", sim.seed, "Random seed")->required();
  simulate->add_option("--out-prefix", sim.out_prefix, "Output path prefix")->required();

  UnmixOptions un;
  auto* unmix = app.add_subcommand("unmix", "Estimate abundances for a cube");
  unmix->add_option("--cube", un.cube, "Input cube (.cube)")->required()->check(CLI::ExistingFile);
  unmix->add_option("--endmembers", un.endmembers, "Endmember CSV")->required()->check(CLI::ExistingFile);
  unmix->add_option("--solver", un.solver, "Solver")
      ->required()
      ->check(CLI::IsMember({"sudap", "ls", "ls-sum1", "oracle"}));
  unmix->add_option("--out", un.out, "Output abundance file")->required();
  unmix->add_option("--rel-tol", un.rel_tol, "Relative change stopping threshold (0: run all sweeps)")
      ->check(CLI::NonNegativeNumber);
  unmix->add_option("--max-sweeps", un.max_sweeps, "Sweep cap")->check(CLI::PositiveNumber);
  unmix->add_option("--reference", un.reference, "Reference abundances for RE")->check(CLI::ExistingFile);
  unmix->add_option("--truth", un.truth, "Ground-truth abundances for NMSE")->check(CLI::ExistingFile);
  unmix->add_option("--curve", un.curve, "Write the convergence curve CSV here");
  unmix->add_option("--snapshot-every", un.snapshot_every, "Curve cadence in sweeps")->check(CLI::PositiveNumber);
  unmix->add_flag("--clip", un.clip, "Clamp tiny negative abundances and renormalize");

  BenchmarkOptions bench;
  auto* benchmark = app.add_subcommand("benchmark", "Time-to-accuracy experiments against the exact oracle");
  benchmark->add_option("--library", bench.library, "Spectral library CSV")->required()->check(CLI::ExistingFile);
  benchmark->add_option("--sweep-var", bench.sweep_var, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"m", "pixels", "snr"}));
  benchmark->add_option("--values", bench.values, "Comma-separated values of the swept parameter")
      ->required()
      ->delimiter(',');
  benchmark->add_option("--repeats", bench.repeats, "Instances per value")->required()->check(CLI::PositiveNumber);
  benchmark->add_option("--stop-re-db", bench.stop_re_db, "Stop once RE against the oracle drops below this")
      ->required();
  benchmark->add_option("--seed", bench.seed, "Random seed")->required();
  benchmark->add_option("--out-dir", bench.out_dir, "Directory for the CSV outputs")->required();
  benchmark->add_option("--m", bench.m, "Endmembers when not swept")->check(CLI::PositiveNumber);
  benchmark->add_option("--rows", bench.rows, "Image rows when pixels are not swept")->check(CLI::PositiveNumber);
  benchmark->add_option("--cols", bench.cols, "Image columns when pixels are not swept")->check(CLI::PositiveNumber);
  benchmark->add_option("--snr-db", bench.snr_db, "SNR when not swept");
  benchmark->add_option("--min-angle", bench.min_angle_deg, "Minimum pairwise spectral angle (degrees)")
      ->check(CLI::NonNegativeNumber);
  benchmark->add_option("--max-sweeps", bench.max_sweeps, "Sweep cap per instance")->check(CLI::PositiveNumber);

  ValidateOptions val;
  auto* validate = app.add_subcommand("validate", "Run the randomized property suite");
  validate->add_option("--seed", val.seed, "Random seed")->required();
  validate->add_option("--instances", val.instances, "Random instances per property")->required();

  LibraryOptions lib;
  auto* library = app.add_subcommand("library", "Write a synthetic 224-band spectral library CSV");
  library->add_option("--out", lib.out, "Output CSV")->required();
  library->add_option("--bands", lib.bands, "Band count")->check(CLI::PositiveNumber);
  library->add_option("--count", lib.count, "Signature count")->check(CLI::PositiveNumber);
  library->add_option("--seed", lib.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  sudap::set_num_threads(threads);
  try {
    if (*simulate) return cmd_simulate(sim);
    if (*unmix) return cmd_unmix(un);
    if (*benchmark) return cmd_benchmark(bench);
    if (*validate) {
      if (val.instances < 1) {
        std::cerr << "validate: --instances must be at least 1\n";
        return kExitUsage;
      }
      return cmd_validate(val);
    }
    if (*library) return cmd_library(lib);
  } catch (const sudap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
