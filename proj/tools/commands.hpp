#ifndef SUDAP_TOOLS_COMMANDS_HPP
#define SUDAP_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sudap::cli {

// Process exit codes besides the per-error-class codes of sudap::ErrorCode.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidationFailed = 3;

struct SimulateOptions {
  std::string library;
  long m = 5;
  double min_angle_deg = 10.0;
  long rows = 100;
  long cols = 100;
  std::string snr_db = "30";
  std::uint64_t seed = 0;
  std::string out_prefix;
};

struct UnmixOptions {
  std::string cube;
  std::string endmembers;
  std::string solver = "sudap";
  std::string out;
  double rel_tol = 1e-10;
  int max_sweeps = 2000;
  std::optional<std::string> reference;
  std::optional<std::string> truth;
  std::optional<std::string> curve;
  int snapshot_every = 1;
  bool clip = false;
};

struct BenchmarkOptions {
  std::string library;
  std::string sweep_var;
  std::vector<double> values;
  int repeats = 1;
  double stop_re_db = -100.0;
  std::uint64_t seed = 0;
  std::string out_dir;
  long m = 5;
  long rows = 100;
  long cols = 100;
  double snr_db = 30.0;
  double min_angle_deg = 10.0;
  int max_sweeps = 20000;
};

struct ValidateOptions {
  std::uint64_t seed = 0;
  int instances = 20;
};

struct LibraryOptions {
  std::string out;
  long bands = 224;
  long count = 64;
  std::uint64_t seed = 2024;
};

int cmd_simulate(const SimulateOptions& opt);
int cmd_unmix(const UnmixOptions& opt);
int cmd_benchmark(const BenchmarkOptions& opt);
int cmd_validate(const ValidateOptions& opt);
int cmd_library(const LibraryOptions& opt);

double parse_snr(const std::string& text);

}  // namespace sudap::cli

#endif  // SUDAP_TOOLS_COMMANDS_HPP
