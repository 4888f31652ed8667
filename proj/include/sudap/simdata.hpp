#ifndef SUDAP_SIMDATA_HPP
#define SUDAP_SIMDATA_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sudap/model.hpp"

namespace sudap {

struct SpectralLibrary {
  Eigen::MatrixXd signatures;  // n_bands x L
  std::vector<std::string> names;
  std::optional<Eigen::VectorXd> wavelengths;

  Index size() const { return signatures.cols(); }
  Index n_bands() const { return signatures.rows(); }
};

struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

// Independent seed for a named sub-stream of an experiment (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Angle between two spectra in degrees.
double spectral_angle_deg(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

// Greedy pass over a seeded permutation of the library: a signature is kept if
// its angle to every signature kept so far exceeds min_angle_deg. Throws
// InsufficientCandidates when fewer than m survive. The chosen library
// columns are written to `chosen` when given.
EndmemberMatrix<double> select_endmembers(const SpectralLibrary& lib, Index m, double min_angle_deg,
                                          std::uint64_t seed, std::vector<Index>* chosen = nullptr);

// Columns uniform on the probability simplex (normalized exponentials).
AbundanceMatrix<double> sample_abundances(Index m, Index n, std::uint64_t seed);
AbundanceMatrix<double> sample_abundances(Index m, Shape shape, std::uint64_t seed);

// X = EA + N, white Gaussian N scaled so that mean-square signal over
// mean-square noise equals the requested SNR. An infinite SNR gives N = 0.
ImageCube<double> synthesize_cube(const EndmemberMatrix<double>& E, const AbundanceMatrix<double>& A,
                                  const NoiseSpec& noise, Shape shape);

// 10 log10(|clean|^2 / |noisy - clean|^2).
double measured_snr_db(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& noisy);

// Smooth reflectance-like spectra on a 383-2508 nm grid: a low-order
// continuum with Gaussian absorption and reflection features. Stands in for a
// field spectral library in tests and benchmarks.
SpectralLibrary synthetic_library(Index n_bands = 224, Index count = 64, std::uint64_t seed = 2024);

}  // namespace sudap

#endif  // SUDAP_SIMDATA_HPP
