#include "sudap/simdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace sudap {

double spectral_angle_deg(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double cosine = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

EndmemberMatrix<double> select_endmembers(const SpectralLibrary& lib, Index m, double min_angle_deg,
                                          std::uint64_t seed, std::vector<Index>* chosen) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "at least one endmember must be requested");
  if (!(min_angle_deg >= 0)) throw Error(ErrorCode::InvalidArgument, "minimum angle must be non-negative");
  if (lib.size() < m) throw InsufficientCandidates(m, lib.size(), min_angle_deg);

  std::vector<Index> order(static_cast<std::size_t>(lib.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Index> kept;
  for (const Index candidate : order) {
    const auto col = lib.signatures.col(candidate);
    const bool separated = std::all_of(kept.begin(), kept.end(), [&](Index k) {
      return spectral_angle_deg(col, lib.signatures.col(k)) > min_angle_deg;
    });
    if (!separated) continue;
    kept.push_back(candidate);
    if (static_cast<Index>(kept.size()) == m) break;
  }
  if (static_cast<Index>(kept.size()) < m) throw InsufficientCandidates(m, static_cast<Index>(kept.size()), min_angle_deg);

  Eigen::MatrixXd data(lib.n_bands(), m);
  std::vector<std::string> names;
  for (Index k = 0; k < m; ++k) {
    const Index col = kept[static_cast<std::size_t>(k)];
    data.col(k) = lib.signatures.col(col);
    names.push_back(col < static_cast<Index>(lib.names.size()) ? lib.names[static_cast<std::size_t>(col)]
                                                               : "e" + std::to_string(col));
  }
  if (chosen) *chosen = kept;
  return EndmemberMatrix<double>(std::move(data), lib.wavelengths, std::move(names));
}

AbundanceMatrix<double> sample_abundances(Index m, Shape shape, std::uint64_t seed) {
  if (m < 1 || shape.size() < 1) throw Error(ErrorCode::InvalidArgument, "abundance dimensions must be positive");
  const Index n = shape.size();
  Eigen::MatrixXd A(m, n);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> exponential(1.0);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) A(i, j) = exponential(rng);
    A.col(j) /= A.col(j).sum();
  }
  return AbundanceMatrix<double>(std::move(A), shape);
}

AbundanceMatrix<double> sample_abundances(Index m, Index n, std::uint64_t seed) {
  return sample_abundances(m, Shape{1, n}, seed);
}

ImageCube<double> synthesize_cube(const EndmemberMatrix<double>& E, const AbundanceMatrix<double>& A,
                                  const NoiseSpec& noise, Shape shape) {
  if (A.n_endmembers() != E.n_endmembers()) throw DimensionMismatch(E.n_endmembers(), A.n_endmembers(), "endmember count");
  if (shape.size() != A.n_pixels()) {
    throw Error(ErrorCode::DimensionMismatch, "shape does not match abundance pixel count");
  }
  if (std::isnan(noise.snr_db) || noise.snr_db == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorCode::InvalidArgument, "SNR must be finite or +inf");
  }
  Eigen::MatrixXd X = E.data() * A.data();
  if (std::isfinite(noise.snr_db)) {
    const double signal_power = X.squaredNorm() / static_cast<double>(X.size());
    const double sigma = std::sqrt(signal_power / std::pow(10.0, noise.snr_db / 10.0));
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gaussian(0.0, sigma);
    for (Index j = 0; j < X.cols(); ++j)
      for (Index i = 0; i < X.rows(); ++i) X(i, j) += gaussian(rng);
  }
  return ImageCube<double>(std::move(X), shape, E.wavelengths());
}

double measured_snr_db(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& noisy) {
  const double noise = (noisy - clean).squaredNorm();
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(clean.squaredNorm() / noise);
}

SpectralLibrary synthetic_library(Index n_bands, Index count, std::uint64_t seed) {
  if (n_bands < 2 || count < 1) throw Error(ErrorCode::InvalidArgument, "library dimensions must be positive");
  constexpr double kFirstNm = 383.0;
  constexpr double kLastNm = 2508.0;
  SpectralLibrary lib;
  lib.wavelengths = Eigen::VectorXd::LinSpaced(n_bands, kFirstNm, kLastNm);
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(n_bands, 0.0, 1.0);
  lib.signatures.resize(n_bands, count);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index k = 0; k < count; ++k) {
    const double level = 0.05 + 0.6 * unit(rng);
    const double slope = -0.5 + unit(rng);
    const double curve = -0.6 + 1.2 * unit(rng);
    Eigen::ArrayXd r = level * (1.0 + slope * t + curve * t * (1.0 - t) * 4.0);
    const int features = 2 + static_cast<int>(unit(rng) * 6);
    for (int f = 0; f < features; ++f) {
      const double center = unit(rng);
      const double width = 0.01 + 0.12 * unit(rng);
      const double depth = (unit(rng) < 0.7 ? -1.0 : 1.0) * (0.1 + 0.6 * unit(rng)) * level;
      r += depth * (-((t - center) / width).square() / 2.0).exp();
    }
    lib.signatures.col(k) = r.max(0.005).min(1.0).matrix();
    lib.names.push_back("synthetic_" + std::to_string(k));
  }
  return lib;
}

}  // namespace sudap
