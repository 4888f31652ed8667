#ifndef SUDAP_IO_HPP
#define SUDAP_IO_HPP

#include <array>
#include <cstdint>
#include <filesystem>

#include "sudap/metrics.hpp"
#include "sudap/simdata.hpp"

namespace sudap::io {

// Binary container shared by cubes ("SUCB") and abundance maps ("SUAB"):
// a 24-byte little-endian header, optional per-channel wavelengths, then
// float64 samples pixel by pixel with the channels of a pixel contiguous.
struct CubeFileHeader {
  std::array<char, 4> magic{};
  std::uint32_t version = 1;
  std::uint32_t n_channels = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t flags = 0;  // bit 0: wavelengths present
};

inline constexpr std::array<char, 4> kCubeMagic{'S', 'U', 'C', 'B'};
inline constexpr std::array<char, 4> kAbundanceMagic{'S', 'U', 'A', 'B'};
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kFlagWavelengths = 1u;
inline constexpr std::size_t kHeaderBytes = 24;

CubeFileHeader read_header(const std::filesystem::path& path);

void write_cube(const std::filesystem::path& path, const ImageCube<double>& cube);
ImageCube<double> read_cube(const std::filesystem::path& path);

void write_abundance(const std::filesystem::path& path, const AbundanceMatrix<double>& A);
AbundanceMatrix<double> read_abundance(const std::filesystem::path& path);

// Signatures as columns, one row per band. An optional header row names the
// columns; a first column headed `wavelength` holds the band centers.
SpectralLibrary read_library_csv(const std::filesystem::path& path);
void write_library_csv(const std::filesystem::path& path, const SpectralLibrary& lib);

SpectralLibrary as_library(const EndmemberMatrix<double>& E);
EndmemberMatrix<double> read_endmembers_csv(const std::filesystem::path& path);

// Columns: sweep,time_s,objective,re_db,nmse_db,unconverged. Missing values
// are empty cells and -inf is written literally.
void write_curve_csv(const std::filesystem::path& path, const ConvergenceCurve& curve);
ConvergenceCurve read_curve_csv(const std::filesystem::path& path);

// 17 significant digits, enough to parse back to the same double.
std::string format_double(double value);

}  // namespace sudap::io

#endif  // SUDAP_IO_HPP
