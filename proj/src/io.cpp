#include "sudap/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sudap::io {

namespace fs = std::filesystem;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[k])) << (8 * k);
  return v;
}

void put_doubles(std::string& out, const double* data, std::size_t count) {
  const std::size_t offset = out.size();
  out.resize(offset + count * 8);
  char* dst = out.data() + offset;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, data, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const auto bits = std::bit_cast<std::uint64_t>(data[i]);
      for (int k = 0; k < 8; ++k) dst[i * 8 + k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
    }
  }
}

void get_doubles(const char* src, double* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(data, src, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(src[i * 8 + k])) << (8 * k);
      data[i] = std::bit_cast<double>(bits);
    }
  }
}

std::uint32_t checked_u32(Index value, const char* what) {
  if (value < 0 || value > static_cast<Index>(UINT32_MAX)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " does not fit the file header");
  }
  return static_cast<std::uint32_t>(value);
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

void write_container(const fs::path& path, const std::array<char, 4>& magic, const Eigen::MatrixXd& data,
                     Shape shape, const std::optional<Eigen::VectorXd>& wavelengths) {
  std::string bytes;
  bytes.reserve(kHeaderBytes + static_cast<std::size_t>(data.size() + data.rows()) * 8);
  bytes.append(magic.data(), magic.size());
  put_u32(bytes, kFormatVersion);
  put_u32(bytes, checked_u32(data.rows(), "channel count"));
  put_u32(bytes, checked_u32(shape.rows, "row count"));
  put_u32(bytes, checked_u32(shape.cols, "column count"));
  put_u32(bytes, wavelengths ? kFlagWavelengths : 0u);
  if (wavelengths) put_doubles(bytes, wavelengths->data(), static_cast<std::size_t>(wavelengths->size()));
  put_doubles(bytes, data.data(), static_cast<std::size_t>(data.size()));
  write_file(path, bytes);
}

CubeFileHeader parse_header(const char* p) {
  CubeFileHeader h;
  std::copy(p, p + 4, h.magic.begin());
  h.version = get_u32(p + 4);
  h.n_channels = get_u32(p + 8);
  h.rows = get_u32(p + 12);
  h.cols = get_u32(p + 16);
  h.flags = get_u32(p + 20);
  return h;
}

struct Container {
  CubeFileHeader header;
  Eigen::MatrixXd data;
  std::optional<Eigen::VectorXd> wavelengths;
};

Container read_container(const fs::path& path, const std::array<char, 4>& magic) {
  auto in = open_input(path, std::ios::binary);
  std::error_code ec;
  const auto file_size = static_cast<std::uint64_t>(fs::file_size(path, ec));
  if (ec) throw Error(ErrorCode::IoError, "cannot stat " + path.string());

  char raw[kHeaderBytes];
  const auto head = std::min<std::uint64_t>(file_size, kHeaderBytes);
  in.read(raw, static_cast<std::streamsize>(head));
  if (head < 4) throw Error(ErrorCode::TruncatedFile, path.string() + ": shorter than the magic number");
  if (!std::equal(magic.begin(), magic.end(), raw)) {
    throw Error(ErrorCode::BadMagic, path.string() + ": expected magic " + std::string(magic.data(), 4));
  }
  if (head < kHeaderBytes) throw Error(ErrorCode::TruncatedFile, path.string() + ": incomplete header");

  Container c;
  c.header = parse_header(raw);
  const auto& h = c.header;
  if (h.version != kFormatVersion) {
    throw Error(ErrorCode::VersionUnsupported, path.string() + ": version " + std::to_string(h.version));
  }
  if ((h.flags & ~kFlagWavelengths) != 0) {
    throw Error(ErrorCode::VersionUnsupported, path.string() + ": unknown flags " + std::to_string(h.flags));
  }
  if (h.n_channels == 0 || h.rows == 0 || h.cols == 0) {
    throw Error(ErrorCode::EmptyFile, path.string() + ": header declares an empty payload");
  }
  // All three factors are below 2^32, so the sample count cannot overflow
  // before the comparison against the file length below.
  const unsigned __int128 samples = static_cast<unsigned __int128>(h.n_channels) * h.rows * h.cols;
  const bool with_wl = (h.flags & kFlagWavelengths) != 0;
  const unsigned __int128 expected = kHeaderBytes + (samples + (with_wl ? h.n_channels : 0)) * 8;
  if (expected != file_size) {
    throw Error(ErrorCode::TruncatedFile, path.string() + ": header declares " +
                                              std::to_string(static_cast<std::uint64_t>(expected)) +
                                              " bytes, file has " + std::to_string(file_size));
  }

  std::string payload(static_cast<std::size_t>(file_size - kHeaderBytes), '\0');
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!in) throw Error(ErrorCode::TruncatedFile, path.string() + ": short read");
  const char* p = payload.data();
  if (with_wl) {
    Eigen::VectorXd wl(h.n_channels);
    get_doubles(p, wl.data(), h.n_channels);
    p += static_cast<std::size_t>(h.n_channels) * 8;
    c.wavelengths = std::move(wl);
  }
  c.data.resize(h.n_channels, static_cast<Index>(h.rows) * h.cols);
  get_doubles(p, c.data.data(), static_cast<std::size_t>(samples));
  return c;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_double(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::vector<std::string> read_lines(const fs::path& path) {
  auto in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool is_blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

CubeFileHeader read_header(const fs::path& path) {
  auto in = open_input(path, std::ios::binary);
  char raw[kHeaderBytes];
  in.read(raw, kHeaderBytes);
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes)) {
    throw Error(ErrorCode::TruncatedFile, path.string() + ": incomplete header");
  }
  return parse_header(raw);
}

void write_cube(const fs::path& path, const ImageCube<double>& cube) {
  write_container(path, kCubeMagic, cube.data(), cube.shape(), cube.wavelengths());
}

ImageCube<double> read_cube(const fs::path& path) {
  auto c = read_container(path, kCubeMagic);
  return ImageCube<double>(std::move(c.data), Shape{c.header.rows, c.header.cols}, std::move(c.wavelengths));
}

void write_abundance(const fs::path& path, const AbundanceMatrix<double>& A) {
  write_container(path, kAbundanceMagic, A.data(), A.shape(), std::nullopt);
}

AbundanceMatrix<double> read_abundance(const fs::path& path) {
  auto c = read_container(path, kAbundanceMagic);
  return AbundanceMatrix<double>(std::move(c.data), Shape{c.header.rows, c.header.cols});
}

SpectralLibrary read_library_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  std::size_t first_line = 0;
  while (first_line < lines.size() && is_blank(lines[first_line])) ++first_line;
  if (first_line == lines.size()) throw Error(ErrorCode::EmptyFile, path.string() + " has no rows");

  auto first_cells = split_csv_line(lines[first_line]);
  const bool has_header = std::any_of(first_cells.begin(), first_cells.end(),
                                      [](const std::string& cell) { return !parse_double(cell); });
  std::vector<std::string> header;
  std::size_t data_start = first_line;
  if (has_header) {
    header = first_cells;
    data_start = first_line + 1;
  }
  std::string first_name = header.empty() ? std::string{} : header.front();
  std::transform(first_name.begin(), first_name.end(), first_name.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  const bool has_wavelength = first_name == "wavelength";

  std::vector<std::vector<double>> rows;
  std::size_t width = header.size();
  for (std::size_t l = data_start; l < lines.size(); ++l) {
    if (is_blank(lines[l])) continue;
    const auto cells = split_csv_line(lines[l]);
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError(l + 1, std::min(cells.size(), width) + 1,
                       "expected " + std::to_string(width) + " cells, found " + std::to_string(cells.size()));
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v || !std::isfinite(*v)) throw ParseError(l + 1, c + 1, "not a finite number: '" + cells[c] + "'");
      values.push_back(*v);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " has no data rows");

  const std::size_t offset = has_wavelength ? 1 : 0;
  if (width <= offset) throw ParseError(data_start + 1, 1, "no signature columns");
  SpectralLibrary lib;
  const auto n_bands = static_cast<Index>(rows.size());
  const auto count = static_cast<Index>(width - offset);
  lib.signatures.resize(n_bands, count);
  if (has_wavelength) lib.wavelengths = Eigen::VectorXd(n_bands);
  for (Index r = 0; r < n_bands; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (has_wavelength) (*lib.wavelengths)(r) = row[0];
    for (Index k = 0; k < count; ++k) lib.signatures(r, k) = row[offset + static_cast<std::size_t>(k)];
  }
  for (Index k = 0; k < count; ++k) {
    lib.names.push_back(has_header ? header[offset + static_cast<std::size_t>(k)] : "e" + std::to_string(k));
  }
  return lib;
}

void write_library_csv(const fs::path& path, const SpectralLibrary& lib) {
  std::ostringstream out;
  std::vector<std::string> names = lib.names;
  for (auto k = static_cast<Index>(names.size()); k < lib.size(); ++k) names.push_back("e" + std::to_string(k));
  bool first = true;
  if (lib.wavelengths) {
    out << "wavelength";
    first = false;
  }
  for (Index k = 0; k < lib.size(); ++k) {
    out << (first ? "" : ",") << names[static_cast<std::size_t>(k)];
    first = false;
  }
  out << '\n';
  for (Index r = 0; r < lib.n_bands(); ++r) {
    first = true;
    if (lib.wavelengths) {
      out << format_double((*lib.wavelengths)(r));
      first = false;
    }
    for (Index k = 0; k < lib.size(); ++k) {
      out << (first ? "" : ",") << format_double(lib.signatures(r, k));
      first = false;
    }
    out << '\n';
  }
  write_file(path, out.str());
}

SpectralLibrary as_library(const EndmemberMatrix<double>& E) {
  SpectralLibrary lib;
  lib.signatures = E.data();
  lib.names = E.names();
  lib.wavelengths = E.wavelengths();
  return lib;
}

EndmemberMatrix<double> read_endmembers_csv(const fs::path& path) {
  auto lib = read_library_csv(path);
  return EndmemberMatrix<double>(std::move(lib.signatures), std::move(lib.wavelengths), std::move(lib.names));
}

void write_curve_csv(const fs::path& path, const ConvergenceCurve& curve) {
  std::ostringstream out;
  out << "sweep,time_s,objective,re_db,nmse_db,unconverged\n";
  for (const auto& row : curve.rows) {
    out << row.sweep << ',' << format_double(row.time_s) << ',' << format_double(row.objective) << ',';
    if (row.re_db) out << format_double(*row.re_db);
    out << ',';
    if (row.nmse_db) out << format_double(*row.nmse_db);
    out << ',';
    if (row.unconverged) out << *row.unconverged;
    out << '\n';
  }
  write_file(path, out.str());
}

ConvergenceCurve read_curve_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " has no header");
  ConvergenceCurve curve;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (is_blank(lines[l])) continue;
    const auto cells = split_csv_line(lines[l]);
    if (cells.size() != 6) throw ParseError(l + 1, cells.size(), "expected 6 cells");
    auto number = [&](std::size_t c) {
      const auto v = parse_double(cells[c]);
      if (!v) throw ParseError(l + 1, c + 1, "not a number: '" + cells[c] + "'");
      return *v;
    };
    auto optional_number = [&](std::size_t c) -> std::optional<double> {
      if (cells[c].empty()) return std::nullopt;
      return number(c);
    };
    CurveRow row;
    row.sweep = static_cast<int>(number(0));
    row.time_s = number(1);
    row.objective = number(2);
    row.re_db = optional_number(3);
    row.nmse_db = optional_number(4);
    if (const auto u = optional_number(5)) row.unconverged = static_cast<long>(*u);
    curve.rows.push_back(row);
  }
  return curve;
}

}  // namespace sudap::io
