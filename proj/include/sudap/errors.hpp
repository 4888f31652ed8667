#ifndef SUDAP_ERRORS_HPP
#define SUDAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sudap {

// Every failure the library can report. The CLI maps each one to its own
// exit code, so the numeric values are part of the public interface.
enum class ErrorCode : int {
  DimensionMismatch = 10,
  ShapeMismatch = 11,
  RankDeficient = 12,
  DegenerateProblem = 13,
  IndexOutOfRange = 14,
  NonFinite = 15,
  TooManyEndmembers = 16,
  NoKKTPoint = 17,
  InsufficientCandidates = 18,
  ZeroReference = 19,
  ParseError = 20,
  EmptyFile = 21,
  BadMagic = 22,
  TruncatedFile = 23,
  VersionUnsupported = 24,
  IoError = 25,
  InvalidArgument = 26,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateProblem: return "DegenerateProblem";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::TooManyEndmembers: return "TooManyEndmembers";
    case ErrorCode::NoKKTPoint: return "NoKKTPoint";
    case ErrorCode::InsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Carries both offending band counts.
class DimensionMismatch : public Error {
 public:
  DimensionMismatch(long expected, long actual, const std::string& context = "bands")
      : Error(ErrorCode::DimensionMismatch,
              context + " mismatch: " + std::to_string(expected) + " vs " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  long expected() const noexcept { return expected_; }
  long actual() const noexcept { return actual_; }

 private:
  long expected_;
  long actual_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t col, const std::string& what)
      : Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what),
        line_(line),
        col_(col) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t line_;
  std::size_t col_;
};

class InsufficientCandidates : public Error {
 public:
  InsufficientCandidates(long requested, long found, double min_angle_deg)
      : Error(ErrorCode::InsufficientCandidates,
              "requested " + std::to_string(requested) + " endmembers with pairwise angle > " +
                  std::to_string(min_angle_deg) + " deg, found only " + std::to_string(found)),
        found_(found) {}

  long found() const noexcept { return found_; }

 private:
  long found_;
};

}  // namespace sudap

#endif  // SUDAP_ERRORS_HPP
