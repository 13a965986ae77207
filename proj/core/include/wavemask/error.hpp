#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wavemask {

// Shape or domain precondition violated by the caller (odd dims, bad t, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A metric is mathematically undefined for the given input (e.g. HLFR of an
// all-zero image).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or unreadable file. `offset` is the byte position at which
// parsing failed, or -1 when the file could not be opened at all.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string path, std::int64_t offset, const std::string& what)
      : std::runtime_error(describe(path, offset, what)), path_(std::move(path)), offset_(offset) {}

  const std::string& path() const noexcept { return path_; }
  std::int64_t offset() const noexcept { return offset_; }

 private:
  static std::string describe(const std::string& path, std::int64_t offset, const std::string& what) {
    if (offset < 0) return path + ": " + what;
    return path + ": byte " + std::to_string(offset) + ": " + what;
  }

  std::string path_;
  std::int64_t offset_;
};

}  // namespace wavemask
