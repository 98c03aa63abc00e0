// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace histaug {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raster extents that do not agree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A transform or metric parameter outside its legal range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. Carries the file and 1-based row when known.
class DataError : public Error {
 public:
  DataError(const std::string& message, std::string file = {}, std::size_t row = 0)
      : Error(format(message, file, row)), file_(std::move(file)), row_(row) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t row() const noexcept { return row_; }

 private:
  static std::string format(const std::string& message, const std::string& file,
                            std::size_t row) {
    if (file.empty()) return message;
    if (row == 0) return file + ": " + message;
    return file + ":" + std::to_string(row) + ": " + message;
  }

  std::string file_;
  std::size_t row_;
};

/// Filesystem or codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace histaug
