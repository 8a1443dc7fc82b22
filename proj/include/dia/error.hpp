#pragma once

#include <stdexcept>
#include <string>

namespace dia {

// Base for every error raised by the library. Subclasses let callers (the CLI
// in particular) map failures onto stable exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of two operands disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed weight file, manifest, image or NNF dump.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened.
class FileError : public Error {
 public:
  FileError(const std::string& what, std::string path)
      : Error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Numerical failure inside an iterative solver.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dia
