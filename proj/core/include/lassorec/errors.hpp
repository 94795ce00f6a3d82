#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lassorec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed data: wrong shapes, non-finite values, out-of-range parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

class ZeroColumnError : public InputError {
 public:
  explicit ZeroColumnError(int column);
  int column() const { return column_; }

 private:
  int column_;
};

// A target outside the column span, or an otherwise empty feasible set.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_gap, int sweeps);
  double last_gap() const { return last_gap_; }
  int sweeps() const { return sweeps_; }

 private:
  double last_gap_;
  int sweeps_;
};

class DegeneratePathError : public Error {
 public:
  DegeneratePathError(const std::string& what, std::vector<int> columns);
  const std::vector<int>& columns() const { return columns_; }

 private:
  std::vector<int> columns_;
};

class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, std::vector<int> columns);
  const std::vector<int>& columns() const { return columns_; }

 private:
  std::vector<int> columns_;
};

class CapExceededError : public Error {
 public:
  using Error::Error;
};

class BoundUndefinedError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Joins 0-based column indices as a 1-based list, e.g. "{1, 4}".
std::string format_columns(const std::vector<int>& columns);

}  // namespace lassorec
