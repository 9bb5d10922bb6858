#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace netfx {

/// Base of every error the library throws. `category()` drives the CLI exit
/// code mapping.
class Error : public std::runtime_error {
 public:
  enum class Category { io_parse, statistical, usage };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& origin, std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A value is syntactically fine but outside its allowed range (negative codes,
/// probabilities outside (0,1), ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Category::io_parse, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(Category::usage, what) {}
};

/// A statistic was requested on a stratum that cannot support it.
class EstimabilityError : public Error {
 public:
  explicit EstimabilityError(const std::string& what) : Error(Category::statistical, what) {}
};

/// An exact computation needs terms the table does not provide.
class IncompletenessError : public Error {
 public:
  IncompletenessError(const std::string& what, std::vector<std::string> missing)
      : Error(Category::statistical, what), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

/// The constraint system cannot identify the net-effect vector. `null_space`
/// holds an orthonormal basis (one vector per row) of the unidentified
/// directions.
class IdentifiabilityError : public Error {
 public:
  IdentifiabilityError(const std::string& what, int rank, std::vector<std::vector<double>> null_space)
      : Error(Category::statistical, what), rank_(rank), null_space_(std::move(null_space)) {}

  int rank() const noexcept { return rank_; }
  const std::vector<std::vector<double>>& null_space() const noexcept { return null_space_; }

 private:
  int rank_;
  std::vector<std::vector<double>> null_space_;
};

/// The pattern does not assign a feature row to some stratum.
class CoverageError : public Error {
 public:
  explicit CoverageError(const std::string& what) : Error(Category::io_parse, what) {}
};

/// Two pattern groups claim the same stratum and the file did not ask for
/// first-match resolution.
class AmbiguityError : public Error {
 public:
  explicit AmbiguityError(const std::string& what) : Error(Category::io_parse, what) {}
};

/// Invalid data-generating-process specification.
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what) : Error(Category::io_parse, what) {}
};

}  // namespace netfx
