#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fate {

enum class ErrorKind {
  RankDeficient,
  InvalidConfig,
  InvalidData,
  DimensionMismatch,
  UnknownGridPoint,
  DegenerateComparison,
  DivisionByZeroFirstStage,
  UnknownInstrument,
  NotIdentified,
  DegenerateAnchor,
  NegativeStatistic,
  MissingColumn,
  ParseError,
  EmptyData,
  ScenarioFailed,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every recoverable failure raised by the library.
/// `kind()` is the machine-readable code rendered by the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(long effective_rank, long required)
      : Error(ErrorKind::RankDeficient,
              "rank deficient design: effective rank " + std::to_string(effective_rank) +
                  " < " + std::to_string(required)),
        effective_rank_(effective_rank) {}

  long effective_rank() const noexcept { return effective_rank_; }

 private:
  long effective_rank_;
};

class ParseError : public Error {
 public:
  ParseError(long row, std::string column, const std::string& detail)
      : Error(ErrorKind::ParseError, "parse error at row " + std::to_string(row) + ", column '" +
                                         column + "': " + detail),
        row_(row),
        column_(std::move(column)) {}

  long row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  long row_;
  std::string column_;
};

}  // namespace fate
