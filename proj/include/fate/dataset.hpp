#pragma once

#include "fate/numerics.hpp"

#include <string>
#include <vector>

namespace fate {

inline constexpr const char* kInterceptName = "(intercept)";

/// Observed rectangular data. X carries the intercept in column 0.
struct Dataset {
  Matrix y;  // N x J outcomes
  Vector d;  // N composite treatment
  Matrix z;  // N x K excluded instruments
  Matrix x;  // N x R controls

  std::vector<std::string> outcome_names;
  std::string treatment_name = "d";
  std::vector<std::string> instrument_names;
  std::vector<std::string> control_names;

  long n() const { return y.rows(); }
  long num_outcomes() const { return y.cols(); }
  long num_instruments() const { return z.cols(); }
  long num_controls() const { return x.cols(); }

  /// [Z X], the full instrument set of every moment block.
  Matrix zstar() const;
};

/// Fills default names for any name list left empty.
void ensure_names(Dataset& data);

/// Checks shapes, finiteness, N > K + R and full column rank of [Z X].
void validate(const Dataset& data);

/// Dataset with instrument columns permuted: column i of the result is
/// column `order[i]` of the input.
Dataset permute_instruments(const Dataset& data, const std::vector<int>& order);

/// Instrument order with `defining` first (in the given order) followed by
/// the remaining indices in their original order. Throws UnknownInstrument
/// on out-of-range or repeated indices.
std::vector<int> defining_first_order(long num_instruments, const std::vector<int>& defining);

}  // namespace fate
