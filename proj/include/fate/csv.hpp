#pragma once

#include "fate/dataset.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fate::csv {

/// Which CSV columns play which role. An empty `controls` list still gets
/// the intercept.
struct RoleMap {
  std::vector<std::string> outcomes;
  std::string treatment;
  std::vector<std::string> instruments;
  std::vector<std::string> controls;
};

/// Comma-separated, '.' decimal point, mandatory header, no quoting.
/// Unmapped columns are ignored; every mapped cell must parse as a finite
/// real. The intercept is prepended to the controls as "(intercept)".
Dataset read(std::istream& in, const RoleMap& roles);
Dataset read_file(const std::string& path, const RoleMap& roles);

/// Writes outcomes, treatment, instruments and non-intercept controls with
/// round-trip precision.
void write(std::ostream& out, const Dataset& data);
void write_file(const std::string& path, const Dataset& data);

/// Role map naming every column of `data` (the inverse of write).
RoleMap roles_of(const Dataset& data);

}  // namespace fate::csv
