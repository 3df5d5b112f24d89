#pragma once

#include "fate/fate.hpp"
#include "fate/iv.hpp"
#include "fate/mc.hpp"

#include <string>

namespace fate::table {

/// Fixed-point with three decimals; "nan" for non-finite values.
std::string fixed(double v, int decimals = 3);

/// Instrument rows by outcome columns, estimate above (SE), followed by
/// the first-stage coefficients and F statistics.
std::string render(const iv::PiMatrix& pi, const iv::FirstStage& fs);

/// Outcome rows by component columns, SE beneath each estimate, then the
/// weights Theta and a J-test footer. Effects are divided by `divisor`.
std::string render(const FateEstimate& e, double divisor = 1.0);

std::string render(const iv::IvGmmEstimate& e, const Dataset& data, double divisor = 1.0);
std::string render(const ThreeStepResult& r, const iv::PiMatrix& pi);
std::string render(const mc::McReport& r);

}  // namespace fate::table
