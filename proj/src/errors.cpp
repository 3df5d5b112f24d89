#include "fate/errors.hpp"

namespace fate {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidData: return "InvalidData";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownGridPoint: return "UnknownGridPoint";
    case ErrorKind::DegenerateComparison: return "DegenerateComparison";
    case ErrorKind::DivisionByZeroFirstStage: return "DivisionByZeroFirstStage";
    case ErrorKind::UnknownInstrument: return "UnknownInstrument";
    case ErrorKind::NotIdentified: return "NotIdentified";
    case ErrorKind::DegenerateAnchor: return "DegenerateAnchor";
    case ErrorKind::NegativeStatistic: return "NegativeStatistic";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::ScenarioFailed: return "ScenarioFailed";
  }
  return "Unknown";
}

}  // namespace fate
