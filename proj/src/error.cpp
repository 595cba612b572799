#include "polybound/error.hpp"

namespace polybound {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidOrder: return "invalid-order";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::InvalidIndex: return "invalid-index";
    case ErrorCode::DegenerateDenominator: return "degenerate-denominator";
    case ErrorCode::UnsupportedOrder: return "unsupported-order";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Version: return "version";
    case ErrorCode::InvalidMagnetization: return "invalid-magnetization";
    case ErrorCode::TooLarge: return "too-large";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::MissingCatalog: return "missing-catalog";
    case ErrorCode::UndefinedMetric: return "undefined-metric";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace polybound
