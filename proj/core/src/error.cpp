#include "grushin/error.hpp"

namespace grushin {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parameter_domain: return "parameter_domain";
    case ErrorCode::schema: return "schema";
    case ErrorCode::discretization: return "discretization";
    case ErrorCode::tolerance: return "tolerance";
    case ErrorCode::degeneracy: return "degeneracy";
    case ErrorCode::iteration: return "iteration";
    case ErrorCode::truncation: return "truncation";
    case ErrorCode::range: return "range";
    case ErrorCode::regime: return "regime";
    case ErrorCode::consistency: return "consistency";
    case ErrorCode::resolution: return "resolution";
    case ErrorCode::incomplete_table: return "incomplete_table";
    case ErrorCode::quadrature: return "quadrature";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parameter_domain:
    case ErrorCode::schema:
    case ErrorCode::range:
    case ErrorCode::regime:
    case ErrorCode::consistency:
    case ErrorCode::io:
    case ErrorCode::config:
      return true;
    default:
      return false;
  }
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace grushin
