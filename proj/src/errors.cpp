#include "gcflow/errors.hpp"

namespace gcflow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::NoNegativeRoot: return "NoNegativeRoot";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::SonicDegeneracy: return "SonicDegeneracy";
    case ErrorCode::BeyondCavitation: return "BeyondCavitation";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::FrameDrift: return "FrameDrift";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::Io: return "Io";
  }
  return "Error";
}

std::string ValidationError::join(const std::vector<std::string>& issues) {
  std::string out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i > 0) out += "; ";
    out += issues[i];
  }
  return out;
}

}  // namespace gcflow
