#include "vdup/error.hpp"

namespace vdup {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::DuplicateId: return "duplicate id";
    case ErrorKind::Ingestion: return "ingestion error";
    case ErrorKind::EmptyVideo: return "empty video";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::Extraction: return "extraction error";
    case ErrorKind::State: return "state error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

}  // namespace vdup
