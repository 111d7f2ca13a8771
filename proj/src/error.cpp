#include "dialogic/error.hpp"

#include <utility>

namespace dialogic {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownCode: return "UnknownCode";
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::DuplicateIndex: return "DuplicateIndex";
    case ErrorKind::EmptyTranscript: return "EmptyTranscript";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::MissingTopicIds: return "MissingTopicIds";
    case ErrorKind::UncodedTurn: return "UncodedTurn";
    case ErrorKind::NoCodeFound: return "NoCodeFound";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::PartialCoding: return "PartialCoding";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::DegenerateExpectedAgreement: return "DegenerateExpectedAgreement";
    case ErrorKind::EpisodeUniverseMismatch: return "EpisodeUniverseMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

Error::Error(ErrorKind kind, std::string message)
    : std::runtime_error(std::move(message)), kind_(kind) {}

Error Error::syntax(std::size_t line, std::string_view message) {
  Error e(ErrorKind::Syntax, "line " + std::to_string(line) + ": " + std::string(message));
  e.line_ = line;
  return e;
}

Error Error::unknown_code(std::string_view label, std::optional<std::size_t> line) {
  std::string msg = "unknown code '" + std::string(label) + "'";
  if (line) msg = "line " + std::to_string(*line) + ": " + msg;
  Error e(ErrorKind::UnknownCode, std::move(msg));
  e.label_ = std::string(label);
  e.line_ = line;
  return e;
}

Error Error::uncoded(std::vector<std::size_t> indices) {
  std::string msg = "uncoded turn(s) at index";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    msg += (i == 0 ? " " : ", ") + std::to_string(indices[i]);
  }
  Error e(ErrorKind::UncodedTurn, std::move(msg));
  e.indices_ = std::move(indices);
  return e;
}

Error& Error::with_line(std::size_t line) {
  line_ = line;
  return *this;
}

Error& Error::with_label(std::string label) {
  label_ = std::move(label);
  return *this;
}

Error& Error::with_indices(std::vector<std::size_t> indices) {
  indices_ = std::move(indices);
  return *this;
}

}  // namespace dialogic
