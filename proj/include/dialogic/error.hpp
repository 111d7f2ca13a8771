#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dialogic {

enum class ErrorKind {
  UnknownCode,
  Syntax,
  DuplicateIndex,
  EmptyTranscript,
  DuplicateId,
  UnknownCategory,
  MissingTopicIds,
  UncodedTurn,
  NoCodeFound,
  BackendUnavailable,
  PartialCoding,
  LengthMismatch,
  UnknownLabel,
  EmptyMatrix,
  DegenerateExpectedAgreement,
  EpisodeUniverseMismatch,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library. `kind` carries the error class;
// line/label/indices are filled when the error has a natural location.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message);

  static Error syntax(std::size_t line, std::string_view message);
  static Error unknown_code(std::string_view label, std::optional<std::size_t> line = std::nullopt);
  static Error uncoded(std::vector<std::size_t> indices);

  ErrorKind kind() const noexcept { return kind_; }
  const std::optional<std::size_t>& line() const noexcept { return line_; }
  const std::string& label() const noexcept { return label_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

  Error& with_line(std::size_t line);
  Error& with_label(std::string label);
  Error& with_indices(std::vector<std::size_t> indices);

 private:
  ErrorKind kind_;
  std::optional<std::size_t> line_;
  std::string label_;
  std::vector<std::size_t> indices_;
};

}  // namespace dialogic
