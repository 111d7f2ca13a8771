#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialogic/model.hpp"

namespace dialogic::ingest {

enum class Format {
  Records,  // JSON Lines, one object per turn
  Table,    // comma-separated with a header row
};

// Picks a format from the file extension: .csv -> Table, anything else -> Records.
Format format_for_path(std::string_view path);

// Field order used by both formats when writing.
inline constexpr std::string_view kFieldNames[] = {"index", "role", "speaker", "text", "code", "topic"};

// Parses a transcript. Turn indices, when present, must equal the record's
// ordinal; absent indices are assigned 0..n-1. Absent codes are allowed.
// Throws Error with kind Syntax, UnknownCode, DuplicateIndex or EmptyTranscript.
Transcript parse_transcript(std::string_view bytes, Format format, std::string id = {});

// Canonical serialization; parse_transcript(write_transcript(t)) == t for
// every valid transcript (the id and subject are not part of either format).
std::string write_transcript(const Transcript& transcript, Format format);

struct Issue {
  std::optional<std::size_t> turn;  // absent means the issue concerns the whole file
  std::string message;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const { return errors.empty(); }
};

struct ValidateOptions {
  // Episode-level analysis over explicit topics: a missing topic id is an error.
  bool require_topics = false;
};

ValidationReport validate(const Transcript& transcript, ValidateOptions options = {});

std::string format_report(const ValidationReport& report);

// True iff the bytes are well-formed UTF-8.
bool is_valid_utf8(std::string_view bytes);

}  // namespace dialogic::ingest
