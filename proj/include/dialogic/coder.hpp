#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialogic/metrics.hpp"
#include "dialogic/model.hpp"

namespace dialogic::coder {

struct ContextTurn {
  SpeakerRole role = SpeakerRole::Teacher;
  std::string text;
  std::optional<Code> code;

  bool operator==(const ContextTurn&) const = default;
};

// Preceding turns (oldest first) plus the turn to code.
struct CodingContext {
  std::vector<ContextTurn> window;
  Turn target;
};

struct CodedResult {
  Code code = Code::O;
  std::optional<double> confidence;
  std::optional<std::string> rationale;
  std::chrono::nanoseconds latency{0};
};

enum class BackendKind { Gold, KeywordStub, RemoteLLM };

struct BackendConfig {
  BackendKind kind = BackendKind::KeywordStub;
  std::string endpoint;  // RemoteLLM: http(s)://host[:port]/path
  std::string model;
  std::size_t max_retries = 2;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds retry_backoff{200};
  std::string api_key;          // sent as a bearer token when non-empty
  std::string scheme_document;  // empty -> shipped scheme
  std::string cue_table;        // empty -> shipped cue table
};

// Throws Error{InvalidArgument} when the config is unusable.
void check_config(const BackendConfig& config);

std::string_view default_scheme_document();
std::string_view default_cue_table();

std::string build_prompt(std::string_view scheme_doc, const CodingContext& ctx);

// First standalone code label in the reply. Multi-letter labels match in any
// case; the single-letter labels A, O and Q only match in upper case so that
// English words like "a" are not mistaken for codes.
std::optional<Code> try_parse_reply(std::string_view text);
// Throws Error{NoCodeFound}; the raw reply is kept as the error label.
Code parse_reply(std::string_view text);

// Ordered lexical rules read from the cue table file.
class CueTable {
 public:
  enum class Context { Empty, Any, Question, AfterInvitation, Default };

  struct Row {
    Code code = Code::O;
    Context context = Context::Any;
    // Alternatives; each alternative is a conjunction of normalized phrases.
    std::vector<std::vector<std::string>> cues;
  };

  // Throws Error{Syntax} on malformed tables.
  static CueTable parse(std::string_view text);

  const std::string& version() const { return version_; }
  const std::vector<Row>& rows() const { return rows_; }

  Code apply(const CodingContext& ctx) const;

 private:
  std::string version_;
  std::vector<Row> rows_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Throws Error{BackendUnavailable} on transport failure and
  // Error{NoCodeFound} or Error{Syntax} when the reply cannot be used.
  virtual CodedResult code(const CodingContext& ctx) = 0;
  // Whether code() may be called from several threads at once. Backends that
  // are not concurrent see the codes assigned earlier in the same run.
  virtual bool concurrent() const { return false; }
};

class GoldBackend final : public Backend {
 public:
  CodedResult code(const CodingContext& ctx) override;
};

class KeywordStubBackend final : public Backend {
 public:
  explicit KeywordStubBackend(CueTable table) : table_(std::move(table)) {}
  CodedResult code(const CodingContext& ctx) override;

 private:
  CueTable table_;
};

// Chat-completion client. Every call opens its own connection.
class RemoteLlmBackend final : public Backend {
 public:
  explicit RemoteLlmBackend(BackendConfig config);
  CodedResult code(const CodingContext& ctx) override;
  bool concurrent() const override { return true; }

  static std::string request_body(std::string_view model, std::string_view prompt);

 private:
  BackendConfig config_;
  std::string scheme_;
  std::string origin_;  // scheme://host:port
  std::string path_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

struct CodeOptions {
  std::size_t window = 5;
  bool recode = false;
};

struct CodingOutcome {
  Transcript transcript;
  metrics::TimingStats timing;
  std::vector<std::size_t> failed;              // turns left uncoded
  std::map<std::size_t, std::string> failures;  // last error per failed turn
};

// Codes every turn that needs a code. Turns that exhaust their retries stay
// uncoded and are listed in `failed`. Throws Error{BackendUnavailable} when
// no turn could be coded because the transport failed every time.
CodingOutcome code_transcript(const Transcript& transcript, Backend& backend, const BackendConfig& config,
                              CodeOptions options = {});
CodingOutcome code_transcript(const Transcript& transcript, const BackendConfig& config, CodeOptions options = {});

}  // namespace dialogic::coder
