// Recursive-descent parser for the rule DSL.
//
//   file     := { "version" STRING | rule | seq }
//   rule     := "rule" ID ":" CATEGORY { "priority" "=" INT | "desc" "=" STRING } "{" cond "}"
//   seq      := "seq" ID ":" CATEGORY "{" position { "->" position } [ "gap" "=" INT ] "}"
//   position := CODE { "|" CODE }
//   cond     := min_turns(INT) | contains(any: CODES) | groups([CODES] {, [CODES]})
//             | consecutive(CODE, CODE) | unanswered(CODE) | students(>= INT)
//             | teacher(true|false) | all(cond {, cond}) | any(cond {, cond})

#include <cctype>
#include <charconv>
#include <limits>
#include <optional>
#include <set>

#include "dialogic/error.hpp"
#include "dialogic/rulebase.hpp"

namespace dialogic {
namespace {

enum class Tok { Ident, Int, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c == '"') {
        out.push_back(read_string());
      } else if (c == '-' && peek(1) == '>') {
        out.push_back({Tok::Punct, "->", line_});
        pos_ += 2;
      } else if (c == '>' && peek(1) == '=') {
        out.push_back({Tok::Punct, ">=", line_});
        pos_ += 2;
      } else if (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        ++pos_;
        Token t = read_word();
        if (t.kind != Tok::Int) throw Error::syntax(t.line, "malformed number '-" + t.text + "'");
        t.text.insert(t.text.begin(), '-');
        out.push_back(std::move(t));
      } else if (std::string_view(":{}()[],|=").find(c) != std::string_view::npos) {
        out.push_back({Tok::Punct, std::string(1, c), line_});
        ++pos_;
      } else if (word_char(c)) {
        out.push_back(read_word());
      } else {
        throw Error::syntax(line_, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back({Tok::End, "", line_});
    return out;
  }

 private:
  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '/';
  }

  char peek(std::size_t ahead) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token read_word() {
    Token t{Tok::Ident, "", line_};
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (word_char(c) || (c == '-' && peek(1) != '>')) {
        t.text.push_back(c);
        ++pos_;
      } else {
        break;
      }
    }
    bool digits = !t.text.empty() && t.text.find_first_not_of("0123456789") == std::string::npos;
    if (digits) t.kind = Tok::Int;
    return t;
  }

  Token read_string() {
    Token t{Tok::String, "", line_};
    ++pos_;
    while (true) {
      if (pos_ >= src_.size()) throw Error::syntax(t.line, "unterminated string");
      char c = src_[pos_++];
      if (c == '"') break;
      if (c == '\n') throw Error::syntax(line_, "newline inside string");
      if (c == '\\') {
        if (pos_ >= src_.size()) throw Error::syntax(line_, "unterminated escape");
        char e = src_[pos_++];
        switch (e) {
          case 'n': t.text.push_back('\n'); break;
          case 't': t.text.push_back('\t'); break;
          case '"': t.text.push_back('"'); break;
          case '\\': t.text.push_back('\\'); break;
          default: throw Error::syntax(line_, std::string("unknown escape '\\") + e + "'");
        }
        continue;
      }
      t.text.push_back(c);
    }
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  RuleBase run() {
    std::optional<std::string> version;
    std::vector<Rule> rules;
    std::vector<SequencePattern> sequences;
    std::set<std::string> ids;

    auto claim = [&ids](const Token& id) {
      if (!ids.insert(id.text).second) {
        Error e(ErrorKind::DuplicateId, "line " + std::to_string(id.line) + ": duplicate id '" + id.text + "'");
        e.with_line(id.line).with_label(id.text);
        throw e;
      }
    };

    while (cur().kind != Tok::End) {
      const Token& kw = expect_ident();
      if (kw.text == "version") {
        if (version) throw Error::syntax(kw.line, "version declared twice");
        version = expect(Tok::String, "a quoted version string").text;
      } else if (kw.text == "rule") {
        Token id = expect_id();
        claim(id);
        rules.push_back(parse_rule(id));
      } else if (kw.text == "seq") {
        Token id = expect_id();
        claim(id);
        sequences.push_back(parse_seq(id));
      } else {
        throw Error::syntax(kw.line, "expected 'rule', 'seq' or 'version', got '" + kw.text + "'");
      }
    }
    try {
      return RuleBase(version.value_or(""), std::move(rules), std::move(sequences));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::Syntax, e.what());
      throw;
    }
  }

 private:
  const Token& cur() const { return toks_[pos_]; }

  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool at_punct(std::string_view p) const { return cur().kind == Tok::Punct && cur().text == p; }

  const Token& expect(Tok kind, std::string_view what) {
    if (cur().kind != kind) throw Error::syntax(cur().line, "expected " + std::string(what) + describe_cur());
    return advance();
  }

  const Token& expect_ident() { return expect(Tok::Ident, "a keyword"); }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) throw Error::syntax(cur().line, "expected '" + std::string(p) + "'" + describe_cur());
    advance();
  }

  void expect_word(std::string_view w) {
    if (cur().kind != Tok::Ident || cur().text != w) {
      throw Error::syntax(cur().line, "expected '" + std::string(w) + "'" + describe_cur());
    }
    advance();
  }

  std::string describe_cur() const {
    if (cur().kind == Tok::End) return ", got end of input";
    return ", got '" + cur().text + "'";
  }

  Token expect_id() {
    if (cur().kind != Tok::Ident && cur().kind != Tok::Int) {
      throw Error::syntax(cur().line, "expected an id" + describe_cur());
    }
    return advance();
  }

  Category expect_category() {
    const Token& t = expect(Tok::Ident, "a category");
    auto c = try_parse_category(t.text);
    if (!c) {
      Error e(ErrorKind::UnknownCategory, "line " + std::to_string(t.line) + ": unknown category '" + t.text + "'");
      e.with_line(t.line).with_label(t.text);
      throw e;
    }
    return *c;
  }

  Code expect_code() {
    if (cur().kind != Tok::Ident) throw Error::syntax(cur().line, "expected a code" + describe_cur());
    const Token& t = advance();
    if (auto c = try_parse_code(t.text)) return *c;
    throw Error::unknown_code(t.text, t.line);
  }

  long long expect_int(bool allow_negative = false) {
    const Token& t = expect(Tok::Int, "an integer");
    long long value = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
      throw Error::syntax(t.line, "integer out of range '" + t.text + "'");
    }
    if (!allow_negative && value < 0) throw Error::syntax(t.line, "expected a non-negative integer");
    return value;
  }

  CodeSet code_list(std::string_view sep) {
    CodeSet set;
    set.insert(expect_code());
    while (at_punct(sep)) {
      advance();
      set.insert(expect_code());
    }
    return set;
  }

  Rule parse_rule(const Token& id) {
    Rule rule;
    rule.id = id.text;
    expect_punct(":");
    rule.category = expect_category();
    while (cur().kind == Tok::Ident) {
      const Token& attr = advance();
      expect_punct("=");
      if (attr.text == "priority") {
        long long p = expect_int(true);
        if (p < std::numeric_limits<int>::min() || p > std::numeric_limits<int>::max()) {
          throw Error::syntax(attr.line, "priority out of range");
        }
        rule.priority = static_cast<int>(p);
      } else if (attr.text == "desc") {
        rule.description = expect(Tok::String, "a quoted description").text;
      } else {
        throw Error::syntax(attr.line, "unknown rule attribute '" + attr.text + "'");
      }
    }
    expect_punct("{");
    std::size_t line = cur().line;
    rule.condition = parse_condition();
    expect_punct("}");
    if (auto msg = check_condition(rule.condition); !msg.empty()) throw Error::syntax(line, msg);
    return rule;
  }

  Condition parse_condition() {
    const Token& head = expect(Tok::Ident, "a condition");
    const std::string& name = head.text;
    expect_punct("(");
    Condition out;
    if (name == "min_turns") {
      out = MinTurns{static_cast<std::size_t>(expect_int())};
    } else if (name == "contains") {
      expect_word("any");
      expect_punct(":");
      out = ContainsAnyOf{code_list(",")};
    } else if (name == "groups") {
      RequiresGroups g;
      do {
        if (!g.groups.empty()) advance();
        expect_punct("[");
        g.groups.push_back(code_list(","));
        expect_punct("]");
      } while (at_punct(","));
      out = std::move(g);
    } else if (name == "consecutive") {
      Code first = expect_code();
      expect_punct(",");
      out = ConsecutivePair{first, expect_code()};
    } else if (name == "unanswered") {
      out = UnansweredInvitation{expect_code()};
    } else if (name == "students") {
      expect_punct(">=");
      out = DistinctStudents{static_cast<std::size_t>(expect_int())};
    } else if (name == "teacher") {
      const Token& flag = expect(Tok::Ident, "true or false");
      if (flag.text != "true" && flag.text != "false") {
        throw Error::syntax(flag.line, "expected true or false, got '" + flag.text + "'");
      }
      out = InvolvesTeacher{flag.text == "true"};
    } else if (name == "all" || name == "any") {
      std::vector<Condition> children;
      children.push_back(parse_condition());
      while (at_punct(",")) {
        advance();
        children.push_back(parse_condition());
      }
      if (name == "all") {
        out = All{std::move(children)};
      } else {
        out = Any{std::move(children)};
      }
    } else {
      throw Error::syntax(head.line, "unknown condition '" + name + "'");
    }
    expect_punct(")");
    return out;
  }

  SequencePattern parse_seq(const Token& id) {
    SequencePattern p;
    p.id = id.text;
    expect_punct(":");
    p.category = expect_category();
    expect_punct("{");
    std::size_t line = cur().line;
    p.positions.push_back(code_list("|"));
    while (at_punct("->")) {
      advance();
      p.positions.push_back(code_list("|"));
    }
    if (cur().kind == Tok::Ident && cur().text == "gap") {
      advance();
      expect_punct("=");
      p.max_gap = static_cast<std::size_t>(expect_int());
    }
    expect_punct("}");
    if (auto msg = check_pattern(p); !msg.empty()) throw Error::syntax(line, msg);
    return p;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

RuleBase parse_rulebase(std::string_view text) {
  return Parser(Lexer(text).run()).run();
}

}  // namespace dialogic
