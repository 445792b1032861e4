#pragma once

// Block-structured text format for CannSpec.
//
//   spec  := block+
//   block := ident "{" entry* "}"
//   entry := ident ":" value ";"
//   value := number | bool | ident | list | call
//   list  := "[" (value ("," value)*)? "]"
//   call  := ident "(" (value ("," value)*)? ")"
//
// '#' starts a comment running to end of line. Positions are 1-based and
// count bytes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cann_spec.hpp"

namespace gencann::dsl {

struct SourcePos {
  int line = 1;
  int column = 1;
};

struct ParseError {
  enum class Kind { lex, syntax, validation };
  int line = 1;
  int column = 1;
  std::string message;
  Kind kind = Kind::syntax;

  std::string to_string() const {
    const char* k = kind == Kind::lex ? "lex" : kind == Kind::syntax ? "syntax" : "validation";
    return std::string(k) + " error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }
};

struct Violation {
  std::string path;
  std::string message;
  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

// ---------------------------------------------------------------------------
// syntax tree

struct Value;
struct Call {
  std::string name;
  std::vector<Value> args;
};
struct Value {
  struct Number {
    double value;
    std::string text;
  };
  struct Ident {
    std::string name;
  };
  std::variant<Number, bool, Ident, std::vector<Value>, Call> data;
  SourcePos pos;
};

struct Entry {
  std::string key;
  Value value;
  SourcePos pos;
};

struct Block {
  std::string name;
  std::vector<Entry> entries;
  SourcePos pos;
};

struct Document {
  std::vector<Block> blocks;
};

namespace detail {

enum class Tok { ident, number, lbrace, rbrace, colon, semi, lbrack, rbrack, comma, lparen, rparen, eof };

struct Token {
  Tok type;
  std::string text;
  SourcePos pos;
};

inline const char* describe(Tok t) {
  switch (t) {
  case Tok::ident: return "identifier";
  case Tok::number: return "number";
  case Tok::lbrace: return "'{'";
  case Tok::rbrace: return "'}'";
  case Tok::colon: return "':'";
  case Tok::semi: return "';'";
  case Tok::lbrack: return "'['";
  case Tok::rbrack: return "']'";
  case Tok::comma: return "','";
  case Tok::lparen: return "'('";
  case Tok::rparen: return "')'";
  case Tok::eof: return "end of input";
  }
  return "?";
}

struct Failure {
  ParseError error;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : s_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (i_ >= s_.size()) {
        out.push_back({Tok::eof, "", end_pos()});
        return out;
      }
      const SourcePos p = pos();
      const char c = s_[i_];
      auto single = [&](Tok t) {
        out.push_back({t, std::string(1, c), p});
        advance();
      };
      switch (c) {
      case '{': single(Tok::lbrace); continue;
      case '}': single(Tok::rbrace); continue;
      case ':': single(Tok::colon); continue;
      case ';': single(Tok::semi); continue;
      case '[': single(Tok::lbrack); continue;
      case ']': single(Tok::rbrack); continue;
      case ',': single(Tok::comma); continue;
      case '(': single(Tok::lparen); continue;
      case ')': single(Tok::rparen); continue;
      default: break;
      }
      if (is_ident_start(c)) {
        const std::size_t b = i_;
        while (i_ < s_.size() && is_ident_char(s_[i_])) advance();
        out.push_back({Tok::ident, std::string(s_.substr(b, i_ - b)), p});
        continue;
      }
      if (is_digit(c) || c == '-' || c == '+' || c == '.') {
        out.push_back({Tok::number, lex_number(p), p});
        continue;
      }
      const auto byte = static_cast<unsigned char>(c);
      std::ostringstream m;
      if (byte >= 0x20 && byte < 0x7f)
        m << "unexpected character '" << c << "'";
      else
        m << "unexpected byte 0x" << std::hex << int(byte);
      throw Failure{{p.line, p.column, m.str(), ParseError::Kind::lex}};
    }
  }

private:
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

  SourcePos pos() const { return {line_, col_}; }
  // EOF errors point at the last byte so positions stay inside the text.
  SourcePos end_pos() const { return s_.empty() ? SourcePos{1, 1} : last_; }

  void advance() {
    last_ = pos();
    if (s_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (i_ < s_.size()) {
      const char c = s_[i_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string lex_number(SourcePos p) {
    const std::size_t b = i_;
    auto fail = [&](const std::string& why) {
      throw Failure{{p.line, p.column, "malformed number: " + why, ParseError::Kind::lex}};
    };
    if (s_[i_] == '-' || s_[i_] == '+') advance();
    if (i_ >= s_.size() || !is_digit(s_[i_])) fail("expected digit");
    while (i_ < s_.size() && is_digit(s_[i_])) advance();
    if (i_ < s_.size() && s_[i_] == '.') {
      advance();
      if (i_ >= s_.size() || !is_digit(s_[i_])) fail("expected digit after '.'");
      while (i_ < s_.size() && is_digit(s_[i_])) advance();
    }
    if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
      advance();
      if (i_ < s_.size() && (s_[i_] == '-' || s_[i_] == '+')) advance();
      if (i_ >= s_.size() || !is_digit(s_[i_])) fail("expected exponent digits");
      while (i_ < s_.size() && is_digit(s_[i_])) advance();
    }
    if (i_ < s_.size() && (is_ident_char(s_[i_]) || s_[i_] == '.')) fail("unexpected trailing character");
    return std::string(s_.substr(b, i_ - b));
  }

  std::string_view s_;
  std::size_t i_ = 0;
  int line_ = 1, col_ = 1;
  SourcePos last_{1, 1};
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  Document document() {
    Document doc;
    if (peek().type == Tok::eof) fail(peek(), "expected at least one block");
    while (peek().type != Tok::eof) doc.blocks.push_back(block());
    return doc;
  }

private:
  const Token& peek() const { return t_[k_]; }
  const Token& next() { return t_[k_ < t_.size() - 1 ? k_++ : k_]; }

  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw Failure{{at.pos.line, at.pos.column, msg, ParseError::Kind::syntax}};
  }
  const Token& expect(Tok type, const char* context) {
    const Token& t = peek();
    if (t.type != type)
      fail(t, std::string("expected ") + describe(type) + " " + context + ", found " + describe(t.type) +
                  (t.text.empty() ? "" : " '" + t.text + "'"));
    return next();
  }

  Block block() {
    const Token& name = expect(Tok::ident, "as block name");
    Block b{name.text, {}, name.pos};
    expect(Tok::lbrace, "after block name");
    while (peek().type != Tok::rbrace) {
      if (peek().type == Tok::eof) fail(peek(), "unbalanced '{': block '" + b.name + "' is not closed");
      b.entries.push_back(entry());
    }
    next();
    return b;
  }

  Entry entry() {
    const Token& key = expect(Tok::ident, "as entry key");
    Entry e{key.text, {}, key.pos};
    expect(Tok::colon, "after key");
    e.value = value(0);
    expect(Tok::semi, "after value");
    return e;
  }

  Value value(int depth) {
    if (depth > 64) fail(peek(), "values nested too deeply");
    const Token& t = peek();
    Value v;
    v.pos = t.pos;
    switch (t.type) {
    case Tok::number: {
      next();
      // strtod saturates to +-HUGE_VAL / 0 on range errors; validation rejects non-finite values
      const double d = std::strtod(t.text.c_str(), nullptr);
      v.data = Value::Number{d, t.text};
      return v;
    }
    case Tok::ident: {
      next();
      if (t.text == "true" || t.text == "false") {
        v.data = t.text == "true";
        return v;
      }
      if (peek().type == Tok::lparen) {
        next();
        Call c{t.text, {}};
        c.args = sequence(Tok::rparen, depth);
        v.data = std::move(c);
        return v;
      }
      v.data = Value::Ident{t.text};
      return v;
    }
    case Tok::lbrack: {
      next();
      v.data = sequence(Tok::rbrack, depth);
      return v;
    }
    default: fail(t, std::string("expected a value, found ") + describe(t.type));
    }
  }

  std::vector<Value> sequence(Tok close, int depth) {
    std::vector<Value> items;
    if (peek().type == close) {
      next();
      return items;
    }
    for (;;) {
      items.push_back(value(depth + 1));
      if (peek().type == Tok::comma) {
        next();
        continue;
      }
      expect(close, close == Tok::rbrack ? "to close list" : "to close argument list");
      return items;
    }
  }

  std::vector<Token> t_;
  std::size_t k_ = 0;
};

// ---------------------------------------------------------------------------
// lowering: syntax tree -> CannSpec

using PositionMap = std::map<std::string, SourcePos>;

class Lowering {
public:
  CannSpec run(const Document& doc, PositionMap& positions) {
    positions_ = &positions;
    CannSpec spec;
    std::set<std::string> seen;
    for (const Block& b : doc.blocks) {
      if (!seen.insert(b.name).second) fail(b.pos, "duplicate block '" + b.name + "'");
      positions[b.name] = b.pos;
      if (b.name == "material")
        material(b, spec.material);
      else if (b.name == "features")
        features(b, spec.features);
      else if (b.name == "network")
        network(b, spec.network);
      else if (b.name == "fiber") {
        spec.fiber.emplace();
        fiber(b, *spec.fiber);
      } else if (b.name == "training")
        training(b, spec.training);
      else
        fail(b.pos, "unknown block '" + b.name + "'");
    }
    for (const char* req : {"material", "features", "network", "training"})
      if (!seen.count(req)) {
        const SourcePos p = doc.blocks.empty() ? SourcePos{} : doc.blocks.back().pos;
        fail(p, std::string("missing required block '") + req + "'");
      }
    return spec;
  }

private:
  [[noreturn]] void fail(SourcePos p, const std::string& msg) const {
    throw Failure{{p.line, p.column, msg, ParseError::Kind::validation}};
  }

  // Visits each entry once, rejecting unknown and duplicate keys and enforcing required ones.
  template <class Handlers>
  void entries(const Block& b, const Handlers& handlers, std::initializer_list<const char*> required) {
    std::set<std::string> seen;
    for (const Entry& e : b.entries) {
      if (!seen.insert(e.key).second) fail(e.pos, "duplicate key '" + e.key + "' in block '" + b.name + "'");
      if (const auto* id = std::get_if<Value::Ident>(&e.value.data); id && id->name == "choose")
        fail(e.value.pos, b.name + "." + e.key + ": value not chosen (template placeholder)");
      auto it = handlers.find(e.key);
      if (it == handlers.end()) fail(e.pos, "unknown key '" + e.key + "' in block '" + b.name + "'");
      (*positions_)[b.name + "." + e.key] = e.pos;
      it->second(e);
    }
    for (const char* r : required)
      if (!seen.count(r)) fail(b.pos, "block '" + b.name + "' is missing required key '" + r + "'");
  }

  using Handler = std::function<void(const Entry&)>;
  using HandlerMap = std::map<std::string, Handler>;

  double number(const Value& v, const std::string& what) const {
    if (const auto* n = std::get_if<Value::Number>(&v.data)) return n->value;
    fail(v.pos, what + " must be a number");
  }
  // digit-only tokens are read exactly; forms like 1e3 go through the double value
  template <class Int>
  Int exact_integer(const Value& v, const std::string& what) const {
    const double d = number(v, what);
    const std::string& t = std::get<Value::Number>(v.data).text;
    if (t.find_first_of(".eE") == std::string::npos) {
      Int out{};
      const char* b = t.data() + (t.front() == '+' ? 1 : 0);
      const auto [end, ec] = std::from_chars(b, t.data() + t.size(), out);
      if (ec != std::errc() || end != t.data() + t.size()) fail(v.pos, what + " is out of range");
      return out;
    }
    if (!(std::abs(d) < 9.0e15) || d != std::floor(d)) fail(v.pos, what + " must be an integer");
    if (d < double(std::numeric_limits<Int>::min())) fail(v.pos, what + " is out of range");
    return Int(d);
  }
  long integer(const Value& v, const std::string& what) const { return exact_integer<long>(v, what); }
  bool boolean(const Value& v, const std::string& what) const {
    if (const auto* b = std::get_if<bool>(&v.data)) return *b;
    fail(v.pos, what + " must be true or false");
  }
  std::string ident(const Value& v, const std::string& what) const {
    if (const auto* i = std::get_if<Value::Ident>(&v.data)) return i->name;
    fail(v.pos, what + " must be an identifier");
  }
  const std::vector<Value>& list(const Value& v, const std::string& what) const {
    if (const auto* l = std::get_if<std::vector<Value>>(&v.data)) return *l;
    fail(v.pos, what + " must be a list");
  }
  std::pair<double, double> uniform_call(const Value& v, const std::string& what) const {
    const auto* c = std::get_if<Call>(&v.data);
    if (!c || c->name != "uniform" || c->args.size() != 2)
      fail(v.pos, what + " must be uniform(low, high)");
    return {number(c->args[0], what + " bound"), number(c->args[1], what + " bound")};
  }

  void material(const Block& b, MaterialBlock& m) {
    HandlerMap h{
        {"class",
         [&](const Entry& e) {
           const auto s = ident(e.value, "material.class");
           const auto c = material_class_from_string(s);
           if (!c) fail(e.value.pos, "material.class must be isotropic or transversely_isotropic");
           m.material_class = *c;
         }},
        {"incompressible", [&](const Entry& e) { m.incompressible = boolean(e.value, "material.incompressible"); }},
    };
    entries(b, h, {"class"});
  }

  void features(const Block& b, FeatureBlock& f) {
    HandlerMap h{
        {"use_stretches", [&](const Entry& e) { f.use_stretches = boolean(e.value, "features.use_stretches"); }},
        {"invariants",
         [&](const Entry& e) {
           for (const Value& v : list(e.value, "features.invariants")) {
             const auto s = ident(v, "invariant");
             const auto inv = invariant_from_string(s);
             if (!inv) fail(v.pos, "unknown invariant '" + s + "' (expected I1, I2, I4 or I5)");
             f.invariants.push_back(*inv);
           }
         }},
        {"offsets", [&](const Entry& e) { f.offsets = ident(e.value, "features.offsets"); }},
    };
    entries(b, h, {"invariants"});
  }

  void network(const Block& b, NetworkBlock& n) {
    HandlerMap h{
        {"layers",
         [&](const Entry& e) {
           for (const Value& v : list(e.value, "network.layers")) {
             const long w = integer(v, "layer width");
             if (w < 1 || w > 100000) fail(v.pos, "layer width must be in [1, 100000]");
             n.layers.push_back(int(w));
           }
         }},
        {"activation",
         [&](const Entry& e) {
           const auto s = ident(e.value, "network.activation");
           const auto a = activation_from_string(s);
           if (!a) fail(e.value.pos, "unknown activation '" + s + "'");
           n.activation = *a;
         }},
        {"output",
         [&](const Entry& e) {
           const auto s = ident(e.value, "network.output");
           const auto a = output_activation_from_string(s);
           if (!a) fail(e.value.pos, "network.output must be linear or softplus");
           n.output = *a;
         }},
        {"initializer",
         [&](const Entry& e) {
           if (const auto* id = std::get_if<Value::Ident>(&e.value.data); id && id->name == "glorot_uniform") {
             n.initializer = Initializer{};
             return;
           }
           const auto [lo, hi] = uniform_call(e.value, "network.initializer");
           n.initializer = Initializer{Initializer::Kind::uniform, lo, hi};
         }},
        {"nonneg_weights", [&](const Entry& e) { n.nonneg_weights = boolean(e.value, "network.nonneg_weights"); }},
        {"seed",
         [&](const Entry& e) {
           if (number(e.value, "network.seed") < 0) fail(e.value.pos, "network.seed must be non-negative");
           n.seed = exact_integer<std::uint64_t>(e.value, "network.seed");
         }},
    };
    entries(b, h, {"layers"});
  }

  void fiber(const Block& b, FiberBlock& f) {
    HandlerMap h{
        {"angle_init",
         [&](const Entry& e) {
           if (std::holds_alternative<Value::Number>(e.value.data)) {
             f.angle = number(e.value, "fiber.angle_init");
             return;
           }
           const auto [lo, hi] = uniform_call(e.value, "fiber.angle_init");
           f.angle.reset();
           f.low = lo;
           f.high = hi;
         }},
        {"trainable", [&](const Entry& e) { f.trainable = boolean(e.value, "fiber.trainable"); }},
    };
    entries(b, h, {});
  }

  void training(const Block& b, TrainingBlock& t) {
    HandlerMap h{
        {"optimizer",
         [&](const Entry& e) {
           if (const auto* id = std::get_if<Value::Ident>(&e.value.data)) {
             if (id->name == "adam") {
               t.optimizer = OptimizerConfig{};
               return;
             }
             if (id->name == "gd") {
               t.optimizer = OptimizerConfig{OptimizerConfig::Kind::gradient_descent};
               return;
             }
           } else if (const auto* c = std::get_if<Call>(&e.value.data); c && c->name == "adam") {
             if (c->args.size() != 3) fail(e.value.pos, "adam(beta1, beta2, epsilon) takes three arguments");
             t.optimizer = OptimizerConfig{OptimizerConfig::Kind::adam, number(c->args[0], "beta1"),
                                           number(c->args[1], "beta2"), number(c->args[2], "epsilon")};
             return;
           }
           fail(e.value.pos, "training.optimizer must be adam, adam(beta1, beta2, epsilon) or gd");
         }},
        {"learning_rate", [&](const Entry& e) { t.learning_rate = number(e.value, "training.learning_rate"); }},
        {"epochs", [&](const Entry& e) { t.epochs = integer(e.value, "training.epochs"); }},
        {"loss", [&](const Entry& e) { t.loss = ident(e.value, "training.loss"); }},
        {"reference_penalty_weight",
         [&](const Entry& e) { t.reference_penalty_weight = number(e.value, "training.reference_penalty_weight"); }},
        {"l2_weight", [&](const Entry& e) { t.l2_weight = number(e.value, "training.l2_weight"); }},
        {"patience", [&](const Entry& e) { t.patience = integer(e.value, "training.patience"); }},
        {"min_improvement", [&](const Entry& e) { t.min_improvement = number(e.value, "training.min_improvement"); }},
        {"path_weights",
         [&](const Entry& e) {
           t.path_weights.clear();
           for (const Value& v : list(e.value, "training.path_weights"))
             t.path_weights.push_back(number(v, "path weight"));
         }},
    };
    entries(b, h, {"learning_rate", "epochs"});
  }

  PositionMap* positions_ = nullptr;
};

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

} // namespace detail

/// Lex and parse only; no semantic checks. Useful for templates with placeholders.
inline std::variant<Document, ParseError> parse_syntax(std::string_view text) {
  try {
    return detail::Parser(detail::Lexer(text).run()).document();
  } catch (const detail::Failure& f) {
    return f.error;
  }
}

/// Every violated rule, not just the first. Deterministic order.
inline ValidationReport validate(const CannSpec& s) {
  ValidationReport r;
  auto add = [&](std::string path, std::string msg) { r.push_back({std::move(path), std::move(msg)}); };
  auto finite_nonneg = [&](double v, const char* path) {
    if (!std::isfinite(v) || v < 0.0) add(path, "must be a finite non-negative number");
  };

  if (!s.material.incompressible) add("material.incompressible", "only incompressible materials are supported");

  const bool iso = s.material.material_class == MaterialClass::isotropic;
  std::set<Invariant> seen;
  for (Invariant i : s.features.invariants) {
    if (!seen.insert(i).second) add("features.invariants", "duplicate invariant " + std::string(to_string(i)));
    if (iso && (i == Invariant::I4 || i == Invariant::I5))
      add("features.invariants", std::string(to_string(i)) + " requires transversely_isotropic");
  }
  if (s.features.invariants.empty() && !s.features.use_stretches) add("features", "feature vector empty");
  if (s.features.offsets != "reference") add("features.offsets", "offsets must be 'reference'");

  if (s.network.layers.empty()) add("network.layers", "at least one hidden layer required");
  for (int w : s.network.layers)
    if (w < 1) add("network.layers", "layer widths must be positive");
  if (s.network.initializer.kind == Initializer::Kind::uniform) {
    const auto& in = s.network.initializer;
    if (!std::isfinite(in.low) || !std::isfinite(in.high) || in.low > in.high)
      add("network.initializer", "uniform bounds must be finite with low <= high");
  }

  if (iso && s.fiber) add("fiber", "fiber requires transversely_isotropic");
  if (!iso && !s.fiber) add("fiber", "transversely_isotropic requires a fiber block");
  if (s.fiber) {
    constexpr double half_pi = 1.5707963267948966;
    auto in_range = [&](double a) { return std::isfinite(a) && a >= 0.0 && a <= half_pi; };
    if (s.fiber->angle) {
      if (!in_range(*s.fiber->angle)) add("fiber.angle_init", "angle must lie in [0, pi/2]");
    } else if (!in_range(s.fiber->low) || !in_range(s.fiber->high) || s.fiber->low > s.fiber->high) {
      add("fiber.angle_init", "uniform bounds must satisfy 0 <= low <= high <= pi/2");
    }
  }

  const auto& t = s.training;
  if (!std::isfinite(t.learning_rate) || t.learning_rate <= 0.0) add("training.learning_rate", "must be positive");
  if (t.epochs <= 0) add("training.epochs", "must be positive");
  if (t.loss != "mse") add("training.loss", "only 'mse' is supported");
  finite_nonneg(t.reference_penalty_weight, "training.reference_penalty_weight");
  finite_nonneg(t.l2_weight, "training.l2_weight");
  if (t.patience < 0) add("training.patience", "must be non-negative");
  finite_nonneg(t.min_improvement, "training.min_improvement");
  for (double w : t.path_weights)
    if (!std::isfinite(w) || w < 0.0) {
      add("training.path_weights", "weights must be finite and non-negative");
      break;
    }
  if (t.optimizer.kind == OptimizerConfig::Kind::adam) {
    const auto& o = t.optimizer;
    if (!(o.beta1 >= 0.0 && o.beta1 < 1.0) || !(o.beta2 >= 0.0 && o.beta2 < 1.0))
      add("training.optimizer", "adam betas must lie in [0, 1)");
    if (!(o.epsilon > 0.0) || !std::isfinite(o.epsilon)) add("training.optimizer", "adam epsilon must be positive");
  }
  return r;
}

/// Full parse: syntax, lowering and validation. The first problem is reported.
inline std::variant<CannSpec, ParseError> parse(std::string_view text) {
  try {
    const Document doc = detail::Parser(detail::Lexer(text).run()).document();
    detail::PositionMap positions;
    CannSpec spec = detail::Lowering{}.run(doc, positions);
    const ValidationReport report = validate(spec);
    if (!report.empty()) {
      const Violation& v = report.front();
      SourcePos p{1, 1};
      // most specific recorded position: "a.b" then "a"
      if (auto it = positions.find(v.path); it != positions.end())
        p = it->second;
      else if (auto it2 = positions.find(v.path.substr(0, v.path.find('.'))); it2 != positions.end())
        p = it2->second;
      return ParseError{p.line, p.column, v.path + ": " + v.message, ParseError::Kind::validation};
    }
    return spec;
  } catch (const detail::Failure& f) {
    return f.error;
  }
}

/// Canonical text; every field is written so parse(serialize(s)) == s.
inline std::string serialize(const CannSpec& s) {
  using detail::format_number;
  std::ostringstream o;
  o << "material {\n  class: " << to_string(s.material.material_class) << ";\n  incompressible: "
    << (s.material.incompressible ? "true" : "false") << ";\n}\n\n";

  o << "features {\n  use_stretches: " << (s.features.use_stretches ? "true" : "false") << ";\n  invariants: [";
  for (std::size_t i = 0; i < s.features.invariants.size(); ++i)
    o << (i ? ", " : "") << to_string(s.features.invariants[i]);
  o << "];\n  offsets: " << s.features.offsets << ";\n}\n\n";

  o << "network {\n  layers: [";
  for (std::size_t i = 0; i < s.network.layers.size(); ++i) o << (i ? ", " : "") << s.network.layers[i];
  o << "];\n  activation: " << to_string(s.network.activation) << ";\n  output: " << to_string(s.network.output)
    << ";\n  initializer: ";
  if (s.network.initializer.kind == Initializer::Kind::glorot_uniform)
    o << "glorot_uniform";
  else
    o << "uniform(" << format_number(s.network.initializer.low) << ", "
      << format_number(s.network.initializer.high) << ")";
  o << ";\n  nonneg_weights: " << (s.network.nonneg_weights ? "true" : "false") << ";\n  seed: " << s.network.seed
    << ";\n}\n\n";

  if (s.fiber) {
    o << "fiber {\n  angle_init: ";
    if (s.fiber->angle)
      o << format_number(*s.fiber->angle);
    else
      o << "uniform(" << format_number(s.fiber->low) << ", " << format_number(s.fiber->high) << ")";
    o << ";\n  trainable: " << (s.fiber->trainable ? "true" : "false") << ";\n}\n\n";
  }

  const auto& t = s.training;
  o << "training {\n  optimizer: ";
  if (t.optimizer.kind == OptimizerConfig::Kind::gradient_descent)
    o << "gd";
  else
    o << "adam(" << format_number(t.optimizer.beta1) << ", " << format_number(t.optimizer.beta2) << ", "
      << format_number(t.optimizer.epsilon) << ")";
  o << ";\n  learning_rate: " << format_number(t.learning_rate) << ";\n  epochs: " << t.epochs
    << ";\n  loss: " << t.loss << ";\n  reference_penalty_weight: " << format_number(t.reference_penalty_weight)
    << ";\n  l2_weight: " << format_number(t.l2_weight) << ";\n  patience: " << t.patience
    << ";\n  min_improvement: " << format_number(t.min_improvement) << ";\n";
  if (!t.path_weights.empty()) {
    o << "  path_weights: [";
    for (std::size_t i = 0; i < t.path_weights.size(); ++i) o << (i ? ", " : "") << format_number(t.path_weights[i]);
    o << "];\n";
  }
  o << "}\n";
  return o.str();
}

} // namespace gencann::dsl
