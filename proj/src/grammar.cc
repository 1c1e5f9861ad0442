#include "sdgen/grammar.h"

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

namespace sdgen {

GrammarError::GrammarError(const std::string& message, int line, int column)
    : Error("grammar:" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

const std::vector<ProductionId>& Grammar::alternatives(SymbolId nonterminal) const {
  return by_lhs_.at(nonterminal);
}

std::optional<SymbolId> Grammar::find_nonterminal(std::string_view name) const {
  auto it = nonterminal_ids_.find(std::string(name));
  if (it == nonterminal_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<SymbolId> Grammar::find_terminal(std::string_view text) const {
  auto it = terminal_ids_.find(std::string(text));
  if (it == terminal_ids_.end()) return std::nullopt;
  return it->second;
}

SymbolId Grammar::nonterminal(std::string_view name) const {
  auto id = find_nonterminal(name);
  if (!id) throw Error("unknown nonterminal <" + std::string(name) + ">");
  return *id;
}

ProductionId Grammar::production_of(std::string_view lhs, int alt) const {
  const auto& alts = alternatives(nonterminal(lhs));
  if (alt < 0 || alt >= static_cast<int>(alts.size())) {
    throw Error("<" + std::string(lhs) + "> has no alternative " + std::to_string(alt));
  }
  return alts[alt];
}

std::string Grammar::to_string(ProductionId production) const {
  const Production& p = productions_.at(production);
  std::string out = "<" + symbols_[p.lhs].name + "> ->";
  for (SymbolId s : p.rhs) {
    const Symbol& sym = symbols_[s];
    out += sym.is_terminal() ? " '" + sym.name + "'" : " <" + sym.name + ">";
  }
  return out;
}

namespace {

struct RawRef {
  std::string text;
  bool terminal;
  int line;
  int column;
};

struct RawRule {
  std::string lhs;
  int line;
  std::vector<std::vector<RawRef>> alts;
};

class GrammarLexer {
 public:
  explicit GrammarLexer(std::string_view text) : text_(text) {}

  std::vector<RawRule> parse() {
    std::vector<RawRule> rules;
    while (true) {
      skip_blank();
      if (at_end()) break;
      if (peek() == '|') {
        if (rules.empty()) fail("alternative before any rule");
        ++pos_;
        ++col_;
        rules.back().alts.emplace_back();
        parse_alternative(rules.back());
        continue;
      }
      if (peek() != '<') fail("expected '<nonterminal>' at start of rule");
      RawRule rule;
      rule.line = line_;
      rule.lhs = read_nonterminal();
      skip_inline_space();
      if (!consume("->")) fail("expected '->'");
      rule.alts.emplace_back();
      rules.push_back(std::move(rule));
      parse_alternative(rules.back());
    }
    return rules;
  }

 private:
  void parse_alternative(RawRule& rule) {
    while (true) {
      skip_inline_space();
      if (at_end() || peek() == '\n' || peek() == '#') break;
      char c = peek();
      if (c == '|') {
        ++pos_;
        ++col_;
        check_nonempty(rule);
        rule.alts.emplace_back();
        continue;
      }
      int line = line_, column = col_;
      if (c == '<') {
        rule.alts.back().push_back({read_nonterminal(), false, line, column});
      } else if (c == '\'') {
        rule.alts.back().push_back({read_terminal(), true, line, column});
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
    }
    check_nonempty(rule);
  }

  void check_nonempty(const RawRule& rule) {
    if (rule.alts.back().empty()) fail("empty alternative in rule for <" + rule.lhs + ">");
  }

  std::string read_nonterminal() {
    ++pos_;
    ++col_;
    std::string name;
    while (!at_end() && peek() != '>') {
      char c = peek();
      if (c == '\n') fail("unterminated nonterminal");
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
        fail(std::string("invalid character '") + c + "' in nonterminal name");
      }
      name += c;
      ++pos_;
      ++col_;
    }
    if (at_end()) fail("unterminated nonterminal");
    ++pos_;
    ++col_;
    if (name.empty()) fail("empty nonterminal name");
    return name;
  }

  std::string read_terminal() {
    ++pos_;
    ++col_;
    std::string text;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated terminal literal");
      char c = peek();
      ++pos_;
      ++col_;
      if (c == '\'') break;
      if (c == '\\') {
        if (at_end()) fail("dangling escape");
        char e = peek();
        if (e != '\\' && e != '\'') fail("unknown escape");
        text += e;
        ++pos_;
        ++col_;
        continue;
      }
      text += c;
    }
    if (text.empty()) fail("empty terminal literal");
    return text;
  }

  void skip_inline_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) {
      ++pos_;
      ++col_;
    }
  }

  // Skips whitespace, newlines and comment lines.
  void skip_blank() {
    while (!at_end()) {
      char c = peek();
      if (c == '\n') {
        ++pos_;
        ++line_;
        col_ = 1;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
        ++col_;
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool consume(std::string_view token) {
    if (text_.substr(pos_, token.size()) != token) return false;
    pos_ += token.size();
    col_ += static_cast<int>(token.size());
    return true;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  [[noreturn]] void fail(const std::string& message) const {
    throw GrammarError(message, line_, col_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

Grammar load_grammar(std::string_view text) {
  std::vector<RawRule> rules = GrammarLexer(text).parse();
  if (rules.empty()) throw GrammarError("grammar has no rules", 1, 1);

  Grammar g;
  g.fingerprint_ = fnv1a64(text);
  for (const RawRule& rule : rules) {
    if (g.nonterminal_ids_.count(rule.lhs)) {
      throw GrammarError("duplicate definition of <" + rule.lhs + ">", rule.line, 1);
    }
    SymbolId id = static_cast<SymbolId>(g.symbols_.size());
    g.symbols_.push_back({rule.lhs, SymbolKind::kNonterminal});
    g.nonterminal_ids_.emplace(rule.lhs, id);
  }
  g.start_ = 0;
  g.by_lhs_.resize(g.symbols_.size());

  for (const RawRule& rule : rules) {
    SymbolId lhs = g.nonterminal_ids_.at(rule.lhs);
    for (const auto& alt : rule.alts) {
      Production p;
      p.index = static_cast<ProductionId>(g.productions_.size());
      p.lhs = lhs;
      for (const RawRef& ref : alt) {
        if (ref.terminal) {
          auto [it, inserted] =
              g.terminal_ids_.emplace(ref.text, static_cast<SymbolId>(g.symbols_.size()));
          if (inserted) g.symbols_.push_back({ref.text, SymbolKind::kTerminal});
          p.rhs.push_back(it->second);
        } else {
          auto it = g.nonterminal_ids_.find(ref.text);
          if (it == g.nonterminal_ids_.end()) {
            throw GrammarError("undefined nonterminal <" + ref.text + ">", ref.line, ref.column);
          }
          p.rhs.push_back(it->second);
        }
      }
      g.by_lhs_.resize(g.symbols_.size());
      g.by_lhs_[lhs].push_back(p.index);
      g.alt_index_.push_back(static_cast<int>(g.by_lhs_[lhs].size()) - 1);
      g.productions_.push_back(std::move(p));
    }
  }
  g.by_lhs_.resize(g.symbols_.size());

  // Least fixed point of min_steps(A) = min over A -> beta of 1 + sum min_steps(nt in beta).
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  g.min_steps_.assign(g.symbols_.size(), kInf);
  for (std::size_t i = 0; i < g.symbols_.size(); ++i) {
    if (g.symbols_[i].is_terminal()) g.min_steps_[i] = 0;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (const Production& p : g.productions_) {
      long cost = 1;
      for (SymbolId s : p.rhs) cost += g.min_steps_[s];
      if (cost < g.min_steps_[p.lhs]) {
        g.min_steps_[p.lhs] = static_cast<int>(cost);
        changed = true;
      }
    }
  }
  for (const auto& [name, id] : g.nonterminal_ids_) {
    if (g.min_steps_[id] >= kInf) {
      throw GrammarError("<" + name + "> derives no terminal string", 1, 1);
    }
  }
  return g;
}

Grammar load_grammar_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open grammar file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_grammar(buf.str());
}

}  // namespace sdgen
