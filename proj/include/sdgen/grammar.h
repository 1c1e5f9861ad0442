#ifndef SDGEN_GRAMMAR_H_
#define SDGEN_GRAMMAR_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sdgen {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed grammar file; carries the 1-based line and column of the fault.
class GrammarError : public Error {
 public:
  GrammarError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

using SymbolId = int32_t;
using ProductionId = int32_t;

enum class SymbolKind { kNonterminal, kTerminal };

struct Symbol {
  std::string name;  // nonterminal name, or the literal text of a terminal
  SymbolKind kind;

  bool is_terminal() const { return kind == SymbolKind::kTerminal; }
};

struct Production {
  ProductionId index;
  SymbolId lhs;
  std::vector<SymbolId> rhs;
};

/// An immutable context-free grammar. Production indices follow file order,
/// top to bottom and left to right across alternatives.
class Grammar {
 public:
  const std::vector<Symbol>& symbols() const { return symbols_; }
  const Symbol& symbol(SymbolId id) const { return symbols_.at(id); }
  const std::vector<Production>& productions() const { return productions_; }
  const Production& production(ProductionId id) const { return productions_.at(id); }
  std::size_t num_productions() const { return productions_.size(); }
  SymbolId start() const { return start_; }

  /// Production indices with the given lhs, in file order.
  const std::vector<ProductionId>& alternatives(SymbolId nonterminal) const;
  /// Position of `production` among the alternatives of its lhs.
  int alternative_index(ProductionId production) const { return alt_index_.at(production); }

  std::optional<SymbolId> find_nonterminal(std::string_view name) const;
  std::optional<SymbolId> find_terminal(std::string_view text) const;
  /// Like find_nonterminal but throws when the name is unknown.
  SymbolId nonterminal(std::string_view name) const;
  /// Index of `lhs -> alternative #alt`.
  ProductionId production_of(std::string_view lhs, int alt) const;

  /// Minimal number of production applications to fully expand `nonterminal`.
  int min_expansion_steps(SymbolId nonterminal) const { return min_steps_.at(nonterminal); }

  /// 64-bit FNV-1a of the source text; identifies the grammar in model files.
  uint64_t fingerprint() const { return fingerprint_; }

  std::string to_string(ProductionId production) const;

 private:
  friend Grammar load_grammar(std::string_view text);

  std::vector<Symbol> symbols_;
  std::vector<Production> productions_;
  std::vector<std::vector<ProductionId>> by_lhs_;
  std::vector<int> alt_index_;
  std::vector<int> min_steps_;
  std::unordered_map<std::string, SymbolId> nonterminal_ids_;
  std::unordered_map<std::string, SymbolId> terminal_ids_;
  SymbolId start_ = -1;
  uint64_t fingerprint_ = 0;
};

/// Parses the grammar-file format:
///
///     # comment
///     <lhs> -> <nt> 'terminal' | 'other'
///         | <continued alternative>
///
/// The first rule's lhs is the start symbol. Terminals are single-quoted with
/// `\\` and `\'` escapes.
Grammar load_grammar(std::string_view text);

Grammar load_grammar_file(const std::string& path);

uint64_t fnv1a64(std::string_view bytes);

}  // namespace sdgen

#endif  // SDGEN_GRAMMAR_H_
