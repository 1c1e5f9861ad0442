#include "sdgen/smiles.h"

#include <cctype>
#include <stdexcept>

namespace sdgen {

int max_valence(std::string_view element) {
  static const std::map<std::string, int, std::less<>> table = {
      {"B", 3}, {"C", 4}, {"N", 3}, {"O", 2}, {"P", 5},  {"S", 6},  {"F", 1},
      {"Cl", 1}, {"Br", 1}, {"I", 1}, {"c", 4}, {"n", 3}, {"o", 2}, {"s", 2}};
  auto it = table.find(element);
  return it == table.end() ? 0 : it->second;
}

int bond_order(std::string_view bond) {
  if (bond == "-" || bond == "/" || bond == "\\") return 1;
  if (bond == "=") return 2;
  if (bond == "#") return 3;
  throw Error("unknown bond '" + std::string(bond) + "'");
}

std::optional<RingLedger::Pair> RingLedger::visit(int digit, int atom,
                                                  std::optional<std::string> bond) {
  auto it = open_.find(digit);
  if (it == open_.end()) {
    open_[digit] = {atom, std::move(bond)};
    return std::nullopt;
  }
  Open first = it->second;
  open_.erase(it);
  if (first.bond && bond && *first.bond != *bond) {
    throw std::invalid_argument("ring " + std::to_string(digit) + " closes with bond '" + *bond +
                                "' but opened with '" + *first.bond + "'");
  }
  std::optional<std::string> b = first.bond ? first.bond : bond;
  Pair pair{digit, first.atom, atom, b ? bond_order(*b) : 1};
  closed_.push_back(pair);
  return pair;
}

namespace {

struct BracketAtom {
  std::string isotope;
  std::string symbol;
  bool aromatic = false;
  std::string chiral;
  bool has_h = false;
  int h_digit = 0;  // 0: none
  std::string charge_sign;
  int charge_digit = 0;
};

struct Atom {
  bool bracket = false;
  bool aromatic = false;
  std::string symbol;
  BracketAtom inner;
};

struct ChainAst;

struct BranchAst {
  std::string bond;
  std::unique_ptr<ChainAst> chain;
};

struct BranchedAtomAst {
  Atom atom;
  std::vector<int> rings;
  std::vector<BranchAst> branches;
};

struct ChainAst {
  std::vector<std::pair<std::string, BranchedAtomAst>> items;  // bond before each (empty first)
};

bool is_aliphatic(std::string_view s) {
  return s == "B" || s == "C" || s == "N" || s == "O" || s == "S" || s == "P" || s == "F" ||
         s == "I" || s == "Cl" || s == "Br";
}

bool is_aromatic(std::string_view s) { return s == "c" || s == "n" || s == "o" || s == "s"; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ChainAst parse() {
    if (text_.empty()) throw SyntaxError("empty SMILES", 0);
    ChainAst chain = parse_chain();
    if (pos_ != text_.size()) fail("unexpected character");
    return chain;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::string msg = what;
    if (pos_ < text_.size()) msg += " '" + std::string(1, text_[pos_]) + "'";
    throw SyntaxError(msg, pos_);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  static bool is_bond(char c) { return c == '-' || c == '=' || c == '#' || c == '/' || c == '\\'; }

  ChainAst parse_chain() {
    ChainAst chain;
    chain.items.emplace_back("", parse_branched_atom());
    while (true) {
      char c = peek();
      std::string bond;
      if (is_bond(c)) {
        bond = std::string(1, c);
        ++pos_;
      } else if (!starts_atom(c)) {
        break;
      }
      chain.items.emplace_back(bond, parse_branched_atom());
    }
    return chain;
  }

  static bool starts_atom(char c) {
    return c == '[' || c == 'B' || c == 'C' || c == 'N' || c == 'O' || c == 'S' || c == 'P' ||
           c == 'F' || c == 'I' || c == 'c' || c == 'n' || c == 'o' || c == 's';
  }

  BranchedAtomAst parse_branched_atom() {
    BranchedAtomAst ba;
    ba.atom = parse_atom();
    while (peek() >= '0' && peek() <= '9') ba.rings.push_back(digit());
    while (peek() == '(') {
      ++pos_;
      BranchAst br;
      if (is_bond(peek())) br.bond = std::string(1, text_[pos_++]);
      br.chain = std::make_unique<ChainAst>(parse_chain());
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      ba.branches.push_back(std::move(br));
    }
    return ba;
  }

  int digit() {
    char c = peek();
    if (c < '1' || c > '8') fail("ring and count digits must be 1-8, got");
    ++pos_;
    return c - '0';
  }

  std::string organic(bool* aromatic) {
    if (pos_ + 1 < text_.size()) {
      std::string_view two = text_.substr(pos_, 2);
      if (two == "Cl" || two == "Br") {
        pos_ += 2;
        *aromatic = false;
        return std::string(two);
      }
    }
    std::string one(1, peek());
    if (is_aliphatic(one)) {
      *aromatic = false;
    } else if (is_aromatic(one)) {
      *aromatic = true;
    } else {
      fail("expected an atom symbol, got");
    }
    ++pos_;
    return one;
  }

  Atom parse_atom() {
    Atom a;
    if (peek() == '[') {
      a.bracket = true;
      ++pos_;
      BracketAtom& b = a.inner;
      while (peek() >= '0' && peek() <= '9') {
        if (b.isotope.size() == 3) fail("isotope longer than 3 digits at");
        b.isotope += static_cast<char>('0' + digit());
      }
      b.symbol = organic(&b.aromatic);
      if (peek() == '@') {
        ++pos_;
        b.chiral = "@";
        if (peek() == '@') {
          ++pos_;
          b.chiral = "@@";
        }
      }
      if (peek() == 'H') {
        ++pos_;
        b.has_h = true;
        if (peek() >= '0' && peek() <= '9') b.h_digit = digit();
      }
      if (peek() == '+' || peek() == '-') {
        b.charge_sign = std::string(1, text_[pos_++]);
        if (peek() >= '0' && peek() <= '9') b.charge_digit = digit();
      }
      if (peek() != ']') fail("expected ']'");
      ++pos_;
      a.symbol = b.symbol;
      a.aromatic = b.aromatic;
      return a;
    }
    a.symbol = organic(&a.aromatic);
    return a;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Pre-order rule sequence of the parsed structure.
class Emitter {
 public:
  explicit Emitter(const Grammar& g) : g_(g) {}

  std::vector<ProductionId> run(const ChainAst& chain) {
    out_.push_back(g_.production_of("smiles", 0));
    chain_prefix(chain, chain.items.size());
    return std::move(out_);
  }

 private:
  void rule(std::string_view lhs, int alt) { out_.push_back(g_.production_of(lhs, alt)); }

  void terminal(std::string_view lhs, std::string_view text) {
    SymbolId nt = g_.nonterminal(lhs);
    for (ProductionId p : g_.alternatives(nt)) {
      const Production& prod = g_.production(p);
      if (prod.rhs.size() == 1 && g_.symbol(prod.rhs[0]).name == text) {
        out_.push_back(p);
        return;
      }
    }
    throw Error("no <" + std::string(lhs) + "> alternative for '" + std::string(text) + "'");
  }

  void digit(int d) { terminal("digit", std::to_string(d)); }

  // First n items of a chain; left recursive.
  void chain_prefix(const ChainAst& chain, std::size_t n) {
    const auto& [bond, ba] = chain.items[n - 1];
    if (n == 1) {
      rule("chain", 0);
    } else {
      rule("chain", bond.empty() ? 1 : 2);
      chain_prefix(chain, n - 1);
      if (!bond.empty()) terminal("bond", bond);
    }
    branched_atom(ba);
  }

  void branched_atom(const BranchedAtomAst& ba) {
    bool rings = !ba.rings.empty();
    bool branches = !ba.branches.empty();
    rule("branched_atom", rings ? (branches ? 3 : 2) : (branches ? 1 : 0));
    atom(ba.atom);
    if (rings) ringbonds(ba.rings, ba.rings.size());
    if (branches) this->branches(ba.branches, ba.branches.size());
  }

  void ringbonds(const std::vector<int>& rings, std::size_t n) {
    rule("ringbonds", n == 1 ? 1 : 0);
    if (n > 1) ringbonds(rings, n - 1);
    rule("ringbond", 0);
    digit(rings[n - 1]);
  }

  void branches(const std::vector<BranchAst>& list, std::size_t n) {
    rule("branches", n == 1 ? 1 : 0);
    if (n > 1) branches(list, n - 1);
    const BranchAst& br = list[n - 1];
    rule("branch", br.bond.empty() ? 0 : 1);
    if (!br.bond.empty()) terminal("bond", br.bond);
    chain_prefix(*br.chain, br.chain->items.size());
  }

  void symbol(const std::string& s, bool aromatic) {
    terminal(aromatic ? "aromatic_organic" : "aliphatic_organic", s);
  }

  void atom(const Atom& a) {
    if (!a.bracket) {
      rule("atom", a.aromatic ? 2 : 1);
      symbol(a.symbol, a.aromatic);
      return;
    }
    rule("atom", 0);
    rule("bracket_atom", 0);
    const BracketAtom& b = a.inner;
    bool iso = !b.isotope.empty();
    bool chiral = !b.chiral.empty();
    bool charge = !b.charge_sign.empty();
    bool tail = chiral || b.has_h || charge;
    rule("bracket_atom_isotope", iso ? (tail ? 0 : 2) : (tail ? 1 : 3));
    if (iso) {
      rule("isotope", static_cast<int>(b.isotope.size()) - 1);
      for (char c : b.isotope) digit(c - '0');
    }
    rule("symbol", b.aromatic ? 1 : 0);
    symbol(b.symbol, b.aromatic);
    if (!tail) return;
    bool hc = b.has_h || charge;
    rule("bracket_atom_chiral", chiral ? (hc ? 0 : 2) : 1);
    if (chiral) terminal("chiral", b.chiral);
    if (!hc) return;
    rule("bracket_atom_hcount", b.has_h ? (charge ? 0 : 2) : 1);
    if (b.has_h) {
      rule("hcount", b.h_digit ? 1 : 0);
      if (b.h_digit) digit(b.h_digit);
    }
    if (charge) {
      rule("bracket_atom_charge", 0);
      int alt = (b.charge_sign == "-" ? 0 : 2) + (b.charge_digit ? 1 : 0);
      rule("charge", alt);
      if (b.charge_digit) digit(b.charge_digit);
    }
  }

  const Grammar& g_;
  std::vector<ProductionId> out_;
};

}  // namespace

DerivationTree parse_smiles(std::shared_ptr<const Grammar> grammar, std::string_view text) {
  ChainAst chain = Parser(text).parse();
  std::vector<ProductionId> seq = Emitter(*grammar).run(chain);
  return rule_sequence_to_tree(std::move(grammar), seq);
}

CheckReport check_smiles(const DerivationTree& tree) {
  CheckReport report;
  std::vector<NodeId> atom_nodes;
  SymbolId ba_symbol = tree.grammar().nonterminal("branched_atom");
  for (NodeId n : tree.preorder()) {
    if (tree.node(n).symbol == ba_symbol) atom_nodes.push_back(n);
  }

  struct AtomState {
    std::string symbol;
    int capacity = 0;
    int load = 0;
    uint32_t digits = 0;  // ring digits written on this atom
  };
  std::vector<AtomState> atoms;
  auto node_of = [&](int atom) {
    return atom < static_cast<int>(atom_nodes.size()) ? atom_nodes[atom] : kNoNode;
  };
  auto where = [&](int atom) {
    return "atom " + std::to_string(atom + 1) + " (" + atoms[atom].symbol + ")";
  };

  std::string s = yield_string(tree);
  RingLedger ledger;
  std::vector<int> branch_stack;
  int prev = -1;
  int pending = 1;
  std::size_t i = 0;
  auto add_atom = [&](std::string symbol, int extra_capacity, int h) {
    int id = static_cast<int>(atoms.size());
    atoms.push_back({symbol, max_valence(symbol) + extra_capacity, h, 0});
    if (prev >= 0) {
      atoms[prev].load += pending;
      atoms[id].load += pending;
    }
    pending = 1;
    prev = id;
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '[') {
      std::size_t close = s.find(']', i);
      std::string body = s.substr(i + 1, close - i - 1);
      std::size_t k = 0;
      while (k < body.size() && std::isdigit(static_cast<unsigned char>(body[k]))) ++k;
      bool two = body.compare(k, 2, "Cl") == 0 || body.compare(k, 2, "Br") == 0;
      std::string symbol = body.substr(k, two ? 2 : 1);
      k += symbol.size();
      while (k < body.size() && body[k] == '@') ++k;
      int h = 0;
      if (k < body.size() && body[k] == 'H') {
        h = 1;
        ++k;
        if (k < body.size() && std::isdigit(static_cast<unsigned char>(body[k]))) h = body[k++] - '0';
      }
      int charge = 0;
      if (k < body.size() && (body[k] == '+' || body[k] == '-')) {
        charge = 1;
        ++k;
        if (k < body.size() && std::isdigit(static_cast<unsigned char>(body[k]))) charge = body[k++] - '0';
      }
      add_atom(symbol, charge, h);
      i = close + 1;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string symbol(1, c);
      if (i + 1 < s.size() && ((c == 'C' && s[i + 1] == 'l') || (c == 'B' && s[i + 1] == 'r'))) {
        symbol += s[i + 1];
      }
      add_atom(symbol, 0, 0);
      i += symbol.size();
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      int digit = c - '0';
      uint32_t bit = 1u << digit;
      if (atoms[prev].digits & bit) {
        report.add("ring-self", where(prev) + ", digit " + std::to_string(digit), node_of(prev));
      }
      atoms[prev].digits |= bit;
      auto pair = ledger.visit(digit, prev);
      if (pair && pair->first_atom != pair->second_atom) {
        atoms[pair->first_atom].load += pair->order;
        atoms[pair->second_atom].load += pair->order;
      }
      ++i;
    } else if (c == '(') {
      branch_stack.push_back(prev);
      ++i;
    } else if (c == ')') {
      prev = branch_stack.back();
      branch_stack.pop_back();
      ++i;
    } else {
      pending = bond_order(std::string_view(&s[i], 1));
      ++i;
    }
  }
  for (const auto& [digit, open] : ledger.open()) {
    report.add("ring-unmatched", where(open.atom) + ", digit " + std::to_string(digit),
               node_of(open.atom));
  }
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    if (atoms[a].load > atoms[a].capacity) {
      report.add("valence",
                 where(static_cast<int>(a)) + ": bond order " + std::to_string(atoms[a].load) +
                     " > " + std::to_string(atoms[a].capacity),
                 node_of(static_cast<int>(a)));
    }
  }
  return report;
}

}  // namespace sdgen
