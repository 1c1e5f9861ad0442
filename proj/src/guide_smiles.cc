// SMILES masks.
//
// The guide mirrors the frontier as a stack of items (rightmost at the
// bottom). Each item has a cost vector f[r]: the fewest production steps that
// finish it while closing exactly r of the currently open rings (INF when it
// cannot). Min-plus convolution of all items, read at r = #open rings, is the
// cost of the cheapest valid completion; a choice is allowed iff that stays
// finite (and within T in strict mode). Suffix convolutions are cached so a
// mask only recombines the top one or two items.
//
// Valence: every atom keeps a record of its load (incoming bond, ring digits,
// reserved successor and branch bonds, explicit H) against its capacity
// (element maximum plus |charge|). Bonds whose order is still open are
// reserved at order 1 and widened when the bond token is chosen.

#include <algorithm>
#include <bit>

#include "sdgen/guide.h"
#include "sdgen/schemas.h"
#include "sdgen/smiles.h"

namespace sdgen {

namespace {

constexpr int kInf = 1 << 28;
constexpr int kR = kRingDigits + 1;  // rings closed: 0..8
constexpr int kMaxBranches = 14;     // S with charge 8 and nothing else
constexpr int kBestSymbol = 6;       // S
constexpr int kSatisfied = -1000;    // deficit once the capacity path is decided

using Costs = std::array<int, kR>;

int add(int a, int b) { return (a >= kInf || b >= kInf) ? kInf : std::min(kInf, a + b); }

Costs unit() {
  Costs c;
  c.fill(kInf);
  c[0] = 0;
  return c;
}

Costs only_zero(int cost) {
  Costs c;
  c.fill(kInf);
  c[0] = cost;
  return c;
}

Costs conv(const Costs& a, const Costs& b) {
  Costs out;
  out.fill(kInf);
  for (int i = 0; i < kR; ++i) {
    if (a[i] >= kInf) continue;
    for (int j = 0; i + j < kR; ++j) out[i + j] = std::min(out[i + j], add(a[i], b[j]));
  }
  return out;
}

// Cheapest way to finish a capacity-raising part of an atom given deficit d
// (load minus capacity so far). Charges add 1 ('+', '-') or 1..8 (with digit);
// an explicit H adds one to the load.
int charge_cost(int d) { return d <= 1 ? 1 : d <= 8 ? 2 : kInf; }
int bacharge_cost(int d) { return add(1, charge_cost(d)); }
int bah_cost(int d) {
  return std::min({add(2, bacharge_cost(d + 1)), add(1, bacharge_cost(d)), d + 1 <= 0 ? 2 : kInf});
}
int bac_cost(int d) { return std::min({add(2, bah_cost(d)), add(1, bah_cost(d)), d <= 0 ? 2 : kInf}); }
int bai_cost(int d) {
  int plain = d <= kBestSymbol ? 0 : kInf;
  int with_bac = bac_cost(d - kBestSymbol);
  return add(1, std::min({add(4, with_bac), add(2, with_bac), add(4, plain), add(2, plain)}));
}
int bracket_cost(int d) { return add(1, bai_cost(d)); }
int atom_cost(int n) {
  return add(1, std::min({bracket_cost(n), n <= kBestSymbol ? 1 : kInf, n <= 4 ? 1 : kInf}));
}

struct Tables {
  Costs chain[4][2];
  Costs ba[4][2];
  Costs bak[4][2][kR];  // [p][s][k] -> rings closed by the branches
  Costs branch;
  std::array<Costs, kMaxBranches + 2> branches;  // [m], m >= 1

  Tables() {
    for (auto& row : chain) row[0].fill(kInf), row[1].fill(kInf);
    for (int iter = 0; iter < 1000; ++iter) {
      for (int r = 0; r < kR; ++r) branch[r] = add(1, chain[1][0][r]);
      branches[0].fill(kInf);
      for (int r = 0; r < kR; ++r) branches[1][r] = add(1, branch[r]);
      for (int m = 2; m <= kMaxBranches + 1; ++m) {
        Costs c = conv(branches[m - 1], branch);
        for (int r = 0; r < kR; ++r) branches[m][r] = add(1, c[r]);
      }
      for (int p = 0; p < 4; ++p) {
        for (int s = 0; s < 2; ++s) {
          for (int k = 0; k < kR; ++k) {
            Costs& out = bak[p][s][k];
            out.fill(kInf);
            int rb_cost = 3 * k;
            int base = p + s + k;
            out[0] = add(atom_cost(base), rb_cost);
            for (int m = 1; m <= kMaxBranches; ++m) {
              int a = add(atom_cost(base + m), rb_cost);
              if (a >= kInf) break;
              for (int r = 0; r < kR; ++r) out[r] = std::min(out[r], add(a, branches[m][r]));
            }
            for (int r = 0; r < kR; ++r) out[r] = add(1, out[r]);
          }
          for (int r = 0; r < kR; ++r) {
            int best = kInf;
            for (int k = 0; k <= r; ++k) best = std::min(best, bak[p][s][k][r - k]);
            ba[p][s][r] = best;
          }
        }
      }
      bool changed = false;
      for (int p = 0; p < 4; ++p) {
        for (int s = 0; s < 2; ++s) {
          Costs ext = conv(chain[p][1], ba[1][s]);
          for (int r = 0; r < kR; ++r) {
            int v = add(1, std::min(ba[p][s][r], ext[r]));
            if (v != chain[p][s][r]) {
              chain[p][s][r] = v;
              changed = true;
            }
          }
        }
      }
      if (!changed) return;
    }
    throw Error("SMILES cost tables did not converge");
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

struct Record {
  int p = 0, s = 0, k = 0, mb = 0, h = 0, extra = 0;
  int base = 0, charge = 0;

  int load() const { return p + s + k + mb + h + extra; }
  int cap() const { return base + charge; }
  int slack() const { return cap() - load(); }
};

// Frontier nodes inside the atom currently being generated.
enum class E : uint8_t {
  kBAAlt,       // <branched_atom> after its lazy draw
  kAtom,
  kAliph,
  kArom,
  kBracketAtom,
  kBai,
  kIsotope,
  kFreeDigit,   // isotope digit
  kSymbol,
  kBac,
  kChiral,
  kBah,
  kHcount,
  kHDigit,
  kBacharge,
  kCharge,
  kChargeDigit,
  kRingbonds,
  kRingbond,
  kRingDigit,
  kBranches,
};

struct Entry {
  E e;
  int k = 0;  // digits still owed by a kRingbonds entry
};

struct Group {
  int record = -1;
  uint32_t sa = 0;
  uint32_t emitted = 0;
  std::vector<Entry> entries;  // back = leftmost frontier node
};

enum class K : uint8_t { kRoot, kChain, kBA, kBond, kBranch, kGroup };

struct Item {
  K kind;
  int p = 0;
  int s = 0;
};

struct SmilesSymbols {
  SymbolId smiles, chain, branched_atom, bond, branch, branches, atom, aliph, arom, bracket_atom,
      bai, isotope, digit, symbol, bac, chiral, bah, hcount, bacharge, charge, ringbonds,
      ringbond;
  std::vector<int> aliph_valence, arom_valence, bond_order, digit_value;
};

int fixed_cost(const Entry& en) {
  switch (en.e) {
    case E::kIsotope: return 2;
    case E::kFreeDigit:
    case E::kChiral:
    case E::kHcount:
    case E::kHDigit:
    case E::kRingDigit: return 1;
    case E::kRingbonds: return 3 * en.k;
    case E::kRingbond: return 2;
    default: return 0;
  }
}

/// Steps to finish the atom part of a group whose load exceeds its capacity
/// by d (d <= 0: already fits).
int path_cost(const Group& g, int d) {
  int acc = 0;
  for (auto it = g.entries.rbegin(); it != g.entries.rend(); ++it) {
    switch (it->e) {
      case E::kAliph: acc = add(acc, 1); d -= kBestSymbol; break;
      case E::kArom: acc = add(acc, 1); d -= 4; break;
      case E::kSymbol: acc = add(acc, 2); d -= kBestSymbol; break;
      case E::kAtom: acc = add(acc, atom_cost(d)); d = kSatisfied; break;
      case E::kBracketAtom: acc = add(acc, bracket_cost(d)); d = kSatisfied; break;
      case E::kBai: acc = add(acc, bai_cost(d)); d = kSatisfied; break;
      case E::kBac: acc = add(acc, bac_cost(d)); d = kSatisfied; break;
      case E::kBah: acc = add(acc, bah_cost(d)); d = kSatisfied; break;
      case E::kBacharge: acc = add(acc, bacharge_cost(d)); d = kSatisfied; break;
      case E::kCharge: acc = add(acc, charge_cost(d)); d = kSatisfied; break;
      case E::kChargeDigit: acc = add(acc, d <= 8 ? 1 : kInf); d = kSatisfied; break;
      default: acc = add(acc, fixed_cost(*it)); break;
    }
  }
  return d > 0 ? kInf : acc;
}

Costs group_costs(const Group& g, const Record& rec) {
  const Tables& t = tables();
  if (g.entries.size() == 1 && g.entries.back().e == E::kBAAlt) return t.bak[rec.p][rec.s][rec.k];
  int d0 = rec.load() - rec.cap();
  bool branches = std::any_of(g.entries.begin(), g.entries.end(),
                              [](const Entry& e) { return e.e == E::kBranches; });
  if (!branches) return only_zero(path_cost(g, d0));
  Costs out;
  out.fill(kInf);
  for (int e = 0; e + 1 <= kMaxBranches; ++e) {
    int c = path_cost(g, d0 + e);
    if (c >= kInf) break;
    for (int r = 0; r < kR; ++r) out[r] = std::min(out[r], add(c, t.branches[1 + e][r]));
  }
  return out;
}

struct GroupStep {
  bool ok = true;
  bool push_branch = false;
};

/// Applies alternative `alt` of the group's leftmost node. Structural and
/// ring-digit constraints are checked here; feasibility by the caller.
GroupStep group_apply(Group& g, Record& rec, int alt, const SmilesSymbols& sym) {
  GroupStep st;
  Entry top = g.entries.back();
  g.entries.pop_back();
  auto push = [&](std::initializer_list<Entry> leftmost_first) {
    for (auto it = std::rbegin(leftmost_first); it != std::rend(leftmost_first); ++it) {
      g.entries.push_back(*it);
    }
  };
  switch (top.e) {
    case E::kBAAlt: {
      bool rings = alt == 2 || alt == 3;
      bool branches = alt == 1 || alt == 3;
      if (rings != (rec.k > 0)) st.ok = false;
      if (branches) g.entries.push_back({E::kBranches});
      if (rings) g.entries.push_back({E::kRingbonds, rec.k});
      g.entries.push_back({E::kAtom});
      if (branches) rec.mb = 1;
      break;
    }
    case E::kAtom:
      push({{alt == 0 ? E::kBracketAtom : alt == 1 ? E::kAliph : E::kArom}});
      break;
    case E::kAliph:
      rec.base = sym.aliph_valence.at(alt);
      break;
    case E::kArom:
      rec.base = sym.arom_valence.at(alt);
      break;
    case E::kBracketAtom:
      push({{E::kBai}});
      break;
    case E::kBai:
      switch (alt) {
        case 0: push({{E::kIsotope}, {E::kSymbol}, {E::kBac}}); break;
        case 1: push({{E::kSymbol}, {E::kBac}}); break;
        case 2: push({{E::kIsotope}, {E::kSymbol}}); break;
        default: push({{E::kSymbol}}); break;
      }
      break;
    case E::kIsotope:
      for (int i = 0; i <= alt; ++i) g.entries.push_back({E::kFreeDigit});
      break;
    case E::kFreeDigit:
    case E::kChiral:
      break;
    case E::kSymbol:
      push({{alt == 0 ? E::kAliph : E::kArom}});
      break;
    case E::kBac:
      switch (alt) {
        case 0: push({{E::kChiral}, {E::kBah}}); break;
        case 1: push({{E::kBah}}); break;
        default: push({{E::kChiral}}); break;
      }
      break;
    case E::kBah:
      switch (alt) {
        case 0: push({{E::kHcount}, {E::kBacharge}}); rec.h += 1; break;
        case 1: push({{E::kBacharge}}); break;
        default: push({{E::kHcount}}); rec.h += 1; break;
      }
      break;
    case E::kHcount:
      if (alt == 1) push({{E::kHDigit}});
      break;
    case E::kHDigit:
      rec.h += sym.digit_value.at(alt) - 1;
      break;
    case E::kBacharge:
      push({{E::kCharge}});
      break;
    case E::kCharge:
      if (alt == 0 || alt == 2) {
        rec.charge += 1;
      } else {
        push({{E::kChargeDigit}});
      }
      break;
    case E::kChargeDigit:
      rec.charge += sym.digit_value.at(alt);
      break;
    case E::kRingbonds:
      if (alt == 0) {
        if (top.k < 2) st.ok = false;
        push({{E::kRingbonds, top.k - 1}, {E::kRingbond}});
      } else {
        if (top.k != 1) st.ok = false;
        push({{E::kRingbond}});
      }
      break;
    case E::kRingbond:
      push({{E::kRingDigit}});
      break;
    case E::kRingDigit: {
      uint32_t bit = 1u << (sym.digit_value.at(alt) - 1);
      if (!(g.sa & bit) || (g.emitted & bit)) st.ok = false;
      g.emitted |= bit;
      break;
    }
    case E::kBranches:
      st.push_branch = true;
      if (alt == 0) {
        rec.mb += 1;
        g.entries.push_back({E::kBranches});
      }
      break;
  }
  return st;
}

SymbolId entry_symbol(E e, const SmilesSymbols& s) {
  switch (e) {
    case E::kBAAlt: return s.branched_atom;
    case E::kAtom: return s.atom;
    case E::kAliph: return s.aliph;
    case E::kArom: return s.arom;
    case E::kBracketAtom: return s.bracket_atom;
    case E::kBai: return s.bai;
    case E::kIsotope: return s.isotope;
    case E::kFreeDigit:
    case E::kHDigit:
    case E::kChargeDigit:
    case E::kRingDigit: return s.digit;
    case E::kSymbol: return s.symbol;
    case E::kBac: return s.bac;
    case E::kChiral: return s.chiral;
    case E::kBah: return s.bah;
    case E::kHcount: return s.hcount;
    case E::kBacharge: return s.bacharge;
    case E::kCharge: return s.charge;
    case E::kRingbonds: return s.ringbonds;
    case E::kRingbond: return s.ringbond;
    case E::kBranches: return s.branches;
  }
  return -1;
}

class SmilesGuide : public Guide {
 public:
  SmilesGuide(const AttributeSchema& schema, const SmilesSymbols& sym)
      : schema_(schema), sym_(sym), t_(tables()) {
    push({K::kRoot});
  }

  Mask mask(const DerivationTree& tree, NodeId node, const Budget& budget) override {
    const Grammar& g = tree.grammar();
    SymbolId symbol = tree.node(node).symbol;
    expect(symbol, node);
    int n_alts = static_cast<int>(g.alternatives(symbol).size());
    Mask m(n_alts, 0);
    const Item top = stack_.back();
    int below = static_cast<int>(stack_.size()) - 1;  // items [0, below) untouched
    for (int alt = 0; alt < n_alts; ++alt) {
      int total = kInf;
      switch (top.kind) {
        case K::kRoot:
          total = eval(below, {t_.chain[0][0]});
          break;
        case K::kChain:
          if (alt == 0) {
            total = eval(below, {t_.ba[top.p][top.s]});
          } else if (alt == 1) {
            total = eval(below, {t_.ba[1][top.s], t_.chain[top.p][1]});
          } else {
            total = eval(below, {t_.ba[1][top.s], only_zero(1), t_.chain[top.p][1]});
          }
          break;
        case K::kBond: {
          int order = sym_.bond_order.at(alt);
          const Record& left = records_.at(left_atom(tree, node));
          if (order - 1 > left.slack()) break;
          Item next = stack_.at(below - 1);
          next.p = order;
          total = eval(below - 1, {costs_of(next)});
          break;
        }
        case K::kBranch:
          if (alt == 0) {
            total = eval(below, {t_.chain[1][0]});
          } else {
            total = eval(below, {t_.chain[1][0], only_zero(1)});
          }
          break;
        case K::kGroup: {
          Group g2 = group_;
          Record r2 = records_[group_.record];
          GroupStep st = group_apply(g2, r2, alt, sym_);
          if (!st.ok) break;
          Costs gc = group_costs(g2, r2);
          if (st.push_branch) {
            total = eval(below, {t_.branch, gc});
          } else {
            total = eval(below, {gc});
          }
          break;
        }
        case K::kBA:
          throw Error("internal: <branched_atom> expanded before its lazy draw");
      }
      m[alt] = fits(total, budget, 1);
    }
    return m;
  }

  void apply(const DerivationTree& tree, NodeId node, int alt) override {
    Item top = stack_.back();
    switch (top.kind) {
      case K::kRoot:
        pop();
        push({K::kChain, 0, 0});
        break;
      case K::kChain:
        pop();
        if (alt == 0) {
          push({K::kBA, top.p, top.s});
        } else if (alt == 1) {
          push({K::kBA, 1, top.s});
          push({K::kChain, top.p, 1});
        } else {
          push({K::kBA, 1, top.s});
          push({K::kBond});
          push({K::kChain, top.p, 1});
        }
        break;
      case K::kBond: {
        int order = sym_.bond_order.at(alt);
        records_.at(left_atom(tree, node)).extra += order - 1;
        pop();
        Item next = stack_.back();
        pop();
        next.p = order;
        push(next);
        break;
      }
      case K::kBranch:
        pop();
        if (alt == 0) {
          push({K::kChain, 1, 0});
        } else {
          push({K::kChain, 1, 0});
          push({K::kBond});
        }
        break;
      case K::kGroup: {
        GroupStep st = group_apply(group_, records_[group_.record], alt, sym_);
        if (!st.ok) throw Error("internal: masked SMILES choice applied");
        pop();
        if (st.push_branch) push({K::kBranch});
        if (!group_.entries.empty()) push({K::kGroup});
        break;
      }
      case K::kBA:
        throw Error("internal: <branched_atom> expanded before its lazy draw");
    }
  }

  std::array<bool, 2> allowed_lazy_bit(const DerivationTree& tree, NodeId node,
                                       const AttributeDecl&, int bit, BitSet prefix,
                                       const Budget& budget) override {
    expect(tree.node(node).symbol, node);
    const Item top = stack_.back();
    int below = static_cast<int>(stack_.size()) - 1;
    const Costs& rest = below > 0 ? suf_[below - 1] : unit_;
    uint32_t all = (1u << kRingDigits) - 1u;
    uint32_t free_bits = all & ~((2u << bit) - 1u);
    std::array<bool, 2> out{false, false};
    for (int v = 0; v < 2; ++v) {
      uint32_t fixed = (prefix.bits & ((1u << bit) - 1u)) | (static_cast<uint32_t>(v) << bit);
      int closes = std::popcount(fixed & open_);
      int opens = std::popcount(fixed & ~open_);
      int k0 = std::popcount(fixed);
      int more = std::popcount(free_bits & open_);
      int best = kInf;
      for (int x = 0; x <= more; ++x) {
        int R = std::popcount(open_) - closes - x + opens;
        const Costs& f = t_.bak[top.p][top.s][k0 + x];
        for (int r = 0; r <= R; ++r) best = std::min(best, add(f[r], rest[R - r]));
      }
      out[v] = fits(best, budget, 0);
    }
    return out;
  }

  void commit_lazy(const DerivationTree&, NodeId node, const AttributeDecl&,
                   BitSet value) override {
    Item top = stack_.back();
    open_ ^= value.bits;
    Record rec;
    rec.p = top.p;
    rec.s = top.s;
    rec.k = std::popcount(value.bits);
    records_.push_back(rec);
    int id = static_cast<int>(records_.size()) - 1;
    if (static_cast<std::size_t>(node) >= record_of_.size()) record_of_.resize(node + 1, -1);
    record_of_[node] = id;
    group_ = Group{id, value.bits, 0, {{E::kBAAlt}}};
    pop();
    push({K::kGroup});
  }

  void complete(DerivationTree& tree, NodeId node) override {
    if (tree.node(node).symbol != sym_.branched_atom) return;
    uint32_t bits = 0;
    const auto& kids = tree.node(node).children;
    if (kids.size() >= 2 && tree.node(kids[1]).symbol == sym_.ringbonds) {
      std::vector<NodeId> todo{kids[1]};
      while (!todo.empty()) {
        NodeId n = todo.back();
        todo.pop_back();
        const TreeNode& tn = tree.node(n);
        if (tn.symbol == sym_.digit) {
          bits |= 1u << (tree.symbol_of(tn.children[0]).name[0] - '1');
          continue;
        }
        for (NodeId c : tn.children) todo.push_back(c);
      }
    }
    lazy_link(schema_, tree, node, "sa", "ring_set",
              AttributeValue::bits(BitSet{bits, kRingDigits}));
  }

 private:
  Costs costs_of(const Item& it) const {
    switch (it.kind) {
      case K::kRoot: {
        Costs c = t_.chain[0][0];
        for (int& v : c) v = add(v, 1);
        return c;
      }
      case K::kChain: return t_.chain[it.p][it.s];
      case K::kBA: return t_.ba[it.p][it.s];
      case K::kBond: return only_zero(1);
      case K::kBranch: return t_.branch;
      case K::kGroup: return group_costs(group_, records_[group_.record]);
    }
    return unit_;
  }

  void push(Item it) {
    Costs c = costs_of(it);
    suf_.push_back(suf_.empty() ? c : conv(c, suf_.back()));
    stack_.push_back(it);
  }

  void pop() {
    stack_.pop_back();
    suf_.pop_back();
  }

  /// Cost of finishing everything: items [0, keep) unchanged, then `added`
  /// from bottom (rightmost) to top.
  int eval(int keep, std::initializer_list<Costs> added) const {
    Costs acc = keep > 0 ? suf_[keep - 1] : unit_;
    for (const Costs& c : added) acc = conv(c, acc);
    return acc[std::popcount(open_)];
  }

  static bool fits(int total, const Budget& budget, int step) {
    if (total >= kInf) return false;
    return !budget.strict || budget.used + step + total <= budget.limit;
  }

  void expect(SymbolId symbol, NodeId node) const {
    if (stack_.empty()) throw Error("internal: SMILES guide has no pending item");
    const Item& top = stack_.back();
    SymbolId want = -1;
    switch (top.kind) {
      case K::kRoot: want = sym_.smiles; break;
      case K::kChain: want = sym_.chain; break;
      case K::kBA: want = sym_.branched_atom; break;
      case K::kBond: want = sym_.bond; break;
      case K::kBranch: want = sym_.branch; break;
      case K::kGroup: want = entry_symbol(group_.entries.back().e, sym_); break;
    }
    if (want != symbol) {
      throw Error("internal: SMILES guide out of step at node " + std::to_string(node));
    }
  }

  /// Atom on the left of a bond: the last atom of the preceding chain, or the
  /// atom that owns the branch.
  int left_atom(const DerivationTree& tree, NodeId bond) const {
    NodeId parent = tree.node(bond).parent;
    NodeId ba;
    if (tree.node(parent).symbol == sym_.chain) {
      NodeId inner = tree.node(parent).children[0];
      ba = tree.node(inner).children.back();
    } else {
      ba = parent;
      while (tree.node(ba).symbol != sym_.branched_atom) ba = tree.node(ba).parent;
    }
    return record_of_.at(ba);
  }

  const AttributeSchema& schema_;
  const SmilesSymbols& sym_;
  const Tables& t_;
  const Costs unit_ = unit();
  std::vector<Item> stack_;
  std::vector<Costs> suf_;
  std::vector<Record> records_;
  std::vector<int> record_of_;
  Group group_;
  uint32_t open_ = 0;
};

class SmilesGuideFactory : public GuideFactory {
 public:
  explicit SmilesGuideFactory(std::shared_ptr<const AttributeSchema> schema)
      : schema_(std::move(schema)) {
    const Grammar& g = schema_->grammar();
    SmilesSymbols& s = sym_;
    s.smiles = g.nonterminal("smiles");
    s.chain = g.nonterminal("chain");
    s.branched_atom = g.nonterminal("branched_atom");
    s.bond = g.nonterminal("bond");
    s.branch = g.nonterminal("branch");
    s.branches = g.nonterminal("branches");
    s.atom = g.nonterminal("atom");
    s.aliph = g.nonterminal("aliphatic_organic");
    s.arom = g.nonterminal("aromatic_organic");
    s.bracket_atom = g.nonterminal("bracket_atom");
    s.bai = g.nonterminal("bracket_atom_isotope");
    s.isotope = g.nonterminal("isotope");
    s.digit = g.nonterminal("digit");
    s.symbol = g.nonterminal("symbol");
    s.bac = g.nonterminal("bracket_atom_chiral");
    s.chiral = g.nonterminal("chiral");
    s.bah = g.nonterminal("bracket_atom_hcount");
    s.hcount = g.nonterminal("hcount");
    s.bacharge = g.nonterminal("bracket_atom_charge");
    s.charge = g.nonterminal("charge");
    s.ringbonds = g.nonterminal("ringbonds");
    s.ringbond = g.nonterminal("ringbond");
    auto terminal_text = [&](ProductionId p) { return g.symbol(g.production(p).rhs.at(0)).name; };
    for (ProductionId p : g.alternatives(s.aliph)) {
      s.aliph_valence.push_back(max_valence(terminal_text(p)));
    }
    for (ProductionId p : g.alternatives(s.arom)) {
      s.arom_valence.push_back(max_valence(terminal_text(p)));
    }
    for (ProductionId p : g.alternatives(s.bond)) s.bond_order.push_back(bond_order(terminal_text(p)));
    for (ProductionId p : g.alternatives(s.digit)) {
      int v = std::stoi(terminal_text(p));
      if (v < 1 || v > kRingDigits) throw Error("SMILES digits must be 1..8");
      s.digit_value.push_back(v);
    }
    for (int v : s.aliph_valence) {
      if (v <= 0 || v > kBestSymbol) throw Error("unexpected aliphatic valence");
    }
    for (int v : s.arom_valence) {
      if (v <= 0 || v > kBestSymbol) throw Error("unexpected aromatic valence");
    }
    tables();
  }

  std::unique_ptr<Guide> make() const override {
    return std::make_unique<SmilesGuide>(*schema_, sym_);
  }

 private:
  std::shared_ptr<const AttributeSchema> schema_;
  SmilesSymbols sym_;
};

}  // namespace

std::unique_ptr<GuideFactory> make_smiles_guide(std::shared_ptr<const AttributeSchema> schema) {
  return std::make_unique<SmilesGuideFactory>(std::move(schema));
}

}  // namespace sdgen
