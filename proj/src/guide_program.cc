// Program masks: variables are read only once defined, the list ends in
// exactly one return, at most kMaxAssignments assignments. The step budget is
// additive: every frontier node can be finished at its minimal cost without
// touching the others.

#include <bit>

#include "sdgen/guide.h"
#include "sdgen/schemas.h"

namespace sdgen {

namespace {

struct ProgramInfo {
  SymbolId stat_list, stat, assign, ret, lhs, var, var_id, operand;
  ProductionId stat_list_more;  // <stat_list> -> <stat> ';' <stat_list>
  int assign_stat_cost;         // a <stat> that has to be an assignment
  std::vector<int> node_cost;   // per symbol
  std::vector<int> children_cost;  // per production
  bool single_assignment;
};

class ProgramGuide : public Guide {
 public:
  explicit ProgramGuide(const ProgramInfo& info) : info_(info) {}

  Mask mask(const DerivationTree& tree, NodeId node, const Budget& budget) override {
    const Grammar& g = tree.grammar();
    const TreeNode& n = tree.node(node);
    const auto& alts = g.alternatives(n.symbol);
    if (!started_) {
      pending_ = cost(tree, node);
      started_ = true;
    }
    Mask m(alts.size(), 1);
    if (n.symbol == info_.stat_list) {
      m[0] = assignments_ + 1 <= kMaxAssignments;
    } else if (n.symbol == info_.stat) {
      bool must_assign = tree.node(n.parent).production == info_.stat_list_more;
      m[0] = must_assign;
      m[1] = !must_assign;
    } else if (n.symbol == info_.var_id) {
      bool target = is_target(tree, node);
      for (std::size_t i = 0; i < alts.size(); ++i) {
        bool defined = (defined_ >> i) & 1u;
        m[i] = target ? (!info_.single_assignment || !defined) : defined;
      }
    }
    if (budget.strict) {
      int rest = pending_ - cost(tree, node);
      for (std::size_t i = 0; i < alts.size(); ++i) {
        if (m[i] && rest + info_.children_cost[alts[i]] > budget.after_choice()) m[i] = 0;
      }
    }
    return m;
  }

  void apply(const DerivationTree& tree, NodeId node, int alt) override {
    const TreeNode& n = tree.node(node);
    pending_ += info_.children_cost[n.production] - cost(tree, node);
    if (n.symbol == info_.assign) {
      ++assignments_;
    } else if (n.symbol == info_.var_id && is_target(tree, node)) {
      target_ = alt;
    }
  }

  void complete(DerivationTree& tree, NodeId node) override {
    if (tree.node(node).symbol == info_.assign) defined_ |= 1u << target_;
  }

 private:
  int cost(const DerivationTree& tree, NodeId node) const {
    const TreeNode& n = tree.node(node);
    if (n.symbol == info_.stat && n.parent != kNoNode &&
        tree.node(n.parent).production == info_.stat_list_more) {
      return info_.assign_stat_cost;
    }
    return info_.node_cost[n.symbol];
  }

  // var_id -> var -> lhs -> assign
  bool is_target(const DerivationTree& tree, NodeId var_id) const {
    NodeId var = tree.node(var_id).parent;
    NodeId up = tree.node(var).parent;
    if (tree.node(up).symbol != info_.lhs) return false;
    return tree.node(tree.node(up).parent).symbol == info_.assign;
  }

  const ProgramInfo& info_;
  bool started_ = false;
  int pending_ = 0;
  int assignments_ = 0;
  uint32_t defined_ = 1u;  // v0
  int target_ = -1;
};

class ProgramGuideFactory : public GuideFactory {
 public:
  ProgramGuideFactory(std::shared_ptr<const AttributeSchema> schema, bool single_assignment)
      : schema_(std::move(schema)) {
    const Grammar& g = schema_->grammar();
    ProgramInfo& i = info_;
    i.stat_list = g.nonterminal("stat_list");
    i.stat = g.nonterminal("stat");
    i.assign = g.nonterminal("assign");
    i.ret = g.nonterminal("return");
    i.lhs = g.nonterminal("lhs");
    i.var = g.nonterminal("var");
    i.var_id = g.nonterminal("var_id");
    i.operand = g.nonterminal("operand");
    i.stat_list_more = g.production_of("stat_list", 0);
    i.single_assignment = single_assignment;
    if (g.alternatives(i.var_id).size() > 32) throw Error("too many variables");
    i.assign_stat_cost = 1 + g.min_expansion_steps(i.assign);
    i.node_cost.assign(g.symbols().size(), 0);
    for (SymbolId s = 0; s < static_cast<SymbolId>(g.symbols().size()); ++s) {
      if (!g.symbol(s).is_terminal()) i.node_cost[s] = g.min_expansion_steps(s);
    }
    i.children_cost.assign(g.num_productions(), 0);
    for (const Production& p : g.productions()) {
      for (std::size_t k = 0; k < p.rhs.size(); ++k) {
        SymbolId c = p.rhs[k];
        if (g.symbol(c).is_terminal()) continue;
        bool forced_assign = p.index == i.stat_list_more && k == 0;
        i.children_cost[p.index] += forced_assign ? i.assign_stat_cost : i.node_cost[c];
      }
    }
  }

  std::unique_ptr<Guide> make() const override { return std::make_unique<ProgramGuide>(info_); }

 private:
  std::shared_ptr<const AttributeSchema> schema_;
  ProgramInfo info_;
};

}  // namespace

std::unique_ptr<GuideFactory> make_program_guide(std::shared_ptr<const AttributeSchema> schema,
                                                 bool single_assignment) {
  return std::make_unique<ProgramGuideFactory>(std::move(schema), single_assignment);
}

}  // namespace sdgen
