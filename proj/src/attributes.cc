#include "sdgen/attributes.h"

#include <algorithm>
#include <cmath>
#include <queue>

namespace sdgen {

std::string_view rule_fn_name(RuleFn fn) {
  switch (fn) {
    case RuleFn::kCopy: return "copy";
    case RuleFn::kConstant: return "constant";
    case RuleFn::kUnion: return "union";
    case RuleFn::kIntersect: return "intersect";
    case RuleFn::kDifference: return "difference";
    case RuleFn::kXor: return "xor";
    case RuleFn::kSingleton: return "singleton";
    case RuleFn::kConcat: return "concat";
    case RuleFn::kCounterAdd: return "counter_add";
    case RuleFn::kEqualityCheck: return "equality_check";
    case RuleFn::kSubsetCheck: return "subset_check";
    case RuleFn::kLessEqualCheck: return "less_equal_check";
    case RuleFn::kCardinalityBits: return "cardinality_bits";
  }
  return "?";
}

AttributeSchema::AttributeSchema(std::shared_ptr<const Grammar> grammar, std::string name)
    : grammar_(std::move(grammar)),
      name_(std::move(name)),
      rules_by_production_(grammar_->num_productions()) {}

void AttributeSchema::declare(std::string_view owner, std::string_view attribute,
                              AttributeKind kind, ValueDomain domain, int cap) {
  SymbolId id = grammar_->nonterminal(owner);
  if (find(id, attribute)) {
    throw Error("attribute <" + std::string(owner) + ">." + std::string(attribute) +
                " declared twice");
  }
  if (kind == AttributeKind::kStochasticLazy && (domain != ValueDomain::kBitSet || cap < 1)) {
    throw Error("stochastic lazy attribute needs a bit_set domain with cap >= 1");
  }
  if (domain == ValueDomain::kBitSet && (cap < 1 || cap > 32)) {
    throw Error("bit_set cap must be in [1, 32]");
  }
  decls_.push_back({id, std::string(attribute), kind, domain, cap});
}

void AttributeSchema::rule(std::string_view lhs, int alt, AttrRef target, RuleFn fn,
                           std::vector<AttrRef> deps, AttributeValue constant,
                           std::string violation) {
  ProductionId pid = grammar_->production_of(lhs, alt);
  const Production& p = grammar_->production(pid);
  auto symbol_at = [&](int pos) -> SymbolId {
    if (pos < 0 || pos > static_cast<int>(p.rhs.size())) {
      throw Error("position " + std::to_string(pos) + " out of range in " +
                  grammar_->to_string(pid));
    }
    return pos == 0 ? p.lhs : p.rhs[pos - 1];
  };
  const AttributeDecl* tdecl = find(symbol_at(target.position), target.name);
  if (!tdecl) {
    throw Error("rule target " + target.name + " is not declared on " +
                grammar_->symbol(symbol_at(target.position)).name);
  }
  bool synthesized_like = tdecl->kind != AttributeKind::kInherited;
  if (synthesized_like != (target.position == 0)) {
    throw Error("rule in " + grammar_->to_string(pid) + " targets " + target.name +
                " at the wrong position for its kind");
  }
  for (const AttrRef& d : deps) {
    SymbolId s = symbol_at(d.position);
    if (d.name == kTextAttribute) {
      if (!grammar_->symbol(s).is_terminal()) throw Error("$text of a nonterminal");
      continue;
    }
    if (!find(s, d.name)) {
      throw Error("rule in " + grammar_->to_string(pid) + " reads undeclared attribute " +
                  grammar_->symbol(s).name + "." + d.name);
    }
  }
  if (defining_rule(pid, target.position, target.name)) {
    throw Error("two rules define " + target.name + " in " + grammar_->to_string(pid));
  }
  rules_by_production_[pid].push_back(static_cast<int>(rules_.size()));
  rules_.push_back({pid, std::move(target), std::move(deps), fn, std::move(constant),
                    std::move(violation)});
}

std::vector<const AttributeDecl*> AttributeSchema::declarations_of(SymbolId owner) const {
  std::vector<const AttributeDecl*> out;
  for (const auto& d : decls_) {
    if (d.owner == owner) out.push_back(&d);
  }
  return out;
}

std::vector<const AttributeDecl*> AttributeSchema::lazy_declarations_of(SymbolId owner) const {
  std::vector<const AttributeDecl*> out;
  for (const auto& d : decls_) {
    if (d.owner == owner && d.kind == AttributeKind::kStochasticLazy) out.push_back(&d);
  }
  return out;
}

const AttributeDecl* AttributeSchema::find(SymbolId owner, std::string_view attribute) const {
  for (const auto& d : decls_) {
    if (d.owner == owner && d.name == attribute) return &d;
  }
  return nullptr;
}

const std::vector<int>& AttributeSchema::rules_of(ProductionId production) const {
  return rules_by_production_.at(production);
}

const SemanticRule* AttributeSchema::defining_rule(ProductionId production, int position,
                                                   std::string_view attribute) const {
  for (int r : rules_by_production_.at(production)) {
    const SemanticRule& rule = rules_[r];
    if (rule.target.position == position && rule.target.name == attribute) return &rule;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Dependency graph

namespace {

NodeId node_at(const DerivationTree& tree, NodeId parent, int position) {
  return position == 0 ? parent : tree.node(parent).children.at(position - 1);
}

}  // namespace

int DependencyGraph::find(NodeId node, std::string_view attribute) const {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].node == node && vertices[i].attribute == attribute) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

DependencyGraph build_dependency_graph(const AttributeSchema& schema,
                                       const DerivationTree& tree) {
  DependencyGraph g;
  const Grammar& grammar = tree.grammar();
  // Vertex ids: one per (node, declared attribute), nodes in pre-order.
  std::vector<std::vector<std::pair<std::string, int>>> index(tree.size());
  for (NodeId id : tree.preorder()) {
    if (grammar.symbol(tree.node(id).symbol).is_terminal()) continue;
    for (const AttributeDecl* d : schema.declarations_of(tree.node(id).symbol)) {
      index[id].emplace_back(d->name, static_cast<int>(g.vertices.size()));
      g.vertices.push_back({id, d->name});
    }
  }
  g.edges.assign(g.vertices.size(), {});
  g.defining_rule.assign(g.vertices.size(), -1);
  auto lookup = [&](NodeId node, const std::string& name) {
    for (const auto& [n, v] : index[node]) {
      if (n == name) return v;
    }
    throw Error("attribute " + name + " is not declared on <" + tree.symbol_of(node).name + ">");
  };

  for (NodeId id : tree.preorder()) {
    const TreeNode& n = tree.node(id);
    if (n.production < 0) continue;
    for (int r : schema.rules_of(n.production)) {
      const SemanticRule& rule = schema.rules()[r];
      int target = lookup(node_at(tree, id, rule.target.position), rule.target.name);
      g.defining_rule[target] = r;
      for (const AttrRef& d : rule.deps) {
        if (d.name == kTextAttribute) continue;
        int src = lookup(node_at(tree, id, d.position), d.name);
        g.edges[src].push_back(target);
      }
    }
  }

  std::vector<int> merged_of(tree.size(), -1);
  for (const auto& v : g.vertices) {
    if (merged_of[v.node] < 0) {
      merged_of[v.node] = static_cast<int>(g.merged_vertices.size());
      g.merged_vertices.push_back(v.node);
    }
  }
  g.merged_edges.assign(g.merged_vertices.size(), {});
  for (std::size_t u = 0; u < g.edges.size(); ++u) {
    int mu = merged_of[g.vertices[u].node];
    for (int v : g.edges[u]) {
      int mv = merged_of[g.vertices[v].node];
      if (mu == mv) continue;
      auto& out = g.merged_edges[mu];
      if (std::find(out.begin(), out.end(), mv) == out.end()) out.push_back(mv);
    }
  }
  return g;
}

bool has_cycle(const std::vector<std::vector<int>>& edges) {
  const std::size_t n = edges.size();
  std::vector<int> indegree(n, 0);
  for (const auto& out : edges) {
    for (int v : out) ++indegree[v];
  }
  std::vector<int> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    int u = ready.back();
    ready.pop_back();
    ++seen;
    for (int v : edges[u]) {
      if (--indegree[v] == 0) ready.push_back(v);
    }
  }
  return seen != n;
}

bool check_noncircular(const DependencyGraph& graph) { return !has_cycle(graph.edges); }

// ---------------------------------------------------------------------------
// Rule evaluation

namespace {

SymbolSet as_symbol_set(const AttributeValue& v) {
  if (std::holds_alternative<SymbolSet>(v.value)) return v.as_symbols();
  if (std::holds_alternative<std::string>(v.value)) return {v.as_token()};
  throw Error("value " + v.to_string() + " is not a symbol set");
}

int64_t cardinality(const AttributeValue& v) {
  if (std::holds_alternative<SymbolSet>(v.value)) return static_cast<int64_t>(v.as_symbols().size());
  if (std::holds_alternative<BitSet>(v.value)) return v.as_bits().count();
  throw Error("cardinality of a non-set value");
}

BitSet digit_bit(const std::string& token, int width) {
  if (token.size() != 1 || token[0] < '1' || token[0] - '1' >= width) {
    throw Error("token '" + token + "' is not a ring digit");
  }
  return BitSet{1u << (token[0] - '1'), width};
}

AttributeValue check_result(bool ok) { return AttributeValue::counter(ok ? 1 : 0); }

AttributeValue apply_rule(const SemanticRule& rule, const AttributeDecl& target,
                          const std::vector<AttributeValue>& args) {
  auto need = [&](std::size_t n) {
    if (args.size() < n) {
      throw Error(std::string(rule_fn_name(rule.fn)) + " needs " + std::to_string(n) +
                  " dependencies");
    }
  };
  switch (rule.fn) {
    case RuleFn::kCopy:
      need(1);
      return AttributeValue{ValueState::kSet, args[0].value};
    case RuleFn::kConstant:
      return AttributeValue{ValueState::kSet, rule.constant.value};
    case RuleFn::kUnion:
    case RuleFn::kIntersect:
    case RuleFn::kXor: {
      need(1);
      if (target.domain == ValueDomain::kBitSet) {
        uint32_t acc = args[0].as_bits().bits;
        for (std::size_t i = 1; i < args.size(); ++i) {
          uint32_t b = args[i].as_bits().bits;
          acc = rule.fn == RuleFn::kUnion ? (acc | b) : rule.fn == RuleFn::kIntersect ? (acc & b) : (acc ^ b);
        }
        return AttributeValue::bits(BitSet{acc, target.cap});
      }
      if (rule.fn == RuleFn::kXor) throw Error("xor is defined on bit sets only");
      SymbolSet acc = as_symbol_set(args[0]);
      for (std::size_t i = 1; i < args.size(); ++i) {
        SymbolSet other = as_symbol_set(args[i]);
        if (rule.fn == RuleFn::kUnion) {
          acc.insert(other.begin(), other.end());
        } else {
          SymbolSet both;
          std::set_intersection(acc.begin(), acc.end(), other.begin(), other.end(),
                                std::inserter(both, both.begin()));
          acc = std::move(both);
        }
      }
      return AttributeValue::symbols(std::move(acc));
    }
    case RuleFn::kDifference: {
      need(2);
      if (target.domain == ValueDomain::kBitSet) {
        return AttributeValue::bits(
            BitSet{args[0].as_bits().bits & ~args[1].as_bits().bits, target.cap});
      }
      SymbolSet a = as_symbol_set(args[0]);
      for (const auto& s : as_symbol_set(args[1])) a.erase(s);
      return AttributeValue::symbols(std::move(a));
    }
    case RuleFn::kSingleton: {
      need(1);
      std::string tok;
      for (const auto& a : args) tok += a.as_token();
      if (target.domain == ValueDomain::kBitSet) {
        return AttributeValue::bits(digit_bit(tok, target.cap));
      }
      return AttributeValue::symbols({std::move(tok)});
    }
    case RuleFn::kConcat: {
      std::string s;
      for (const auto& a : args) s += a.as_token();
      return AttributeValue::token(std::move(s));
    }
    case RuleFn::kCounterAdd: {
      int64_t sum = std::holds_alternative<int64_t>(rule.constant.value) ? rule.constant.as_counter() : 0;
      for (const auto& a : args) sum += a.as_counter();
      return AttributeValue::counter(sum);
    }
    case RuleFn::kEqualityCheck: {
      need(1);
      std::vector<const AttributeValue*> all;
      for (const auto& a : args) all.push_back(&a);
      if (!std::holds_alternative<std::monostate>(rule.constant.value)) all.push_back(&rule.constant);
      for (std::size_t i = 1; i < all.size(); ++i) {
        if (all[i]->value != all[0]->value) return check_result(false);
      }
      return check_result(true);
    }
    case RuleFn::kSubsetCheck: {
      need(2);
      SymbolSet a = as_symbol_set(args[0]);
      SymbolSet b = as_symbol_set(args[1]);
      return check_result(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
    case RuleFn::kLessEqualCheck: {
      int64_t sum = 0;
      for (const auto& a : args) sum += a.as_counter();
      return check_result(sum <= rule.constant.as_counter());
    }
    case RuleFn::kCardinalityBits: {
      need(1);
      int n = static_cast<int>(std::min<int64_t>(cardinality(args[0]), target.cap));
      uint32_t bits = n >= 32 ? ~0u : ((1u << n) - 1u);
      return AttributeValue::bits(BitSet{bits, target.cap});
    }
  }
  throw Error("unknown rule function");
}

std::vector<AttributeValue> gather_args(const SemanticRule& rule, const DerivationTree& tree,
                                        NodeId site) {
  std::vector<AttributeValue> args;
  args.reserve(rule.deps.size());
  for (const AttrRef& d : rule.deps) {
    NodeId n = node_at(tree, site, d.position);
    if (d.name == kTextAttribute) {
      args.push_back(AttributeValue::token(tree.symbol_of(n).name));
      continue;
    }
    const AttributeValue* v = tree.find_attribute(n, d.name);
    if (!v || v->state == ValueState::kUnset) {
      throw Error("dependency " + tree.symbol_of(n).name + "." + d.name + " is not available");
    }
    args.push_back(*v);
  }
  return args;
}

}  // namespace

EvaluationReport evaluate_offline(const AttributeSchema& schema, DerivationTree& tree,
                                  TopoOrder order) {
  if (!tree.complete()) throw Error("offline evaluation needs a complete tree");
  tree.clear_attributes();
  DependencyGraph g = build_dependency_graph(schema, tree);
  const std::size_t n = g.vertices.size();
  for (std::size_t v = 0; v < n; ++v) {
    if (g.defining_rule[v] < 0) {
      throw Error("no semantic rule defines " + tree.symbol_of(g.vertices[v].node).name + "." +
                  g.vertices[v].attribute + " (node " + std::to_string(g.vertices[v].node) + ")");
    }
  }
  std::vector<int> indegree(n, 0);
  for (const auto& out : g.edges) {
    for (int v : out) ++indegree[v];
  }
  // Kahn's algorithm; the tie-break picks between two valid topological orders.
  std::priority_queue<int, std::vector<int>, std::function<bool(int, int)>> ready(
      [order](int a, int b) { return order == TopoOrder::kLowestFirst ? a > b : a < b; });
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(static_cast<int>(v));
  }

  EvaluationReport report;
  std::vector<char> done(n, 0);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    const SemanticRule& rule = schema.rules()[g.defining_rule[v]];
    // The rule is attached to the node that applied rule.production.
    NodeId target_node = g.vertices[v].node;
    NodeId site = rule.target.position == 0 ? target_node : tree.node(target_node).parent;
    const AttributeDecl* decl = schema.find(tree.node(target_node).symbol, rule.target.name);
    AttributeValue value = apply_rule(rule, *decl, gather_args(rule, tree, site));
    if (!rule.violation.empty() && value.as_counter() == 0) {
      report.violations.push_back({rule.violation, site});
    }
    AttributeValue& slot = tree.attribute(target_node, rule.target.name);
    if (slot.state == ValueState::kSet) {
      throw Error("attribute " + rule.target.name + " on node " + std::to_string(target_node) +
                  " set twice");
    }
    slot = std::move(value);
    done[v] = 1;
    ++report.instances_set;
    for (int w : g.edges[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  if (static_cast<std::size_t>(report.instances_set) != n) {
    throw Error("circular attribute dependencies: " +
                std::to_string(n - report.instances_set) + " instances unevaluated");
  }
  std::sort(report.violations.begin(), report.violations.end(),
            [](const Violation& a, const Violation& b) {
              return a.node != b.node ? a.node < b.node : a.rule < b.rule;
            });
  return report;
}

// ---------------------------------------------------------------------------
// Stochastic lazy attributes

LazyDraw sample_lazy(const AttributeDecl& decl, DerivationTree& tree, NodeId node,
                     LazyBitSource& source, Rng* rng, std::optional<BitSet> forced) {
  if (decl.kind != AttributeKind::kStochasticLazy) {
    throw Error("attribute " + decl.name + " is not stochastic lazy");
  }
  if (tree.node(node).symbol != decl.owner) {
    throw Error("node " + std::to_string(node) + " does not own " + decl.name);
  }
  AttributeValue& slot = tree.attribute(node, decl.name);
  if (slot.state != ValueState::kUnset) {
    throw Error("lazy attribute " + decl.name + " on node " + std::to_string(node) +
                " already drawn");
  }
  LazyDraw draw;
  draw.value.width = decl.cap;
  for (int i = 0; i < decl.cap; ++i) {
    std::array<bool, 2> ok = source.allowed(i, draw.value);
    draw.bit_masks.push_back(ok);
    if (!ok[0] && !ok[1]) {
      throw LazyMaskError("no value of bit " + std::to_string(i) + " of " + decl.name +
                              " keeps the constraints satisfiable",
                          i);
    }
    double p1 = source.probability_one(i, draw.value);
    if (!std::isfinite(p1) || p1 <= 0.0 || p1 >= 1.0) {
      throw Error("Bernoulli head returned p=" + std::to_string(p1));
    }
    double w0 = ok[0] ? 1.0 - p1 : 0.0;
    double w1 = ok[1] ? p1 : 0.0;
    double q1 = w1 / (w0 + w1);
    bool bit;
    if (forced) {
      bit = forced->test(i);
      if (!ok[bit]) {
        throw LazyMaskError("bit " + std::to_string(i) + " of " + decl.name + " = " +
                                std::to_string(bit) + " is masked",
                            i);
      }
    } else {
      bit = rng->uniform() < q1;
    }
    double lp = std::log(bit ? q1 : 1.0 - q1);
    draw.bit_log_probs.push_back(lp);
    draw.log_prob += lp;
    if (bit) draw.value.bits |= 1u << i;
  }
  slot = AttributeValue::bits(draw.value, ValueState::kPendingLazy);
  return draw;
}

void lazy_link(const AttributeSchema& schema, DerivationTree& tree, NodeId node,
               std::string_view lazy_attribute, std::string_view linked_attribute,
               AttributeValue linked) {
  AttributeValue* pending = tree.find_attribute(node, lazy_attribute);
  if (!pending || !pending->is_pending()) {
    throw LazyLinkError("lazy attribute " + std::string(lazy_attribute) + " on node " +
                        std::to_string(node) + " is not pending");
  }
  ProductionId pid = tree.node(node).production;
  const SemanticRule* rule = pid >= 0 ? schema.defining_rule(pid, 0, lazy_attribute) : nullptr;
  if (!rule) throw LazyLinkError("no defining rule for " + std::string(lazy_attribute));
  linked.state = ValueState::kSet;
  tree.attribute(node, linked_attribute) = std::move(linked);
  const AttributeDecl* decl = schema.find(tree.node(node).symbol, lazy_attribute);
  AttributeValue actual = apply_rule(*rule, *decl, gather_args(*rule, tree, node));
  // re-fetch: the slot table may have grown
  pending = tree.find_attribute(node, lazy_attribute);
  if (actual.as_bits() != pending->as_bits()) {
    throw LazyLinkError("lazy link mismatch on node " + std::to_string(node) + ": predetermined " +
                        pending->to_string() + " but synthesized " + actual.to_string());
  }
  pending->state = ValueState::kSet;
}

}  // namespace sdgen
