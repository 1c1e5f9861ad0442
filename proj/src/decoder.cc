#include "sdgen/decoder.h"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace sdgen {

BudgetMode parse_budget_mode(std::string_view text) {
  if (text == "strict-budget" || text == "strict") return BudgetMode::kStrict;
  if (text == "truncate") return BudgetMode::kTruncate;
  throw Error("unknown budget mode '" + std::string(text) +
              "' (expected strict-budget or truncate)");
}

std::string_view budget_mode_name(BudgetMode mode) {
  return mode == BudgetMode::kStrict ? "strict-budget" : "truncate";
}

std::string trace_step_json(const Grammar& grammar, const TraceStep& step) {
  nlohmann::json j;
  j["kind"] = step.kind == TraceStep::Kind::kRule ? "rule" : "lazy";
  j["node"] = step.node;
  j["symbol"] = grammar.symbol(step.symbol).name;
  j["mask"] = step.mask;
  j["choice"] = step.choice;
  if (step.kind == TraceStep::Kind::kRule) {
    j["production"] = step.production;
  } else {
    j["attribute"] = step.attribute;
    j["bit"] = step.bit;
  }
  if (std::isfinite(step.log_prob)) {
    j["logp"] = step.log_prob;
  } else {
    j["logp"] = "-inf";
  }
  return j.dump();
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ScorerQuery query_for(const DerivationTree& tree, NodeId node) {
  const TreeNode& n = tree.node(node);
  ProductionId parent = n.parent == kNoNode ? -1 : tree.node(n.parent).production;
  return {n.symbol, n.depth, parent};
}

/// How the decode loop makes its choices: sampling or replaying a tree.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Alternative to apply; -1 stops the loop at this node (mask queries).
  virtual int choose(NodeId node, const Mask& mask, const std::vector<double>& weights,
                     double total) = 0;
  virtual std::optional<BitSet> forced_lazy(NodeId node, const AttributeDecl& decl) = 0;
  virtual Rng* rng() = 0;
  virtual void on_expand(NodeId, std::span<const NodeId>) {}
};

class SamplePolicy : public Policy {
 public:
  explicit SamplePolicy(Rng& rng) : rng_(rng) {}

  int choose(NodeId, const Mask& mask, const std::vector<double>& weights,
             double total) override {
    double u = rng_.uniform() * total;
    int last = -1;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!mask[i]) continue;
      last = static_cast<int>(i);
      acc += weights[i];
      if (u < acc) return last;
    }
    return last;
  }
  std::optional<BitSet> forced_lazy(NodeId, const AttributeDecl&) override { return {}; }
  Rng* rng() override { return &rng_; }

 private:
  Rng& rng_;
};

/// Follows `source` node by node. Lazy values come from `lazy_values`, a tree
/// with the same shape (the source itself, or an evaluated copy).
class ReplayPolicy : public Policy {
 public:
  ReplayPolicy(const DerivationTree& source, const DerivationTree& lazy_values,
               NodeId stop_at = kNoNode)
      : source_(source), lazy_(lazy_values), stop_at_(stop_at), map_{source.root()} {}

  int choose(NodeId node, const Mask&, const std::vector<double>&, double) override {
    NodeId src = map_.at(node);
    ProductionId p = source_.node(src).production;
    if (p < 0) {
      if (src == stop_at_) return -1;
      throw Error("node " + std::to_string(src) +
                  " is unexpanded but not the requested leftmost frontier node");
    }
    return source_.grammar().alternative_index(p);
  }

  std::optional<BitSet> forced_lazy(NodeId node, const AttributeDecl& decl) override {
    NodeId src = map_.at(node);
    const AttributeValue* v = lazy_.find_attribute(src, decl.name);
    if (!v || v->state == ValueState::kUnset) {
      throw Error("lazy attribute " + decl.name + " of node " + std::to_string(src) +
                  " has no value to replay");
    }
    return v->as_bits();
  }

  Rng* rng() override { return nullptr; }

  void on_expand(NodeId node, std::span<const NodeId> children) override {
    const auto& src_children = source_.node(map_.at(node)).children;
    for (std::size_t i = 0; i < children.size(); ++i) {
      if (static_cast<std::size_t>(children[i]) >= map_.size()) map_.resize(children[i] + 1, kNoNode);
      map_[children[i]] = src_children.at(i);
    }
  }

  NodeId source_of(NodeId node) const { return map_.at(node); }

 private:
  const DerivationTree& source_;
  const DerivationTree& lazy_;
  NodeId stop_at_;
  std::vector<NodeId> map_;
};

/// Feeds sample_lazy from the guide (feasibility) and the scorer (Bernoulli
/// head), advancing the scorer context bit by bit.
class LazySource : public LazyBitSource {
 public:
  LazySource(Guide& guide, const DerivationTree& tree, NodeId node, const AttributeDecl& decl,
             const Budget& budget, const Scorer& scorer, const ScorerQuery& query,
             ScorerContext& context)
      : guide_(guide), tree_(tree), node_(node), decl_(decl), budget_(budget),
        scorer_(scorer), query_(query), context_(context) {}

  std::array<bool, 2> allowed(int index, BitSet prefix) override {
    auto ok = guide_.allowed_lazy_bit(tree_, node_, decl_, index, prefix, budget_);
    masks.push_back(ok);
    return ok;
  }

  double probability_one(int index, BitSet prefix) override {
    if (index > 0) advance(index - 1, prefix.test(index - 1));
    return scorer_.bit_probability(query_, context_, decl_.name, index);
  }

  void finish(BitSet value) { advance(decl_.cap - 1, value.test(decl_.cap - 1)); }

  std::vector<std::array<bool, 2>> masks;

 private:
  void advance(int bit, bool value) {
    Emission e;
    e.lazy = true;
    e.depth = query_.depth;
    e.bit = bit;
    e.value = value;
    scorer_.transition(context_, e);
  }

  Guide& guide_;
  const DerivationTree& tree_;
  NodeId node_;
  const AttributeDecl& decl_;
  const Budget& budget_;
  const Scorer& scorer_;
  ScorerQuery query_;
  ScorerContext& context_;
};

enum class Status { kComplete, kIncomplete, kRejected, kStopped };

struct Outcome {
  DerivationTree tree;
  DecodeTrace trace;
  Status status = Status::kComplete;
  std::optional<int> failed_step;
  std::string diagnostic;
  Mask stop_mask;
};

void add_step(DecodeTrace& trace, TraceStep step) {
  trace.log_prob += step.log_prob;
  if (step.kind == TraceStep::Kind::kRule) ++trace.rule_steps;
  trace.steps.push_back(std::move(step));
}

Outcome run(const DecodeSetup& setup, Policy& policy, const DecodeOptions& options,
            uint64_t context_stream) {
  const Grammar& grammar = *setup.grammar;
  const AttributeSchema& schema = *setup.schema;
  const Scorer& scorer = *setup.scorer;
  if (&schema.grammar() != setup.grammar.get()) {
    throw Error("schema and decoder use different grammar objects");
  }
  std::unique_ptr<Guide> guide = setup.guides->make();
  ScorerContext context = scorer.initial_context(context_stream);
  Outcome out{DerivationTree(setup.grammar), {}, Status::kComplete, {}, {}, {}};
  DerivationTree& tree = out.tree;
  Budget budget{0, options.max_steps, options.mode == BudgetMode::kStrict};

  struct Entry {
    NodeId node;
    bool finish;
  };
  std::vector<Entry> stack{{tree.root(), false}};
  std::vector<double> weights;

  while (!stack.empty()) {
    Entry e = stack.back();
    stack.pop_back();
    if (e.finish) {
      guide->complete(tree, e.node);
      continue;
    }
    NodeId n = e.node;
    if (!budget.strict && budget.used >= budget.limit) {
      out.status = Status::kIncomplete;
      out.diagnostic = "step budget T=" + std::to_string(budget.limit) + " exhausted";
      return out;
    }
    const TreeNode& tn = tree.node(n);
    ScorerQuery query = query_for(tree, n);

    for (const AttributeDecl* decl : schema.lazy_declarations_of(tn.symbol)) {
      LazySource source(*guide, tree, n, *decl, budget, scorer, query, context);
      std::optional<BitSet> forced = policy.forced_lazy(n, *decl);
      LazyDraw draw;
      try {
        draw = sample_lazy(*decl, tree, n, source, policy.rng(), forced);
      } catch (const LazyMaskError& err) {
        if (!forced) throw DecodeError(err.what());
        TraceStep step;
        step.kind = TraceStep::Kind::kLazyBit;
        step.node = n;
        step.symbol = tn.symbol;
        step.mask = {source.masks.back()[0], source.masks.back()[1]};
        step.choice = forced->test(err.bit());
        step.attribute = decl->name;
        step.bit = err.bit();
        step.depth = query.depth;
        step.parent_production = query.parent_production;
        step.log_prob = kNegInf;
        out.failed_step = static_cast<int>(out.trace.steps.size());
        add_step(out.trace, std::move(step));
        out.status = Status::kRejected;
        out.diagnostic = err.what();
        return out;
      }
      source.finish(draw.value);
      for (int i = 0; i < decl->cap; ++i) {
        TraceStep step;
        step.kind = TraceStep::Kind::kLazyBit;
        step.node = n;
        step.symbol = tn.symbol;
        step.mask = {draw.bit_masks[i][0], draw.bit_masks[i][1]};
        step.choice = draw.value.test(i);
        step.attribute = decl->name;
        step.bit = i;
        step.depth = query.depth;
        step.parent_production = query.parent_production;
        step.log_prob = draw.bit_log_probs[i];
        add_step(out.trace, std::move(step));
      }
      guide->commit_lazy(tree, n, *decl, draw.value);
    }

    Mask mask = guide->mask(tree, n, budget);
    const auto& alternatives = grammar.alternatives(tn.symbol);
    scorer.rule_weights(query, context, weights);
    if (weights.size() != alternatives.size() || mask.size() != alternatives.size()) {
      throw DecodeError("scorer or mask size does not match the alternatives of <" +
                        grammar.symbol(tn.symbol).name + ">");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!std::isfinite(weights[i]) || weights[i] <= 0.0) {
        throw DecodeError("scorer returned weight " + std::to_string(weights[i]) + " for <" +
                          grammar.symbol(tn.symbol).name + ">");
      }
      if (mask[i]) total += weights[i];
    }
    int alt = policy.choose(n, mask, weights, total);
    if (alt < 0) {
      out.status = Status::kStopped;
      out.stop_mask = std::move(mask);
      return out;
    }
    TraceStep step;
    step.node = n;
    step.symbol = tn.symbol;
    step.choice = alt;
    step.production = alternatives.at(alt);
    step.depth = query.depth;
    step.parent_production = query.parent_production;
    if (total == 0.0 || !mask[alt]) {
      if (!policy.rng() && total != 0.0) {
        step.mask = std::move(mask);
        step.log_prob = kNegInf;
        out.failed_step = static_cast<int>(out.trace.steps.size());
        out.diagnostic = "production " + grammar.to_string(step.production) +
                         " is masked at node " + std::to_string(n);
        add_step(out.trace, std::move(step));
        out.status = Status::kRejected;
        return out;
      }
      throw DecodeError("every alternative of <" + grammar.symbol(tn.symbol).name +
                        "> is masked at node " + std::to_string(n));
    }
    step.log_prob = std::log(weights[alt] / total);
    step.mask = std::move(mask);
    ProductionId prod = step.production;
    add_step(out.trace, std::move(step));

    auto children = tree.expand(n, prod);
    policy.on_expand(n, children);
    guide->apply(tree, n, alt);
    ++budget.used;
    Emission em;
    em.production = prod;
    em.depth = query.depth;
    scorer.transition(context, em);

    stack.push_back({n, true});
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      if (!tree.is_terminal(*it)) stack.push_back({*it, false});
    }
  }
  return out;
}

}  // namespace

DecodeResult gen_tree(const DecodeSetup& setup, Rng& rng, const DecodeOptions& options,
                      uint64_t context_stream) {
  SamplePolicy policy(rng);
  Outcome o = run(setup, policy, options, context_stream);
  return {std::move(o.tree), std::move(o.trace), o.status == Status::kComplete};
}

LikelihoodResult log_likelihood(const DecodeSetup& setup, const DerivationTree& tree,
                                const DecodeOptions& options, uint64_t context_stream) {
  if (!tree.complete()) throw Error("log_likelihood needs a complete tree");
  DerivationTree evaluated = tree;
  EvaluationReport report = evaluate_offline(*setup.schema, evaluated);
  ReplayPolicy policy(tree, evaluated);
  Outcome o = run(setup, policy, options, context_stream);
  LikelihoodResult r;
  r.trace = std::move(o.trace);
  r.failed_step = o.failed_step;
  r.diagnostic = std::move(o.diagnostic);
  switch (o.status) {
    case Status::kComplete:
      r.log_prob = r.trace.log_prob;
      if (!report.ok()) {
        // Exact masks make this unreachable; kept so an invalid tree never scores finite.
        r.log_prob = kNegInf;
        r.diagnostic = "offline check failed: " + report.violations.front().rule;
      }
      break;
    case Status::kIncomplete:
      r.log_prob = kNegInf;
      r.diagnostic = "tree needs more than T=" + std::to_string(options.max_steps) + " steps";
      break;
    case Status::kRejected:
      r.log_prob = kNegInf;
      break;
    case Status::kStopped:
      throw Error("internal: replay stopped on a complete tree");
  }
  return r;
}

Mask compute_mask(const DecodeSetup& setup, const DerivationTree& tree, NodeId node,
                  const DecodeOptions& options) {
  if (node < 0 || static_cast<std::size_t>(node) >= tree.size()) {
    throw Error("node " + std::to_string(node) + " does not exist");
  }
  if (tree.is_terminal(node) || tree.node(node).production >= 0) {
    throw Error("node " + std::to_string(node) + " is not on the frontier");
  }
  ReplayPolicy policy(tree, tree, node);
  Outcome o = run(setup, policy, options, 0);
  if (o.status != Status::kStopped) {
    throw Error("replay did not reach node " + std::to_string(node) + ": " + o.diagnostic);
  }
  return o.stop_mask;
}

bool accumulate_counts(const DecodeSetup& setup, const DerivationTree& tree,
                       const DecodeOptions& options, CountModel& model) {
  LikelihoodResult r = log_likelihood(setup, tree, options);
  if (!std::isfinite(r.log_prob)) return false;
  for (const TraceStep& step : r.trace.steps) {
    if (step.kind == TraceStep::Kind::kRule) {
      model.add_rule(step.query(), step.choice);
    } else {
      model.add_bit(step.query(), step.attribute, step.bit, step.choice != 0);
    }
  }
  return true;
}

void train_counts(const DecodeSetup& setup, const std::vector<DerivationTree>& corpus,
                  const DecodeOptions& options, CountModel& model) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!accumulate_counts(setup, corpus[i], options, model)) {
      LikelihoodResult r = log_likelihood(setup, corpus[i], options);
      throw Error("training tree " + std::to_string(i) + " rejected: " + r.diagnostic);
    }
  }
}

void parallel_for(int64_t n, int jobs, const std::function<void(int64_t)>& work) {
  if (jobs <= 1 || n <= 1) {
    for (int64_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  int t = static_cast<int>(std::min<int64_t>(jobs, n));
  threads.reserve(t);
  for (int i = 0; i < t; ++i) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

ValidityReport estimate_validity(const DecodeSetup& setup,
                                 const std::function<bool(const DerivationTree&)>& check,
                                 int n_contexts, int n_decodes, uint64_t seed,
                                 const DecodeOptions& options, int jobs) {
  if (n_contexts < 1 || n_decodes < 1) throw Error("n_contexts and n_decodes must be >= 1");
  int64_t total = static_cast<int64_t>(n_contexts) * n_decodes;
  struct Item {
    bool complete = false;
    bool valid = false;
    int steps = 0;
  };
  std::vector<Item> items(total);
  parallel_for(total, jobs, [&](int64_t k) {
    uint64_t stream = derive_seed(seed, static_cast<uint64_t>(k / n_decodes));
    Rng rng(derive_seed(stream, static_cast<uint64_t>(k % n_decodes)));
    DecodeResult r = gen_tree(setup, rng, options, stream);
    items[k].complete = r.complete;
    items[k].steps = r.trace.rule_steps;
    items[k].valid = r.complete && check(r.tree);
  });
  ValidityReport report;
  report.decodes = total;
  int64_t steps = 0;
  for (const Item& it : items) {
    if (it.complete) {
      ++report.completed;
      steps += it.steps;
    }
    if (it.valid) ++report.valid;
  }
  report.mean_steps = report.completed ? static_cast<double>(steps) / report.completed : 0.0;
  return report;
}

}  // namespace sdgen
