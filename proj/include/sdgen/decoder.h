#ifndef SDGEN_DECODER_H_
#define SDGEN_DECODER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdgen/attributes.h"
#include "sdgen/guide.h"
#include "sdgen/random.h"
#include "sdgen/scorer.h"
#include "sdgen/tree.h"

namespace sdgen {

enum class BudgetMode {
  kStrict,    // masks keep a completion within T reachable; decodes always finish
  kTruncate,  // masks ignore T; a decode that reaches T steps is Incomplete
};

BudgetMode parse_budget_mode(std::string_view text);
std::string_view budget_mode_name(BudgetMode mode);

struct DecodeOptions {
  int max_steps = 80;
  BudgetMode mode = BudgetMode::kStrict;
};

/// Thrown for scorer failures (non-finite weights) and empty masks; distinct
/// from an Incomplete decode.
class DecodeError : public Error {
 public:
  using Error::Error;
};

struct TraceStep {
  enum class Kind { kRule, kLazyBit };
  Kind kind = Kind::kRule;
  NodeId node = kNoNode;
  SymbolId symbol = -1;
  Mask mask;       // over the alternatives, or {0-allowed, 1-allowed} for a bit
  int choice = 0;  // alternative index, or the bit value
  ProductionId production = -1;
  std::string attribute;
  int bit = -1;
  int depth = 0;
  ProductionId parent_production = -1;
  double log_prob = 0.0;

  ScorerQuery query() const { return {symbol, depth, parent_production}; }
};

struct DecodeTrace {
  std::vector<TraceStep> steps;
  double log_prob = 0.0;  // left-to-right sum of the step log-probabilities
  int rule_steps = 0;
};

/// One trace step as a single JSON object (no trailing newline).
std::string trace_step_json(const Grammar& grammar, const TraceStep& step);

/// What a decode needs besides the RNG: grammar, schema, guide and scorer.
struct DecodeSetup {
  std::shared_ptr<const Grammar> grammar;
  std::shared_ptr<const AttributeSchema> schema;
  std::shared_ptr<const GuideFactory> guides;
  std::shared_ptr<const Scorer> scorer;
};

struct DecodeResult {
  DerivationTree tree;
  DecodeTrace trace;
  bool complete = false;  // false: Incomplete, step budget exhausted
};

/// Samples one tree top-down, leftmost frontier node first.
DecodeResult gen_tree(const DecodeSetup& setup, Rng& rng, const DecodeOptions& options,
                      uint64_t context_stream = 0);

struct LikelihoodResult {
  double log_prob = 0.0;  // -infinity when the tree is unreachable
  DecodeTrace trace;
  std::optional<int> failed_step;  // index into trace.steps of the rejected choice
  std::string diagnostic;
};

/// Teacher-forced log-likelihood: replays the tree's own choices through the
/// masked, renormalized scorer. Lazy values are those the tree implies.
LikelihoodResult log_likelihood(const DecodeSetup& setup, const DerivationTree& tree,
                                const DecodeOptions& options, uint64_t context_stream = 0);

/// Mask of the leftmost frontier node `node` of a partial tree, recomputed by
/// replaying the tree's decisions (lazy values must be drawn where owed).
Mask compute_mask(const DecodeSetup& setup, const DerivationTree& tree, NodeId node,
                  const DecodeOptions& options);

/// Adds the teacher-forced choices of `tree` (rules and lazy bits) to
/// `model`. Returns false, adding nothing, if the tree is unreachable.
bool accumulate_counts(const DecodeSetup& setup, const DerivationTree& tree,
                       const DecodeOptions& options, CountModel& model);

/// Accumulates every tree of `corpus` into `model`. Throws if a tree fails
/// the offline check or is unreachable under `options`.
void train_counts(const DecodeSetup& setup, const std::vector<DerivationTree>& corpus,
                  const DecodeOptions& options, CountModel& model);

struct ValidityReport {
  int64_t decodes = 0;
  int64_t completed = 0;
  int64_t valid = 0;
  double mean_steps = 0.0;  // over completed decodes
  double validity() const { return decodes ? static_cast<double>(valid) / decodes : 0.0; }
  double completion_rate() const {
    return decodes ? static_cast<double>(completed) / decodes : 0.0;
  }
};

/// n_contexts x n_decodes decodes. Context i uses stream derive_seed(seed, i);
/// decode j of it uses Rng(derive_seed(stream, j)). Results do not depend on
/// `jobs`.
ValidityReport estimate_validity(const DecodeSetup& setup,
                                 const std::function<bool(const DerivationTree&)>& check,
                                 int n_contexts, int n_decodes, uint64_t seed,
                                 const DecodeOptions& options, int jobs = 1);

/// Runs `work(i)` for i in [0, n) on `jobs` threads.
void parallel_for(int64_t n, int jobs, const std::function<void(int64_t)>& work);

}  // namespace sdgen

#endif  // SDGEN_DECODER_H_
