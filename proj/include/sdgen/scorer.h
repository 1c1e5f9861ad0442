#ifndef SDGEN_SCORER_H_
#define SDGEN_SCORER_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "sdgen/attribute_value.h"
#include "sdgen/grammar.h"

namespace sdgen {

/// What the scorer is asked about: the nonterminal being expanded (or owning
/// the lazy attribute), its depth and the production applied at its parent.
struct ScorerQuery {
  SymbolId nonterminal;
  int depth = 0;
  ProductionId parent_production = -1;  // -1 at the root
};

/// Scorer-owned state threaded through a decode. Deterministic in the
/// emissions; `stream` identifies the context seed of a validity run.
struct ScorerContext {
  uint64_t stream = 0;
  ProductionId last_rule = -1;
  int bucket = 0;
  int64_t emissions = 0;

  bool operator==(const ScorerContext&) const = default;
};

/// A production application or one lazy-attribute bit, as seen by the scorer.
struct Emission {
  bool lazy = false;
  ProductionId production = -1;
  int depth = 0;
  int bit = -1;
  bool value = false;
};

inline constexpr int kDepthBuckets = 9;  // 0..7 and 8+
inline int depth_bucket(int depth) { return depth < 8 ? depth : 8; }

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string name() const = 0;

  virtual ScorerContext initial_context(uint64_t stream) const;
  /// Unnormalized, strictly positive weights over the alternatives of
  /// `query.nonterminal`, in file order.
  virtual void rule_weights(const ScorerQuery& query, const ScorerContext& context,
                            std::vector<double>& out) const = 0;
  /// Bernoulli head: P(bit `bit` of `attribute` = 1).
  virtual double bit_probability(const ScorerQuery& query, const ScorerContext& context,
                                 std::string_view attribute, int bit) const = 0;
  virtual void transition(ScorerContext& context, const Emission& emission) const;
};

class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(std::shared_ptr<const Grammar> grammar) : grammar_(std::move(grammar)) {}
  std::string name() const override { return "uniform"; }
  ScorerContext initial_context(uint64_t stream) const override;
  void rule_weights(const ScorerQuery& query, const ScorerContext& context,
                    std::vector<double>& out) const override;
  double bit_probability(const ScorerQuery&, const ScorerContext&, std::string_view,
                         int) const override {
    return 0.5;
  }
  void transition(ScorerContext&, const Emission&) const override {}

 private:
  std::shared_ptr<const Grammar> grammar_;
};

/// Smoothed counts keyed by (nonterminal, parent production, depth bucket);
/// lazy bits additionally by attribute and bit index.
class CountModel : public Scorer {
 public:
  struct RuleKey {
    SymbolId nonterminal;
    ProductionId parent;
    int bucket;
    auto operator<=>(const RuleKey&) const = default;
  };
  struct BitKey {
    SymbolId owner;
    std::string attribute;
    ProductionId parent;
    int bucket;
    int bit;
    auto operator<=>(const BitKey&) const = default;
  };

  CountModel(std::shared_ptr<const Grammar> grammar, double alpha = 0.1);

  std::string name() const override { return "count"; }
  void rule_weights(const ScorerQuery& query, const ScorerContext& context,
                    std::vector<double>& out) const override;
  double bit_probability(const ScorerQuery& query, const ScorerContext& context,
                         std::string_view attribute, int bit) const override;

  void add_rule(const ScorerQuery& query, int alternative, double count = 1.0);
  void add_bit(const ScorerQuery& query, std::string_view attribute, int bit, bool value,
               double count = 1.0);

  double alpha() const { return alpha_; }
  const Grammar& grammar() const { return *grammar_; }
  const std::map<RuleKey, std::vector<double>>& rule_counts() const { return rules_; }
  const std::map<BitKey, std::array<double, 2>>& bit_counts() const { return bits_; }

  /// JSON text with format tag, version and the grammar fingerprint.
  std::string to_json() const;
  /// Throws if the file was trained on a grammar with another fingerprint.
  static CountModel from_json(std::string_view text, std::shared_ptr<const Grammar> grammar);

  void save(const std::string& path) const;
  static CountModel load(const std::string& path, std::shared_ptr<const Grammar> grammar);

 private:
  std::shared_ptr<const Grammar> grammar_;
  double alpha_;
  std::map<RuleKey, std::vector<double>> rules_;
  std::map<BitKey, std::array<double, 2>> bits_;
};

}  // namespace sdgen

#endif  // SDGEN_SCORER_H_
