#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "sdgen/decoder.h"
#include "support.h"

using namespace sdgen;

namespace {

DecodeSetup uniform(const Language& l) {
  return l.setup(std::make_shared<UniformScorer>(l.grammar));
}

class BadScorer : public UniformScorer {
 public:
  BadScorer(std::shared_ptr<const Grammar> g, double w) : UniformScorer(std::move(g)), w_(w) {}
  void rule_weights(const ScorerQuery& q, const ScorerContext& c,
                    std::vector<double>& out) const override {
    UniformScorer::rule_weights(q, c, out);
    out[0] = w_;
  }

 private:
  double w_;
};

bool valid(const Language& l, const DerivationTree& t) { return l.check(t).valid; }

}  // namespace

TEST_CASE("toy likelihoods") {
  const Language& toy = lang("toy");
  DecodeOptions opt{20, BudgetMode::kStrict};
  LikelihoodResult chain = log_likelihood(uniform(toy), toy.parse("CCC"), opt);
  CHECK(chain.log_prob == doctest::Approx(-0.6931471805599453).epsilon(1e-12));
  CHECK_FALSE(chain.failed_step);

  LikelihoodResult ring = log_likelihood(uniform(toy), toy.parse("C-1CC-1"), opt);
  CHECK(ring.log_prob == doctest::Approx(-3.9889840465642745).epsilon(1e-12));
  double sum = 0.0;
  for (const TraceStep& s : ring.trace.steps) sum += s.log_prob;
  CHECK(sum == ring.log_prob);

  LikelihoodResult bad = log_likelihood(uniform(toy), toy.parse("C-1CC=1"), opt);
  CHECK(std::isinf(bad.log_prob));
  CHECK(bad.log_prob < 0);
  REQUIRE(bad.failed_step);
  CHECK(bad.trace.steps[*bad.failed_step].kind == TraceStep::Kind::kRule);
  CHECK_FALSE(bad.diagnostic.empty());
}

TEST_CASE("toy samples are always valid") {
  const Language& toy = lang("toy");
  DecodeSetup setup = uniform(toy);
  DecodeOptions opt{20, BudgetMode::kStrict};
  std::set<std::string> seen;
  for (int i = 0; i < 10000; ++i) {
    Rng rng(derive_seed(5, i));
    DecodeResult r = gen_tree(setup, rng, opt);
    REQUIRE(r.complete);
    CHECK(valid(toy, r.tree));
    seen.insert(yield_string(r.tree));
  }
  // CCC plus 3 bonds x 9 digits
  CHECK(seen.size() == 28);
}

TEST_CASE("decodes are reproducible") {
  for (const char* id : {"program", "smiles"}) {
    const Language& l = lang(id);
    DecodeSetup setup = uniform(l);
    DecodeOptions opt{l.default_max_steps, BudgetMode::kStrict};
    for (int i = 0; i < 20; ++i) {
      Rng a(derive_seed(11, i));
      Rng b(derive_seed(11, i));
      DecodeResult ra = gen_tree(setup, a, opt);
      DecodeResult rb = gen_tree(setup, b, opt);
      CHECK(yield_string(ra.tree) == yield_string(rb.tree));
      CHECK(ra.trace.log_prob == rb.trace.log_prob);
      CHECK(ra.complete);
      CHECK(ra.trace.rule_steps <= l.default_max_steps);
      CHECK(valid(l, ra.tree));
    }
  }
}

TEST_CASE("sample trace matches the likelihood") {
  for (const char* id : {"toy", "program", "smiles"}) {
    const Language& l = lang(id);
    DecodeSetup setup = uniform(l);
    DecodeOptions opt{l.default_max_steps, BudgetMode::kStrict};
    for (int i = 0; i < 25; ++i) {
      Rng rng(derive_seed(3, i));
      DecodeResult r = gen_tree(setup, rng, opt);
      LikelihoodResult ll = log_likelihood(setup, r.tree, opt);
      CHECK(ll.log_prob == doctest::Approx(r.trace.log_prob).epsilon(1e-9));
      CHECK(ll.trace.steps.size() == r.trace.steps.size());
    }
  }
}

TEST_CASE("validity estimate does not depend on the thread count") {
  const Language& p = lang("program");
  DecodeSetup setup = uniform(p);
  DecodeOptions opt{80, BudgetMode::kStrict};
  auto check = [&](const DerivationTree& t) { return valid(p, t); };
  ValidityReport one = estimate_validity(setup, check, 20, 10, 9, opt, 1);
  ValidityReport two = estimate_validity(setup, check, 20, 10, 9, opt, 3);
  CHECK(one.decodes == 200);
  CHECK(one.valid == 200);
  CHECK(one.completed == two.completed);
  CHECK(one.valid == two.valid);
  CHECK(one.mean_steps == two.mean_steps);
  CHECK(one.validity() == 1.0);
}

TEST_CASE("mask of a partial toy tree follows the ring bit") {
  const Language& toy = lang("toy");
  DecodeSetup setup = uniform(toy);
  DecodeOptions opt{20, BudgetMode::kStrict};
  const AttributeDecl* sa = toy.schema->find(toy.grammar->start(), "sa");
  struct Fair : LazyBitSource {
    double probability_one(int, BitSet) override { return 0.5; }
    std::array<bool, 2> allowed(int, BitSet) override { return {true, true}; }
  } src;
  for (uint32_t bit : {0u, 1u}) {
    DerivationTree t(toy.grammar);
    sample_lazy(*sa, t, 0, src, nullptr, BitSet{bit, 1});
    auto kids = t.expand(0, toy.grammar->production_of("s", 0));
    Mask m = compute_mask(setup, t, kids[0], opt);
    CHECK(m == (bit ? Mask{0, 1} : Mask{1, 0}));
    if (bit) {
      t.expand(kids[0], toy.grammar->production_of("atom", 1));
      NodeId bond = t.frontier()[0];
      CHECK(compute_mask(setup, t, bond, opt) == Mask{1, 1, 1});
    }
  }
  DerivationTree t(toy.grammar);
  auto kids = t.expand(0, toy.grammar->production_of("s", 0));
  CHECK_THROWS_AS(compute_mask(setup, t, kids[2], opt), Error);
}

TEST_CASE("bad scorer weights are decode errors") {
  const Language& p = lang("program");
  DecodeOptions opt{80, BudgetMode::kStrict};
  for (double w : {std::numeric_limits<double>::quiet_NaN(), 0.0, -1.0,
                   std::numeric_limits<double>::infinity()}) {
    DecodeSetup setup = p.setup(std::make_shared<BadScorer>(p.grammar, w));
    Rng rng(1);
    CHECK_THROWS_AS(gen_tree(setup, rng, opt), DecodeError);
  }
}

TEST_CASE("truncate mode reports incomplete decodes") {
  const Language& toy = lang("toy");
  DecodeSetup setup = uniform(toy);
  int incomplete = 0;
  for (int i = 0; i < 200; ++i) {
    Rng rng(derive_seed(1, i));
    DecodeResult r = gen_tree(setup, rng, {3, BudgetMode::kTruncate});
    if (!r.complete) {
      ++incomplete;
      CHECK(r.trace.rule_steps == 3);
    } else {
      CHECK(yield_string(r.tree) == "CCC");
    }
  }
  CHECK(incomplete > 50);
  CHECK(incomplete < 150);

  for (int i = 0; i < 200; ++i) {
    Rng rng(derive_seed(1, i));
    DecodeResult r = gen_tree(setup, rng, {3, BudgetMode::kStrict});
    REQUIRE(r.complete);
    CHECK(yield_string(r.tree) == "CCC");
  }
  CHECK(parse_budget_mode("truncate") == BudgetMode::kTruncate);
  CHECK(budget_mode_name(BudgetMode::kStrict) == "strict-budget");
  CHECK_THROWS_AS(parse_budget_mode("soft"), Error);
}

TEST_CASE("likelihood of a tree longer than the strict budget") {
  const Language& toy = lang("toy");
  LikelihoodResult r = log_likelihood(uniform(toy), toy.parse("C-1CC-1"), {5, BudgetMode::kStrict});
  CHECK(std::isinf(r.log_prob));
}
