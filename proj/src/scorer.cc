#include "sdgen/scorer.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sdgen {

namespace {

constexpr const char* kFormat = "sdgen-count-model";
constexpr int kVersion = 1;

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

ScorerContext Scorer::initial_context(uint64_t stream) const {
  ScorerContext c;
  c.stream = stream;
  return c;
}

void Scorer::transition(ScorerContext& context, const Emission& emission) const {
  ++context.emissions;
  if (!emission.lazy) {
    context.last_rule = emission.production;
    context.bucket = depth_bucket(emission.depth + 1);
  }
}

ScorerContext UniformScorer::initial_context(uint64_t) const { return {}; }

void UniformScorer::rule_weights(const ScorerQuery& query, const ScorerContext&,
                                 std::vector<double>& out) const {
  out.assign(grammar_->alternatives(query.nonterminal).size(), 1.0);
}

CountModel::CountModel(std::shared_ptr<const Grammar> grammar, double alpha)
    : grammar_(std::move(grammar)), alpha_(alpha) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) {
    throw Error("smoothing constant must be positive and finite");
  }
}

void CountModel::rule_weights(const ScorerQuery& query, const ScorerContext&,
                              std::vector<double>& out) const {
  std::size_t n = grammar_->alternatives(query.nonterminal).size();
  out.assign(n, alpha_);
  auto it = rules_.find({query.nonterminal, query.parent_production, depth_bucket(query.depth)});
  if (it == rules_.end()) return;
  for (std::size_t i = 0; i < n; ++i) out[i] += it->second[i];
}

double CountModel::bit_probability(const ScorerQuery& query, const ScorerContext&,
                                   std::string_view attribute, int bit) const {
  auto it = bits_.find({query.nonterminal, std::string(attribute), query.parent_production,
                        depth_bucket(query.depth), bit});
  double c0 = 0.0, c1 = 0.0;
  if (it != bits_.end()) {
    c0 = it->second[0];
    c1 = it->second[1];
  }
  return (c1 + alpha_) / (c0 + c1 + 2.0 * alpha_);
}

void CountModel::add_rule(const ScorerQuery& query, int alternative, double count) {
  auto& row = rules_[{query.nonterminal, query.parent_production, depth_bucket(query.depth)}];
  row.resize(grammar_->alternatives(query.nonterminal).size(), 0.0);
  row.at(alternative) += count;
}

void CountModel::add_bit(const ScorerQuery& query, std::string_view attribute, int bit,
                         bool value, double count) {
  auto& row = bits_[{query.nonterminal, std::string(attribute), query.parent_production,
                     depth_bucket(query.depth), bit}];
  row[value ? 1 : 0] += count;
}

std::string CountModel::to_json() const {
  using nlohmann::json;
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["grammar_hash"] = hex64(grammar_->fingerprint());
  j["alpha"] = alpha_;
  json rules = json::array();
  for (const auto& [key, counts] : rules_) {
    rules.push_back({{"nonterminal", grammar_->symbol(key.nonterminal).name},
                     {"parent", key.parent},
                     {"bucket", key.bucket},
                     {"counts", counts}});
  }
  j["rules"] = std::move(rules);
  json bits = json::array();
  for (const auto& [key, counts] : bits_) {
    bits.push_back({{"owner", grammar_->symbol(key.owner).name},
                    {"attribute", key.attribute},
                    {"parent", key.parent},
                    {"bucket", key.bucket},
                    {"bit", key.bit},
                    {"counts", {counts[0], counts[1]}}});
  }
  j["bits"] = std::move(bits);
  return j.dump(1);
}

CountModel CountModel::from_json(std::string_view text, std::shared_ptr<const Grammar> grammar) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) throw Error("not a count-model file");
    if (j.at("version") != kVersion) {
      throw Error("unsupported model version " + j.at("version").dump());
    }
    std::string hash = j.at("grammar_hash");
    if (hash != hex64(grammar->fingerprint())) {
      throw Error("model was trained on a different grammar (hash " + hash + ", expected " +
                  hex64(grammar->fingerprint()) + ")");
    }
    CountModel m(grammar, j.at("alpha").get<double>());
    for (const auto& r : j.at("rules")) {
      RuleKey key{grammar->nonterminal(r.at("nonterminal").get<std::string>()),
                  r.at("parent").get<int>(), r.at("bucket").get<int>()};
      auto counts = r.at("counts").get<std::vector<double>>();
      if (counts.size() != grammar->alternatives(key.nonterminal).size()) {
        throw Error("count row size mismatch for <" + grammar->symbol(key.nonterminal).name + ">");
      }
      for (double c : counts) {
        if (!(c >= 0.0)) throw Error("negative count in model file");
      }
      m.rules_[key] = std::move(counts);
    }
    for (const auto& b : j.at("bits")) {
      BitKey key{grammar->nonterminal(b.at("owner").get<std::string>()),
                 b.at("attribute").get<std::string>(), b.at("parent").get<int>(),
                 b.at("bucket").get<int>(), b.at("bit").get<int>()};
      auto counts = b.at("counts").get<std::vector<double>>();
      if (counts.size() != 2 || !(counts[0] >= 0.0) || !(counts[1] >= 0.0)) {
        throw Error("malformed bit counts in model file");
      }
      m.bits_[key] = {counts[0], counts[1]};
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

void CountModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << to_json() << '\n';
}

CountModel CountModel::load(const std::string& path, std::shared_ptr<const Grammar> grammar) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), std::move(grammar));
}

}  // namespace sdgen
