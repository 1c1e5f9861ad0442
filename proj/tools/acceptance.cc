// Prints one PASS/FAIL line per acceptance criterion, then a summary line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "sdgen/decoder.h"
#include "sdgen/language.h"
#include "sdgen/program.h"
#include "sdgen/schemas.h"
#include "sdgen/smiles.h"

using namespace sdgen;

namespace {

std::vector<std::string> failed;
int total = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  ++total;
  if (!ok) failed.push_back(id);
  std::printf("[%s] %s %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> data_lines(const std::string& name) {
  std::ifstream in(std::string(SDGEN_SOURCE_DIR) + "/data/" + name);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

DecodeSetup uniform(const Language& l) {
  return l.setup(std::make_shared<UniformScorer>(l.grammar));
}

int jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void program_prior(const Language& p) {
  auto t0 = std::chrono::steady_clock::now();
  ValidityReport r = estimate_validity(
      uniform(p), [&](const DerivationTree& t) { return p.check(t).valid; }, 1000, 100, 2024,
      {80, BudgetMode::kStrict}, jobs());
  double secs = seconds_since(t0);
  report("1", r.decodes == 100000 && r.valid == r.decodes && secs < 300,
         fmt("program prior: %lld decodes, validity %.5f, %.1f s", static_cast<long long>(r.decodes),
             r.validity(), secs));
}

void smiles_soundness(const Language& s) {
  auto model = std::make_shared<CountModel>(s.grammar);
  std::vector<DerivationTree> corpus;
  for (const auto& line : data_lines("smiles_curated.smi")) corpus.push_back(s.parse(line));
  DecodeOptions opt{s.default_max_steps, BudgetMode::kStrict};
  train_counts(s.setup(model), corpus, opt, *model);

  auto check = [&](const DerivationTree& t) { return s.check(t).valid; };
  bool ok = true;
  std::string detail = "smiles soundness:";
  for (auto [name, setup] : {std::pair<const char*, DecodeSetup>{"uniform", uniform(s)},
                             {"trained", s.setup(model)}}) {
    ValidityReport r = estimate_validity(setup, check, 100, 100, 7, opt, jobs());
    int64_t violating = r.completed - r.valid;
    ok = ok && r.completed >= 10000 && violating == 0;
    detail += fmt(" %s %lld completed (rate %.4f), %lld with violations;", name,
                  static_cast<long long>(r.completed), r.completion_rate(),
                  static_cast<long long>(violating));
  }
  ValidityReport trunc =
      estimate_validity(uniform(s), check, 10, 100, 7, {s.default_max_steps, BudgetMode::kTruncate},
                        jobs());
  detail += fmt(" truncate-mode completion %.4f", trunc.completion_rate());
  report("2", ok, detail);
}

void distances(const Language& p) {
  ProgramAst truth = ast_from_tree(p.parse("v1=sin(v0);v2=exp(v1);v3=v2-1;return:v3"));
  struct Row {
    const char* text;
    double want;
  };
  bool ok = true;
  std::string detail = "distances:";
  for (Row r : {Row{"v5=6+v0;v6=sin(v5);return:v6", 0.1436},
                Row{"v7=5+v0;v5=cos(v7);return:v5", 0.1742},
                Row{"v2=1/5;v9=-1;v7=v2+v2;return:v7", 0.5497}}) {
    double d = program_distance(ast_from_tree(p.parse(r.text)), truth);
    ok = ok && std::abs(d - r.want) <= 0.05 * r.want;
    detail += fmt(" %.4f (want %.4f)", d, r.want);
  }
  report("3", ok, detail);
}

void round_trips(const Language& p, const Language& s) {
  int total_lines = 0, passed = 0;
  std::string detail = "round-trip:";
  for (auto [lang, file] : {std::pair<const Language*, const char*>{&p, "programs_heldout.txt"},
                            {&s, "smiles_sample.txt"}}) {
    std::vector<std::string> lines = data_lines(file);
    int ok = 0;
    for (const auto& line : lines) {
      try {
        DerivationTree t = lang->parse(line);
        DerivationTree back = rule_sequence_to_tree(lang->grammar, tree_to_rule_sequence(t));
        ok += yield_string(back) == line;
      } catch (const Error&) {
      }
    }
    total_lines += static_cast<int>(lines.size());
    passed += ok;
    detail += fmt(" %s %d/%zu;", file, ok, lines.size());
  }
  report("4", passed == total_lines && total_lines == 7000, detail);
}

void likelihood_consistency() {
  bool ok = true;
  std::string detail = "likelihood = trace:";
  for (const char* id : {"program", "smiles", "toy"}) {
    Language l = load_language(id);
    DecodeSetup setup = uniform(l);
    DecodeOptions opt{l.default_max_steps, BudgetMode::kStrict};
    double worst = 0.0;
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      Rng rng(derive_seed(55, i));
      DecodeResult r = gen_tree(setup, rng, opt);
      LikelihoodResult ll = log_likelihood(setup, r.tree, opt);
      double diff = std::abs(ll.log_prob - r.trace.log_prob);
      double tol = 1e-9 * std::max<std::size_t>(1, r.trace.steps.size());
      if (!r.complete || !(diff <= tol)) ++bad;
      if (std::isfinite(diff)) worst = std::max(worst, diff);
    }
    ok = ok && bad == 0;
    detail += fmt(" %s 1000 trees, %d mismatches, max diff %.3g;", id, bad, worst);
  }
  report("5", ok, detail);
}

// All 1-statement-plus-return programs over lhs/return v0..v2 and operands
// {v0, v1, v2, 1, 2}, plus a few malformed shapes the grammar admits.
std::vector<std::string> small_programs() {
  const std::vector<std::string> vars{"v0", "v1", "v2"};
  std::vector<std::string> operands{"v0", "v1", "v2", "1", "2"};
  std::vector<std::string> rhs;
  for (const auto& a : operands) {
    for (const char* op : {"+", "-"}) rhs.push_back(op + a);
    for (const char* f : {"sin", "cos", "exp"}) rhs.push_back(std::string(f) + "(" + a + ")");
    for (const auto& b : operands) {
      for (const char* op : {"+", "-", "*", "/"}) rhs.push_back(a + op + b);
    }
  }
  std::vector<std::string> out;
  for (const auto& x : vars) {
    for (const auto& e : rhs) {
      std::string stmt = x + "=" + e;
      for (const auto& r : vars) out.push_back(stmt + ";return:" + r);
      out.push_back(stmt);
      out.push_back("return:" + x + ";" + stmt);
    }
    out.push_back("return:" + x);
  }
  return out;
}

template <typename Each>
std::pair<int, int> mask_agreement(const Language& l, const std::vector<std::string>& texts,
                                   Each&& on_disagreement) {
  DecodeSetup setup = uniform(l);
  DecodeOptions opt{1000, BudgetMode::kTruncate};
  int checked = 0, disagree = 0;
  for (const auto& text : texts) {
    DerivationTree t = l.parse(text);
    bool valid = l.check(t).valid;
    bool reachable = std::isfinite(log_likelihood(setup, t, opt).log_prob);
    ++checked;
    if (valid != reachable) {
      ++disagree;
      on_disagreement(text);
    }
  }
  return {checked, disagree};
}

void mask_oracle(const Language& p, const Language& s) {
  std::string first;
  auto note = [&](const std::string& text) {
    if (first.empty()) first = text;
  };
  auto [pn, pd] = mask_agreement(p, small_programs(), note);

  std::vector<std::string> smiles;
  const std::string alphabet = "CO=1()";
  std::string text;
  std::function<void(int)> walk = [&](int left) {
    if (!text.empty()) {
      try {
        s.parse(text);
        smiles.push_back(text);
      } catch (const SyntaxError&) {
      }
    }
    if (left == 0) return;
    for (char c : alphabet) {
      text.push_back(c);
      walk(left - 1);
      text.pop_back();
    }
  };
  walk(7);
  auto [sn, sd] = mask_agreement(s, smiles, note);
  report("6", pd == 0 && sd == 0 && pn > 0 && sn > 0,
         fmt("mask/checker agreement: (a) %d programs, %d disagreements; (b) %d smiles, %d "
             "disagreements%s%s",
             pn, pd, sn, sd, first.empty() ? "" : "; first: ", first.c_str()));
}

void toy_analytics() {
  Language toy = load_language("toy");
  DecodeSetup setup = uniform(toy);
  DecodeOptions opt{toy.default_max_steps, BudgetMode::kStrict};
  double ccc = log_likelihood(setup, toy.parse("CCC"), opt).log_prob;
  double ring = log_likelihood(setup, toy.parse("C-1CC-1"), opt).log_prob;
  double want_ccc = std::log(0.5);
  double want_ring = std::log(0.5) + 2 * std::log(1.0 / 3) + std::log(1.0 / 9);
  report("7a", std::abs(ccc - want_ccc) <= 1e-12,
         fmt("toy CCC: %.12f (want ln 0.5 = %.12f)", ccc, want_ccc));
  report("7b", std::abs(ring - want_ring) <= 1e-12,
         fmt("toy C-1CC-1: %.12f (want ln 0.5 + 2 ln 1/3 + ln 1/9 = %.12f)", ring, want_ring));
}

void learning_signal(const Language& p) {
  std::vector<std::string> lines = data_lines("programs_train.txt");
  std::size_t cut = lines.size() * 9 / 10;
  std::vector<DerivationTree> train;
  for (std::size_t i = 0; i < cut; ++i) train.push_back(p.parse(lines[i]));
  auto model = std::make_shared<CountModel>(p.grammar);
  DecodeOptions opt{p.default_max_steps, BudgetMode::kStrict};
  train_counts(p.setup(model), train, opt, *model);
  DecodeSetup trained = p.setup(model), base = uniform(p);
  double nll_model = 0.0, nll_uniform = 0.0;
  std::size_t n = lines.size() - cut;
  for (std::size_t i = cut; i < lines.size(); ++i) {
    DerivationTree t = p.parse(lines[i]);
    nll_model -= log_likelihood(trained, t, opt).log_prob;
    nll_uniform -= log_likelihood(base, t, opt).log_prob;
  }
  nll_model /= n;
  nll_uniform /= n;
  report("8", n > 0 && nll_model < nll_uniform,
         fmt("held-out mean NLL over %zu programs: trained %.4f, uniform %.4f", n, nll_model,
             nll_uniform));
}

void noncircular(const Language& p, const Language& s) {
  int acyclic = 0, trees = 0;
  for (auto [lang, file] : {std::pair<const Language*, const char*>{&p, "programs_train.txt"},
                            {&s, "smiles_sample.txt"}}) {
    std::vector<std::string> lines = data_lines(file);
    for (std::size_t i = 0; i < 1000 && i < lines.size(); ++i) {
      DerivationTree t = lang->parse(lines[i]);
      acyclic += check_noncircular(build_dependency_graph(*lang->schema, t));
      ++trees;
    }
  }
  Language toy = load_language("toy");
  AttributeSchema fixture = make_self_loop_fixture(toy.grammar);
  bool fixture_cyclic = !check_noncircular(build_dependency_graph(fixture, toy.parse("CCC")));
  report("9", trees == 2000 && acyclic == trees && fixture_cyclic,
         fmt("noncircular on %d/%d corpus trees; self-loop fixture %s", acyclic, trees,
             fixture_cyclic ? "circular" : "NOT circular"));
}

}  // namespace

int main() {
  try {
    Language p = load_language("program");
    Language s = load_language("smiles");
    program_prior(p);
    smiles_soundness(s);
    distances(p);
    round_trips(p, s);
    likelihood_consistency();
    mask_oracle(p, s);
    toy_analytics();
    learning_signal(p);
    noncircular(p, s);
  } catch (const std::exception& e) {
    std::printf("error: %s\n", e.what());
    return 2;
  }
  std::string list;
  for (const auto& id : failed) list += (list.empty() ? "" : ",") + id;
  std::printf("acceptance: %d/%d passed; failing: %s\n", total - static_cast<int>(failed.size()),
              total, list.empty() ? "none" : list.c_str());
  return failed.empty() ? 0 : 1;
}
