// sdgen: parse, check, sample and score programs and SMILES strings.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdgen/decoder.h"
#include "sdgen/language.h"
#include "sdgen/program.h"

using nlohmann::json;
using namespace sdgen;

namespace {

struct Common {
  std::string grammar = "program";
  std::string scorer = "uniform";
  uint64_t seed = 0;
  int max_steps = -1;  // language default
  std::string budget_mode = "strict-budget";
  int jobs = 1;
  bool strict = false;
  bool single_assignment = false;
  double alpha = 0.1;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--grammar,-g", c.grammar, "program, smiles or toy")->capture_default_str();
  cmd->add_option("--scorer", c.scorer, "uniform or a count-model file")->capture_default_str();
  cmd->add_option("--seed", c.seed, "run seed")->capture_default_str();
  cmd->add_option("--max-steps,-T", c.max_steps, "step budget T (default per grammar)");
  cmd->add_option("--budget-mode", c.budget_mode, "strict-budget or truncate")
      ->capture_default_str();
  cmd->add_option("--jobs,-j", c.jobs, "worker threads")->capture_default_str();
  cmd->add_flag("--strict", c.strict, "exit 1 on any failing item");
  cmd->add_flag("--single-assignment", c.single_assignment,
                "program grammar: forbid redefining a variable");
}

Language language(const Common& c) {
  try {
    return load_language(c.grammar, c.single_assignment);
  } catch (const GrammarError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

DecodeOptions options(const Common& c, const Language& lang) {
  DecodeOptions o;
  o.max_steps = c.max_steps > 0 ? c.max_steps : lang.default_max_steps;
  try {
    o.mode = parse_budget_mode(c.budget_mode);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return o;
}

std::shared_ptr<const Scorer> scorer(const Common& c, const Language& lang) {
  if (c.scorer == "uniform") return std::make_shared<UniformScorer>(lang.grammar);
  try {
    return std::make_shared<CountModel>(CountModel::load(c.scorer, lang.grammar));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

/// Non-blank lines of the given files, or of stdin when none (or "-").
std::vector<std::string> read_lines(const std::vector<std::string>& files) {
  std::vector<std::string> lines;
  auto slurp = [&](std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
    }
  };
  if (files.empty()) {
    slurp(std::cin);
    return lines;
  }
  for (const std::string& f : files) {
    if (f == "-") {
      slurp(std::cin);
      continue;
    }
    std::ifstream in(f);
    if (!in) throw UsageError("cannot open " + f);
    slurp(in);
  }
  return lines;
}

json logp_json(double v) { return std::isfinite(v) ? json(v) : json("-inf"); }

json trace_json(const Grammar& g, const DecodeTrace& trace) {
  json steps = json::array();
  for (const TraceStep& s : trace.steps) steps.push_back(json::parse(trace_step_json(g, s)));
  return steps;
}

json violations_json(const CheckReport& r) {
  json out = json::array();
  for (const CheckViolation& v : r.violations) {
    out.push_back({{"rule", v.rule}, {"location", v.location}});
  }
  return out;
}

int cmd_parse(const Common& c, const std::vector<std::string>& files) {
  Language lang = language(c);
  int failures = 0;
  for (const std::string& line : read_lines(files)) {
    json j{{"input", line}};
    try {
      DerivationTree t = lang.parse(line);
      j["ok"] = true;
      j["rule_sequence"] = tree_to_rule_sequence(t);
    } catch (const SyntaxError& e) {
      j["ok"] = false;
      j["error"] = e.what();
      j["position"] = e.position();
      ++failures;
    }
    std::cout << j.dump() << '\n';
  }
  return c.strict && failures ? 1 : 0;
}

int cmd_encode(const Common& c, const std::vector<std::string>& files) {
  Language lang = language(c);
  DecodeOptions o = options(c, lang);
  int failures = 0;
  for (const std::string& line : read_lines(files)) {
    json j{{"input", line}};
    try {
      std::vector<ProductionId> seq = tree_to_rule_sequence(lang.parse(line));
      if (static_cast<int>(seq.size()) > o.max_steps) {
        j["ok"] = false;
        j["error"] = "needs " + std::to_string(seq.size()) + " steps, T=" +
                     std::to_string(o.max_steps);
        ++failures;
      } else {
        std::vector<uint8_t> hot = one_hot_encode(*lang.grammar, seq, o.max_steps);
        j["ok"] = true;
        j["rows"] = o.max_steps;
        j["columns"] = lang.grammar->num_productions();
        j["ones"] = std::count(hot.begin(), hot.end(), 1);
        j["rule_sequence"] = seq;
      }
    } catch (const SyntaxError& e) {
      j["ok"] = false;
      j["error"] = e.what();
      ++failures;
    }
    std::cout << j.dump() << '\n';
  }
  return c.strict && failures ? 1 : 0;
}

int cmd_check(const Common& c, const std::vector<std::string>& files) {
  Language lang = language(c);
  int64_t total = 0, valid = 0;
  for (const std::string& line : read_lines(files)) {
    ++total;
    json j{{"input", line}};
    try {
      CheckReport r = lang.check(lang.parse(line));
      j["valid"] = r.valid;
      j["violations"] = violations_json(r);
      valid += r.valid;
    } catch (const SyntaxError& e) {
      j["valid"] = false;
      j["error"] = e.what();
    }
    std::cout << j.dump() << '\n';
  }
  std::fprintf(stderr, "checked %lld, valid %lld (%.5f)\n", static_cast<long long>(total),
               static_cast<long long>(valid), total ? static_cast<double>(valid) / total : 1.0);
  return c.strict && valid != total ? 1 : 0;
}

int cmd_sample(const Common& c, int n, bool with_trace) {
  Language lang = language(c);
  DecodeOptions o = options(c, lang);
  DecodeSetup setup = lang.setup(scorer(c, lang));
  std::vector<std::string> out(n);
  std::vector<int> status(n);  // 0 valid, 1 invalid, 2 incomplete
  parallel_for(n, c.jobs, [&](int64_t i) {
    uint64_t stream = derive_seed(c.seed, static_cast<uint64_t>(i));
    Rng rng(stream);
    DecodeResult r = gen_tree(setup, rng, o, stream);
    json j{{"index", i}, {"complete", r.complete}, {"steps", r.trace.rule_steps},
           {"logp", logp_json(r.trace.log_prob)}};
    if (r.complete) {
      CheckReport check = lang.check(r.tree);
      j["text"] = yield_string(r.tree);
      j["valid"] = check.valid;
      if (!check.valid) j["violations"] = violations_json(check);
      status[i] = check.valid ? 0 : 1;
    } else {
      j["valid"] = false;
      status[i] = 2;
    }
    if (with_trace) j["trace"] = trace_json(*lang.grammar, r.trace);
    out[i] = j.dump();
  });
  int complete = 0, valid = 0;
  for (int i = 0; i < n; ++i) {
    std::cout << out[i] << '\n';
    complete += status[i] != 2;
    valid += status[i] == 0;
  }
  std::fprintf(stderr, "%s, %s: %d samples, completed %d (%.5f), valid %d (%.5f)\n",
               lang.id.c_str(), std::string(budget_mode_name(o.mode)).c_str(), n, complete,
               n ? static_cast<double>(complete) / n : 0.0, valid,
               n ? static_cast<double>(valid) / n : 0.0);
  return c.strict && valid != n ? 1 : 0;
}

int cmd_estimate(const Common& c, int contexts, int decodes) {
  Language lang = language(c);
  DecodeOptions o = options(c, lang);
  DecodeSetup setup = lang.setup(scorer(c, lang));
  auto check = [&](const DerivationTree& t) { return lang.check(t).valid; };
  ValidityReport r = estimate_validity(setup, check, contexts, decodes, c.seed, o, c.jobs);
  json j{{"grammar", lang.id},
         {"scorer", setup.scorer->name()},
         {"budget_mode", budget_mode_name(o.mode)},
         {"max_steps", o.max_steps},
         {"contexts", contexts},
         {"decodes_per_context", decodes},
         {"decodes", r.decodes},
         {"completed", r.completed},
         {"valid", r.valid},
         {"validity", r.validity()},
         {"completion_rate", r.completion_rate()},
         {"mean_steps", r.mean_steps}};
  std::cout << j.dump() << '\n';
  std::fprintf(stderr, "validity %.5f, completion %.5f, %lld decodes\n", r.validity(),
               r.completion_rate(), static_cast<long long>(r.decodes));
  return c.strict && r.valid != r.completed ? 1 : 0;
}

int cmd_likelihood(const Common& c, const std::vector<std::string>& files, bool with_trace) {
  Language lang = language(c);
  DecodeOptions o = options(c, lang);
  DecodeSetup setup = lang.setup(scorer(c, lang));
  std::vector<std::string> lines = read_lines(files);
  std::vector<std::string> out(lines.size());
  std::vector<double> logps(lines.size(), -std::numeric_limits<double>::infinity());
  parallel_for(static_cast<int64_t>(lines.size()), c.jobs, [&](int64_t i) {
    json j{{"input", lines[i]}};
    try {
      DerivationTree t = lang.parse(lines[i]);
      LikelihoodResult r = log_likelihood(setup, t, o);
      logps[i] = r.log_prob;
      j["logp"] = logp_json(r.log_prob);
      j["steps"] = r.trace.rule_steps;
      if (r.failed_step) j["failed_step"] = *r.failed_step;
      if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
      if (with_trace) j["trace"] = trace_json(*lang.grammar, r.trace);
    } catch (const SyntaxError& e) {
      j["logp"] = "-inf";
      j["error"] = e.what();
    }
    out[i] = j.dump();
  });
  double nll = 0.0;
  int finite = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::cout << out[i] << '\n';
    if (std::isfinite(logps[i])) {
      nll -= logps[i];
      ++finite;
    }
  }
  std::fprintf(stderr, "%d of %zu finite, mean NLL %.6f\n", finite, lines.size(),
               finite ? nll / finite : 0.0);
  return c.strict && finite != static_cast<int>(lines.size()) ? 1 : 0;
}

int cmd_train(const Common& c, const std::vector<std::string>& files, const std::string& output) {
  Language lang = language(c);
  DecodeOptions o = options(c, lang);
  DecodeSetup setup = lang.setup(std::make_shared<UniformScorer>(lang.grammar));
  std::vector<DerivationTree> corpus;
  for (const std::string& line : read_lines(files)) {
    try {
      corpus.push_back(lang.parse(line));
    } catch (const SyntaxError& e) {
      throw Error("corpus line '" + line + "': " + e.what());
    }
  }
  CountModel model(lang.grammar, c.alpha);
  train_counts(setup, corpus, o, model);
  model.save(output);
  std::fprintf(stderr, "trained on %zu trees: %zu rule keys, %zu bit keys -> %s\n",
               corpus.size(), model.rule_counts().size(), model.bit_counts().size(),
               output.c_str());
  return 0;
}

int cmd_distance(const std::string& candidate_file, const std::string& target_file) {
  auto g = load_language("program").grammar;
  std::vector<std::string> targets = read_lines({target_file});
  if (targets.empty()) throw UsageError(target_file + " holds no program");
  ProgramAst target = ast_from_tree(parse_program(g, targets.front()));
  for (const std::string& line : read_lines({candidate_file})) {
    ProgramAst cand = ast_from_tree(parse_program(g, line));
    std::printf("%.4f\n", program_distance(cand, target));
  }
  return 0;
}

int cmd_gen_corpus(const Common& c, int n, int max_statements, const std::string& output) {
  Language lang = load_language("program");
  CorpusOptions opts;
  opts.max_assignments = max_statements;
  opts.max_steps = c.max_steps > 0 ? c.max_steps : lang.default_max_steps;
  if (max_statements < 1) throw UsageError("--max-statements must be >= 1");
  std::vector<std::string> out(n);
  parallel_for(n, c.jobs, [&](int64_t i) {
    Rng rng(derive_seed(c.seed, static_cast<uint64_t>(i)));
    out[i] = generate_program(lang.grammar, rng, opts);
  });
  std::ofstream file;
  if (!output.empty() && output != "-") {
    file.open(output);
    if (!file) throw UsageError("cannot write " + output);
  }
  std::ostream& os = file.is_open() ? file : std::cout;
  for (const std::string& p : out) os << p << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Syntax-directed constrained generation of programs and SMILES strings"};
  app.set_config("--config", "", "TOML file with option defaults (flags win)");
  app.require_subcommand(1);
  Common c;
  std::vector<std::string> files;
  bool trace = false;
  int n = 10;
  int contexts = 1000, decodes = 100;
  int max_statements = 5;
  std::string output;
  std::string candidate, target;

  auto* parse = app.add_subcommand("parse", "parse lines into rule sequences");
  auto* encode = app.add_subcommand("encode", "one-hot encode parsed lines (T x |R|)");
  auto* check = app.add_subcommand("check", "offline semantic check of each line");
  auto* sample = app.add_subcommand("sample", "draw samples with the constrained decoder");
  auto* estimate = app.add_subcommand("estimate", "validity over contexts x decodes");
  auto* likelihood = app.add_subcommand("likelihood", "teacher-forced log-likelihood per line");
  auto* train = app.add_subcommand("train", "fit a count model on a corpus");
  auto* distance = app.add_subcommand("distance", "log(1+MSE) between programs");
  auto* gen = app.add_subcommand("gen-corpus", "random valid programs, one per line");

  for (auto* cmd : {parse, encode, check, sample, estimate, likelihood, train, gen}) {
    add_common(cmd, c);
  }
  for (auto* cmd : {parse, encode, check, likelihood, train}) {
    cmd->add_option("files", files, "input files (default stdin)");
  }
  for (auto* cmd : {sample, likelihood}) cmd->add_flag("--trace", trace, "include the decode trace");
  sample->add_option("-n,--count", n, "number of samples")->capture_default_str();
  estimate->add_option("--contexts", contexts, "number of context seeds")->capture_default_str();
  estimate->add_option("--decodes", decodes, "decodes per context")->capture_default_str();
  train->add_option("--output,-o", output, "model file")->required();
  train->add_option("--alpha", c.alpha, "additive smoothing")->capture_default_str();
  distance->add_option("candidate", candidate, "candidate program file")->required();
  distance->add_option("target", target, "target program file")->required();
  gen->add_option("-n,--count", n, "number of programs")->capture_default_str();
  gen->add_option("--max-statements", max_statements, "assignments per program, at most")
      ->capture_default_str();
  gen->add_option("--output,-o", output, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*parse) return cmd_parse(c, files);
    if (*encode) return cmd_encode(c, files);
    if (*check) return cmd_check(c, files);
    if (*sample) return cmd_sample(c, n, trace);
    if (*estimate) return cmd_estimate(c, contexts, decodes);
    if (*likelihood) return cmd_likelihood(c, files, trace);
    if (*train) return cmd_train(c, files, output);
    if (*distance) return cmd_distance(candidate, target);
    if (*gen) return cmd_gen_corpus(c, n, max_statements, output);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
