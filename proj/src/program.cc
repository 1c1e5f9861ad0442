#include "sdgen/program.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>

#include "sdgen/schemas.h"

namespace sdgen {

namespace {

struct Token {
  enum Kind { kVar, kNumber, kFunc, kOp, kAssign, kOpen, kClose, kSemi, kReturn, kEnd };
  Kind kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto digit = [&](std::size_t k) { return k < s.size() && std::isdigit(static_cast<unsigned char>(s[k])); };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (c == 'v') {
      if (!digit(i + 1)) throw SyntaxError("expected a digit after 'v'", i + 1);
      out.push_back({Token::kVar, std::string(s.substr(i, 2)), start});
      i += 2;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t len = 1;
      if (i + 1 < s.size() && s[i + 1] == '.') {
        if (!digit(i + 2)) throw SyntaxError("expected a digit after '.'", i + 2);
        len = 3;
      }
      out.push_back({Token::kNumber, std::string(s.substr(i, len)), start});
      i += len;
    } else if (s.substr(i, 3) == "sin" || s.substr(i, 3) == "cos" || s.substr(i, 3) == "exp") {
      out.push_back({Token::kFunc, std::string(s.substr(i, 3)), start});
      i += 3;
    } else if (s.substr(i, 6) == "return") {
      i += 6;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size() || s[i] != ':') throw SyntaxError("expected ':' after 'return'", i);
      ++i;
      out.push_back({Token::kReturn, "return:", start});
    } else if (c == '+' || c == '-' || c == '*' || c == '/') {
      out.push_back({Token::kOp, std::string(1, c), start});
      ++i;
    } else if (c == '=') {
      out.push_back({Token::kAssign, "=", start});
      ++i;
    } else if (c == '(') {
      out.push_back({Token::kOpen, "(", start});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::kClose, ")", start});
      ++i;
    } else if (c == ';') {
      out.push_back({Token::kSemi, ";", start});
      ++i;
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", i);
    }
  }
  out.push_back({Token::kEnd, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : t_(std::move(tokens)) {}

  ProgramAst parse() {
    ProgramAst ast;
    ast.statements.push_back(statement());
    while (peek().kind == Token::kSemi) {
      ++i_;
      ast.statements.push_back(statement());
    }
    if (peek().kind != Token::kEnd) fail("expected ';' or end of program");
    return ast;
  }

 private:
  const Token& peek() const { return t_[i_]; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    throw SyntaxError(what + (t.kind == Token::kEnd ? ", got end of input" : ", got '" + t.text + "'"),
                      t.pos);
  }

  const Token& expect(Token::Kind kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    return t_[i_++];
  }

  Statement statement() {
    Statement st;
    if (peek().kind == Token::kReturn) {
      ++i_;
      st.is_return = true;
      st.target = expect(Token::kVar, "a variable").text[1] - '0';
      return st;
    }
    st.target = expect(Token::kVar, "a statement").text[1] - '0';
    expect(Token::kAssign, "'='");
    Expression& e = st.rhs;
    if (peek().kind == Token::kOp) {
      e.op = peek().text;
      if (e.op != "+" && e.op != "-") fail("expected an expression");
      ++i_;
      e.kind = Expression::Kind::kUnaryOp;
      e.a = operand();
    } else if (peek().kind == Token::kFunc) {
      e.kind = Expression::Kind::kUnaryFunc;
      e.op = t_[i_++].text;
      expect(Token::kOpen, "'('");
      e.a = operand();
      expect(Token::kClose, "')'");
    } else {
      e.kind = Expression::Kind::kBinary;
      e.a = operand();
      e.op = expect(Token::kOp, "an operator").text;
      e.b = operand();
    }
    return st;
  }

  Operand operand() {
    Operand o;
    if (peek().kind == Token::kVar) {
      o.is_var = true;
      o.var = t_[i_++].text[1] - '0';
    } else {
      o.text = expect(Token::kNumber, "an operand").text;
    }
    return o;
  }

  std::vector<Token> t_;
  std::size_t i_ = 0;
};

class Emitter {
 public:
  explicit Emitter(const Grammar& g) : g_(g) {}

  std::vector<ProductionId> run(const ProgramAst& ast) {
    rule("program", 0);
    for (std::size_t i = 0; i < ast.statements.size(); ++i) {
      rule("stat_list", i + 1 < ast.statements.size() ? 0 : 1);
      const Statement& st = ast.statements[i];
      if (st.is_return) {
        rule("stat", 1);
        rule("return", 0);
        lhs(st.target);
        continue;
      }
      rule("stat", 0);
      rule("assign", 0);
      lhs(st.target);
      rule("rhs", 0);
      const Expression& e = st.rhs;
      switch (e.kind) {
        case Expression::Kind::kUnaryOp:
          rule("expr", 0);
          rule("unary_expr", 0);
          terminal("unary_op", e.op);
          operand(e.a);
          break;
        case Expression::Kind::kUnaryFunc:
          rule("expr", 0);
          rule("unary_expr", 1);
          terminal("unary_func", e.op);
          operand(e.a);
          break;
        case Expression::Kind::kBinary:
          rule("expr", 1);
          rule("binary_expr", 0);
          operand(e.a);
          terminal("binary_op", e.op);
          operand(e.b);
          break;
      }
    }
    return std::move(out_);
  }

 private:
  void rule(std::string_view lhs, int alt) { out_.push_back(g_.production_of(lhs, alt)); }

  void terminal(std::string_view lhs, std::string_view text) {
    for (ProductionId p : g_.alternatives(g_.nonterminal(lhs))) {
      const Production& prod = g_.production(p);
      if (prod.rhs.size() == 1 && g_.symbol(prod.rhs[0]).name == text) {
        out_.push_back(p);
        return;
      }
    }
    throw Error("no <" + std::string(lhs) + "> alternative for '" + std::string(text) + "'");
  }

  void var(int id) {
    rule("var", 0);
    terminal("var_id", std::to_string(id));
  }

  void lhs(int id) {
    rule("lhs", 0);
    var(id);
  }

  void operand(const Operand& o) {
    if (o.is_var) {
      rule("operand", 0);
      var(o.var);
      return;
    }
    rule("operand", 1);
    if (o.text.size() == 3) {
      rule("immediate_number", 0);
      terminal("digit", o.text.substr(0, 1));
      terminal("digit", o.text.substr(2, 1));
    } else {
      rule("immediate_number", 1);
      terminal("digit", o.text);
    }
  }

  const Grammar& g_;
  std::vector<ProductionId> out_;
};

std::string subtree_yield(const DerivationTree& tree, NodeId node) {
  if (tree.is_terminal(node)) return tree.symbol_of(node).name;
  std::string out;
  for (NodeId c : tree.node(node).children) out += subtree_yield(tree, c);
  return out;
}

int var_of(const DerivationTree& tree, NodeId var) {
  return subtree_yield(tree, var)[1] - '0';
}

Operand operand_of(const DerivationTree& tree, NodeId node) {
  Operand o;
  NodeId child = tree.node(node).children.at(0);
  if (tree.grammar().alternative_index(tree.node(node).production) == 0) {
    o.is_var = true;
    o.var = var_of(tree, child);
  } else {
    o.text = subtree_yield(tree, child);
  }
  return o;
}

std::shared_ptr<const AttributeSchema> cached_schema(const DerivationTree& tree,
                                                     bool single_assignment) {
  static std::mutex mu;
  static std::map<std::pair<uint64_t, bool>, std::shared_ptr<const AttributeSchema>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(tree.grammar().fingerprint(), single_assignment);
  auto& slot = cache[key];
  if (!slot) {
    slot = std::make_shared<AttributeSchema>(
        make_program_schema(tree.grammar_ptr(), single_assignment));
  }
  return slot;
}

double apply_op(const std::string& op, double a, double b) {
  if (op == "+") return a + b;
  if (op == "-") return a - b;
  if (op == "*") return a * b;
  return a / b;
}

}  // namespace

DerivationTree parse_program(std::shared_ptr<const Grammar> grammar, std::string_view text) {
  ProgramAst ast = Parser(lex(text)).parse();
  std::vector<ProductionId> seq = Emitter(*grammar).run(ast);
  return rule_sequence_to_tree(std::move(grammar), seq);
}

CheckReport check_program(const DerivationTree& tree, bool single_assignment) {
  auto schema = cached_schema(tree, single_assignment);
  DerivationTree copy = tree;
  EvaluationReport eval = evaluate_offline(*schema, copy);
  CheckReport report;
  const Grammar& g = tree.grammar();
  SymbolId stat = g.nonterminal("stat");
  SymbolId stat_list = g.nonterminal("stat_list");
  std::map<NodeId, int> stat_index;
  for (NodeId n : tree.preorder()) {
    if (tree.node(n).symbol == stat) {
      int k = static_cast<int>(stat_index.size()) + 1;
      stat_index[n] = k;
    }
  }
  for (const Violation& v : eval.violations) {
    NodeId n = v.node;
    if (tree.node(n).symbol == stat_list) {
      n = tree.node(n).children.at(0);
    } else {
      while (n != kNoNode && tree.node(n).symbol != stat) n = tree.node(n).parent;
    }
    std::string location =
        n == kNoNode ? "program" : "statement " + std::to_string(stat_index.at(n));
    report.add(v.rule, location, v.node);
  }
  return report;
}

ProgramAst ast_from_tree(const DerivationTree& tree) {
  if (!tree.complete()) throw Error("ast_from_tree needs a complete tree");
  ProgramAst ast;
  const Grammar& g = tree.grammar();
  SymbolId assign = g.nonterminal("assign");
  SymbolId unary = g.nonterminal("unary_expr");
  NodeId list = tree.node(tree.root()).children.at(0);
  while (true) {
    const auto& kids = tree.node(list).children;
    NodeId inner = tree.node(kids[0]).children.at(0);
    const auto& parts = tree.node(inner).children;
    Statement st;
    if (tree.node(inner).symbol == assign) {
      st.target = var_of(tree, parts[0]);
      NodeId expr = tree.node(parts[2]).children.at(0);
      NodeId e = tree.node(expr).children.at(0);
      const auto& ek = tree.node(e).children;
      Expression& x = st.rhs;
      if (tree.node(e).symbol == unary) {
        bool func = g.alternative_index(tree.node(e).production) == 1;
        x.kind = func ? Expression::Kind::kUnaryFunc : Expression::Kind::kUnaryOp;
        x.op = subtree_yield(tree, ek[0]);
        x.a = operand_of(tree, ek[func ? 2 : 1]);
      } else {
        x.kind = Expression::Kind::kBinary;
        x.a = operand_of(tree, ek[0]);
        x.op = subtree_yield(tree, ek[1]);
        x.b = operand_of(tree, ek[2]);
      }
    } else {
      st.is_return = true;
      st.target = var_of(tree, parts[1]);
    }
    ast.statements.push_back(std::move(st));
    if (kids.size() < 3) break;
    list = kids[2];
  }
  return ast;
}

std::string to_text(const ProgramAst& ast) {
  auto operand = [](const Operand& o) { return o.is_var ? "v" + std::to_string(o.var) : o.text; };
  std::string out;
  for (std::size_t i = 0; i < ast.statements.size(); ++i) {
    if (i) out += ';';
    const Statement& st = ast.statements[i];
    if (st.is_return) {
      out += "return:v" + std::to_string(st.target);
      continue;
    }
    out += "v" + std::to_string(st.target) + "=";
    const Expression& e = st.rhs;
    switch (e.kind) {
      case Expression::Kind::kUnaryOp: out += e.op + operand(e.a); break;
      case Expression::Kind::kUnaryFunc: out += e.op + "(" + operand(e.a) + ")"; break;
      case Expression::Kind::kBinary: out += operand(e.a) + e.op + operand(e.b); break;
    }
  }
  return out;
}

double interpret(const ProgramAst& ast, double v0) {
  std::array<double, 10> v{};
  v[0] = v0;
  auto value = [&](const Operand& o) { return o.is_var ? v[o.var] : std::stod(o.text); };
  for (const Statement& st : ast.statements) {
    if (st.is_return) return v[st.target];
    const Expression& e = st.rhs;
    double a = value(e.a);
    double r = 0.0;
    switch (e.kind) {
      case Expression::Kind::kUnaryOp: r = e.op == "-" ? -a : a; break;
      case Expression::Kind::kUnaryFunc:
        r = e.op == "sin" ? std::sin(a) : e.op == "cos" ? std::cos(a) : std::exp(a);
        break;
      case Expression::Kind::kBinary: r = apply_op(e.op, a, value(e.b)); break;
    }
    v[st.target] = r;
  }
  throw Error("program has no return statement");
}

const std::vector<double>& distance_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> xs(1000);
    for (int i = 0; i < 1000; ++i) xs[i] = -5.0 + 10.0 * i / 999.0;
    return xs;
  }();
  return grid;
}

double program_distance(const ProgramAst& candidate, const ProgramAst& target) {
  auto clamp = [](double y) { return std::isfinite(y) ? y : kDistanceSentinel; };
  double sum = 0.0;
  const auto& grid = distance_grid();
  for (double x : grid) {
    double d = clamp(interpret(candidate, x)) - clamp(interpret(target, x));
    sum += d * d;
  }
  return std::log1p(sum / static_cast<double>(grid.size()));
}

std::string generate_program(const std::shared_ptr<const Grammar>& grammar, Rng& rng,
                             const CorpusOptions& options) {
  static const char* kFuncs[] = {"sin", "cos", "exp"};
  static const char* kBinary[] = {"+", "-", "*", "/"};
  while (true) {
    int span = options.max_assignments - options.min_assignments + 1;
    int n = options.min_assignments + static_cast<int>(rng.below(span));
    std::vector<int> defined{0};
    auto immediate = [&] {
      std::string text(1, static_cast<char>('0' + rng.below(10)));
      if (rng.uniform() < 0.3) text += "." + std::string(1, static_cast<char>('0' + rng.below(10)));
      return text;
    };
    auto operand = [&] {
      if (rng.uniform() < 0.7) return "v" + std::to_string(defined[rng.below(defined.size())]);
      return immediate();
    };
    std::string text;
    int last = 0;
    for (int i = 0; i < n; ++i) {
      int target = 1 + static_cast<int>(rng.below(9));
      text += "v" + std::to_string(target) + "=";
      double u = rng.uniform();
      if (u < 0.15) {
        text += (rng.uniform() < 0.5 ? "+" : "-") + operand();
      } else if (u < 0.45) {
        text += std::string(kFuncs[rng.below(3)]) + "(" + operand() + ")";
      } else {
        std::string a = operand();
        text += a + kBinary[rng.below(4)] + operand();
      }
      text += ";";
      if (std::find(defined.begin(), defined.end(), target) == defined.end()) {
        defined.push_back(target);
      }
      last = target;
    }
    int ret = rng.uniform() < 0.85 ? last : defined[rng.below(defined.size())];
    text += "return:v" + std::to_string(ret);
    DerivationTree tree = parse_program(grammar, text);
    if (static_cast<int>(tree_to_rule_sequence(tree).size()) > options.max_steps) continue;
    if (!check_program(tree).valid) throw Error("generated an invalid program: " + text);
    return text;
  }
}

}  // namespace sdgen
