#ifndef SDGEN_PROGRAM_H_
#define SDGEN_PROGRAM_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sdgen/attributes.h"
#include "sdgen/check.h"
#include "sdgen/random.h"
#include "sdgen/tree.h"

namespace sdgen {

/// Parses program text (whitespace between tokens is ignored) into a tree
/// under the program grammar. Throws SyntaxError.
DerivationTree parse_program(std::shared_ptr<const Grammar> grammar, std::string_view text);

/// Offline semantic check through attribute evaluation. Violation ids:
/// undefined-use, missing-return, misplaced-return, statement-budget and,
/// with `single_assignment`, single-assignment.
CheckReport check_program(const DerivationTree& tree, bool single_assignment = false);

struct Operand {
  bool is_var = false;
  int var = 0;       // when is_var
  std::string text;  // immediate spelling, e.g. "2" or "1.5"
};

struct Expression {
  enum class Kind { kUnaryOp, kUnaryFunc, kBinary };
  Kind kind = Kind::kBinary;
  std::string op;  // '+', '-', '*', '/', "sin", "cos", "exp"
  Operand a;
  Operand b;  // kBinary only
};

struct Statement {
  bool is_return = false;
  int target = 0;  // assigned or returned variable
  Expression rhs;  // assignments only
};

struct ProgramAst {
  std::vector<Statement> statements;
};

ProgramAst ast_from_tree(const DerivationTree& tree);
std::string to_text(const ProgramAst& ast);

/// Runs the statements in order with variables v0..v9 (v0 = input, the rest
/// start at 0) and returns the value at the first return statement.
double interpret(const ProgramAst& ast, double v0);

/// log(1 + MSE) of the two programs' outputs over distance_grid(); NaN and
/// infinite outputs count as kDistanceSentinel.
double program_distance(const ProgramAst& candidate, const ProgramAst& target);

/// 1000 evenly spaced inputs on [-5, 5], both ends included.
const std::vector<double>& distance_grid();

inline constexpr double kDistanceSentinel = 1e10;

struct CorpusOptions {
  int min_assignments = 1;
  int max_assignments = 5;
  int max_steps = 80;  // programs needing more production steps are redrawn
};

/// One random semantically valid program.
std::string generate_program(const std::shared_ptr<const Grammar>& grammar, Rng& rng,
                             const CorpusOptions& options = {});

}  // namespace sdgen

#endif  // SDGEN_PROGRAM_H_
