#ifndef SDGEN_SCHEMAS_H_
#define SDGEN_SCHEMAS_H_

#include <memory>

#include "sdgen/attributes.h"

namespace sdgen {

/// Ring-pair check of the three-carbon toy grammar: s.matched, s.ok, atom.set,
/// bond.val, digit.val and the lazy s.sa (C_a = 1).
AttributeSchema make_toy_schema(std::shared_ptr<const Grammar> grammar);

/// Def-before-use, return placement and statement budget for programs.
/// With `single_assignment`, redefining a variable (v0 included) is a violation.
AttributeSchema make_program_schema(std::shared_ptr<const Grammar> grammar,
                                    bool single_assignment = false);

/// Ring-digit toggling (open/closed digit sets) over SMILES chains, with the
/// per-atom lazy ring set <branched_atom>.sa (C_a = 8).
AttributeSchema make_smiles_schema(std::shared_ptr<const Grammar> grammar);

/// Toy-grammar fixture whose <atom>.loop reads itself: every tree containing
/// an <atom> has a circular attribute instance.
AttributeSchema make_self_loop_fixture(std::shared_ptr<const Grammar> grammar);

/// Largest number of statements (return excluded) a program may have.
inline constexpr int kMaxAssignments = 9;
/// Ring digits 1..8, one lazy bit each.
inline constexpr int kRingDigits = 8;

}  // namespace sdgen

#endif  // SDGEN_SCHEMAS_H_
