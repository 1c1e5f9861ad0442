#ifndef SDGEN_CHECK_H_
#define SDGEN_CHECK_H_

#include <string>
#include <vector>

#include "sdgen/tree.h"

namespace sdgen {

struct CheckViolation {
  std::string rule;      // e.g. "undefined-use", "ring-unmatched", "valence"
  std::string location;  // human-readable: "statement 3", "atom 5 (N)"
  NodeId node = kNoNode;
};

/// Result of an offline semantic check. valid iff violations is empty.
struct CheckReport {
  bool valid = true;
  std::vector<CheckViolation> violations;

  void add(std::string rule, std::string location, NodeId node) {
    violations.push_back({std::move(rule), std::move(location), node});
    valid = false;
  }
};

/// Raised by the frontends for text that does not lex or parse. `position`
/// is the 0-based byte offset of the offending character.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position)
      : Error(message + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace sdgen

#endif  // SDGEN_CHECK_H_
