#ifndef SDGEN_LANGUAGE_H_
#define SDGEN_LANGUAGE_H_

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "sdgen/check.h"
#include "sdgen/decoder.h"

namespace sdgen {

/// Everything the tools need about one shipped language.
struct Language {
  std::string id;  // "program", "smiles" or "toy"
  std::shared_ptr<const Grammar> grammar;
  std::shared_ptr<const AttributeSchema> schema;
  std::shared_ptr<const GuideFactory> guides;
  std::function<DerivationTree(std::string_view)> parse;
  std::function<CheckReport(const DerivationTree&)> check;
  int default_max_steps = 80;

  DecodeSetup setup(std::shared_ptr<const Scorer> scorer) const;
};

/// $SDGEN_GRAMMAR_DIR if set, else the source tree's grammars/ directory.
std::string grammar_dir();

/// Loads grammar, schema and guide for `id`. `single_assignment` applies to
/// the program language only.
Language load_language(std::string_view id, bool single_assignment = false);

/// Parser for the toy grammar: "CCC", "C-1CC-1", ...
DerivationTree parse_toy(std::shared_ptr<const Grammar> grammar, std::string_view text);

}  // namespace sdgen

#endif  // SDGEN_LANGUAGE_H_
