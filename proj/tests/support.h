#ifndef SDGEN_TESTS_SUPPORT_H_
#define SDGEN_TESTS_SUPPORT_H_

#include <fstream>
#include <string>
#include <vector>

#include "sdgen/language.h"

inline const sdgen::Language& lang(const std::string& id) {
  static const sdgen::Language toy = sdgen::load_language("toy");
  static const sdgen::Language program = sdgen::load_language("program");
  static const sdgen::Language smiles = sdgen::load_language("smiles");
  if (id == "toy") return toy;
  if (id == "program") return program;
  return smiles;
}

inline std::vector<std::string> data_lines(const std::string& name) {
  std::ifstream in(std::string(SDGEN_SOURCE_DIR) + "/data/" + name);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

#endif  // SDGEN_TESTS_SUPPORT_H_
