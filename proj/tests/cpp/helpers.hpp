// Shared utilities for the unit and property suites.

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mezzo/driver.hpp"
#include "mezzo/error.hpp"
#include "mezzo/parser.hpp"

#ifndef MEZZO_PROGRAMS_DIR
#define MEZZO_PROGRAMS_DIR "tests/programs"
#endif

namespace testutil {

inline std::string programs_dir() { return MEZZO_PROGRAMS_DIR; }

inline std::string slurp(const std::string& rel) {
  std::string path = programs_dir() + "/" + rel;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Checks a corpus program, returning the rule name on failure and "" on
// success.
inline std::string check_rule(const std::string& rel, int depth = 8) {
  try {
    mezzo::check_source(slurp(rel), rel, depth, 0);
    return "";
  } catch (const mezzo::CompileError& e) {
    return e.rule;
  }
}

// A tiny deterministic generator for property tests.
struct Lcg {
  uint64_t s;
  explicit Lcg(uint64_t seed) : s(seed) {}
  uint64_t next() {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    return s >> 17;
  }
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }
  bool flip() { return next() & 1; }
};

}  // namespace testutil
