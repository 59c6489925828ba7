// Diagnostics.  Every stage throws a subclass of CompileError carrying a
// source location and the name of the rule whose side condition failed;
// the driver renders them as  <file>:<line>:<col>: error[<Rule>]: <msg>.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mezzo/syntax.hpp"

namespace mezzo {

struct CompileError : std::runtime_error {
  Loc loc;
  std::string rule;

  CompileError(Loc l, std::string r, const std::string& msg)
      : std::runtime_error(msg), loc(l), rule(std::move(r)) {}

  std::string render(const std::string& filename) const {
    std::string s = filename;
    s += ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col);
    s += ": error[" + rule + "]: ";
    s += what();
    return s;
  }
};

struct ParseError : CompileError {
  std::vector<std::string> expected;
  ParseError(Loc l, const std::string& msg, std::vector<std::string> exp = {})
      : CompileError(l, "Parse", msg), expected(std::move(exp)) {}
};

struct KindError : CompileError {
  using CompileError::CompileError;
};

struct TypeError : CompileError {
  // Pretty-printed atoms the subsumption engine could not discharge, when
  // the failure is a missing permission.
  std::vector<std::string> missing;
  TypeError(Loc l, std::string rule, const std::string& msg,
            std::vector<std::string> missing_atoms = {})
      : CompileError(l, std::move(rule), msg), missing(std::move(missing_atoms)) {}
};

struct FactError : CompileError {
  using CompileError::CompileError;
};

}  // namespace mezzo
