// The batch pipeline: parse, kind check, desugar, facts, type check, and
// optionally run.  Stages are strictly ordered; each one runs only if the
// previous succeeded.

#pragma once

#include <cstdint>
#include <string>

#include "mezzo/facts.hpp"
#include "mezzo/interp.hpp"
#include "mezzo/kindcheck.hpp"
#include "mezzo/syntax.hpp"
#include "mezzo/typecheck.hpp"

namespace mezzo {

struct CheckedProgram {
  Program surface;  // as parsed
  Program core;     // desugared; value bodies not yet normalized
  ProgramEnv env;   // tables over the translated definitions
  FactEnv facts;
  CheckResult check;
};

// Runs the static pipeline.  Throws ParseError, KindError, FactError, or
// TypeError.  `seed` starts the fresh-name counter.
CheckedProgram check_source(const std::string& source, const std::string& filename,
                            int depth = 8, uint64_t seed = 0);

// One line per atom per recorded program point, each point introduced by a
// "at <line>:<col>" header; atom lines are sorted.
std::string render_perm_dump(const CheckedProgram& cp);

// Normalizes the core program's value bodies for evaluation.
Program normalize_program(const Program& core);

// Exit codes shared by the CLI and the tests.
enum ExitCode {
  ExitOk = 0,
  ExitTypeError = 1,
  ExitKindError = 2,
  ExitParseError = 3,
  ExitRuntimeError = 4,
  ExitInternalError = 5,
};

}  // namespace mezzo
