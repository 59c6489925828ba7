// Command line front end.  `mzc check` runs the static pipeline and can dump
// inferred facts or the permission trace; `mzc run` evaluates the program.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mezzo/desugar.hpp"
#include "mezzo/driver.hpp"
#include "mezzo/error.hpp"
#include "mezzo/facts.hpp"
#include "mezzo/interp.hpp"
#include "mezzo/kindcheck.hpp"
#include "mezzo/parser.hpp"
#include "mezzo/syntax.hpp"

using namespace mezzo;

namespace {

uint64_t seed_from_env() {
  const char* s = std::getenv("MZC_SEED");
  if (!s || !*s) return 0;
  return std::strtoull(s, nullptr, 10);
}

int read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "mzc: cannot open " << path << "\n";
    return ExitInternalError;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return ExitOk;
}

int static_error(const std::string& file, const CompileError& e) {
  std::cerr << e.render(file) << "\n";
  if (auto* te = dynamic_cast<const TypeError*>(&e))
    for (const std::string& a : te->missing) std::cerr << "  missing: " << a << "\n";
  if (dynamic_cast<const ParseError*>(&e)) return ExitParseError;
  if (dynamic_cast<const KindError*>(&e)) return ExitKindError;
  return ExitTypeError;  // type and fact errors share the bucket
}

int run_program_common(const ProgramEnv& env, const Program& core) {
  Program norm = normalize_program(core);
  Evaluator ev(env);
  try {
    Value v = ev.run_program(norm);
    std::cout << ev.show(v) << "\n";
    return ExitOk;
  } catch (const RuntimeAbort& a) {
    switch (a.kind) {
      case AbortKind::AbandonFailure:
        std::cout << "abandon failed at " << a.loc.line << "\n";
        return ExitRuntimeError;
      case AbortKind::ExplicitFail:
      case AbortKind::GiveToAdopted:
      case AbortKind::WriteToFrozen:
        std::cerr << "runtime error: " << a.msg << " at " << a.loc.line << ":"
                  << a.loc.col << "\n";
        return ExitRuntimeError;
      default:
        std::cerr << "internal error: " << abort_kind_name(a.kind) << ": " << a.msg
                  << "\n";
        return ExitInternalError;
    }
  }
}

int cmd_check(const std::string& file, bool dump_perms, bool dump_fact_table,
              int depth) {
  std::string src;
  if (int rc = read_file(file, src)) return rc;
  try {
    CheckedProgram cp = check_source(src, file, depth, seed_from_env());
    if (dump_fact_table) std::cout << dump_facts(cp.env, cp.facts);
    if (dump_perms) std::cout << render_perm_dump(cp);
    return ExitOk;
  } catch (const CompileError& e) {
    return static_error(file, e);
  }
}

int cmd_run(const std::string& file, bool unchecked, int depth) {
  std::string src;
  if (int rc = read_file(file, src)) return rc;
  if (!unchecked) {
    try {
      CheckedProgram cp = check_source(src, file, depth, seed_from_env());
      return run_program_common(cp.env, cp.core);
    } catch (const CompileError& e) {
      return static_error(file, e);
    }
  }
  // Unchecked: parsing, kinds, and the translation still have to succeed
  // (evaluation reads the constructor tables), but facts and permissions
  // are skipped.
  try {
    names::reset(seed_from_env());
    Program surface = parse_program(src, file);
    ProgramEnv env0 = check_program(surface);
    Program core = desugar_program(env0, surface);
    ProgramEnv env = check_program(core);
    return run_program_common(env, core);
  } catch (const CompileError& e) {
    return static_error(file, e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mzc: checker and interpreter for a small language with"
               " permission-based ownership"};
  app.require_subcommand(1);

  std::string file;
  bool dump_perms = false, dump_fact_table = false, unchecked = false;
  int depth = 8;

  CLI::App* check = app.add_subcommand("check", "type check a program");
  check->add_option("file", file, "source file")->required();
  check->add_flag("--dump-perms", dump_perms, "print permissions at each program point");
  check->add_flag("--dump-facts", dump_fact_table, "print inferred facts per type");
  check->add_option("--depth", depth, "proof search budget");

  CLI::App* run = app.add_subcommand("run", "type check and evaluate a program");
  run->add_option("file", file, "source file")->required();
  run->add_flag("--unchecked", unchecked, "evaluate even if checking fails");
  run->add_option("--depth", depth, "proof search budget");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(check)) return cmd_check(file, dump_perms, dump_fact_table, depth);
  return cmd_run(file, unchecked, depth);
}
