// Evaluation.  Big-step over desugared, normalized programs, with an
// explicit heap.  Every block carries a hidden adopter slot; give writes
// the adopter's address into it, take checks it and aborts the run on a
// mismatch.  Retagging into an immutable constructor freezes the block.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mezzo/kindcheck.hpp"
#include "mezzo/syntax.hpp"

namespace mezzo {

enum class AbortKind {
  AbandonFailure,  // take found a different adopter
  ExplicitFail,    // the fail expression
  GiveToAdopted,   // give to a block that already has an adopter
  WriteToFrozen,   // field or tag write on a frozen block
  StuckState,      // shape mismatch; signals a checker bug
  RecursionLimit,
};

const char* abort_kind_name(AbortKind k);

struct RuntimeAbort {
  AbortKind kind;
  Loc loc;
  std::string msg;
};

struct Value {
  enum class Tag : uint8_t { IntV, BoolV, TupleV, BlockRef, Closure } tag = Tag::IntV;
  int64_t i = 0;
  bool b = false;
  std::vector<Value> tuple;
  size_t loc = 0;  // BlockRef: heap index
  Expr lambda;     // Closure
  std::shared_ptr<const std::map<std::string, Value>> captured;
};

struct Block {
  std::string tag;
  std::vector<std::pair<std::string, Value>> fields;
  std::optional<size_t> adopter;
  bool frozen = false;
};

struct Event {
  enum class Kind : uint8_t { Alloc, Read, Write, Retag, Give, Take } kind;
  size_t loc;          // block
  std::string detail;  // ctor or field name
};

class Evaluator {
 public:
  Evaluator(const ProgramEnv& prog, int recursion_limit = 100000)
      : prog_(prog), limit_(recursion_limit) {}

  // Evaluates the top-level values of a normalized core program in order;
  // returns the value of the last one.  Throws RuntimeAbort.
  Value run_program(const Program& p);

  // Applies a function value; the entry point for test harnesses.
  Value call(const Value& fn, const Value& arg);

  Value global(const std::string& name) const;
  const std::vector<Event>& events() const { return events_; }
  const Block& block(size_t loc) const { return heap_.at(loc); }

  std::string show(const Value& v) const;

  static Value v_int(int64_t n);
  static Value v_bool(bool b);
  static Value v_tuple(std::vector<Value> comps);
  static Value v_unit() { return v_tuple({}); }

 private:
  using Env = std::map<std::string, Value>;

  Value eval(const Expr& e, Env& env);
  Value call_at(const Value& fn, const Value& arg, const Loc& loc);
  bool match_pattern(const Pattern& p, const Value& v, Env& env);
  void bind_or_stuck(const Pattern& p, const Value& v, Env& env, const Loc& loc);
  Block& deref(const Value& v, const Loc& loc);
  [[noreturn]] void stuck(const Loc& loc, const std::string& msg);

  const ProgramEnv& prog_;
  int limit_;
  int depth_ = 0;
  std::vector<Block> heap_;
  std::map<std::string, Value> globals_;
  std::vector<Event> events_;
};

}  // namespace mezzo
