#include "mezzo/interp.hpp"

#include <cassert>
#include <set>
#include <sstream>

namespace mezzo {

const char* abort_kind_name(AbortKind k) {
  switch (k) {
    case AbortKind::AbandonFailure:
      return "AbandonFailure";
    case AbortKind::ExplicitFail:
      return "ExplicitFail";
    case AbortKind::GiveToAdopted:
      return "GiveToAdopted";
    case AbortKind::WriteToFrozen:
      return "WriteToFrozen";
    case AbortKind::StuckState:
      return "StuckState";
    case AbortKind::RecursionLimit:
      return "RecursionLimit";
  }
  return "?";
}

Value Evaluator::v_int(int64_t n) {
  Value v;
  v.tag = Value::Tag::IntV;
  v.i = n;
  return v;
}

Value Evaluator::v_bool(bool b) {
  Value v;
  v.tag = Value::Tag::BoolV;
  v.b = b;
  return v;
}

Value Evaluator::v_tuple(std::vector<Value> comps) {
  Value v;
  v.tag = Value::Tag::TupleV;
  v.tuple = std::move(comps);
  return v;
}

void Evaluator::stuck(const Loc& loc, const std::string& msg) {
  throw RuntimeAbort{AbortKind::StuckState, loc, msg};
}

Block& Evaluator::deref(const Value& v, const Loc& loc) {
  if (v.tag != Value::Tag::BlockRef) stuck(loc, "expected a heap block");
  return heap_[v.loc];
}

// Physical equality: blocks by address, immediates by value.
static bool phys_equal(const Value& a, const Value& b) {
  if (a.tag != b.tag) return false;
  switch (a.tag) {
    case Value::Tag::IntV:
      return a.i == b.i;
    case Value::Tag::BoolV:
      return a.b == b.b;
    case Value::Tag::BlockRef:
      return a.loc == b.loc;
    case Value::Tag::TupleV: {
      if (a.tuple.size() != b.tuple.size()) return false;
      for (size_t i = 0; i < a.tuple.size(); ++i)
        if (!phys_equal(a.tuple[i], b.tuple[i])) return false;
      return true;
    }
    case Value::Tag::Closure:
      return a.lambda == b.lambda && a.captured == b.captured;
  }
  return false;
}

bool Evaluator::match_pattern(const Pattern& p, const Value& v, Env& env) {
  switch (p->tag) {
    case PatTag::Var:
      if (p->name != "_") env[p->name] = v;
      return true;
    case PatTag::Tuple: {
      if (v.tag != Value::Tag::TupleV || v.tuple.size() != p->kids.size()) return false;
      for (size_t i = 0; i < p->kids.size(); ++i)
        if (!match_pattern(p->kids[i], v.tuple[i], env)) return false;
      return true;
    }
    case PatTag::Ctor: {
      if (v.tag != Value::Tag::BlockRef) return false;
      const Block& blk = heap_[v.loc];
      if (blk.tag != p->name) return false;
      for (auto& [fname, sub] : p->fields) {
        const Value* fv = nullptr;
        for (auto& [bn, bv] : blk.fields)
          if (bn == fname) fv = &bv;
        if (!fv) return false;
        if (!match_pattern(sub, *fv, env)) return false;
      }
      return true;
    }
  }
  return false;
}

void Evaluator::bind_or_stuck(const Pattern& p, const Value& v, Env& env, const Loc& loc) {
  if (!match_pattern(p, v, env)) stuck(loc, "irrefutable pattern did not match");
}

Value Evaluator::eval(const Expr& e, Env& env) {
  switch (e->tag) {
    case ExTag::Var: {
      auto it = env.find(e->name);
      if (it != env.end()) return it->second;
      auto gt = globals_.find(e->name);
      if (gt != globals_.end()) return gt->second;
      stuck(e->loc, "unbound variable " + e->name);
    }
    case ExTag::IntLit:
      return v_int(e->int_val);
    case ExTag::BoolLit:
      return v_bool(e->bool_val);
    case ExTag::TupleE: {
      std::vector<Value> comps;
      for (auto& k : e->kids) comps.push_back(eval(k, env));
      return v_tuple(std::move(comps));
    }
    case ExTag::Construct: {
      const DataDef* def = prog_.def_of_ctor(e->name);
      const DataBranch* br = prog_.branch_of_ctor(e->name);
      if (!br) stuck(e->loc, "unknown constructor " + e->name);
      Block blk;
      blk.tag = e->name;
      for (auto& [fname, ftype] : br->fields) {
        (void)ftype;
        const Expr* init = nullptr;
        for (auto& [n, v] : e->field_inits)
          if (n == fname) init = &v;
        if (!init) stuck(e->loc, "missing field " + fname);
        blk.fields.emplace_back(fname, eval(*init, env));
      }
      blk.frozen = !def->is_mutable;
      heap_.push_back(std::move(blk));
      events_.push_back({Event::Kind::Alloc, heap_.size() - 1, e->name});
      Value v;
      v.tag = Value::Tag::BlockRef;
      v.loc = heap_.size() - 1;
      return v;
    }
    case ExTag::Let: {
      Value rhs = eval(e->kids[0], env);
      Env inner = env;
      bind_or_stuck(e->pat, rhs, inner, e->loc);
      return eval(e->kids[1], inner);
    }
    case ExTag::Lambda: {
      Value v;
      v.tag = Value::Tag::Closure;
      v.lambda = e;
      v.captured = std::make_shared<const std::map<std::string, Value>>(env);
      return v;
    }
    case ExTag::TypeApp:
      return eval(e->kids[0], env);
    case ExTag::Apply: {
      Value f = eval(e->kids[0], env);
      Value a = eval(e->kids[1], env);
      return call_at(f, a, e->loc);
    }
    case ExTag::MatchE: {
      Value s = eval(e->kids[0], env);
      for (auto& [p, body] : e->arms) {
        Env inner = env;
        if (match_pattern(p, s, inner)) return eval(body, inner);
      }
      stuck(e->loc, "no branch matched");
    }
    case ExTag::IfE: {
      Value c = eval(e->kids[0], env);
      if (c.tag != Value::Tag::BoolV) stuck(e->loc, "condition is not a bool");
      return eval(c.b ? e->kids[1] : e->kids[2], env);
    }
    case ExTag::Read: {
      Value x = eval(e->kids[0], env);
      Block& blk = deref(x, e->loc);
      events_.push_back({Event::Kind::Read, x.loc, e->field});
      for (auto& [fname, fv] : blk.fields)
        if (fname == e->field) return fv;
      stuck(e->loc, blk.tag + " has no field " + e->field);
    }
    case ExTag::Write: {
      Value x = eval(e->kids[0], env);
      Value v = eval(e->kids[1], env);
      Block& blk = deref(x, e->loc);
      if (blk.frozen)
        throw RuntimeAbort{AbortKind::WriteToFrozen, e->loc,
                           "write to frozen block " + blk.tag};
      for (auto& [fname, fv] : blk.fields)
        if (fname == e->field) {
          fv = v;
          events_.push_back({Event::Kind::Write, x.loc, e->field});
          return v_unit();
        }
      stuck(e->loc, blk.tag + " has no field " + e->field);
    }
    case ExTag::WriteTag: {
      Value x = eval(e->kids[0], env);
      Block& blk = deref(x, e->loc);
      if (blk.frozen)
        throw RuntimeAbort{AbortKind::WriteToFrozen, e->loc,
                           "retag of frozen block " + blk.tag};
      const DataDef* def = prog_.def_of_ctor(e->name);
      const DataBranch* nb = prog_.branch_of_ctor(e->name);
      if (!nb) stuck(e->loc, "unknown constructor " + e->name);
      if (nb->fields.size() != blk.fields.size())
        stuck(e->loc, "retag changes the number of fields");
      for (size_t i = 0; i < blk.fields.size(); ++i)
        blk.fields[i].first = nb->fields[i].first;
      blk.tag = e->name;
      if (!def->is_mutable) blk.frozen = true;
      events_.push_back({Event::Kind::Retag, x.loc, e->name});
      return v_unit();
    }
    case ExTag::Give: {
      Value c = eval(e->kids[0], env);
      Value b = eval(e->kids[1], env);
      Block& cb = deref(c, e->loc);
      deref(b, e->loc);
      if (cb.adopter)
        throw RuntimeAbort{AbortKind::GiveToAdopted, e->loc,
                           "block already has an adopter"};
      cb.adopter = b.loc;
      events_.push_back({Event::Kind::Give, c.loc, ""});
      return v_unit();
    }
    case ExTag::Take: {
      Value c = eval(e->kids[0], env);
      Value b = eval(e->kids[1], env);
      Block& cb = deref(c, e->loc);
      deref(b, e->loc);
      if (!cb.adopter || *cb.adopter != b.loc)
        throw RuntimeAbort{AbortKind::AbandonFailure, e->loc,
                           "the block is not adopted by " + heap_[b.loc].tag};
      cb.adopter.reset();
      events_.push_back({Event::Kind::Take, c.loc, ""});
      return v_unit();
    }
    case ExTag::FailE:
      throw RuntimeAbort{AbortKind::ExplicitFail, e->loc, "fail"};
    case ExTag::Binop: {
      Value a = eval(e->kids[0], env);
      Value b = eval(e->kids[1], env);
      if (e->name == "==") return v_bool(phys_equal(a, b));
      if (a.tag != Value::Tag::IntV || b.tag != Value::Tag::IntV)
        stuck(e->loc, "operator " + e->name + " needs ints");
      if (e->name == "+") return v_int(a.i + b.i);
      if (e->name == "-") return v_int(a.i - b.i);
      if (e->name == "*") return v_int(a.i * b.i);
      if (e->name == "<") return v_bool(a.i < b.i);
      stuck(e->loc, "unknown operator " + e->name);
    }
    case ExTag::Annot:
      return eval(e->kids[0], env);
    case ExTag::Fun:
    case ExTag::Taking:
      stuck(e->loc, "surface form reached the evaluator");
  }
  stuck(e->loc, "unhandled expression");
}

Value Evaluator::call(const Value& fn, const Value& arg) { return call_at(fn, arg, {}); }

Value Evaluator::call_at(const Value& fn, const Value& arg, const Loc& loc) {
  if (fn.tag != Value::Tag::Closure) stuck(loc, "calling a non-function");
  if (depth_ >= limit_)
    throw RuntimeAbort{AbortKind::RecursionLimit, loc, "recursion limit exceeded"};
  ++depth_;
  Env env = *fn.captured;
  env[fn.lambda->name] = arg;
  Value out = eval(fn.lambda->kids[0], env);
  --depth_;
  return out;
}

Value Evaluator::run_program(const Program& p) {
  Value last = v_unit();
  Env empty;
  for (auto& item : p.items) {
    if (item.tag != ItemTag::Val) continue;
    last = eval(item.val.body, empty);
    globals_[item.val.name] = last;
  }
  return last;
}

Value Evaluator::global(const std::string& name) const {
  auto it = globals_.find(name);
  if (it == globals_.end()) throw RuntimeAbort{AbortKind::StuckState, {}, "no value " + name};
  return it->second;
}

static void show_rec(const Evaluator& ev, const Value& v, std::set<size_t>& path,
                     std::ostringstream& out) {
  switch (v.tag) {
    case Value::Tag::IntV:
      out << v.i;
      return;
    case Value::Tag::BoolV:
      out << (v.b ? "true" : "false");
      return;
    case Value::Tag::TupleV: {
      out << "(";
      for (size_t i = 0; i < v.tuple.size(); ++i) {
        if (i) out << ", ";
        show_rec(ev, v.tuple[i], path, out);
      }
      out << ")";
      return;
    }
    case Value::Tag::Closure:
      out << "<fun>";
      return;
    case Value::Tag::BlockRef: {
      if (!path.insert(v.loc).second) {
        out << "<cycle>";
        return;
      }
      const Block& blk = ev.block(v.loc);
      out << blk.tag;
      if (!blk.fields.empty()) {
        out << " {";
        for (size_t i = 0; i < blk.fields.size(); ++i) {
          if (i) out << "; ";
          out << blk.fields[i].first << " = ";
          show_rec(ev, blk.fields[i].second, path, out);
        }
        out << "}";
      }
      path.erase(v.loc);
      return;
    }
  }
}

std::string Evaluator::show(const Value& v) const {
  std::ostringstream out;
  std::set<size_t> path;
  show_rec(*this, v, path, out);
  return out.str();
}

}  // namespace mezzo
