// Python bindings for the main operations: check a program, run it, and
// dump the inferred facts or the permission trace.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mezzo/driver.hpp"
#include "mezzo/error.hpp"
#include "mezzo/facts.hpp"
#include "mezzo/interp.hpp"
#include "mezzo/print.hpp"

namespace py = pybind11;
using namespace mezzo;

namespace {

py::dict error_dict(const CompileError& e) {
  py::dict d;
  d["ok"] = false;
  d["rule"] = e.rule;
  d["message"] = std::string(e.what());
  d["line"] = e.loc.line;
  d["col"] = e.loc.col;
  if (auto* te = dynamic_cast<const TypeError*>(&e)) d["missing"] = te->missing;
  return d;
}

py::dict check_source_py(const std::string& src, const std::string& filename,
                         int depth, uint64_t seed) {
  try {
    CheckedProgram cp = check_source(src, filename, depth, seed);
    py::dict d;
    d["ok"] = true;
    py::dict vt;
    for (const auto& [name, ty] : cp.check.value_types) vt[py::str(name)] = pretty(ty);
    d["value_types"] = vt;
    d["facts"] = dump_facts(cp.env, cp.facts);
    return d;
  } catch (const CompileError& e) {
    return error_dict(e);
  }
}

py::dict run_source_py(const std::string& src, const std::string& filename,
                       int depth, uint64_t seed) {
  try {
    CheckedProgram cp = check_source(src, filename, depth, seed);
    Program norm = normalize_program(cp.core);
    Evaluator ev(cp.env);
    try {
      Value v = ev.run_program(norm);
      py::dict d;
      d["ok"] = true;
      d["result"] = ev.show(v);
      return d;
    } catch (const RuntimeAbort& a) {
      py::dict d;
      d["ok"] = false;
      d["abort"] = std::string(abort_kind_name(a.kind));
      d["message"] = a.msg;
      d["line"] = a.loc.line;
      return d;
    }
  } catch (const CompileError& e) {
    return error_dict(e);
  }
}

std::string dump_perms_py(const std::string& src, const std::string& filename,
                          int depth, uint64_t seed) {
  return render_perm_dump(check_source(src, filename, depth, seed));
}

std::string dump_facts_py(const std::string& src, const std::string& filename,
                          int depth, uint64_t seed) {
  CheckedProgram cp = check_source(src, filename, depth, seed);
  return dump_facts(cp.env, cp.facts);
}

}  // namespace

PYBIND11_MODULE(_mezzo, m) {
  m.doc() = "checker and interpreter for a small language with permission-based ownership";
  m.def("check_source", &check_source_py, py::arg("source"),
        py::arg("filename") = "<input>", py::arg("depth") = 8, py::arg("seed") = 0,
        "Type check a program; returns a dict with ok/value_types/facts or error info.");
  m.def("run_source", &run_source_py, py::arg("source"), py::arg("filename") = "<input>",
        py::arg("depth") = 8, py::arg("seed") = 0,
        "Check and evaluate a program; returns the printed final value or abort info.");
  m.def("dump_perms_source", &dump_perms_py, py::arg("source"),
        py::arg("filename") = "<input>", py::arg("depth") = 8, py::arg("seed") = 0,
        "Render the permissions recorded at each program point.");
  m.def("dump_facts_source", &dump_facts_py, py::arg("source"),
        py::arg("filename") = "<input>", py::arg("depth") = 8, py::arg("seed") = 0,
        "Render the inferred fact for each declared type.");
}
