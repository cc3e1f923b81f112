#include "sla/harness.hpp"
#include "sla/json.hpp"
#include "sla/parser.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sla;

namespace {

Universe make_universe(Val loc_max, Val val_min, Val val_max, int fix_budget) {
  Universe u;
  u.loc_max = loc_max;
  u.val_min = val_min;
  u.val_max = val_max;
  u.fix_budget = fix_budget;
  u.validate();
  return u;
}

// Derivation dump of every def and the goal, as JSON text.
std::string check(const std::string &src, const std::string &mode, Val loc_max, Val val_min, Val val_max,
                  int fix_budget) {
  CheckedProgram cp = check_program(parse_program(src), parse_mode(mode),
                                    make_universe(loc_max, val_min, val_max, fix_budget));
  nlohmann::json j;
  j["decls"] = nlohmann::json::array();
  for (auto &d : cp.decls) {
    nlohmann::json e{{"name", d.name}, {"type", to_string(d.type)}};
    if (d.derivation) {
      e["derivation"] = to_json(*d.derivation);
      e["skeleton"] = rule_skeleton(*d.derivation);
    }
    j["decls"].push_back(e);
  }
  if (cp.goal) {
    j["goal"] = to_json(*cp.goal);
    j["goal_skeleton"] = rule_skeleton(*cp.goal);
  }
  return j.dump();
}

std::pair<std::string, bool> run(const std::string &src, const std::string &heap, const std::string &env,
                                 const std::string &def, const std::string &mode, Val loc_max, Val val_min,
                                 Val val_max, int fix_budget) {
  Universe u = make_universe(loc_max, val_min, val_max, fix_budget);
  CheckedProgram cp = check_program(parse_program(src), parse_mode(mode), u);
  RunResult r = run_program(cp, def, parse_env(env), parse_heap(heap), u);
  return {to_string(r.outcomes), r.approximate};
}

std::pair<std::string, int> harness(const std::string &suite, const std::string &corpus, const std::string &mode,
                                    bool imprecise_demo, Val loc_max, Val val_min, Val val_max, int fix_budget) {
  HarnessConfig cfg;
  cfg.universe = make_universe(loc_max, val_min, val_max, fix_budget);
  cfg.mode = parse_mode(mode);
  cfg.imprecise_demo = imprecise_demo;
  cfg.corpus_dir = corpus.empty() ? std::string(SLA_CORPUS_DIR) : corpus;
  py::gil_scoped_release release;
  auto reports = run_suite(suite, cfg);
  std::string out;
  for (auto &r : reports)
    out += to_json(r, false).dump() + "\n";
  return {out, exit_code(reports)};
}

// (precise, witness heap, satisfying subheaps) over closed assertions.
py::tuple is_precise_closed(const std::string &assertion, const std::string &preds, Val loc_max, Val val_min,
                            Val val_max) {
  Universe u = make_universe(loc_max, val_min, val_max, 16);
  Program p = parse_program(preds);
  Model m = Model::bounded(u, std::make_shared<const PredDefs>(p.preds));
  AssertionPtr a = parse_assertion(assertion);
  PrecisionResult r = is_precise(free_vars(a), a, m);
  std::vector<std::string> subs;
  for (auto &h : r.subheaps)
    subs.push_back(to_string(h));
  return py::make_tuple(r.precise, r.precise ? std::string() : to_string(r.heap), subs);
}

} // namespace

PYBIND11_MODULE(_sla, m) {
  py::register_exception<SlaError>(m, "SlaError", PyExc_ValueError);
  m.attr("default_corpus") = std::string(SLA_CORPUS_DIR);
  m.def("check", &check, py::arg("source"), py::arg("mode"), py::arg("loc_max"), py::arg("val_min"),
        py::arg("val_max"), py::arg("fix_budget"));
  m.def("run", &run, py::arg("source"), py::arg("heap"), py::arg("env"), py::arg("def_name"), py::arg("mode"),
        py::arg("loc_max"), py::arg("val_min"), py::arg("val_max"), py::arg("fix_budget"));
  m.def("harness", &harness, py::arg("suite"), py::arg("corpus"), py::arg("mode"), py::arg("imprecise_demo"),
        py::arg("loc_max"), py::arg("val_min"), py::arg("val_max"), py::arg("fix_budget"));
  m.def("is_precise", &is_precise_closed, py::arg("assertion"), py::arg("preds"), py::arg("loc_max"),
        py::arg("val_min"), py::arg("val_max"));
  m.def("normalize_heap", [](const std::string &h) { return to_string(parse_heap(h)); });
}
