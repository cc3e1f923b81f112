#include "sla/harness.hpp"
#include "sla/json.hpp"
#include "sla/parser.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#ifndef SLA_CORPUS_DIR
#define SLA_CORPUS_DIR "corpus"
#endif

namespace {

using namespace sla;
using nlohmann::json;

constexpr int kUsage = 3;

struct Options {
  Universe u;
  std::string mode = "precise";
  std::string pool;
  std::string format;
  std::string file;
  std::string env;
  std::string heap;
  std::string def;
  std::string suite;
  std::string corpus = SLA_CORPUS_DIR;
  bool timing = false;
  bool imprecise_demo = false;
};

struct UsageError : SlaError {
  using SlaError::SlaError;
};

void add_config(CLI::App *app, Options &o) {
  app->add_option("--loc-max", o.u.loc_max, "largest location")->capture_default_str();
  app->add_option("--val-min", o.u.val_min, "smallest value")->capture_default_str();
  app->add_option("--val-max", o.u.val_max, "largest value")->capture_default_str();
  app->add_option("--fix-budget", o.u.fix_budget, "fixpoint iteration budget")->capture_default_str();
  app->add_option("--cap", o.u.cap, "enumeration cap")->capture_default_str();
  app->add_option("--mode", o.mode, "precise or unrestricted")
      ->check(CLI::IsMember({"precise", "unrestricted"}))
      ->capture_default_str();
  app->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
}

Universe universe(const Options &o) {
  try {
    o.u.validate();
  } catch (const SlaError &e) {
    throw UsageError(e.what());
  }
  if (o.u.heap_count() > o.u.cap)
    throw UsageError("universe has more than " + std::to_string(o.u.cap) + " heaps; raise --cap or shrink it");
  return o.u;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool json_out(const Options &o, const char *fallback) { return (o.format.empty() ? fallback : o.format) == "json"; }

void report_error(const std::string &file, const SlaError &e) {
  std::cerr << file << ":" << e.what() << "\n";
  if (auto *te = dynamic_cast<const TypeError *>(&e)) {
    if (te->env() && !te->env()->empty())
      std::cerr << "  env: " << to_string(*te->env()) << "\n";
    if (te->heap())
      std::cerr << "  heap: " << to_string(*te->heap()) << "\n";
  }
}

int cmd_check(const Options &o) {
  Universe u = universe(o);
  std::string src = read_file(o.file);
  CheckedProgram cp;
  try {
    cp = check_program(parse_program(src), parse_mode(o.mode), u);
  } catch (const SlaError &e) {
    report_error(o.file, e);
    return 1;
  }
  if (json_out(o, "text")) {
    json j;
    j["file"] = o.file;
    j["mode"] = o.mode;
    j["decls"] = json::array();
    for (auto &d : cp.decls) {
      json e{{"name", d.name}, {"type", to_string(d.type)}};
      if (d.derivation)
        e["derivation"] = to_json(*d.derivation);
      j["decls"].push_back(e);
    }
    if (cp.goal)
      j["goal"] = to_json(*cp.goal);
    std::cout << j.dump() << "\n";
    return 0;
  }
  for (auto &d : cp.decls) {
    std::cout << d.name << " : " << to_string(d.type) << "\n";
    if (d.derivation)
      std::cout << "  " << rule_skeleton(*d.derivation) << "\n";
  }
  if (cp.goal)
    std::cout << "goal : " << to_string(cp.goal->type) << "\n  " << rule_skeleton(*cp.goal) << "\n";
  std::cout << "accepted (" << o.mode << " mode)\n";
  return 0;
}

int cmd_run(const Options &o) {
  Universe u = universe(o);
  std::string src = read_file(o.file);
  Env env;
  Heap heap;
  try {
    env = parse_env(o.env);
    heap = parse_heap(o.heap);
  } catch (const SlaError &e) {
    throw UsageError(e.what());
  }
  CheckedProgram cp;
  try {
    cp = check_program(parse_program(src), parse_mode(o.mode), u);
  } catch (const SlaError &e) {
    report_error(o.file, e);
    return 1;
  }
  RunResult res;
  try {
    res = run_program(cp, o.def, env, heap, u);
  } catch (const EvalError &) {
    throw;
  } catch (const SlaError &e) {
    throw UsageError(e.what());
  }
  const OutcomeSet &out = res.outcomes;
  if (json_out(o, "text"))
    std::cout << json{{"outcomes", to_string(out)}, {"converged", !res.approximate}}.dump() << "\n";
  else
    std::cout << to_string(out) << "\n";
  if (res.approximate) {
    std::cerr << "fixpoint budget exhausted; the outcome set is an under-approximation\n";
    return 2;
  }
  return 0;
}

int cmd_harness(const Options &o) {
  HarnessConfig cfg;
  cfg.universe = universe(o);
  cfg.mode = parse_mode(o.mode);
  cfg.imprecise_demo = o.imprecise_demo;
  cfg.corpus_dir = o.corpus;
  if (!o.pool.empty()) {
    std::vector<AssertionPtr> pool;
    std::stringstream ss(o.pool);
    std::string item;
    try {
      while (std::getline(ss, item, ';'))
        if (item.find_first_not_of(" \t") != std::string::npos)
          pool.push_back(parse_assertion(item));
    } catch (const SlaError &e) {
      throw UsageError(std::string("--pool: ") + e.what());
    }
    cfg.pool = pool;
  }
  std::vector<CheckReport> reports;
  try {
    reports = run_suite(o.suite, cfg);
  } catch (const CapError &e) {
    throw UsageError(e.what());
  } catch (const SlaError &e) {
    if (std::string(e.what()).rfind("unknown suite", 0) == 0 ||
        std::string(e.what()).rfind("corpus directory", 0) == 0)
      throw UsageError(e.what());
    throw;
  }
  bool as_json = json_out(o, "json");
  size_t counts[3] = {0, 0, 0};
  for (auto &r : reports) {
    ++counts[static_cast<int>(r.status)];
    if (as_json) {
      std::cout << to_json(r, o.timing).dump() << "\n";
    } else {
      std::cout << to_string(r.status) << "  " << r.check << " (" << r.cases << " cases)";
      if (o.timing)
        std::cout << " " << r.elapsed_ms << " ms";
      if (!r.witness.is_null())
        std::cout << "  " << r.witness.dump();
      std::cout << "\n";
    }
  }
  std::cerr << counts[0] << " pass, " << counts[1] << " fail, " << counts[2] << " inconclusive\n";
  return exit_code(reports);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Bounded checker for separation-logic types with higher-order frame rules"};
  app.require_subcommand(1);
  Options o;

  auto *check = app.add_subcommand("check", "type-check a program and dump its derivations");
  check->add_option("file", o.file)->required();
  add_config(check, o);

  auto *run = app.add_subcommand("run", "run the goal (or --def) on a heap");
  run->add_option("file", o.file)->required();
  run->add_option("--env", o.env, "stack and pi-binder values, e.g. \"i=1, l=2\"");
  run->add_option("--heap", o.heap, "initial heap, e.g. \"[1->0, 2->0]\"")->required();
  run->add_option("--def", o.def, "run this definition instead of the goal");
  add_config(run, o);

  auto *harness = app.add_subcommand("harness", "run semantic checks over the corpus");
  std::vector<std::string> suites = suite_names();
  suites.push_back("all");
  harness->add_option("suite", o.suite, "suite name")->required()->check(CLI::IsMember(suites));
  harness->add_option("--pool", o.pool, "frame pool base, ';'-separated assertions");
  harness->add_option("--corpus", o.corpus, "corpus directory")->capture_default_str();
  harness->add_flag("--timing", o.timing, "report elapsed_ms per check");
  harness->add_flag("--imprecise-demo", o.imprecise_demo, "also report distribution at r = true as a failure");
  add_config(harness, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  try {
    if (*check)
      return cmd_check(o);
    if (*run)
      return cmd_run(o);
    return cmd_harness(o);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SlaError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
