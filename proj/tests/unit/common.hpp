#pragma once

#include "sla/harness.hpp"
#include "sla/parser.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace test {

inline const std::filesystem::path corpus = SLA_CORPUS_DIR;

inline std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline sla::CheckedProgram load(const std::string &name, sla::Mode mode = sla::Mode::Precise,
                                sla::Universe u = {}) {
  return sla::check_program(sla::parse_program(slurp(corpus / name)), mode, u);
}

inline sla::Universe universe(sla::Loc loc_max, sla::Val val_min, sla::Val val_max) {
  sla::Universe u;
  u.loc_max = loc_max;
  u.val_min = val_min;
  u.val_max = val_max;
  return u;
}

inline const sla::Derivation &def(const sla::CheckedProgram &p, const std::string &name) {
  for (auto &d : p.decls)
    if (d.name == name && d.derivation)
      return *d.derivation;
  throw sla::SlaError("no def " + name);
}

inline std::string outcomes(const sla::Den &c, const std::string &heap) {
  return sla::to_string(c(sla::parse_heap(heap)));
}

} // namespace test
