#pragma once

#include "sla/syntax.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sla {

// Concrete syntax:
//   pred lst(i) := i = 0 /\ emp \/ (exists j. i |-> j * lst(j));
//   vars j, l;
//   ctx f : pi i. {lst(i)}-{emp};
//   def rd : pi i. {i |-> -}-{i |-> -} := \i. ...;
//   goal M : T;
// Comments run from // to end of line.
Program parse_program(std::string_view src);

ExprPtr parse_expr(std::string_view src);
AssertionPtr parse_assertion(std::string_view src);
TypePtr parse_type(std::string_view src);
// term_vars lists identifiers that denote term variables, so `f j` can tell
// a term argument from an integer argument.
TermPtr parse_term(std::string_view src, const std::vector<std::string> &term_vars = {});
Script parse_script(std::string_view src);

} // namespace sla
