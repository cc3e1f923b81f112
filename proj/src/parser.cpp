#include "sla/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace sla {

namespace {

enum class Tok { Ident, Int, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

std::vector<Token> lex(std::string_view src) {
  static const char *multi[] = {"|->", "->", ":=", "/\\", "\\/", "!="};
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n')
        advance(1);
      continue;
    }
    SourcePos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), pos});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char *m : multi) {
      std::string_view mv(m);
      if (src.substr(i, mv.size()) == mv) {
        out.push_back({Tok::Sym, std::string(mv), pos});
        advance(mv.size());
        matched = true;
        break;
      }
    }
    if (matched)
      continue;
    if (std::string_view("(){}[];,.:+-*=~@\\").find(c) != std::string_view::npos) {
      out.push_back({Tok::Sym, std::string(1, c), pos});
      advance(1);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

const std::set<std::string> &keywords() {
  static const std::set<std::string> k{"pred", "vars", "ctx",    "def",    "goal",  "let",  "new",
                                       "in",   "skip", "free",   "ifz",    "fix",   "emp",  "true",
                                       "false", "exists", "forall", "pi",  "as",    "by",   "frame",
                                       "conj", "script"};
  return k;
}

bool is_top_keyword(const Token &t) {
  return t.kind == Tok::Ident &&
         (t.text == "pred" || t.text == "vars" || t.text == "ctx" || t.text == "def" || t.text == "goal" ||
          t.text == "script");
}

class Parser {
public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  std::vector<std::string> term_scope;

  const Token &peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }

  bool is_sym(const std::string &s, size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool is_kw(const std::string &s, size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == s;
  }

  [[noreturn]] void fail(const std::string &msg) const {
    const Token &t = peek();
    throw ParseError(msg + (t.kind == Tok::End ? " at end of input" : " near '" + t.text + "'"), t.pos);
  }

  void expect_sym(const std::string &s) {
    if (!is_sym(s))
      fail("expected '" + s + "'");
    ++pos_;
  }
  void expect_kw(const std::string &s) {
    if (!is_kw(s))
      fail("expected '" + s + "'");
    ++pos_;
  }
  bool accept_sym(const std::string &s) {
    if (is_sym(s)) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string ident() {
    if (peek().kind != Tok::Ident || keywords().count(peek().text))
      fail("expected identifier");
    return toks_[pos_++].text;
  }

  void expect_end() {
    if (!at_end())
      fail("unexpected trailing input");
  }

  // ---------------- expressions

  ExprPtr expr() {
    ExprPtr e = expr_atom();
    while (is_sym("+") || is_sym("-")) {
      // "- }" never continues an expression; it's the triple separator.
      if (is_sym("-") && (is_sym("{", 1) || is_sym(")", 1) || is_sym("}", 1)))
        break;
      bool plus = is_sym("+");
      ++pos_;
      ExprPtr r = expr_atom();
      e = plus ? mk::add(e, r) : mk::sub(e, r);
    }
    return e;
  }

  ExprPtr expr_atom() {
    const Token &t = peek();
    if (t.kind == Tok::Int) {
      ++pos_;
      try {
        return mk::lit(std::stoll(t.text));
      } catch (const std::out_of_range &) {
        throw ParseError("integer literal out of range", t.pos);
      }
    }
    if (t.kind == Tok::Ident && !keywords().count(t.text)) {
      ++pos_;
      return mk::var(t.text);
    }
    if (accept_sym("(")) {
      ExprPtr e = expr();
      expect_sym(")");
      return e;
    }
    fail("expected expression");
  }

  // ---------------- assertions

  AssertionPtr assertion() {
    if (is_kw("exists") || is_kw("forall"))
      return quantifier();
    return assert_or();
  }

  AssertionPtr quantifier() {
    bool ex = is_kw("exists");
    ++pos_;
    std::string v = ident();
    expect_sym(".");
    AssertionPtr body = assertion();
    return ex ? mk::exists(v, body) : mk::forall(v, body);
  }

  AssertionPtr assert_or() {
    AssertionPtr a = assert_and();
    while (accept_sym("\\/"))
      a = mk::disj(a, assert_and());
    return a;
  }

  AssertionPtr assert_and() {
    AssertionPtr a = assert_star();
    while (accept_sym("/\\"))
      a = mk::conj(a, assert_star());
    return a;
  }

  AssertionPtr assert_star() {
    AssertionPtr a = assert_atom();
    while (accept_sym("*"))
      a = mk::star(a, assert_atom());
    return a;
  }

  AssertionPtr assert_atom() {
    if (is_kw("emp")) {
      ++pos_;
      return mk::emp();
    }
    if (is_kw("true")) {
      ++pos_;
      return mk::truth();
    }
    if (is_kw("false")) {
      ++pos_;
      return mk::falsity();
    }
    if (accept_sym("~"))
      return mk::neg(assert_atom());
    if (is_kw("exists") || is_kw("forall"))
      return quantifier();
    if (peek().kind == Tok::Ident && !keywords().count(peek().text) && is_sym("(", 1)) {
      std::string name = ident();
      expect_sym("(");
      std::vector<ExprPtr> args;
      if (!is_sym(")")) {
        args.push_back(expr());
        while (accept_sym(","))
          args.push_back(expr());
      }
      expect_sym(")");
      return mk::named(name, std::move(args));
    }
    size_t save = pos_;
    try {
      return relational();
    } catch (const ParseError &) {
      if (toks_[save].text != "(")
        throw;
      pos_ = save;
    }
    expect_sym("(");
    AssertionPtr a = assertion();
    expect_sym(")");
    return a;
  }

  AssertionPtr relational() {
    ExprPtr lhs = expr();
    if (accept_sym("="))
      return mk::eq(lhs, expr());
    if (accept_sym("!="))
      return mk::neq(lhs, expr());
    if (accept_sym("|->")) {
      if (is_sym("-") && !(peek(1).kind == Tok::Int || peek(1).kind == Tok::Ident || is_sym("(", 1))) {
        ++pos_;
        return mk::points_to_any(lhs);
      }
      return mk::points_to(lhs, expr());
    }
    fail("expected '=', '!=' or '|->'");
  }

  // ---------------- types

  TypePtr type() {
    if (is_kw("pi")) {
      ++pos_;
      std::string v = ident();
      expect_sym(".");
      return mk::pi(v, type());
    }
    TypePtr t = type_otimes();
    if (accept_sym("->"))
      return mk::arrow(t, type());
    return t;
  }

  TypePtr type_otimes() {
    TypePtr t = type_atom();
    while (accept_sym("@"))
      t = mk::otimes(t, assert_star());
    return t;
  }

  TypePtr type_atom() {
    if (accept_sym("{")) {
      AssertionPtr pre = assertion();
      expect_sym("}");
      expect_sym("-");
      expect_sym("{");
      AssertionPtr post = assertion();
      expect_sym("}");
      return mk::triple(pre, post);
    }
    if (accept_sym("(")) {
      TypePtr t = type();
      expect_sym(")");
      return t;
    }
    fail("expected type");
  }

  // ---------------- scripts

  Script script_chain() {
    Script s;
    while (is_sym("("))
      s.push_back(script_step());
    if (s.empty())
      fail("expected script step");
    return s;
  }

  ScriptStep script_step() {
    using K = ScriptStep::Kind;
    expect_sym("(");
    if (peek().kind != Tok::Ident)
      fail("expected script step name");
    std::string head = toks_[pos_++].text;
    ScriptStep st{K::Refl, nullptr, nullptr, {}, {}};
    auto nested = [&](K k) {
      st.kind = k;
      while (is_sym("("))
        st.children.push_back(script_step());
    };
    if (head == "refl") {
      st.kind = K::Refl;
    } else if (head == "frame" || head == "frameAxiom") {
      st.kind = K::Frame;
      st.assertion = assertion();
    } else if (head == "distTriple") {
      st.kind = K::DistTriple;
    } else if (head == "distPi") {
      st.kind = K::DistPi;
    } else if (head == "distOtimes") {
      st.kind = K::DistOtimes;
    } else if (head == "distArrow") {
      st.kind = K::DistArrow;
    } else if (head == "undistTriple") {
      st.kind = K::UndistTriple;
      st.assertion = assertion();
    } else if (head == "undistPi") {
      st.kind = K::UndistPi;
    } else if (head == "undistOtimes") {
      st.kind = K::UndistOtimes;
      st.assertion = assertion();
    } else if (head == "undistArrow") {
      st.kind = K::UndistArrow;
    } else if (head == "normalize") {
      st.kind = K::Normalize;
    } else if (head == "consequence") {
      st.kind = K::Consequence;
      if (!is_sym(")"))
        st.target = type();
    } else if (head == "arg" || head == "arrowArg") {
      nested(K::Arg);
    } else if (head == "res" || head == "arrowRes") {
      nested(K::Res);
    } else if (head == "body" || head == "piStruct") {
      nested(K::Body);
    } else if (head == "inner" || head == "otimesStruct") {
      nested(K::Inner);
    } else if (head == "trans") {
      nested(K::Trans);
    } else if (head == "use") {
      st.kind = K::Ref;
      st.label = ident();
    } else {
      fail("unknown script step '" + head + "'");
    }
    expect_sym(")");
    return st;
  }

  // ---------------- terms

  bool in_term_scope(const std::string &n) const {
    return std::find(term_scope.begin(), term_scope.end(), n) != term_scope.end();
  }

  TermPtr term() {
    SourcePos p = peek().pos;
    TermPtr t;
    if (is_sym("\\")) {
      t = lambda();
    } else if (is_kw("let")) {
      t = let_form();
    } else {
      t = unit();
      if (is_sym(";") && starts_term(peek(1))) {
        ++pos_;
        t = mk::seq(t, term());
      }
    }
    return at(t, p);
  }

  bool starts_term(const Token &t) const {
    if (t.kind == Tok::End)
      return false;
    if (is_top_keyword(t))
      return false;
    if (t.kind == Tok::Sym)
      return t.text == "(" || t.text == "[" || t.text == "\\";
    return true;
  }

  static TermPtr at(TermPtr t, SourcePos p) {
    if (t->pos.line == 0) {
      auto c = std::make_shared<Term>(*t);
      c->pos = p;
      return c;
    }
    return t;
  }

  TermPtr lambda() {
    expect_sym("\\");
    std::string v = ident();
    if (accept_sym(":")) {
      TypePtr ty = type();
      expect_sym(".");
      term_scope.push_back(v);
      TermPtr body = term();
      term_scope.pop_back();
      return mk::lam(v, ty, body);
    }
    expect_sym(".");
    // A term binder shadowing an integer name is not possible here.
    auto saved = term_scope;
    term_scope.erase(std::remove(term_scope.begin(), term_scope.end(), v), term_scope.end());
    TermPtr body = term();
    term_scope = saved;
    return mk::lam_int(v, body);
  }

  TermPtr let_form() {
    expect_kw("let");
    std::string v = ident();
    expect_sym("=");
    if (is_kw("new")) {
      ++pos_;
      expect_kw("in");
      return mk::new_in(v, term());
    }
    expect_sym("[");
    ExprPtr e = expr();
    expect_sym("]");
    expect_kw("in");
    return mk::read_in(v, e, term());
  }

  TermPtr unit() {
    SourcePos p = peek().pos;
    if (is_kw("ifz")) {
      ++pos_;
      ExprPtr e = expr_atom();
      TermPtr a = atom();
      TermPtr b = atom();
      return at(mk::ifz(e, a, b), p);
    }
    if (is_kw("fix")) {
      ++pos_;
      TermPtr m = is_sym("\\") ? lambda() : atom();
      return at(mk::fix(m), p);
    }
    if (is_sym("[")) {
      ++pos_;
      ExprPtr l = expr();
      expect_sym("]");
      expect_sym(":=");
      return at(mk::write(l, expr()), p);
    }
    TermPtr f = atom();
    for (;;) {
      const Token &t = peek();
      if (t.kind == Tok::Ident && !keywords().count(t.text)) {
        SourcePos ap = t.pos;
        if (in_term_scope(t.text)) {
          ++pos_;
          f = at(mk::app(f, at(mk::var_term(t.text), ap)), p);
        } else {
          ++pos_;
          f = at(mk::app_int(f, mk::var(t.text)), p);
        }
        continue;
      }
      if (t.kind == Tok::Ident && (t.text == "skip" || t.text == "free" || t.text == "frame" || t.text == "conj")) {
        f = at(mk::app(f, atom()), p);
        continue;
      }
      if (t.kind == Tok::Int) {
        f = at(mk::app_int(f, expr_atom()), p);
        continue;
      }
      if (is_sym("(")) {
        size_t save = pos_;
        try {
          TermPtr a = atom();
          f = at(mk::app(f, a), p);
          continue;
        } catch (const ParseError &) {
          pos_ = save;
        }
        f = at(mk::app_int(f, expr_atom()), p);
        continue;
      }
      break;
    }
    return f;
  }

  TermPtr atom() {
    SourcePos p = peek().pos;
    const Token &t = peek();
    if (t.kind == Tok::Ident) {
      if (t.text == "skip") {
        ++pos_;
        return at(mk::skip(), p);
      }
      if (t.text == "free") {
        ++pos_;
        expect_sym("(");
        ExprPtr e = expr();
        expect_sym(")");
        return at(mk::free_cell(e), p);
      }
      if (t.text == "frame") {
        ++pos_;
        expect_sym("(");
        TermPtr m = term();
        expect_sym(",");
        AssertionPtr a = assertion();
        expect_sym(")");
        return at(mk::frame(m, a), p);
      }
      if (t.text == "conj") {
        ++pos_;
        expect_sym("(");
        TermPtr a = term();
        expect_sym(",");
        TermPtr b = term();
        expect_sym(")");
        return at(mk::conj_term(a, b), p);
      }
      if (!keywords().count(t.text)) {
        ++pos_;
        return at(mk::var_term(t.text), p);
      }
      fail("expected term");
    }
    if (accept_sym("(")) {
      TermPtr m = term();
      if (accept_sym(")"))
        return m;
      if (is_kw("as")) {
        ++pos_;
        TypePtr target;
        if (is_kw("_"))
          ++pos_;
        else
          target = type();
        std::optional<Script> sc;
        if (is_kw("by")) {
          ++pos_;
          sc = script_chain();
        }
        expect_sym(")");
        return at(mk::cast(m, target, sc), p);
      }
      if (accept_sym(":")) {
        TypePtr ty = type();
        expect_sym(")");
        return at(mk::ascribe(m, ty), p);
      }
      fail("expected ')', 'as' or ':'");
    }
    fail("expected term");
  }

  // ---------------- programs

  Program program() {
    Program prog;
    while (!at_end()) {
      if (is_kw("pred")) {
        ++pos_;
        PredDef d;
        d.name = ident();
        expect_sym("(");
        if (!is_sym(")")) {
          d.params.push_back(ident());
          while (accept_sym(","))
            d.params.push_back(ident());
        }
        expect_sym(")");
        expect_sym(":=");
        d.body = assertion();
        std::set<std::string> ps(d.params.begin(), d.params.end());
        if (ps.size() != d.params.size())
          fail("duplicate predicate parameter");
        for (auto &v : free_vars(d.body))
          if (!ps.count(v))
            throw ParseError("predicate '" + d.name + "' mentions unbound variable '" + v + "'", peek().pos);
        for (auto &other : prog.preds)
          if (other.name == d.name)
            fail("predicate '" + d.name + "' defined twice");
        prog.preds.push_back(std::move(d));
      } else if (is_kw("vars")) {
        ++pos_;
        prog.delta.push_back(ident());
        while (accept_sym(","))
          prog.delta.push_back(ident());
      } else if (is_kw("ctx") || is_kw("def")) {
        bool def = is_kw("def");
        SourcePos p = peek().pos;
        ++pos_;
        Decl d;
        d.name = ident();
        if (in_term_scope(d.name))
          throw ParseError("'" + d.name + "' declared twice", p);
        expect_sym(":");
        d.type = type();
        if (def) {
          expect_sym(":=");
          d.term = term();
        }
        term_scope.push_back(d.name);
        prog.decls.push_back(std::move(d));
      } else if (is_kw("script")) {
        ++pos_;
        SourcePos p = peek().pos;
        std::string name = ident();
        if (prog.scripts.count(name))
          throw ParseError("script '" + name + "' defined twice", p);
        expect_sym(":=");
        prog.scripts[name] = script_chain();
      } else if (is_kw("goal")) {
        if (prog.goal)
          fail("only one goal is allowed");
        ++pos_;
        TermPtr m = term();
        expect_sym(":");
        prog.goal = Goal{m, type()};
      } else {
        fail("expected 'pred', 'vars', 'ctx', 'def', 'script' or 'goal'");
      }
      if (!at_end())
        expect_sym(";");
    }
    return prog;
  }

private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

void check_arity(const AssertionPtr &a, const Program &prog, const std::string &where) {
  if (!a)
    return;
  if (a->kind == Assertion::Kind::Named) {
    auto it = std::find_if(prog.preds.begin(), prog.preds.end(),
                           [&](const PredDef &d) { return d.name == a->name; });
    if (it == prog.preds.end())
      throw SlaError("unknown predicate '" + a->name + "' in " + where);
    if (it->params.size() != a->args.size())
      throw SlaError("predicate '" + a->name + "' expects " + std::to_string(it->params.size()) +
                     " argument(s) in " + where);
  }
  check_arity(a->lhs, prog, where);
  check_arity(a->rhs, prog, where);
}

void check_arity(const TypePtr &t, const Program &prog, const std::string &where) {
  if (!t)
    return;
  check_arity(t->pre, prog, where);
  check_arity(t->post, prog, where);
  check_arity(t->inv, prog, where);
  check_arity(t->a, prog, where);
  check_arity(t->b, prog, where);
}

void check_arity(const Script &s, const Program &prog, const std::string &where) {
  for (auto &st : s) {
    check_arity(st.assertion, prog, where);
    check_arity(st.target, prog, where);
    check_arity(st.children, prog, where);
  }
}

void check_arity(const TermPtr &m, const Program &prog, const std::string &where) {
  if (!m)
    return;
  check_arity(m->type, prog, where);
  check_arity(m->frame, prog, where);
  if (m->script)
    check_arity(*m->script, prog, where);
  check_arity(m->m1, prog, where);
  check_arity(m->m2, prog, where);
}

} // namespace

Program parse_program(std::string_view src) {
  Parser p(src);
  Program prog = p.program();
  for (auto &d : prog.preds)
    check_arity(d.body, prog, "predicate " + d.name);
  for (auto &d : prog.decls) {
    check_arity(d.type, prog, d.name);
    check_arity(d.term, prog, d.name);
  }
  for (auto &[name, sc] : prog.scripts)
    check_arity(sc, prog, "script " + name);
  if (prog.goal) {
    check_arity(prog.goal->type, prog, "goal");
    check_arity(prog.goal->term, prog, "goal");
  }
  return prog;
}

ExprPtr parse_expr(std::string_view src) {
  Parser p(src);
  ExprPtr e = p.expr();
  p.expect_end();
  return e;
}

AssertionPtr parse_assertion(std::string_view src) {
  Parser p(src);
  AssertionPtr a = p.assertion();
  p.expect_end();
  return a;
}

TypePtr parse_type(std::string_view src) {
  Parser p(src);
  TypePtr t = p.type();
  p.expect_end();
  return t;
}

TermPtr parse_term(std::string_view src, const std::vector<std::string> &term_vars) {
  Parser p(src);
  p.term_scope = term_vars;
  TermPtr t = p.term();
  p.expect_end();
  return t;
}

Script parse_script(std::string_view src) {
  Parser p(src);
  Script s = p.script_chain();
  p.expect_end();
  return s;
}

} // namespace sla
