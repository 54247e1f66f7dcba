#include "rfl/parser.hpp"

#include <cctype>
#include <cstring>
#include <map>
#include <optional>
#include <set>

namespace rfl {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  End, Int, LName, UName, Op, Keyword,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Semi, Comma, Colon, DColon, Arrow, Backslash, Pipe, Slash,
};

struct Token {
  Tok kind;
  std::string text;
  long long intVal = 0;
  Span span;
};

const std::set<std::string> kKeywords = {
    "data", "measure", "reflect", "let", "prop", "assume", "case", "of", "not"};

// Multi-char operator tokens, longest first.
const char* kOps[] = {
    "/=?", "<=?", ">=?", "/=.", "<=.", ">=.",
    "=?", "<?", ">?", "=.", "<.", ">.", "=*",
    "==", "/=", "<=", ">=", "&&", "||", "**",
    "=", "<", ">", "+", "-", "?",
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  size_t i = 0;
  const size_t n = src.size();
  auto emit = [&](Tok k, size_t lo, size_t hi, std::string text = "") {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.span = {(uint32_t)lo, (uint32_t)hi};
    out.push_back(std::move(t));
  };
  while (i < n) {
    char c = src[i];
    if (std::isspace((unsigned char)c)) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && src[i + 1] == '-') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    size_t lo = i;
    if (std::isdigit((unsigned char)c)) {
      long long v = 0;
      while (i < n && std::isdigit((unsigned char)src[i])) v = v * 10 + (src[i++] - '0');
      Token t;
      t.kind = Tok::Int;
      t.intVal = v;
      t.span = {(uint32_t)lo, (uint32_t)i};
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha((unsigned char)c) || c == '_' || c == '$') {
      while (i < n && (std::isalnum((unsigned char)src[i]) || src[i] == '_' ||
                       src[i] == '\'' || src[i] == '$'))
        ++i;
      std::string word = src.substr(lo, i - lo);
      if (kKeywords.count(word)) {
        emit(Tok::Keyword, lo, i, word);
      } else if (std::isupper((unsigned char)word[0])) {
        emit(Tok::UName, lo, i, word);
      } else {
        emit(Tok::LName, lo, i, word);
      }
      continue;
    }
    switch (c) {
      case '(': emit(Tok::LParen, lo, lo + 1); ++i; continue;
      case ')': emit(Tok::RParen, lo, lo + 1); ++i; continue;
      case '{': emit(Tok::LBrace, lo, lo + 1); ++i; continue;
      case '}': emit(Tok::RBrace, lo, lo + 1); ++i; continue;
      case '[': emit(Tok::LBracket, lo, lo + 1); ++i; continue;
      case ']': emit(Tok::RBracket, lo, lo + 1); ++i; continue;
      case ';': emit(Tok::Semi, lo, lo + 1); ++i; continue;
      case ',': emit(Tok::Comma, lo, lo + 1); ++i; continue;
      case '\\': emit(Tok::Backslash, lo, lo + 1); ++i; continue;
      default: break;
    }
    if (c == ':') {
      if (i + 1 < n && src[i + 1] == ':') {
        emit(Tok::DColon, lo, lo + 2);
        i += 2;
      } else {
        emit(Tok::Colon, lo, lo + 1);
        ++i;
      }
      continue;
    }
    if (c == '-' && i + 1 < n && src[i + 1] == '>') {
      emit(Tok::Arrow, lo, lo + 2);
      i += 2;
      continue;
    }
    bool matched = false;
    for (const char* op : kOps) {
      size_t len = std::strlen(op);
      if (src.compare(i, len, op) == 0) {
        emit(Tok::Op, lo, lo + len, op);
        i += len;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (c == '|') {
      emit(Tok::Pipe, lo, lo + 1);
      ++i;
      continue;
    }
    if (c == '/') {
      emit(Tok::Slash, lo, lo + 1);
      ++i;
      continue;
    }
    throw ParseError("SyntaxError", {(uint32_t)lo, (uint32_t)(lo + 1)},
                     std::string("unexpected character '") + c + "'");
  }
  Token t;
  t.kind = Tok::End;
  t.span = {(uint32_t)n, (uint32_t)n};
  out.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// Parser

struct Equation {
  std::vector<Expr> pats;  // Var or Ctor patterns (depth 1)
  std::optional<Expr> guard;
  Expr rhs;
  Span span;
};

struct CtorInfo {
  Name dataType;
  size_t arity;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  Program run() {
    Program prog;
    while (!at(Tok::End)) {
      parseDecl(prog);
    }
    return prog;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  bool inType_ = false;
  std::map<std::string, CtorInfo> ctors_;
  std::set<std::string> declared_;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t k = 1) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool atOp(const char* s) const { return cur().kind == Tok::Op && cur().text == s; }
  bool atKeyword(const char* s) const {
    return cur().kind == Tok::Keyword && cur().text == s;
  }
  Token advance() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& expected) {
    throw ParseError("SyntaxError", cur().span,
                     "expected " + expected + " but found '" +
                         (cur().kind == Tok::End ? "<eof>"
                          : cur().kind == Tok::Int ? std::to_string(cur().intVal)
                                                   : cur().text) +
                         "'");
  }

  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail(what);
    return advance();
  }

  void expectSemi() { expect(Tok::Semi, "';'"); }

  // --- declarations --------------------------------------------------------

  void declareName(const std::string& n, Span sp) {
    if (!declared_.insert(n).second)
      throw ParseError("DuplicateName", sp, "duplicate definition of '" + n + "'");
  }

  void parseDecl(Program& prog) {
    if (atKeyword("data")) {
      parseData(prog);
    } else if (atKeyword("measure")) {
      auto [name, type, metric, sp] = parseSignature("measure");
      MeasureDef m;
      m.name = name;
      m.type = type;
      m.body = parseEquationsAsBody(name, sp);
      m.span = sp;
      prog.pushMeasure(std::move(m));
    } else if (atKeyword("reflect")) {
      auto [name, type, metric, sp] = parseSignature("reflect");
      ReflectDecl r;
      r.name = name;
      r.type = type;
      r.metric = metric;
      r.body = parseEquationsAsBody(name, sp);
      r.span = sp;
      prog.pushReflect(std::move(r));
    } else if (atKeyword("let")) {
      auto [name, type, metric, sp] = parseSignature("let");
      LetDecl l;
      l.name = name;
      l.type = type;
      l.metric = metric;
      l.body = parseEquationsAsBody(name, sp);
      l.span = sp;
      prog.pushLet(std::move(l));
    } else if (atKeyword("assume")) {
      auto [name, type, metric, sp] = parseSignature("assume");
      LetDecl l;
      l.name = name;
      l.type = type;
      l.span = sp;
      prog.pushLet(std::move(l));
    } else if (atKeyword("prop")) {
      auto [name, type, metric, sp] = parseSignature("prop");
      PropDecl p;
      p.name = name;
      p.type = type;
      p.metric = metric;
      p.body = parseEquationsAsBody(name, sp);
      p.span = sp;
      prog.pushProp(std::move(p));
    } else {
      fail("a declaration (data/measure/reflect/let/prop/assume)");
    }
  }

  void parseData(Program& prog) {
    Span sp = cur().span;
    advance();  // data
    Token nameTok = expect(Tok::UName, "type name");
    DataDecl d;
    d.name = Name(nameTok.text);
    declareName(nameTok.text, nameTok.span);
    while (at(Tok::LName)) d.tyvars.push_back(Name(advance().text));
    if (!atOp("=")) fail("'='");
    advance();
    while (true) {
      Token ctorTok = expect(Tok::UName, "constructor name");
      CtorDecl c;
      c.name = Name(ctorTok.text);
      c.span = ctorTok.span;
      while (at(Tok::UName) || at(Tok::LName) || at(Tok::LParen) || at(Tok::LBrace))
        c.fields.push_back(parseFieldType());
      if (ctors_.count(ctorTok.text))
        throw ParseError("DuplicateName", ctorTok.span,
                         "duplicate constructor '" + ctorTok.text + "'");
      ctors_[ctorTok.text] = {d.name, c.fields.size()};
      ctorOrder_.emplace_back(d.name.base, ctorTok.text);
      d.ctors.push_back(std::move(c));
      if (at(Tok::Pipe)) {
        advance();
        continue;
      }
      break;
    }
    d.span = {sp.lo, cur().span.hi};
    expectSemi();
    prog.pushData(std::move(d));
  }

  struct Signature {
    Name name;
    RefType type;
    std::optional<TermMetric> metric;
    Span span;
  };

  Signature parseSignature(const char* kw) {
    Span sp = cur().span;
    advance();  // keyword
    Name name = parseDeclName();
    declareName(name.base, sp);
    expect(Tok::DColon, "'::'");
    RefType type = parseType();
    std::optional<TermMetric> metric;
    if (at(Tok::Slash)) {
      advance();
      expect(Tok::LBracket, "'['");
      TermMetric m;
      m.push_back(parseExprTop());
      while (at(Tok::Comma)) {
        advance();
        m.push_back(parseExprTop());
      }
      expect(Tok::RBracket, "']'");
      metric = std::move(m);
    }
    expectSemi();
    (void)kw;
    return {name, type, metric, sp};
  }

  Name parseDeclName() {
    if (at(Tok::LName)) return Name(advance().text);
    if (at(Tok::UName) && cur().text == "QED") return Name(advance().text);
    if (at(Tok::LParen)) {
      advance();
      std::string opName;
      if (at(Tok::Op)) {
        opName = advance().text;
      } else if (at(Tok::Pipe)) {
        advance();
        opName = "|";
      } else {
        fail("operator name");
      }
      expect(Tok::RParen, "')'");
      return Name(opName);
    }
    fail("definition name");
  }

  // --- equations ------------------------------------------------------------

  bool atEquationFor(const Name& name) {
    if (at(Tok::LName) && cur().text == name.base) return true;
    if (at(Tok::UName) && cur().text == name.base) return true;
    if (at(Tok::LParen) && peek().kind == Tok::Op && peek().text == name.base &&
        peek(2).kind == Tok::RParen)
      return true;
    return false;
  }

  Expr parseEquationsAsBody(const Name& name, Span declSpan) {
    std::vector<Equation> eqs;
    while (atEquationFor(name)) {
      Span sp = cur().span;
      if (at(Tok::LParen)) {
        advance();
        advance();
        advance();
      } else {
        advance();
      }
      Equation eq;
      eq.span = sp;
      while (atPatternStart()) eq.pats.push_back(parsePattern());
      if (at(Tok::Pipe)) {
        advance();
        eq.guard = parseExprTop();
      }
      if (!atOp("=")) fail("'='");
      advance();
      eq.rhs = parseExprTop();
      eq.span.hi = cur().span.hi;
      expectSemi();
      eqs.push_back(std::move(eq));
    }
    if (eqs.empty())
      throw ParseError("SyntaxError", declSpan,
                       "definition '" + name.str() + "' has no equations");
    return desugarEquations(name, eqs);
  }

  bool atPatternStart() {
    return at(Tok::LName) || at(Tok::UName) ||
           (at(Tok::LParen) && peek().kind == Tok::UName);
  }

  Expr parsePattern() {
    if (at(Tok::LName)) {
      Token t = advance();
      return mkVar(Name(t.text), t.span);
    }
    if (at(Tok::UName)) {
      Token t = advance();
      requireCtor(t);
      return mkCtor(Name(t.text), {}, t.span);
    }
    // ( UName lname* )
    Span sp = cur().span;
    advance();
    Token t = expect(Tok::UName, "constructor");
    requireCtor(t);
    std::vector<Expr> binders;
    while (at(Tok::LName)) {
      Token b = advance();
      binders.push_back(mkVar(Name(b.text), b.span));
    }
    expect(Tok::RParen, "')'");
    return mkCtor(Name(t.text), std::move(binders), {sp.lo, cur().span.hi});
  }

  void requireCtor(const Token& t) {
    if (t.text == "True" || t.text == "False") return;
    if (!ctors_.count(t.text))
      throw ParseError("UnknownConstructor", t.span,
                       "unknown constructor '" + t.text + "'");
  }

  // Desugars a top-to-bottom equation list into one lambda/case tree.
  Expr desugarEquations(const Name& declName, std::vector<Equation>& eqs) {
    const size_t arity = eqs[0].pats.size();
    for (const auto& e : eqs)
      if (e.pats.size() != arity)
        throw ParseError("NonUniformArity", e.span,
                         "equations of '" + declName.str() + "' differ in arity");

    // Find the unique constructor-pattern position, if any.
    std::optional<size_t> casePos;
    for (size_t i = 0; i < arity; ++i) {
      bool hasCtor = false;
      for (const auto& e : eqs)
        if (e.pats[i]->kind == ExprNode::Kind::Ctor) hasCtor = true;
      if (hasCtor) {
        if (casePos)
          throw ParseError("OverlappingPatterns", eqs[0].span,
                           "constructor patterns on more than one argument position");
        casePos = i;
      }
    }

    // Pick parameter names: reuse the variable name when all equations agree.
    std::vector<Name> params;
    int fresh = 0;
    for (size_t i = 0; i < arity; ++i) {
      std::optional<Name> agreed;
      bool ok = true;
      for (const auto& e : eqs) {
        if (e.pats[i]->kind != ExprNode::Kind::Var) {
          ok = false;
          break;
        }
        if (!agreed) {
          agreed = e.pats[i]->name;
        } else if (!(*agreed == e.pats[i]->name)) {
          ok = false;
          break;
        }
      }
      if (ok && agreed) {
        params.push_back(*agreed);
      } else {
        params.push_back(Name("$x" + std::to_string(++fresh) + "_" + declName.base));
      }
    }

    Expr body;
    if (!casePos) {
      body = desugarGuardChain(declName, eqs, params, /*renameVarPats=*/true);
    } else {
      body = desugarCase(declName, eqs, params, *casePos);
    }
    for (size_t i = arity; i-- > 0;) body = mkLam(params[i], body, eqs[0].span);
    return body;
  }

  // Equations distinguished only by guards.
  Expr desugarGuardChain(const Name& declName, const std::vector<Equation>& eqs,
                         const std::vector<Name>& params, bool renameVarPats) {
    Expr chain;
    for (size_t k = eqs.size(); k-- > 0;) {
      const Equation& e = eqs[k];
      Expr rhs = e.rhs;
      Expr guard = e.guard ? *e.guard : Expr();
      if (renameVarPats) {
        for (size_t i = 0; i < params.size(); ++i) {
          const Expr& p = e.pats[i];
          if (p->kind == ExprNode::Kind::Var && !(p->name == params[i])) {
            rhs = substitute(rhs, p->name, mkVar(params[i]));
            if (guard) guard = substitute(guard, p->name, mkVar(params[i]));
          }
        }
      }
      if (!guard) {
        if (k + 1 != eqs.size())
          throw ParseError("OverlappingPatterns", e.span,
                           "unguarded equation of '" + declName.str() +
                               "' makes later equations unreachable");
        chain = rhs;
        continue;
      }
      if (!chain)
        throw ParseError("NonExhaustive", e.span,
                         "guards of '" + declName.str() + "' have no fallthrough");
      std::vector<CaseAlt> alts;
      alts.push_back({Name("True"), {}, rhs});
      alts.push_back({Name("False"), {}, chain});
      chain = mkCase(Name("$g", (int)k + 1), guard, std::move(alts), e.span);
    }
    if (!chain)
      throw ParseError("NonExhaustive", eqs.back().span,
                       "no unguarded equation for '" + declName.str() + "'");
    return chain;
  }

  Expr desugarCase(const Name& declName, const std::vector<Equation>& eqs,
                   const std::vector<Name>& params, size_t casePos) {
    // Group equations by constructor, in first-appearance order; variable
    // patterns at the case position act as defaults for remaining ctors.
    Name dataType;
    for (const auto& e : eqs)
      if (e.pats[casePos]->kind == ExprNode::Kind::Ctor) {
        const std::string& cn = e.pats[casePos]->name.base;
        if (cn == "True" || cn == "False") {
          dataType = Name("Bool");
        } else {
          dataType = ctors_.at(cn).dataType;
        }
        break;
      }

    std::vector<Name> allCtors;
    if (dataType.base == "Bool") {
      allCtors = {Name("True"), Name("False")};
    } else {
      allCtors = ctorDeclOrder(dataType);
    }

    std::map<std::string, std::vector<Equation>> groups;
    std::vector<Equation> defaults;
    for (const auto& e : eqs) {
      const Expr& p = e.pats[casePos];
      if (p->kind == ExprNode::Kind::Ctor) {
        groups[p->name.base].push_back(e);
        if (!defaults.empty())
          throw ParseError("OverlappingPatterns", e.span,
                           "equation of '" + declName.str() +
                               "' is unreachable after a variable pattern");
      } else {
        defaults.push_back(e);
      }
    }

    std::vector<CaseAlt> alts;
    Name scrutBinder("$s_" + declName.base);
    for (const auto& ctorName : allCtors) {
      auto it = groups.find(ctorName.base);
      std::vector<Equation> groupEqs;
      std::vector<Name> binders;
      if (it != groups.end()) {
        // Binders come from the first equation of the group; all equations in
        // a group must agree on binder names.
        const Expr& pat0 = it->second.front().pats[casePos];
        for (const auto& b : pat0->args) binders.push_back(b->name);
        for (const auto& e : it->second) {
          const Expr& p = e.pats[casePos];
          if (p->args.size() != binders.size())
            throw ParseError("NonUniformArity", e.span,
                             "pattern arity mismatch for constructor '" +
                                 ctorName.str() + "'");
          for (size_t j = 0; j < binders.size(); ++j)
            if (!(p->args[j]->name == binders[j]))
              throw ParseError(
                  "OverlappingPatterns", e.span,
                  "equations for constructor '" + ctorName.str() +
                      "' must use the same field binders");
        }
        groupEqs = it->second;
      } else if (!defaults.empty()) {
        // Expand the default: bind fresh field binders, substitute the
        // variable pattern by the rebuilt constructor value.
        size_t ar = ctorName.base == "True" || ctorName.base == "False"
                        ? 0
                        : ctors_.at(ctorName.base).arity;
        std::vector<Expr> fields;
        for (size_t j = 0; j < ar; ++j) {
          Name b("$f" + std::to_string(j + 1) + "_" + declName.base);
          binders.push_back(b);
          fields.push_back(mkVar(b));
        }
        Expr rebuilt = ctorName.base == "True" ? mkBoolLit(true)
                       : ctorName.base == "False"
                           ? mkBoolLit(false)
                           : mkCtor(ctorName, std::move(fields));
        for (const auto& d : defaults) {
          Equation e = d;
          const Name patVar = e.pats[casePos]->name;
          e.rhs = substitute(e.rhs, patVar, rebuilt);
          if (e.guard) e.guard = substitute(*e.guard, patVar, rebuilt);
          groupEqs.push_back(std::move(e));
        }
      } else {
        throw ParseError("NonExhaustive", eqs[0].span,
                         "missing equation for constructor '" + ctorName.str() +
                             "' in '" + declName.str() + "'");
      }
      // Within the group, reduce to a guard chain over the other positions.
      Expr rhs = desugarGuardChain(declName, groupEqs, params, true);
      alts.push_back({ctorName, std::move(binders), std::move(rhs)});
    }

    return mkCase(scrutBinder, mkVar(params[casePos]), std::move(alts), eqs[0].span);
  }

  std::vector<Name> ctorDeclOrder(const Name& dataType) {
    std::vector<Name> order;
    for (const auto& d : ctorOrder_)
      if (d.first == dataType.base) order.push_back(Name(d.second));
    return order;
  }

  // --- types ----------------------------------------------------------------

  RefType parseType() {
    // lname ":" type "->" type   (named dependent domain)
    if (at(Tok::LName) && peek().kind == Tok::Colon) {
      Token nameTok = advance();
      advance();  // :
      RefType dom = parseTypeAtom();
      expect(Tok::Arrow, "'->'");
      RefType cod = parseType();
      return mkFun(Name(nameTok.text), dom, cod);
    }
    RefType lhs = parseTypeAtom();
    if (at(Tok::Arrow)) {
      advance();
      RefType cod = parseType();
      return mkFun(Name("$w" + std::to_string(++anonParam_)), lhs, cod);
    }
    return lhs;
  }

  RefType parseTypeAtom() {
    if (at(Tok::LBrace)) {
      Span sp = advance().span;
      // {lname : btype | expr}  or  { expr }
      if (at(Tok::LName) && peek().kind == Tok::Colon) {
        Name binder(cur().text);
        advance();
        advance();
        BaseType b = parseBaseType();
        if (!at(Tok::Pipe)) fail("'|'");
        advance();
        Expr r = parseRefinementExpr();
        expect(Tok::RBrace, "'}'");
        return mkBase(binder, b, r);
      }
      Expr r = parseRefinementExpr();
      expect(Tok::RBrace, "'}'");
      (void)sp;
      return mkBase(Name("$p"), BaseType::mkUnit(), r);
    }
    if (at(Tok::LParen)) {
      advance();
      RefType t = parseType();
      expect(Tok::RParen, "')'");
      return t;
    }
    return trivialBase(parseBaseType());
  }

  BaseType parseBaseType() {
    if (at(Tok::UName)) {
      Token t = advance();
      if (t.text == "Int") return BaseType::mkInt();
      if (t.text == "Bool") return BaseType::mkBool();
      if (t.text == "Unit") return BaseType::mkUnit();
      std::vector<BaseType> params;
      while (at(Tok::UName) || at(Tok::LName) ||
             (at(Tok::LParen) && (peek().kind == Tok::UName || peek().kind == Tok::LName))) {
        params.push_back(parseBaseTypeAtom());
      }
      return BaseType::mkData(Name(t.text), std::move(params));
    }
    if (at(Tok::LName)) return BaseType::mkVar(Name(advance().text));
    if (at(Tok::LParen)) {
      advance();
      BaseType b = parseBaseType();
      expect(Tok::RParen, "')'");
      return b;
    }
    fail("a base type");
  }

  BaseType parseBaseTypeAtom() {
    if (at(Tok::UName)) {
      Token t = advance();
      if (t.text == "Int") return BaseType::mkInt();
      if (t.text == "Bool") return BaseType::mkBool();
      if (t.text == "Unit") return BaseType::mkUnit();
      return BaseType::mkData(Name(t.text), {});
    }
    if (at(Tok::LName)) return BaseType::mkVar(Name(advance().text));
    advance();  // (
    BaseType b = parseBaseType();
    expect(Tok::RParen, "')'");
    return b;
  }

  // Constructor field: an atomic type; arrows and applied data types need
  // parentheses, refinements use braces.
  RefType parseFieldType() {
    if (at(Tok::LParen) || at(Tok::LBrace)) return parseTypeAtom();
    return trivialBase(parseBaseTypeAtom());
  }

  Expr parseRefinementExpr() {
    bool save = inType_;
    inType_ = true;
    Expr e = parseExprTop();
    inType_ = save;
    return e;
  }

  // --- expressions -----------------------------------------------------------

  Expr parseExprTop() { return parseOpLevel(0); }

  // Levels: 0 '**' | 1 proof steps, '?', '=*' | 2 '||' | 3 '&&'
  //         4 comparisons | 5 additive | 6 application
  Expr parseOpLevel(int level) {
    if (level == 4) return parseComparison();
    if (level == 5) return parseAdditive();
    Expr lhs = parseOpLevel(level + 1);
    while (true) {
      if (level == 0 && atOp("**")) {
        Span sp = cur().span;
        advance();
        Expr rhs = parseOpLevel(1);
        lhs = mkApp(mkApp(mkVar(Name("**"), sp), lhs, sp), rhs, sp);
      } else if (level == 1 && at(Tok::Op) && isProofOp(cur().text)) {
        Token op = advance();
        Expr rhs = parseOpLevel(2);
        lhs = mkApp(mkApp(mkVar(Name(op.text), op.span), lhs, op.span), rhs, op.span);
      } else if (level == 2 && atOp("||")) {
        Span sp = advance().span;
        Expr rhs = parseOpLevel(3);
        lhs = mkBin(Builtin::Or, lhs, rhs);
        (void)sp;
      } else if (level == 3 && atOp("&&")) {
        advance();
        Expr rhs = parseOpLevel(4);
        lhs = mkBin(Builtin::And, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  static bool isProofOp(const std::string& s) {
    return s == "=." || s == "/=." || s == "<=." || s == "<." || s == ">=." ||
           s == ">." || s == "=?" || s == "/=?" || s == "<=?" || s == "<?" ||
           s == ">=?" || s == ">?" || s == "?" || s == "=*";
  }

  Expr parseComparison() {
    Expr lhs = parseAdditive();
    if (at(Tok::Op)) {
      const std::string& s = cur().text;
      std::optional<Builtin> op;
      if (s == "==") op = Builtin::Eq;
      else if (s == "=" && inType_) op = Builtin::Eq;
      else if (s == "/=") op = Builtin::Ne;
      else if (s == "<") op = Builtin::Lt;
      else if (s == "<=") op = Builtin::Le;
      else if (s == ">") op = Builtin::Gt;
      else if (s == ">=") op = Builtin::Ge;
      if (op) {
        Span sp = advance().span;
        Expr rhs = parseAdditive();
        Expr f = mkApp(mkConst(*op, sp), lhs, sp);
        return mkApp(f, rhs, {lhs->span.lo, rhs->span.hi});
      }
    }
    return lhs;
  }

  Expr parseAdditive() {
    // Unary minus on an atom makes a negative literal or 0-e.
    Expr lhs;
    if (atOp("-")) {
      Span sp = advance().span;
      Expr operand = parseApplication();
      if (operand->kind == ExprNode::Kind::IntLit) {
        lhs = mkIntLit(-operand->intVal, sp);
      } else {
        lhs = mkBin(Builtin::Sub, mkIntLit(0, sp), operand);
      }
    } else {
      lhs = parseApplication();
    }
    while (at(Tok::Op) && (cur().text == "+" || cur().text == "-")) {
      Builtin op = cur().text == "+" ? Builtin::Add : Builtin::Sub;
      Span sp = advance().span;
      Expr rhs = parseApplication();
      Expr f = mkApp(mkConst(op, sp), lhs, sp);
      lhs = mkApp(f, rhs, {lhs->span.lo, rhs->span.hi});
    }
    return lhs;
  }

  bool atAtomStart() {
    return at(Tok::Int) || at(Tok::LName) || at(Tok::UName) || at(Tok::LParen) ||
           at(Tok::Backslash) || atKeyword("case") || atKeyword("not");
  }

  Expr parseApplication() {
    Expr head = parseAtom();
    std::vector<Expr> args;
    while (atAtomStart() && !atKeyword("case")) {
      // `not` binds tighter than application arguments would suggest; treat it
      // as an atom starter only in head position.
      if (atKeyword("not")) break;
      args.push_back(parseAtom());
    }
    return applyHead(head, std::move(args));
  }

  // Saturates constructors; wraps partial constructor applications in lambdas.
  Expr applyHead(Expr head, std::vector<Expr> args) {
    if (head->kind == ExprNode::Kind::Ctor && head->args.empty()) {
      const std::string& cn = head->name.base;
      size_t arity = ctors_.count(cn) ? ctors_.at(cn).arity : 0;
      if (args.size() >= arity) {
        std::vector<Expr> ctorArgs(args.begin(), args.begin() + arity);
        Expr e = mkCtor(head->name, std::move(ctorArgs), head->span);
        for (size_t i = arity; i < args.size(); ++i) e = mkApp(e, args[i]);
        return e;
      }
      // Partial constructor use: wrap the missing arguments.
      std::vector<Name> extra;
      for (size_t i = args.size(); i < arity; ++i)
        extra.push_back(Name("$c" + std::to_string(i + 1)));
      std::vector<Expr> ctorArgs = args;
      for (const auto& x : extra) ctorArgs.push_back(mkVar(x));
      Expr e = mkCtor(head->name, std::move(ctorArgs), head->span);
      for (size_t i = extra.size(); i-- > 0;) e = mkLam(extra[i], e);
      return e;
    }
    Expr e = std::move(head);
    for (auto& a : args) {
      Span sp{e->span.lo, a->span.hi};
      e = mkApp(e, std::move(a), sp);
    }
    return e;
  }

  Expr parseAtom() {
    if (at(Tok::Int)) {
      Token t = advance();
      return mkIntLit(t.intVal, t.span);
    }
    if (atKeyword("not")) {
      Span sp = advance().span;
      Expr operand = parseAtom();
      return mkApp(mkConst(Builtin::Not, sp), operand, {sp.lo, operand->span.hi});
    }
    if (at(Tok::LName)) {
      Token t = advance();
      return mkVar(Name(t.text), t.span);
    }
    if (at(Tok::UName)) {
      Token t = advance();
      if (t.text == "True") return mkBoolLit(true, t.span);
      if (t.text == "False") return mkBoolLit(false, t.span);
      if (t.text == "QED") return mkVar(Name("QED"), t.span);
      requireCtor(t);
      return mkCtor(Name(t.text), {}, t.span);
    }
    if (at(Tok::Backslash)) {
      Span sp = advance().span;
      std::vector<Name> binders;
      while (at(Tok::LName)) binders.push_back(Name(advance().text));
      if (binders.empty()) fail("lambda binder");
      expect(Tok::Arrow, "'->'");
      Expr body = parseExprTop();
      for (size_t i = binders.size(); i-- > 0;)
        body = mkLam(binders[i], body, {sp.lo, body->span.hi});
      return body;
    }
    if (atKeyword("case")) {
      Span sp = advance().span;
      Expr scrut = parseExprTop();
      if (!atKeyword("of")) fail("'of'");
      advance();
      expect(Tok::LBrace, "'{'");
      std::vector<CaseAlt> alts;
      while (true) {
        Token c = expect(Tok::UName, "constructor");
        requireCtor(c);
        std::vector<Name> binders;
        while (at(Tok::LName)) binders.push_back(Name(advance().text));
        expect(Tok::Arrow, "'->'");
        Expr rhs = parseExprTop();
        alts.push_back({Name(c.text), std::move(binders), rhs});
        if (at(Tok::Semi)) {
          advance();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
      return mkCase(Name("$s"), scrut, std::move(alts), {sp.lo, cur().span.hi});
    }
    if (at(Tok::LParen)) {
      Span sp = advance().span;
      if (at(Tok::RParen)) {
        advance();
        return mkUnitLit({sp.lo, cur().span.hi});
      }
      // Operator identifier: (op)
      if (at(Tok::Op) && peek().kind == Tok::RParen) {
        Token op = advance();
        advance();
        if (op.text == "==" || (op.text == "=" && inType_))
          return mkConst(Builtin::Eq, op.span);
        if (op.text == "/=") return mkConst(Builtin::Ne, op.span);
        if (op.text == "<") return mkConst(Builtin::Lt, op.span);
        if (op.text == "<=") return mkConst(Builtin::Le, op.span);
        if (op.text == ">") return mkConst(Builtin::Gt, op.span);
        if (op.text == ">=") return mkConst(Builtin::Ge, op.span);
        if (op.text == "+") return mkConst(Builtin::Add, op.span);
        if (op.text == "-") return mkConst(Builtin::Sub, op.span);
        if (op.text == "&&") return mkConst(Builtin::And, op.span);
        if (op.text == "||") return mkConst(Builtin::Or, op.span);
        return mkVar(Name(op.text), op.span);
      }
      Expr e = parseExprTop();
      expect(Tok::RParen, "')'");
      return e;
    }
    fail("an expression");
  }

  // (dataType, ctor) pairs in declaration order, for default-pattern expansion.
  std::vector<std::pair<std::string, std::string>> ctorOrder_;
  int anonParam_ = 0;
};

}  // namespace

Program parseProgram(const std::string& text) {
  Parser p(text);
  return p.run();
}

}  // namespace rfl
