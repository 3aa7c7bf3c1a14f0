#include "cdt/formats.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace cdt {

// ---------------------------------------------------------------- Polish

namespace {

struct PolishParser {
  const std::string& text;
  const std::unordered_set<char>& constants;
  size_t pos = 0;

  TermId parse() {
    if (pos >= text.size()) throw MalformedError("formula ends before a term is complete");
    char c = text[pos];
    if (c == 'C') {
      ++pos;
      TermId a = parse();
      TermId b = parse();
      return mk_i(a, b);
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      ++pos;
      std::string name(1, c);
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
        name.push_back(text[pos++]);
      if (name.size() == 1 && constants.count(c)) return mk_const(constant(name));
      return mk_var(named_var(name));
    }
    throw MalformedError(std::string("unexpected character '") + c + "' in a Polish formula");
  }
};

}  // namespace

TermId parse_polish(const std::string& text, const std::unordered_set<char>& constants) {
  PolishParser p{text, constants};
  TermId t = p.parse();
  if (p.pos != text.size())
    throw MalformedError("trailing input after a complete formula: '" + text.substr(p.pos) + "'");
  return t;
}

std::string print_polish(TermId t) {
  std::string out;
  std::vector<TermId> stack{t};
  while (!stack.empty()) {
    TermId cur = stack.back();
    stack.pop_back();
    switch (term_kind(cur)) {
      case TermKind::Var:
        out += var_name(term_var(cur));
        break;
      case TermKind::Const:
        out += constant_name(term_sym(cur));
        break;
      case TermKind::Fun:
        if (term_sym(cur) != fn_i())
          throw NonImplicationalError("functor " + functor_name(term_sym(cur)) +
                                      " has no Polish rendering");
        out += 'C';
        stack.push_back(term_arg(cur, 1));
        stack.push_back(term_arg(cur, 0));
        break;
    }
  }
  return out;
}

// ------------------------------------------------------------ D-notation

namespace {

struct DTok {
  enum Kind { D, N, Num } kind;
  std::string digits;  // Num only
};

std::vector<DTok> lex_dnotation(const std::string& text, bool greedy_runs) {
  std::vector<DTok> out;
  size_t pos = 0;
  while (pos < text.size()) {
    char c = text[pos];
    if (c == 'D') {
      out.push_back({DTok::D, {}});
      ++pos;
    } else if (c == 'n') {
      out.push_back({DTok::N, {}});
      ++pos;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      std::string run = text.substr(start, pos - start);
      bool dotted = pos < text.size() && text[pos] == '.';
      if (dotted) ++pos;
      if (dotted || greedy_runs) {
        out.push_back({DTok::Num, run});
      } else {
        for (char d : run) out.push_back({DTok::Num, std::string(1, d)});
      }
    } else if (c == '.') {
      throw MalformedError("stray '.' without a preceding numeral");
    } else {
      throw MalformedError(std::string("unexpected character '") + c + "' in D-notation");
    }
  }
  return out;
}

DTermId parse_dtokens(const std::vector<DTok>& toks) {
  size_t pos = 0;
  // Iterative prefix parse: needed = number of terms still to read.
  std::vector<DTermId> out;
  std::vector<int> pending;  // how many args remain for each open D
  auto close = [&]() {
    while (!pending.empty() && pending.back() == 0) {
      pending.pop_back();
      DTermId minor = out.back();
      out.pop_back();
      DTermId major = out.back();
      out.pop_back();
      out.push_back(d_comp(major, minor));
      if (!pending.empty()) --pending.back();
    }
  };
  for (; pos < toks.size(); ++pos) {
    const DTok& t = toks[pos];
    if (t.kind == DTok::D) {
      pending.push_back(2);
    } else {
      out.push_back(t.kind == DTok::N ? d_leaf(prim_n()) : d_leaf(prim(t.digits)));
      if (pending.empty()) {
        if (pos + 1 != toks.size()) throw MalformedError("trailing input after a complete D-term");
      } else {
        --pending.back();
        close();
      }
    }
  }
  if (!pending.empty() || out.size() != 1)
    throw MalformedError("D-term ends before all arguments are supplied");
  return out.back();
}

}  // namespace

DTermId parse_dnotation(const std::string& text, DotPolicy dots) {
  try {
    return parse_dtokens(lex_dnotation(text, /*greedy_runs=*/false));
  } catch (const MalformedError&) {
    if (dots == DotPolicy::Strict) throw;
  }
  return parse_dtokens(lex_dnotation(text, /*greedy_runs=*/true));
}

std::string print_dnotation(DTermId d) {
  std::vector<DTok> toks;
  std::vector<DTermId> stack{d};
  while (!stack.empty()) {
    DTermId cur = stack.back();
    stack.pop_back();
    if (d_is_leaf(cur)) {
      if (d_leaf_prim(cur) == prim_n()) {
        toks.push_back({DTok::N, {}});
      } else {
        const std::string& name = prim_name(d_leaf_prim(cur));
        if (name.empty() ||
            !std::all_of(name.begin(), name.end(),
                         [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          throw MalformedError("primitive '" + name + "' has no D-notation rendering");
        toks.push_back({DTok::Num, name});
      }
    } else {
      toks.push_back({DTok::D, {}});
      stack.push_back(d_minor(cur));
      stack.push_back(d_major(cur));
    }
  }
  // Dot placement, right to left: a numeral is dotted iff it is
  // multi-digit or the next token is a dotted numeral.
  std::vector<bool> dotted(toks.size(), false);
  bool next_dotted_num = false;
  for (size_t i = toks.size(); i-- > 0;) {
    if (toks[i].kind != DTok::Num) {
      next_dotted_num = false;
      continue;
    }
    dotted[i] = toks[i].digits.size() >= 2 || next_dotted_num;
    next_dotted_num = dotted[i];
  }
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    switch (toks[i].kind) {
      case DTok::D: out += 'D'; break;
      case DTok::N: out += 'n'; break;
      case DTok::Num:
        out += toks[i].digits;
        if (dotted[i]) out += '.';
        break;
    }
  }
  return out;
}

// ----------------------------------------------------------- proof corpus

namespace {

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_digit_string(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

}  // namespace

Corpus parse_corpus_text(const std::string& text, DotPolicy dots) {
  Corpus out;
  std::unordered_set<PrimId> defined;  // axioms and completed steps
  std::unordered_set<PrimId> bound;    // any label carrying a line
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = strip(raw);
    if (line.empty() || line[0] == '#') continue;
    auto fail = [&](const std::string& msg) -> MalformedError {
      return MalformedError("line " + std::to_string(lineno) + ": " + msg);
    };
    bool goal = false;
    if (line[0] == '*') {
      goal = true;
      line = strip(line.substr(1));
    }
    size_t sep = line.find_first_of("=:");
    if (sep == std::string::npos) throw fail("expected 'label = dterm' or 'label : formula'");
    char kind = line[sep];
    std::string label_text = strip(line.substr(0, sep));
    std::string rhs_text = strip(line.substr(sep + 1));
    if (!is_digit_string(label_text)) throw fail("label '" + label_text + "' is not a numeral");
    if (rhs_text.empty()) throw fail("empty right-hand side");
    PrimId label = prim(label_text);
    if (bound.count(label))
      throw DuplicateLabelError("line " + std::to_string(lineno) + ": label " + label_text +
                                " is already bound");
    if (kind == ':') {
      out.axioms.emplace_back(label, parse_polish(rhs_text));
      bound.insert(label);
      defined.insert(label);
      if (goal) out.delta.goal_labels.push_back(label);
      continue;
    }
    DTermId rhs = parse_dnotation(rhs_text, dots);
    for (PrimId p : prims_of(rhs)) {
      if (p == prim_n() || defined.count(p)) continue;
      if (p == label)
        throw CyclicLabelsError("line " + std::to_string(lineno) + ": label " + label_text +
                                " refers to itself");
      throw UndefinedLabelError("line " + std::to_string(lineno) + ": label " + prim_name(p) +
                                " is used before its definition");
    }
    if (d_is_leaf(rhs))
      out.delta.aliases.emplace_back(label, d_leaf_prim(rhs));
    else
      out.delta.bindings.emplace_back(label, rhs);
    out.line_order.push_back(label);
    bound.insert(label);
    defined.insert(label);
    if (goal) out.delta.goal_labels.push_back(label);
  }
  return out;
}

std::string print_corpus(const Corpus& c) {
  std::unordered_set<PrimId> goals(c.delta.goal_labels.begin(), c.delta.goal_labels.end());
  std::string out;
  for (const auto& [label, formula] : c.axioms) {
    if (goals.count(label)) out += "* ";
    out += prim_name(label) + " : " + print_polish(formula) + "\n";
  }
  for (PrimId label : c.line_order) {
    if (goals.count(label)) out += "* ";
    out += prim_name(label) + " = " + print_dnotation(c.delta.rhs(label)) + "\n";
  }
  return out;
}

Corpus make_corpus(const CompactedDTerm& delta,
                   const std::vector<std::pair<PrimId, TermId>>& axioms) {
  Corpus out;
  out.delta = delta;
  out.axioms = axioms;
  for (const auto& [label, rhs] : delta.bindings) out.line_order.push_back(label);
  for (const auto& [label, target] : delta.aliases) out.line_order.push_back(label);
  return out;
}

Corpus load_corpus(const std::string& path, DotPolicy dots) {
  return parse_corpus_text(read_text_file(path), dots);
}

void save_corpus(const Corpus& c, const std::string& path) {
  write_text_file(path, print_corpus(c));
}

// ------------------------------------------------------------------ JSON

namespace {

using ojson = nlohmann::ordered_json;

ojson dterm_to_json(DTermId d) {
  if (d_is_leaf(d)) return ojson(d_leaf_prim(d) == prim_n() ? "n" : prim_name(d_leaf_prim(d)));
  return ojson::array({dterm_to_json(d_major(d)), dterm_to_json(d_minor(d))});
}

DTermId dterm_from_json(const ojson& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "n") return d_leaf(prim_n());
    if (!is_digit_string(s)) throw MalformedError("leaf '" + s + "' is not a label");
    return d_leaf(prim(s));
  }
  if (j.is_array() && j.size() == 2)
    return d_comp(dterm_from_json(j[0]), dterm_from_json(j[1]));
  throw MalformedError("a step's \"d\" value must be a label or a two-element array");
}

}  // namespace

std::string corpus_to_json(const Corpus& c) {
  ojson j;
  j["axioms"] = ojson::object();
  for (const auto& [label, formula] : c.axioms)
    j["axioms"][prim_name(label)] = print_polish(formula);
  j["steps"] = ojson::array();
  for (PrimId label : c.line_order) {
    ojson step;
    step["label"] = prim_name(label);
    step["d"] = dterm_to_json(c.delta.rhs(label));
    j["steps"].push_back(std::move(step));
  }
  j["roots"] = ojson::array();
  for (PrimId g : c.delta.goal_labels) j["roots"].push_back(prim_name(g));
  return j.dump(2) + "\n";
}

Corpus corpus_from_json(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const std::exception& e) {
    throw MalformedError(std::string("invalid JSON: ") + e.what());
  }
  std::string rebuilt;
  if (j.contains("axioms"))
    for (auto it = j["axioms"].begin(); it != j["axioms"].end(); ++it)
      rebuilt += it.key() + " : " + it.value().get<std::string>() + "\n";
  std::unordered_set<std::string> roots;
  if (j.contains("roots"))
    for (const auto& r : j["roots"]) roots.insert(r.get<std::string>());
  if (j.contains("steps"))
    for (const auto& step : j["steps"]) {
      if (!step.contains("label") || !step.contains("d"))
        throw MalformedError("each step needs \"label\" and \"d\"");
      std::string label = step["label"].get<std::string>();
      std::string prefix = roots.count(label) ? "* " : "";
      rebuilt += prefix + label + " = " + print_dnotation(dterm_from_json(step["d"])) + "\n";
      roots.erase(label);
    }
  // Axiom goal marks (roots that are not steps).
  Corpus c = parse_corpus_text(rebuilt);
  for (const auto& [label, formula] : c.axioms)
    if (roots.count(prim_name(label))) c.delta.goal_labels.insert(c.delta.goal_labels.begin(), label);
  return c;
}

// ------------------------------------------------------------ TPTP subset

namespace {

struct TptpLexer {
  const std::string& text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '%') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    if (pos >= text.size()) throw MalformedError("unexpected end of TPTP input");
    return text[pos];
  }

  void expect(char c) {
    if (peek() != c)
      throw MalformedError(std::string("expected '") + c + "' but found '" + text[pos] + "'");
    ++pos;
  }

  bool accept(char c) {
    if (eof() || text[pos] != c) return false;
    ++pos;
    return true;
  }

  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (start == pos) throw MalformedError("expected an identifier in TPTP input");
    return text.substr(start, pos - start);
  }
};

struct RawTerm {
  std::string name;
  std::vector<RawTerm> args;
  bool is_var() const { return args.empty() && !name.empty() && (std::isupper(static_cast<unsigned char>(name[0])) || name[0] == '_'); }
};

RawTerm parse_raw_term(TptpLexer& lex) {
  RawTerm t;
  t.name = lex.ident();
  if (lex.accept('(')) {
    do {
      t.args.push_back(parse_raw_term(lex));
    } while (lex.accept(','));
    lex.expect(')');
  }
  return t;
}

struct RawLiteral {
  bool positive = true;
  RawTerm atom;
};

struct RawClause {
  std::string name;
  std::string role;
  std::vector<RawLiteral> literals;
};

RawClause parse_clause(TptpLexer& lex) {
  RawClause c;
  std::string kw = lex.ident();
  if (kw != "cnf") throw MalformedError("only cnf(...) records are supported, found '" + kw + "'");
  lex.expect('(');
  c.name = lex.ident();
  lex.expect(',');
  c.role = lex.ident();
  lex.expect(',');
  bool outer_paren = lex.accept('(');
  do {
    RawLiteral lit;
    if (lex.accept('~')) lit.positive = false;
    lit.atom = parse_raw_term(lex);
    c.literals.push_back(std::move(lit));
  } while (lex.accept('|'));
  if (outer_paren) lex.expect(')');
  lex.expect(')');
  lex.expect('.');
  return c;
}

// Convert a raw TPTP term (inside the theoremhood predicate) to an FTerm.
// impl_name: the implication functor; variables via var_map.
TermId raw_to_term(const RawTerm& t, const std::string& impl_name,
                   std::unordered_map<std::string, VarId>* var_map, int* next_index,
                   bool allow_vars) {
  if (t.is_var()) {
    if (!allow_vars)
      throw UnrecognizedClauseShapeError("variable " + t.name + " in a ground position");
    auto it = var_map->find(t.name);
    if (it == var_map->end())
      it = var_map->emplace(t.name, pos_var_x(Position{}, (*next_index)++)).first;
    return mk_var(it->second);
  }
  if (t.args.empty()) return mk_const(constant(t.name));
  if (t.name != impl_name || t.args.size() != 2)
    throw UnrecognizedClauseShapeError("unexpected function " + t.name + "/" +
                                       std::to_string(t.args.size()));
  return mk_i(raw_to_term(t.args[0], impl_name, var_map, next_index, allow_vars),
              raw_to_term(t.args[1], impl_name, var_map, next_index, allow_vars));
}

// Detachment-rule shape: ~pred(f(X,Y)) | ~pred(X) | pred(Y) in any
// literal order, X != Y variables. Returns pred and f names.
std::optional<std::pair<std::string, std::string>> match_det(const RawClause& c) {
  if (c.literals.size() != 3) return std::nullopt;
  const RawLiteral* pos = nullptr;
  std::vector<const RawLiteral*> negs;
  for (const RawLiteral& l : c.literals) {
    if (l.positive) {
      if (pos) return std::nullopt;
      pos = &l;
    } else {
      negs.push_back(&l);
    }
  }
  if (!pos || negs.size() != 2) return std::nullopt;
  // Every literal: pred with exactly one argument, same pred throughout.
  const std::string& pred = pos->atom.name;
  if (pos->atom.args.size() != 1) return std::nullopt;
  for (const RawLiteral* l : negs)
    if (l->atom.name != pred || l->atom.args.size() != 1) return std::nullopt;
  if (!pos->atom.args[0].is_var()) return std::nullopt;
  const std::string& y = pos->atom.args[0].name;
  for (int major = 0; major < 2; ++major) {
    const RawTerm& maj = negs[static_cast<size_t>(major)]->atom.args[0];
    const RawTerm& min = negs[static_cast<size_t>(1 - major)]->atom.args[0];
    if (!min.is_var() || min.args.size() != 0) continue;
    if (maj.is_var() || maj.args.size() != 2) continue;
    if (!maj.args[0].is_var() || !maj.args[1].is_var()) continue;
    if (maj.args[0].name == min.name && maj.args[1].name == y && min.name != y)
      return std::make_pair(pred, maj.name);
  }
  return std::nullopt;
}

}  // namespace

CdProblem parse_tptp_text(const std::string& text) {
  TptpLexer lex{text};
  std::vector<RawClause> clauses;
  while (!lex.eof()) clauses.push_back(parse_clause(lex));

  CdProblem out;
  std::string pred, impl;
  for (const RawClause& c : clauses) {
    if (auto m = match_det(c)) {
      if (!out.det_name.empty())
        throw MultipleDetClausesError("clauses " + out.det_name + " and " + c.name);
      out.det_name = c.name;
      pred = m->first;
      impl = m->second;
    }
  }
  if (out.det_name.empty())
    throw UnrecognizedClauseShapeError("no detachment-rule clause found");

  for (const RawClause& c : clauses) {
    if (c.name == out.det_name && match_det(c)) continue;
    if (c.literals.size() != 1)
      throw UnrecognizedClauseShapeError("clause " + c.name + " has " +
                                         std::to_string(c.literals.size()) +
                                         " literals and is not the detachment rule");
    const RawLiteral& lit = c.literals[0];
    if (lit.atom.name != pred || lit.atom.args.size() != 1)
      throw UnrecognizedClauseShapeError("clause " + c.name + " does not use predicate " + pred);
    if (lit.positive) {
      std::unordered_map<std::string, VarId> vars;
      int next = 1;
      out.axioms.emplace_back(c.name,
                              raw_to_term(lit.atom.args[0], impl, &vars, &next, true));
    } else {
      if (out.goal)
        throw UnrecognizedClauseShapeError("clause " + c.name + " is a second goal");
      out.goal = raw_to_term(lit.atom.args[0], impl, nullptr, nullptr, false);
    }
  }
  if (out.axioms.empty()) throw UnrecognizedClauseShapeError("no axiom clause found");
  return out;
}

CdProblem load_tptp(const std::string& path) { return parse_tptp_text(read_text_file(path)); }

// ----------------------------------------------------------------- files

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw MalformedError("cannot write " + path);
  outf << content;
}

}  // namespace cdt
