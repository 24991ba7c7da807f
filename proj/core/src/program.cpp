#include "clg/program.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "text.hpp"

namespace clg {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool parse_double(std::string_view s, double& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool is_ident(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), text::is_ident_char);
}

// Splits at top-level occurrences of sep (outside (), {}).
std::vector<std::string> split_top(std::string_view s, char sep, int line) {
  std::vector<std::string> out;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '{') ++depth;
    if (c == ')' || c == '}') {
      if (--depth < 0) throw ParseError("unbalanced bracket", line);
    }
    if (c == sep && depth == 0) {
      out.emplace_back(text::trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError("unbalanced bracket", line);
  out.emplace_back(text::trim(s.substr(start)));
  return out;
}

struct Scope {
  std::function<Var(const std::string&)> lookup;
  std::function<Var()> fresh;
};

struct BodyParser {
  const Signature& sig;
  Scope scope;
  int line;
  std::vector<Atom> atoms;
  Constraint constraint;

  TypeId type_of(const std::string& name) {
    auto t = sig.find_type(name);
    if (!t) throw ParseError("undeclared type '" + name + "'", line);
    return *t;
  }

  Atom atom(std::string_view s) {
    auto lp = s.find('(');
    if (lp == std::string_view::npos || s.back() != ')') throw ParseError("malformed atom '" + std::string(s) + "'", line);
    Atom a;
    a.rel = std::string(text::trim(s.substr(0, lp)));
    if (!is_ident(a.rel) || is_variable_name(a.rel))
      throw ParseError("bad relation name '" + a.rel + "'", line);
    auto inner = text::trim(s.substr(lp + 1, s.size() - lp - 2));
    if (!inner.empty()) {
      for (auto& arg : split_top(inner, ',', line)) {
        if (arg.empty() || !is_ident(arg)) throw ParseError("bad argument '" + arg + "'", line);
        if (is_variable_name(arg)) {
          Var v = scope.lookup(arg);
          if (std::find(a.args.begin(), a.args.end(), v) != a.args.end()) {
            Var w = scope.fresh();
            constraint.atoms.push_back(CAtom::eq(w, v));
            v = w;
          }
          a.args.push_back(v);
        } else {
          // constant argument: p(X,0) abbreviates p(X,V) & V=0
          Var w = scope.fresh();
          constraint.atoms.push_back(CAtom::type(w, type_of(arg)));
          a.args.push_back(w);
        }
      }
    }
    return a;
  }

  void equation(std::string_view s) {
    auto eq = s.find('=');
    auto lhs = std::string(text::trim(s.substr(0, eq)));
    auto rhs = text::trim(s.substr(eq + 1));
    if (!is_variable_name(lhs) || !is_ident(lhs)) throw ParseError("left side of '=' must be a variable", line);
    Var x = scope.lookup(lhs);
    std::vector<std::string> path;
    size_t pos = 0;
    while (true) {
      auto c = rhs.find(':', pos);
      path.emplace_back(text::trim(rhs.substr(pos, c == std::string_view::npos ? rhs.npos : c - pos)));
      if (c == std::string_view::npos) break;
      pos = c + 1;
    }
    for (auto& seg : path)
      if (!is_ident(seg)) throw ParseError("malformed constraint '" + std::string(s) + "'", line);
    Var cur = x;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      auto f = sig.find_feature(path[i]);
      if (!f) throw ParseError("undeclared feature '" + path[i] + "'", line);
      Var next = (i + 2 == path.size() && is_variable_name(path.back())) ? scope.lookup(path.back()) : scope.fresh();
      constraint.atoms.push_back(CAtom::feat(cur, *f, next));
      cur = next;
    }
    const auto& last = path.back();
    if (is_variable_name(last)) {
      if (path.size() == 1) constraint.atoms.push_back(CAtom::eq(x, scope.lookup(last)));
    } else {
      constraint.atoms.push_back(CAtom::type(cur, type_of(last)));
    }
  }

  void conjunction(std::string_view s) {
    s = text::trim(s);
    if (s.empty() || s == "true") return;
    for (auto& part : split_top(s, '&', line)) {
      std::string_view p = part;
      if (p.empty()) throw ParseError("empty conjunct", line);
      if (p.front() == '{') {
        if (p.back() != '}') throw ParseError("unterminated '{'", line);
        conjunction(p.substr(1, p.size() - 2));
      } else if (p.find('=') != std::string_view::npos && p.find('(') == std::string_view::npos) {
        equation(p);
      } else {
        atoms.push_back(atom(p));
      }
    }
  }
};

// Renumbers local variables by first occurrence: head, body, constraint.
void normalize_vars(Clause& c) {
  std::map<Var, Var> m;
  std::vector<std::string> names;
  auto see = [&](Var v) {
    if (m.emplace(v, static_cast<Var>(names.size())).second) names.push_back(c.var_names.at(v));
  };
  for (Var v : c.head.args) see(v);
  for (auto& a : c.body)
    for (Var v : a.args) see(v);
  for (auto& a : c.constraint.atoms) {
    see(a.a);
    if (a.kind != CAtom::Kind::Type) see(a.b);
  }
  for (size_t v = 0; v < c.var_names.size(); ++v) see(static_cast<Var>(v));
  auto map = [&](Var v) { return m.at(v); };
  for (auto& v : c.head.args) v = map(v);
  for (auto& a : c.body)
    for (auto& v : a.args) v = map(v);
  for (auto& a : c.constraint.atoms) {
    a.a = map(a.a);
    if (a.kind != CAtom::Kind::Type) a.b = map(a.b);
  }
  c.var_names = std::move(names);
}

Clause parse_clause(const std::string& line, int no, const Signature& sig, const Weights* weights,
                    int ordinal) {
  Clause c;
  std::string_view s = line;
  if (s.back() != '.') throw ParseError("clause must end with '.'", no);
  s.remove_suffix(1);
  s = text::trim(s);
  // leading id / factor tokens
  std::optional<std::string> id;
  bool factor_given = false;
  while (true) {
    auto sp = s.find_first_of(" \t");
    if (sp == std::string_view::npos) break;
    auto tok = s.substr(0, sp);
    if (tok.find('(') != std::string_view::npos) break;
    std::string t(tok);
    double f;
    if (t.front() == '@') {
      if (factor_given) throw ParseError("two factors given", no);
      factor_given = true;
      c.factor_name = t.substr(1);
      if (weights) {
        auto it = weights->find(c.factor_name);
        if (it == weights->end()) throw ParseError("no weight for symbolic factor '" + c.factor_name + "'", no);
        c.factor = it->second;
      }
    } else if ((t.find('.') != std::string::npos || id) && parse_double(t, f)) {
      // a token with a decimal point, or the second leading token, is the factor
      if (factor_given) throw ParseError("two factors given", no);
      factor_given = true;
      c.factor = f;
    } else {
      if (id) throw ParseError("unexpected token '" + t + "'", no);
      id = t;
    }
    s = text::trim(s.substr(sp));
  }
  c.id = id ? *id : std::to_string(ordinal);
  std::map<std::string, Var> names;
  auto lookup = [&](const std::string& n) {
    auto [it, fresh] = names.emplace(n, static_cast<Var>(c.var_names.size()));
    if (fresh) c.var_names.push_back(n);
    return it->second;
  };
  int gen = 0;
  auto fresh = [&]() {
    std::string n;
    do n = "_G" + std::to_string(++gen);
    while (names.count(n));
    return lookup(n);
  };
  BodyParser bp{sig, {lookup, fresh}, no, {}, {}};
  auto arrow = s.find(":-");
  std::string_view head = text::trim(arrow == std::string_view::npos ? s : s.substr(0, arrow));
  c.head = bp.atom(head);
  if (arrow != std::string_view::npos) bp.conjunction(s.substr(arrow + 2));
  c.body = std::move(bp.atoms);
  c.constraint = std::move(bp.constraint);
  normalize_vars(c);
  return c;
}

}  // namespace

const std::vector<int>& Program::defining(const std::string& rel) const {
  static const std::vector<int> none;
  auto it = by_rel_.find(rel);
  return it == by_rel_.end() ? none : it->second;
}

std::optional<int> Program::arity(const std::string& rel) const {
  auto it = arity_.find(rel);
  if (it == arity_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Program::index_of(const std::string& id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Program::relations() const {
  std::vector<std::string> out;
  for (auto& [r, _] : arity_) out.push_back(r);
  return out;
}

void Program::add(Clause c, int line) {
  if (!(c.factor > 0.0 && c.factor <= 1.0))
    throw ParseError("factor " + fmt_double(c.factor) + " outside (0,1]", line);
  if (id_index_.count(c.id)) throw ParseError("duplicate clause id '" + c.id + "'", line);
  auto check = [&](const Atom& a) {
    int n = static_cast<int>(a.args.size());
    auto [it, fresh] = arity_.emplace(a.rel, n);
    if (!fresh && it->second != n)
      throw ParseError("relation '" + a.rel + "' used with arity " + std::to_string(n) + " and " +
                           std::to_string(it->second),
                       line);
  };
  check(c.head);
  for (auto& a : c.body) check(a);
  int idx = static_cast<int>(clauses_.size());
  id_index_.emplace(c.id, idx);
  by_rel_[c.head.rel].push_back(idx);
  clauses_.push_back(std::move(c));
}

void Program::declare_external(const std::string& rel, int arity) {
  external_[rel] = arity;
  arity_.emplace(rel, arity);
}

void Program::validate() const {
  for (auto& c : clauses_)
    for (auto& a : c.body)
      if (!by_rel_.count(a.rel) && !external_.count(a.rel))
        throw ParseError("relation '" + a.rel + "' used in clause " + c.id + " has no defining clause");
}

void Program::bind_weights(const Weights& w) {
  for (auto& c : clauses_) {
    if (c.factor_name.empty()) continue;
    auto it = w.find(c.factor_name);
    if (it == w.end()) throw ParseError("no weight for symbolic factor '" + c.factor_name + "'");
    if (!(it->second > 0.0 && it->second <= 1.0))
      throw ParseError("weight '" + c.factor_name + "' outside (0,1]");
    c.factor = it->second;
  }
}

std::string Program::render() const {
  std::string out;
  for (auto& [r, n] : external_) out += "external " + r + "/" + std::to_string(n) + "\n";
  for (auto& c : clauses_) out += render_clause(c, *sig_) + "\n";
  return out;
}

std::string render_atom(const Atom& a, const VarNamer& name) {
  std::string out = a.rel + "(";
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += name(a.args[i]);
  }
  return out + ")";
}

std::string render_clause(const Clause& c, const Signature& sig) {
  VarNamer name = [&](Var v) { return c.var_names.at(v); };
  std::string out = c.id + " ";
  if (!c.factor_name.empty())
    out += "@" + c.factor_name + " ";
  else if (c.factor != 1.0) {
    std::string f = fmt_double(c.factor);
    if (f.find('.') == std::string::npos && f.find('e') == std::string::npos) f += ".0";
    out += f + " ";
  }
  out += render_atom(c.head, name);
  std::vector<std::string> parts;
  for (auto& a : c.body) parts.push_back(render_atom(a, name));
  if (!c.constraint.empty()) parts.push_back("{" + render(c.constraint, sig, name) + "}");
  if (!parts.empty()) {
    out += " :- ";
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? " & " : "") + parts[i];
  }
  return out + ".";
}

std::string render_goal(const Goal& g, const Signature& sig, const VarNamer& name) {
  std::vector<std::string> parts;
  for (auto& a : g.atoms) parts.push_back(render_atom(a, name));
  if (!g.constraint.empty()) parts.push_back(render(g.constraint, sig, name));
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? " & " : "") + parts[i];
  return out.empty() ? "true" : out;
}

Program parse_program(std::string_view text, std::shared_ptr<const Signature> sig, const Weights* weights) {
  Program p(sig);
  int ordinal = 0;
  for (auto& [no, line] : text::content_lines(text)) {
    if (line.rfind("external ", 0) == 0) {
      auto spec = std::string(text::trim(std::string_view(line).substr(9)));
      auto slash = spec.find('/');
      int n = 0;
      if (slash == std::string::npos || std::from_chars(spec.data() + slash + 1, spec.data() + spec.size(), n).ec != std::errc())
        throw ParseError("expected 'external rel/arity'", no);
      p.declare_external(spec.substr(0, slash), n);
      continue;
    }
    ++ordinal;
    p.add(parse_clause(line, no, *sig, weights, ordinal), no);
  }
  p.validate();
  return p;
}

Weights parse_weights(std::string_view text) {
  Weights w;
  for (auto& [no, line] : text::content_lines(text)) {
    auto ws = text::words(line);
    double v;
    if (ws.size() != 2 || !parse_double(ws[1], v)) throw ParseError("expected 'name value'", no);
    w[ws[0]] = v;
  }
  return w;
}

Goal parse_goal(std::string_view text, const Signature& sig, VarPool& pool) {
  auto lookup = [&](const std::string& n) { return pool.named(n); };
  auto fresh = [&]() { return pool.fresh("_G"); };
  BodyParser bp{sig, {lookup, fresh}, 0, {}, {}};
  auto s = text::trim(text);
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  bp.conjunction(s);
  return Goal{std::move(bp.atoms), std::move(bp.constraint)};
}

Instance fresh_variant(const Clause& c, VarPool& pool, const Atom* goal) {
  std::vector<Var> map(c.var_names.size(), -1);
  if (goal) {
    if (goal->rel != c.head.rel || goal->args.size() != c.head.args.size())
      throw std::invalid_argument("goal atom does not match clause head");
    for (size_t i = 0; i < c.head.args.size(); ++i) map[c.head.args[i]] = goal->args[i];
  }
  for (size_t v = 0; v < map.size(); ++v) {
    if (map[v] >= 0) continue;
    std::string base = c.var_names[v];
    if (auto q = base.find('\''); q != std::string::npos) base.resize(q);
    map[v] = pool.fresh(base);
  }
  Instance out;
  auto tr = [&](const Atom& a) {
    Atom b{a.rel, {}};
    for (Var v : a.args) b.args.push_back(map[v]);
    return b;
  };
  out.head = tr(c.head);
  for (auto& a : c.body) out.body.push_back(tr(a));
  out.constraint.atoms.reserve(c.constraint.atoms.size());
  for (auto a : c.constraint.atoms) {
    a.a = map[a.a];
    if (a.kind != CAtom::Kind::Type) a.b = map[a.b];
    out.constraint.atoms.push_back(a);
  }
  return out;
}

double Corpus::total() const {
  double n = 0;
  for (auto& e : entries) n += e.count;
  return n;
}

Corpus parse_corpus(std::string_view text, const Signature& sig, VarPool& pool) {
  Corpus c;
  for (auto& [no, line] : text::content_lines(text)) {
    CorpusEntry e;
    e.line = no;
    std::string_view s = line;
    if (auto bar = s.find('|'); bar != std::string_view::npos) {
      auto tail = text::trim(s.substr(bar + 1));
      if (tail.rfind("gold=", 0) != 0) throw ParseError("expected 'gold=K' after '|'", no);
      auto num = tail.substr(5);
      if (std::from_chars(num.data(), num.data() + num.size(), e.gold).ec != std::errc() || e.gold < 0)
        throw ParseError("bad gold index", no);
      s = text::trim(s.substr(0, bar));
    }
    auto sp = s.find_first_of(" \t");
    if (sp != std::string_view::npos) {
      auto tok = s.substr(0, sp);
      double n;
      if (std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) || ch == '.'; }) &&
          parse_double(tok, n)) {
        if (!(n > 0)) throw ParseError("count must be positive", no);
        e.count = n;
        s = text::trim(s.substr(sp));
      }
    }
    e.text = std::string(s);
    try {
      e.goal = parse_goal(s, sig, pool);
    } catch (const ParseError& err) {
      throw ParseError(err.what(), no);
    }
    c.entries.push_back(std::move(e));
  }
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace clg
