#include "clg/loglinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "text.hpp"

namespace clg {

namespace {

std::vector<std::string> split_conj(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '(') ++depth;
    if (i < s.size() && s[i] == ')') --depth;
    if (i == s.size() || (s[i] == '&' && depth == 0)) {
      auto part = text::trim(s.substr(start, i - start));
      if (part.empty()) throw ModelError("empty conjunct in pattern '" + std::string(s) + "'");
      out.emplace_back(part);
      start = i + 1;
    }
  }
  return out;
}

bool is_ident(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), text::is_ident_char);
}

const char* kind_names[] = {"clause-count", "subtree", "answer-type"};

}  // namespace

Pattern Pattern::parse(std::string_view text) {
  Pattern p;
  auto s = text::trim(text);
  if (s.empty()) throw ModelError("empty pattern");
  for (auto& part : split_conj(s)) {
    std::string_view c = part;
    if (c.front() == '@') {
      if (!p.clause.empty()) throw ModelError("pattern names two clauses: " + std::string(s));
      p.clause = std::string(text::trim(c.substr(1)));
      if (!is_ident(p.clause)) throw ModelError("bad clause id in pattern: " + part);
    } else if (auto lp = c.find('('); lp != std::string_view::npos) {
      if (c.back() != ')') throw ModelError("bad atom in pattern: " + part);
      PAtom a;
      a.rel = std::string(text::trim(c.substr(0, lp)));
      if (!is_ident(a.rel)) throw ModelError("bad relation in pattern: " + part);
      auto inner = c.substr(lp + 1, c.size() - lp - 2);
      size_t st = 0;
      while (st <= inner.size()) {
        size_t comma = inner.find(',', st);
        if (comma == std::string_view::npos) comma = inner.size();
        auto arg = std::string(text::trim(inner.substr(st, comma - st)));
        if (!is_variable_name(arg) || !is_ident(arg)) throw ModelError("pattern arguments must be variables: " + part);
        a.args.push_back(arg);
        st = comma + 1;
      }
      p.atoms.push_back(std::move(a));
    } else if (auto eq = c.find('='); eq != std::string_view::npos) {
      auto v = std::string(text::trim(c.substr(0, eq)));
      auto t = std::string(text::trim(c.substr(eq + 1)));
      if (!is_variable_name(v) || !is_ident(v) || !is_ident(t) || is_variable_name(t))
        throw ModelError("expected 'Var=type' in pattern: " + part);
      p.types.emplace_back(v, t);
    } else {
      throw ModelError("cannot read pattern conjunct: " + part);
    }
  }
  return p;
}

std::string Pattern::render() const {
  std::vector<std::string> parts;
  for (auto& a : atoms) {
    std::string s = a.rel + "(";
    for (size_t i = 0; i < a.args.size(); ++i) s += (i ? "," : "") + a.args[i];
    parts.push_back(s + ")");
  }
  for (auto& [v, t] : types) parts.push_back(v + "=" + t);
  if (!clause.empty()) parts.push_back("@" + clause);
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? " & " : "") + parts[i];
  return out;
}

std::string Property::kind_name() const { return kind_names[static_cast<int>(kind)]; }

std::string Property::args() const {
  switch (kind) {
    case Kind::ClauseCount: return clause;
    case Kind::Subtree: return pattern.render();
    case Kind::AnswerType: return var + " " + type;
  }
  return {};
}

Property Property::make(const std::string& name, const std::string& kind, const std::string& args) {
  Property p;
  p.name = name;
  auto a = std::string(text::trim(args));
  if (kind == "clause-count") {
    p.kind = Kind::ClauseCount;
    if (!is_ident(a)) throw ModelError("clause-count needs one clause id: " + name);
    p.clause = a;
  } else if (kind == "subtree") {
    p.kind = Kind::Subtree;
    p.pattern = Pattern::parse(a);
  } else if (kind == "answer-type") {
    p.kind = Kind::AnswerType;
    auto w = text::words(a);
    if (w.size() != 2 || !is_variable_name(w[0]) || is_variable_name(w[1]))
      throw ModelError("answer-type needs 'VAR type': " + name);
    p.var = w[0];
    p.type = w[1];
  } else {
    throw ModelError("unknown property kind '" + kind + "'");
  }
  return p;
}

std::vector<Property> parse_properties(std::string_view text) {
  std::vector<Property> out;
  std::set<std::string> names;
  for (auto& [no, line] : text::content_lines(text)) {
    auto w = text::words(line);
    if (w.size() < 3) throw ParseError("expected 'name kind args'", no);
    size_t p1 = line.find(w[0]) + w[0].size();
    size_t p2 = line.find(w[1], p1) + w[1].size();
    try {
      out.push_back(Property::make(w[0], w[1], line.substr(p2)));
    } catch (const ModelError& e) {
      throw ParseError(e.what(), no);
    }
    if (!names.insert(w[0]).second) throw ParseError("duplicate property '" + w[0] + "'", no);
  }
  return out;
}

std::string render_properties(const std::vector<Property>& props) {
  std::string out;
  for (auto& p : props) out += p.name + " " + p.kind_name() + " " + p.args() + "\n";
  return out;
}

bool match_node(const Pattern& pat, const Signature& sig, const std::vector<Atom>& local, const SolvedForm& cs,
                const std::string& clause_id, const QueryVarLookup& qv) {
  if (!pat.clause.empty() && pat.clause != clause_id) return false;
  if (pat.atoms.size() != local.size()) return false;
  std::map<std::string, Var> bind;
  for (size_t i = 0; i < local.size(); ++i) {
    auto& pa = pat.atoms[i];
    if (pa.rel != local[i].rel || pa.args.size() != local[i].args.size()) return false;
    for (size_t j = 0; j < pa.args.size(); ++j) {
      Var v = cs.has(local[i].args[j]) ? cs.rep(local[i].args[j]) : local[i].args[j];
      auto [it, fresh] = bind.emplace(pa.args[j], v);
      if (!fresh && it->second != v) return false;
    }
  }
  for (auto& [name, tname] : pat.types) {
    auto t = sig.find_type(tname);
    if (!t) throw ModelError("unknown type '" + tname + "' in pattern");
    Var v;
    if (auto it = bind.find(name); it != bind.end()) {
      v = it->second;
    } else {
      auto q = qv(name);
      if (!q) return false;
      v = *q;
    }
    TypeId have = cs.has(v) ? cs.type_of(v) : sig.top();
    if (have != *t) return false;
  }
  return true;
}

void LogLinearModel::validate() const {
  if (props.size() != lambda.size())
    throw ModelError("model has " + std::to_string(props.size()) + " properties but " +
                     std::to_string(lambda.size()) + " parameters");
  for (double l : lambda)
    if (!std::isfinite(l)) throw ModelError("non-finite parameter");
  for (auto& [id, v] : p0.pi)
    if (!(v > 0) || v > 1) throw ModelError("reference probability for clause " + id + " outside (0,1]");
}

LogLinearModel LogLinearModel::extend(const Property& c, double alpha) const {
  LogLinearModel m = *this;
  m.props.push_back(c);
  m.lambda.push_back(alpha);
  return m;
}

std::string model_to_json(const LogLinearModel& m) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["properties"] = nlohmann::ordered_json::array();
  for (auto& p : m.props) j["properties"].push_back({{"name", p.name}, {"kind", p.kind_name()}, {"args", p.args()}});
  j["lambda"] = m.lambda;
  nlohmann::ordered_json p0;
  switch (m.p0.kind) {
    case P0::Kind::Uniform: p0["kind"] = "uniform"; break;
    case P0::Kind::Scfg:
      p0["kind"] = "scfg";
      p0["pi"] = m.p0.pi;
      break;
    case P0::Kind::Table:
      p0["kind"] = "table";
      p0["log_p0"] = m.p0.log_p0;
      break;
  }
  j["p0"] = p0;
  return j.dump(2) + "\n";
}

LogLinearModel model_from_json(std::string_view text) {
  LogLinearModel m;
  try {
    auto j = nlohmann::json::parse(text);
    if (j.value("schema", 0) != 1) throw ModelError("unsupported model schema");
    for (auto& p : j.at("properties"))
      m.props.push_back(Property::make(p.at("name"), p.at("kind"), p.at("args")));
    m.lambda = j.at("lambda").get<std::vector<double>>();
    if (j.contains("p0")) {
      auto& p0 = j["p0"];
      std::string kind = p0.at("kind");
      if (kind == "uniform") {
        m.p0.kind = P0::Kind::Uniform;
      } else if (kind == "scfg") {
        m.p0.kind = P0::Kind::Scfg;
        m.p0.pi = p0.at("pi").get<std::map<std::string, double>>();
      } else if (kind == "table") {
        m.p0.kind = P0::Kind::Table;
        m.p0.log_p0 = p0.at("log_p0").get<std::map<std::string, double>>();
      } else {
        throw ModelError("unknown p0 kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model file: ") + e.what());
  }
  m.validate();
  return m;
}

namespace {

QueryVarLookup query_lookup(const ProofTree& t, const VarPool& pool) {
  return [&t, &pool](const std::string& name) -> std::optional<Var> {
    for (Var v : t.query_vars)
      if (pool.name(v) == name) return v;
    return std::nullopt;
  };
}

std::vector<Atom> local_goal(const GoalNode& g) {
  return {g.atoms.begin(), g.atoms.begin() + std::min<size_t>(g.local_len(), g.atoms.size())};
}

std::string node_clause(const GoalNode& g, const Program& p) { return g.clause < 0 ? "" : p.clause(g.clause).id; }

}  // namespace

double property_count(const Property& p, const ProofTree& t, const TreeContext& ctx) {
  const Program& prog = ctx.program;
  switch (p.kind) {
    case Property::Kind::ClauseCount: {
      double n = 0;
      for (int ci : t.trace) n += prog.clause(ci).id == p.clause;
      return n;
    }
    case Property::Kind::AnswerType: {
      auto ty = prog.signature().find_type(p.type);
      if (!ty) throw ModelError("unknown type '" + p.type + "' in property " + p.name);
      auto v = query_lookup(t, ctx.pool)(p.var);
      if (!v || !t.answer.has(*v)) return 0;
      return prog.signature().leq(t.answer.type_of(*v), *ty) ? 1 : 0;
    }
    case Property::Kind::Subtree: {
      auto qv = query_lookup(t, ctx.pool);
      double n = 0;
      for (size_t i = 0; i < t.node_count(); ++i) {
        const GoalNode& g = t.node(i);
        n += match_node(p.pattern, prog.signature(), local_goal(g), g.cs, node_clause(g, prog), qv);
      }
      return n;
    }
  }
  return 0;
}

std::vector<double> nu_vector(const std::vector<Property>& props, const ProofTree& t, const TreeContext& ctx) {
  std::vector<double> out(props.size(), 0.0);
  const Program& prog = ctx.program;
  std::vector<size_t> subtree;
  for (size_t i = 0; i < props.size(); ++i) {
    if (props[i].kind == Property::Kind::Subtree)
      subtree.push_back(i);
    else
      out[i] = property_count(props[i], t, ctx);
  }
  if (subtree.empty()) return out;
  auto qv = query_lookup(t, ctx.pool);
  for (size_t n = 0; n < t.node_count(); ++n) {
    const GoalNode& g = t.node(n);
    auto local = local_goal(g);
    auto cid = node_clause(g, prog);
    int owner = -1;
    for (size_t i : subtree) {
      if (!match_node(props[i].pattern, prog.signature(), local, g.cs, cid, qv)) continue;
      if (owner >= 0)
        throw ModelError("properties " + props[owner].name + " and " + props[i].name + " overlap on tree " +
                         t.key(prog));
      owner = static_cast<int>(i);
      out[i] += 1;
    }
  }
  return out;
}

std::vector<double> nu_vector(const LogLinearModel& m, const ProofTree& t, const TreeContext& ctx) {
  return nu_vector(m.props, t, ctx);
}

double scfg_prob(const std::map<std::string, double>& pi, const ProofTree& t, const Program& prog) {
  double p = 1.0;
  for (int ci : t.trace) {
    auto it = pi.find(prog.clause(ci).id);
    if (it == pi.end()) throw ModelError("no reference probability for clause " + prog.clause(ci).id);
    p *= it->second;
  }
  return p;
}

double log_p0(const P0& p0, const ProofTree& t, const Program& prog) {
  switch (p0.kind) {
    case P0::Kind::Uniform: return 0.0;
    case P0::Kind::Scfg: {
      double s = 0;
      for (int ci : t.trace) {
        auto it = p0.pi.find(prog.clause(ci).id);
        if (it == p0.pi.end()) throw ModelError("no reference probability for clause " + prog.clause(ci).id);
        s += std::log(it->second);
      }
      return s;
    }
    case P0::Kind::Table: {
      auto it = p0.log_p0.find(t.key(prog));
      if (it == p0.log_p0.end()) throw ModelError("tree " + t.key(prog) + " is outside the support of p0");
      return it->second;
    }
  }
  return 0.0;
}

double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_weight(const LogLinearModel& m, const ProofTree& t, const TreeContext& ctx, size_t support_size) {
  auto nu = nu_vector(m, t, ctx);
  double s = m.p0.kind == P0::Kind::Uniform ? -std::log(static_cast<double>(support_size))
                                              : log_p0(m.p0, t, ctx.program);
  for (size_t i = 0; i < nu.size(); ++i) s += m.lambda[i] * nu[i];
  return s;
}

Normalized normalize(const LogLinearModel& m, const std::vector<ProofTree>& trees, const TreeContext& ctx) {
  if (trees.empty()) throw ModelError("cannot normalise over an empty tree set");
  std::vector<double> lw;
  lw.reserve(trees.size());
  for (auto& t : trees) lw.push_back(log_weight(m, t, ctx, trees.size()));
  Normalized out;
  out.log_z = log_sum_exp(lw);
  for (double w : lw) out.prob.push_back(std::exp(w - out.log_z));
  return out;
}

std::vector<double> conditional(const LogLinearModel& m, const std::vector<ProofTree>& xy, const TreeContext& ctx) {
  if (xy.empty()) throw ModelError("query has no proof trees");
  return normalize(m, xy, ctx).prob;
}

double Dataset::total() const {
  double n = 0;
  for (auto& it : items) n += it.count;
  return n;
}

size_t Dataset::tree_count() const {
  size_t n = 0;
  for (auto& it : items) n += it.trees.size();
  return n;
}

}  // namespace clg
