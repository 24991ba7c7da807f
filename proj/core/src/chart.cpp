#include "clg/chart.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace clg {

int Chart::index_of_id(int id) const {
  for (size_t i = 0; i < clauses.size(); ++i)
    if (clauses[i].id == id) return static_cast<int>(i);
  return -1;
}

int Chart::origin_final(int f) const {
  if (f == 0) return -1;
  return clauses.at(f).origin;
}

std::map<std::string, std::optional<std::vector<TypeId>>> relation_bounds(const Program& p) {
  const Signature& sig = p.signature();
  std::map<std::string, std::optional<std::vector<TypeId>>> b;
  for (auto& rel : p.relations()) b[rel] = std::nullopt;
  auto bound_of = [&](const std::string& rel, size_t arity) -> std::optional<std::vector<TypeId>> {
    if (p.defining(rel).empty()) return std::vector<TypeId>(arity, sig.top());
    return b[rel];
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& c : p.clauses()) {
      SolvedForm s = solve(sig, c.constraint);
      bool ok = s.sat();
      for (auto& a : c.body) {
        if (!ok) break;
        auto ab = bound_of(a.rel, a.args.size());
        if (!ab) {
          ok = false;
          break;
        }
        for (size_t i = 0; i < a.args.size(); ++i)
          if ((*ab)[i] != sig.top()) ok = s.add(CAtom::type(a.args[i], (*ab)[i])) && ok;
      }
      if (!ok) continue;
      std::vector<TypeId> head;
      for (Var v : c.head.args) head.push_back(s.has(v) ? s.type_of(v) : sig.top());
      auto& cur = b[c.head.rel];
      if (!cur) {
        cur = head;
        changed = true;
        continue;
      }
      for (size_t i = 0; i < head.size(); ++i) {
        TypeId j = sig.join((*cur)[i], head[i]);
        if (j != (*cur)[i]) {
          (*cur)[i] = j;
          changed = true;
        }
      }
    }
  }
  return b;
}

namespace {

void add_args(std::vector<Var>& out, const Atom& a) { out.insert(out.end(), a.args.begin(), a.args.end()); }

void sort_unique(std::vector<Var>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Drops class members outside keep; classes reached only through arcs
// keep their representative.
SolvedForm prune(const SolvedForm& cs, const std::vector<Var>& keep) {
  std::map<Var, Var> chosen;
  for (Var v : keep) {
    Var r = cs.has(v) ? cs.rep(v) : v;
    auto [it, fresh] = chosen.emplace(r, v);
    if (!fresh) it->second = std::min(it->second, v);
  }
  auto pick = [&](Var v) {
    auto it = chosen.find(v);
    return it == chosen.end() ? v : it->second;
  };
  Constraint out;
  for (Var v : keep) {
    Var r = cs.has(v) ? cs.rep(v) : v;
    if (pick(r) != v) out.atoms.push_back(CAtom::eq(v, pick(r)));
  }
  for (auto& a : cs.atoms().atoms) {
    if (a.kind == CAtom::Kind::Type) out.atoms.push_back(CAtom::type(pick(a.a), a.sym));
    if (a.kind == CAtom::Kind::Feat) out.atoms.push_back(CAtom::feat(pick(a.a), a.sym, pick(a.b)));
  }
  SolvedForm s = solve(*cs.signature(), out);
  for (Var v : keep) s.touch(v);
  return s;
}

struct Builder {
  Engine& e;
  const Program& p;
  const Signature& sig;
  VarPool& pool;
  ChartOptions opt;
  Chart ch;
  std::map<std::string, std::optional<std::vector<TypeId>>> bounds;
  std::map<std::pair<int, std::string>, int> index;
  std::vector<std::vector<Var>> pending;  // variables a clause's continuation still needs
  std::deque<int> nonunits, units;
  int next_id = 0;

  Builder(Engine& eng, const ChartOptions& o)
      : e(eng), p(eng.program()), sig(eng.program().signature()), pool(eng.pool()), opt(o) {}

  std::vector<Var> fixed(int o) const {
    std::vector<Var> out = ch.query_vars;
    if (o >= 0) {
      const auto& c = ch.clauses[o];
      if (!c.headless) add_args(out, c.head);
      for (auto& a : c.body) add_args(out, a);
      out.insert(out.end(), pending[o].begin(), pending[o].end());
    }
    sort_unique(out);
    return out;
  }

  std::string key(const ChartClause& c) const {
    std::vector<Var> fx = fixed(c.origin);
    std::map<Var, std::vector<Var>> fixed_class;
    auto rep = [&](Var v) { return c.cs.has(v) ? c.cs.rep(v) : v; };
    for (Var f : fx) fixed_class[rep(f)].push_back(f);
    std::map<Var, std::string> label;
    std::deque<Var> queue;
    int counter = 0;
    auto lab = [&](Var v) -> const std::string& {
      Var r = rep(v);
      auto it = label.find(r);
      if (it != label.end()) return it->second;
      std::string l;
      if (auto f = fixed_class.find(r); f != fixed_class.end()) {
        l = "F";
        for (Var x : f->second) l += std::to_string(x) + ".";
      } else {
        l = "#" + std::to_string(counter++);
      }
      queue.push_back(r);
      return label.emplace(r, l).first->second;
    };
    std::ostringstream os;
    os << (c.headless ? "-" : "+");
    auto atom = [&](const Atom& a) {
      os << a.rel << "(";
      for (Var v : a.args) os << lab(v) << ",";
      os << ")";
    };
    if (!c.headless) atom(c.head);
    os << "<-";
    for (auto& a : c.body) atom(a);
    for (Var f : fx) lab(f);
    os << "|";
    while (!queue.empty()) {
      Var r = queue.front();
      queue.pop_front();
      os << label[r] << ":" << (c.cs.has(r) ? c.cs.type_of(r) : sig.top()) << "{";
      for (auto [f, t] : c.cs.arcs(r)) os << f << "=" << lab(t) << ",";
      os << "}";
    }
    return os.str();
  }

  // Projects, normalises argument variables and records pending variables.
  void finish(ChartClause& c) {
    std::vector<Var> keep = fixed(c.origin);
    if (!c.headless) add_args(keep, c.head);
    for (auto& a : c.body) add_args(keep, a);
    sort_unique(keep);
    c.cs = prune(c.cs.project(keep), keep);
    auto norm = [&](Atom& a) {
      for (Var& v : a.args) v = c.cs.rep(v);
    };
    if (!c.headless) norm(c.head);
    for (auto& a : c.body) norm(a);
  }

  std::pair<int, bool> add(ChartClause c) {
    std::string k = key(c);
    auto it = index.find({c.origin, k});
    if (it != index.end()) {
      ch.clauses[it->second].derivs.push_back(c.derivs.front());
      return {it->second, false};
    }
    if (ch.clauses.size() >= opt.cap)
      throw ChartOverflow("chart exceeds " + std::to_string(opt.cap) + " clauses");
    int i = static_cast<int>(ch.clauses.size());
    c.id = next_id++;
    std::vector<Var> pend = ch.query_vars;
    if (!c.headless) add_args(pend, c.head);
    for (size_t j = 1; j < c.body.size(); ++j) add_args(pend, c.body[j]);
    if (c.origin >= 0) pend.insert(pend.end(), pending[c.origin].begin(), pending[c.origin].end());
    sort_unique(pend);
    pending.push_back(std::move(pend));
    index.emplace(std::make_pair(c.origin, std::move(k)), i);
    ch.clauses.push_back(std::move(c));
    return {i, true};
  }

  bool bounded(const SolvedForm& cs, const std::vector<Atom>& atoms) const {
    if (!opt.type_bounds) return true;
    SolvedForm t = cs;
    for (auto& a : atoms) {
      auto it = bounds.find(a.rel);
      if (it == bounds.end() || p.defining(a.rel).empty()) continue;
      if (!it->second) return false;
      for (size_t i = 0; i < a.args.size(); ++i)
        if ((*it->second)[i] != sig.top() && !t.add(CAtom::type(a.args[i], (*it->second)[i]))) return false;
    }
    return true;
  }

  std::optional<ChartClause> predict(int ci, int pc) {
    const ChartClause& c1 = ch.clauses[ci];
    const Atom& sel = c1.body.front();
    Instance inst = fresh_variant(p.clause(pc), pool);
    ChartClause out;
    out.cs = c1.cs;
    for (size_t j = 0; j < sel.args.size(); ++j) out.cs.add(CAtom::eq(inst.head.args[j], sel.args[j]));
    out.cs.add(inst.constraint);
    if (!out.cs.sat() || !bounded(out.cs, inst.body)) return std::nullopt;
    out.head = sel;
    out.body = std::move(inst.body);
    out.origin = ci;
    out.last_clause = pc;
    out.derivs.push_back({Derivation::Rule::Predict, ci, pc});
    finish(out);
    return out;
  }

  ChartClause complete(int ci, int ui) {
    const ChartClause& c1 = ch.clauses[ci];
    const ChartClause& u = ch.clauses[ui];
    ChartClause out;
    out.cs = u.cs;
    out.headless = c1.headless;
    out.head = c1.head;
    out.body.assign(c1.body.begin() + 1, c1.body.end());
    out.origin = c1.origin;
    out.last_clause = u.last_clause;
    out.derivs.push_back({Derivation::Rule::Complete, ci, ui});
    finish(out);
    return out;
  }

  bool final_unit(int u) const {
    int o = ch.clauses[u].origin;
    return o >= 0 && ch.clauses[o].headless && ch.clauses[o].body.size() == 1;
  }

  // Depth first with an explicit stack: deep prediction chains must reach
  // the clause cap rather than exhaust the call stack.
  void predict_dfs(int root) {
    std::vector<std::pair<int, size_t>> stack{{root, 0}};
    while (!stack.empty()) {
      auto& [i, k] = stack.back();
      const auto& defs = p.defining(ch.clauses[i].body.front().rel);
      if (k == defs.size()) {
        stack.pop_back();
        continue;
      }
      int pc = defs[k++];
      auto c = predict(i, pc);
      if (!c) continue;
      auto [j, fresh] = add(std::move(*c));
      if (!fresh) continue;
      if (ch.clauses[j].unit())
        units.push_back(j);
      else
        stack.push_back({j, 0});
    }
  }

  void complete_dfs(int u) {
    while (true) {
      if (final_unit(u)) {
        ch.finals.push_back(u);
        return;
      }
      auto [j, fresh] = add(complete(ch.clauses[u].origin, u));
      if (!fresh) return;
      if (!ch.clauses[j].unit()) {
        nonunits.push_back(j);
        return;
      }
      u = j;
    }
  }

  void run(const Goal& q) {
    if (opt.type_bounds) bounds = relation_bounds(p);
    next_id = opt.first_id < 0 ? p.size() + 1 : opt.first_id;
    ch.program = &p;
    ch.query = q;
    ch.query_vars = goal_vars(q);
    ChartClause init;
    init.headless = true;
    init.body = q.atoms;
    init.cs = solve(sig, q.constraint);
    for (Var v : ch.query_vars) init.cs.touch(v);
    init.derivs.push_back({Derivation::Rule::Init, -1, -1});
    if (!init.cs.sat()) return;
    ch.clauses.push_back(init);
    ch.clauses[0].id = next_id++;
    std::vector<Var> pend = ch.query_vars;
    for (size_t j = 1; j < init.body.size(); ++j) add_args(pend, init.body[j]);
    sort_unique(pend);
    pending.push_back(pend);
    if (init.unit()) {
      ch.finals.push_back(0);
      return;
    }
    if (!bounded(init.cs, init.body)) return;
    nonunits.push_back(0);
    while (!nonunits.empty() || !units.empty()) {
      std::deque<int> batch;
      batch.swap(nonunits);
      for (int i : batch) predict_dfs(i);
      batch.clear();
      batch.swap(units);
      for (int u : batch) complete_dfs(u);
    }
  }
};

}  // namespace

Chart earley_close(Engine& e, const Goal& q, const ChartOptions& opt) {
  Builder b(e, opt);
  b.run(q);
  return std::move(b.ch);
}

namespace {

std::string rule_text(const Chart& c, const Derivation& d) {
  switch (d.rule) {
    case Derivation::Rule::Init: return "(I)";
    case Derivation::Rule::Predict:
      return "(P " + std::to_string(c.clauses[d.parent].id) + "," + c.program->clause(d.other).id + ")";
    case Derivation::Rule::Complete:
      return "(C " + std::to_string(c.clauses[d.parent].id) + "," + std::to_string(c.clauses[d.other].id) + ")";
  }
  return "";
}

}  // namespace

std::string render_chart_clause(const Chart& c, int index, const VarPool& pool) {
  const ChartClause& cl = c.clauses.at(index);
  const Signature& sig = c.program->signature();
  auto anonymous = [&](Var v) { return pool.name(v).empty() || pool.name(v)[0] == '_'; };
  std::set<Var> named_query;
  for (Var v : c.query_vars)
    if (!anonymous(v)) named_query.insert(v);
  std::map<Var, std::vector<Var>> members;
  for (Var v : cl.cs.vars()) members[cl.cs.rep(v)].push_back(v);
  // Atomic values without features, such as string positions, print as their type.
  std::map<Var, TypeId> inlined;
  for (auto& [r, ms] : members) {
    TypeId t = cl.cs.type_of(r);
    if (t == sig.top() || !sig.minimal(t) || !cl.cs.arcs(r).empty()) continue;
    if (std::any_of(ms.begin(), ms.end(), [&](Var v) { return named_query.count(v); })) continue;
    inlined[r] = t;
  }
  std::map<Var, std::string> cname;
  std::map<std::string, int> used;
  int anon = 0;
  for (auto& [r, ms] : members) {
    if (inlined.count(r)) continue;
    std::string base;
    for (Var v : ms)
      if (!anonymous(v)) {
        base = pool.name(v);
        if (auto q = base.find('\''); q != std::string::npos) base.resize(q);
        break;
      }
    if (base.empty()) {
      cname[r] = "_" + std::to_string(++anon);
      continue;
    }
    int k = used[base]++;
    cname[r] = base + std::string(k, '\'');
  }
  VarNamer namer = [&](Var v) -> std::string {
    Var r = cl.cs.has(v) ? cl.cs.rep(v) : v;
    if (auto it = inlined.find(r); it != inlined.end()) return sig.type_name(it->second);
    if (auto it = cname.find(r); it != cname.end()) return it->second;
    return pool.name(v);
  };
  Constraint shown;
  for (auto& a : cl.cs.atoms().atoms) {
    if (a.kind == CAtom::Kind::Eq) continue;
    if (a.kind == CAtom::Kind::Type && inlined.count(a.a)) continue;
    shown.atoms.push_back(a);
  }
  std::ostringstream os;
  os << cl.id << " ";
  if (!cl.headless) os << render_atom(cl.head, namer) << " ";
  std::vector<std::string> parts;
  for (auto& a : cl.body) parts.push_back(render_atom(a, namer));
  if (!shown.empty()) parts.push_back(render(shown, sig, namer));
  if (!parts.empty()) {
    os << ":- ";
    for (size_t i = 0; i < parts.size(); ++i) os << (i ? " & " : "") << parts[i];
  }
  os << ".";
  for (auto& d : cl.derivs) os << " " << rule_text(c, d);
  return os.str();
}

std::string render_chart(const Chart& c, const VarPool& pool) {
  std::string out;
  for (size_t i = 0; i < c.clauses.size(); ++i) out += render_chart_clause(c, static_cast<int>(i), pool) + "\n";
  return out;
}

namespace {

void traces_rec(const Chart& c, int i, size_t limit, std::vector<char>& on_stack,
                std::vector<std::vector<int>>& out) {
  const ChartClause& cl = c.clauses[i];
  on_stack[i] = 1;
  for (auto& d : cl.derivs) {
    if (out.size() >= limit) break;
    switch (d.rule) {
      case Derivation::Rule::Init: out.push_back({}); break;
      case Derivation::Rule::Predict: out.push_back({d.other}); break;
      case Derivation::Rule::Complete: {
        if (on_stack[d.parent] || on_stack[d.other]) break;
        std::vector<std::vector<int>> a, b;
        traces_rec(c, d.parent, limit, on_stack, a);
        traces_rec(c, d.other, limit, on_stack, b);
        for (auto& x : a)
          for (auto& y : b) {
            if (out.size() >= limit) break;
            std::vector<int> t = x;
            t.insert(t.end(), y.begin(), y.end());
            out.push_back(std::move(t));
          }
        break;
      }
    }
  }
  on_stack[i] = 0;
}

}  // namespace

std::vector<std::vector<int>> chart_traces(const Chart& c, int index, size_t limit) {
  std::vector<std::vector<int>> out;
  std::vector<char> on_stack(c.clauses.size(), 0);
  traces_rec(c, index, limit, on_stack, out);
  return out;
}

namespace {

std::vector<std::vector<int>> final_traces(const Chart& c, int f, size_t limit) {
  int o = c.origin_final(f);
  auto tail = chart_traces(c, f, limit);
  if (o < 0) return tail;
  std::vector<std::vector<int>> out;
  for (auto& h : chart_traces(c, o, limit))
    for (auto& t : tail) {
      if (out.size() >= limit) return out;
      std::vector<int> x = h;
      x.insert(x.end(), t.begin(), t.end());
      out.push_back(std::move(x));
    }
  return out;
}

}  // namespace

std::vector<ProofTree> reconstruct(Engine& e, const Chart& c, int final_index, size_t limit) {
  std::vector<ProofTree> out;
  for (auto& t : final_traces(c, final_index, limit)) {
    auto tree = e.replay(c.query, t);
    if (!tree) throw std::logic_error("chart derivation does not replay");
    out.push_back(std::move(*tree));
  }
  return out;
}

std::vector<int> useful_clauses(const Chart& c) {
  std::vector<char> seen(c.clauses.size(), 0);
  std::vector<int> stack;
  for (int f : c.finals) {
    stack.push_back(f);
    if (int o = c.origin_final(f); o >= 0) stack.push_back(o);
  }
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    if (seen[i]) continue;
    seen[i] = 1;
    for (auto& d : c.clauses[i].derivs) {
      if (d.rule == Derivation::Rule::Init) continue;
      stack.push_back(d.parent);
      if (d.rule == Derivation::Rule::Complete) stack.push_back(d.other);
    }
  }
  std::vector<int> out;
  for (size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) out.push_back(static_cast<int>(i));
  return out;
}

double chart_node_log_weight(const Chart& c, int index, const LogLinearModel& m, const VarPool& pool) {
  const ChartClause& cl = c.clauses.at(index);
  bool is_final = std::find(c.finals.begin(), c.finals.end(), index) != c.finals.end();
  if (cl.unit() && !is_final) return 0;
  const Program& p = *c.program;
  const Signature& sig = p.signature();
  QueryVarLookup qv = [&](const std::string& name) -> std::optional<Var> {
    for (Var v : c.query_vars)
      if (pool.name(v) == name) return v;
    return std::nullopt;
  };
  std::string cid = cl.last_clause < 0 ? "" : p.clause(cl.last_clause).id;
  std::vector<Atom> local = is_final ? std::vector<Atom>{} : cl.body;
  double s = 0;
  int owner = -1;
  for (size_t i = 0; i < m.props.size(); ++i) {
    const Property& pr = m.props[i];
    if (pr.kind == Property::Kind::Subtree) {
      if (!match_node(pr.pattern, sig, local, cl.cs, cid, qv)) continue;
      if (owner >= 0) throw ModelError("properties " + m.props[owner].name + " and " + pr.name + " overlap");
      owner = static_cast<int>(i);
      s += m.lambda[i];
    } else if (pr.kind == Property::Kind::AnswerType && is_final) {
      auto ty = sig.find_type(pr.type);
      if (!ty) throw ModelError("unknown type '" + pr.type + "' in property " + pr.name);
      auto v = qv(pr.var);
      if (v && cl.cs.has(*v) && sig.leq(cl.cs.type_of(*v), *ty)) s += m.lambda[i];
    }
  }
  return s;
}

namespace {

double clause_count_weight(const Program& p, const LogLinearModel& m, int pc) {
  double s = 0;
  for (size_t i = 0; i < m.props.size(); ++i)
    if (m.props[i].kind == Property::Kind::ClauseCount && m.props[i].clause == p.clause(pc).id) s += m.lambda[i];
  return s;
}

constexpr double kDead = -std::numeric_limits<double>::infinity();

struct Scorer {
  Engine& e;
  const Chart& c;
  const LogLinearModel& m;
  std::vector<double> own;
  std::vector<double> best;
  std::vector<int> arg;  // chosen derivation
  std::vector<int> state;  // 0 unknown, 1 in progress, 2 done

  Scorer(Engine& eng, const Chart& ch, const LogLinearModel& model) : e(eng), c(ch), m(model) {
    size_t n = c.clauses.size();
    own.resize(n);
    for (size_t i = 0; i < n; ++i) own[i] = chart_node_log_weight(c, static_cast<int>(i), m, e.pool());
    best.assign(n, kDead);
    arg.assign(n, -1);
    state.assign(n, 0);
  }

  // Best over derivations whose parents evaluate alive.
  void raw(int i, const std::function<double(int)>& value) {
    const ChartClause& cl = c.clauses[i];
    for (size_t k = 0; k < cl.derivs.size(); ++k) {
      const Derivation& d = cl.derivs[k];
      double w = kDead;
      switch (d.rule) {
        case Derivation::Rule::Init: w = own[i]; break;
        case Derivation::Rule::Predict:
          if (value(d.parent) > kDead) w = own[i] + clause_count_weight(*c.program, m, d.other);
          break;
        case Derivation::Rule::Complete: {
          double a = value(d.parent), b = value(d.other);
          if (a > kDead && b > kDead) w = own[i] + a + b;
          break;
        }
      }
      if (w > best[i]) {
        best[i] = w;
        arg[i] = static_cast<int>(k);
      }
    }
  }

  std::vector<int> trace(int i) const {
    const Derivation& d = c.clauses[i].derivs[arg[i]];
    switch (d.rule) {
      case Derivation::Rule::Init: return {};
      case Derivation::Rule::Predict: return {d.other};
      case Derivation::Rule::Complete: {
        auto t = trace(d.parent);
        auto u = trace(d.other);
        t.insert(t.end(), u.begin(), u.end());
        return t;
      }
    }
    return {};
  }

  void pick_final(BestParse& out, const std::function<double(int)>& value) {
    for (int f : c.finals) {
      double w = value(f);
      if (w == kDead) continue;
      int o = c.origin_final(f);
      if (o >= 0) {
        double h = value(o);
        if (h == kDead) continue;
        w += h;
      }
      if (!out.found || w > out.log_weight) {
        out.found = true;
        out.final_index = f;
        out.log_weight = w;
      }
    }
    if (!out.found) return;
    int o = c.origin_final(out.final_index);
    out.trace = o >= 0 ? trace(o) : std::vector<int>{};
    auto tail = trace(out.final_index);
    out.trace.insert(out.trace.end(), tail.begin(), tail.end());
    out.weight = std::exp(out.log_weight);
    out.tree = e.replay(c.query, out.trace);
    if (!out.tree) throw std::logic_error("chart derivation does not replay");
  }
};

}  // namespace

BestParse viterbi_best(Engine& e, const Chart& c, const LogLinearModel& m) {
  Scorer s(e, c, m);
  std::function<double(int)> value = [&](int i) -> double {
    if (s.state[i] == 2) return s.best[i];
    if (s.state[i] == 1) return kDead;
    s.state[i] = 1;
    s.raw(i, value);
    s.state[i] = 2;
    return s.best[i];
  };
  BestParse out;
  s.pick_final(out, value);
  return out;
}

namespace {

std::string skeleton(const ChartClause& c) {
  std::map<Var, int> label;
  std::ostringstream os;
  auto atom = [&](const Atom& a) {
    os << a.rel << "(";
    for (Var v : a.args) {
      Var r = c.cs.has(v) ? c.cs.rep(v) : v;
      auto it = label.emplace(r, static_cast<int>(label.size())).first;
      os << it->second << ",";
    }
    os << ")";
  };
  if (c.headless)
    os << "-";
  else
    atom(c.head);
  os << "<-";
  for (auto& a : c.body) atom(a);
  return os.str();
}

}  // namespace

BestParse heuristic_best(Engine& e, const Chart& c, const LogLinearModel& m, HeuristicMode mode) {
  Scorer s(e, c, m);
  size_t n = c.clauses.size();
  std::vector<std::string> skel(n);
  std::vector<char> eligible(n, 1);
  for (size_t i = 0; i < n; ++i) {
    if (!c.clauses[i].completed()) continue;
    skel[i] = skeleton(c.clauses[i]);
    if (mode != HeuristicMode::Heuristic) continue;
    bool ok = false;
    for (int f : c.finals) {
      SolvedForm t = c.clauses[i].cs;
      if (t.add(c.clauses[f].cs)) {
        ok = true;
        break;
      }
    }
    eligible[i] = ok;
  }
  BestParse out;
  std::map<std::string, int> winner;  // class skeleton -> chosen index, -1 none
  std::function<double(int)> value;
  auto decide = [&](const std::string& k) {
    winner[k] = -1;
    BestParse::Decision d;
    for (size_t j = 0; j < n; ++j)
      if (c.clauses[j].completed() && eligible[j] && skel[j] == k) d.members.push_back(static_cast<int>(j));
    double bw = kDead;
    for (int j : d.members) {
      if (s.state[j] == 0) {
        s.state[j] = 1;
        s.raw(j, value);
        s.state[j] = 3;  // raw value known, class pending
      }
      if (s.best[j] > bw) {
        bw = s.best[j];
        d.chosen = j;
      }
    }
    for (int j : d.members) {
      s.state[j] = 2;
      if (j != d.chosen) s.best[j] = kDead;
    }
    d.log_weight = bw;
    winner[k] = d.chosen;
    out.decisions.push_back(std::move(d));
  };
  value = [&](int i) -> double {
    if (s.state[i] == 2) return s.best[i];
    if (s.state[i] == 1 || s.state[i] == 3) return kDead;
    const ChartClause& cl = c.clauses[i];
    if (!cl.completed()) {
      s.state[i] = 1;
      s.raw(i, value);
      s.state[i] = 2;
      return s.best[i];
    }
    if (!eligible[i]) {
      s.state[i] = 2;
      return kDead;
    }
    if (!winner.count(skel[i])) decide(skel[i]);
    return s.state[i] == 2 ? s.best[i] : kDead;
  };
  s.pick_final(out, value);
  if (out.found) {
    BestParse exact = viterbi_best(e, c, m);
    out.optimal = std::abs(exact.log_weight - out.log_weight) <= 1e-9 * std::max(1.0, std::abs(exact.log_weight));
  } else {
    out.optimal = false;
  }
  return out;
}

}  // namespace clg
