#include "clg/quantitative.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clg {

namespace {

double trace_value(const Program& p, const std::vector<int>& trace, size_t& pos) {
  if (pos >= trace.size()) throw std::invalid_argument("proof trace ends early");
  const Clause& c = p.clause(trace[pos++]);
  double m = 1.0;
  for (size_t i = 0; i < c.body.size(); ++i) m = std::min(m, trace_value(p, trace, pos));
  return c.factor * m;
}

class Searcher {
 public:
  Searcher(Engine& e, int bound, bool prune) : e_(e), p_(e.program()), bound_(bound), prune_(prune) {}

  struct Eval {
    double value = 0;
    std::vector<int> trace;
  };

  Eval root(const Goal& q, double alpha0) {
    SolvedForm cs(&p_.signature());
    cs.add(q.constraint);
    if (!cs.sat()) {
      ++nodes;
      return {};
    }
    if (q.atoms.empty()) {
      ++nodes;
      return {1.0, {}};
    }
    if (q.atoms.size() == 1) return max_node(q.atoms[0], cs, 0, alpha0);
    // conjunctive query: a factor-1 min-node over independent max-nodes
    ++nodes;
    double mn = 1.0, beta = 1.0;
    Eval out;
    mins_.push_back({1.0, &beta});
    for (auto& a : q.atoms) {
      Eval ch = max_node(a, cs, 0, 0.0);
      mn = std::min(mn, ch.value);
      beta = mn;
      out.trace.insert(out.trace.end(), ch.trace.begin(), ch.trace.end());
    }
    mins_.pop_back();
    out.value = beta;
    return out;
  }

  long nodes = 0;
  bool truncated = false;
  std::vector<Cutoff> cutoffs;

 private:
  struct MinAnc {
    double f;
    const double* beta;
  };

  Eval max_node(const Atom& a, const SolvedForm& cs, int depth, double alpha0) {
    ++nodes;
    if (depth >= bound_) {
      truncated = true;
      return {};
    }
    double alpha = alpha0;
    Eval best{alpha0, {}};
    maxs_.push_back(&alpha);
    const auto& defs = p_.defining(a.rel);
    for (size_t i = 0; i < defs.size(); ++i) {
      Eval m = min_node(defs[i], a, cs, depth + 1);
      if (m.value > alpha) {
        alpha = m.value;
        best = std::move(m);
      }
      if (prune_ && i + 1 < defs.size() && !mins_.empty()) {
        bool cut = true;
        for (auto& anc : mins_)
          if (alpha * anc.f < *anc.beta) cut = false;
        if (cut) {
          cutoffs.push_back({Cutoff::Kind::Beta, a.rel, alpha * mins_.back().f, *mins_.back().beta});
          break;
        }
      }
    }
    maxs_.pop_back();
    best.value = alpha;
    return best;
  }

  Eval min_node(int ci, const Atom& a, const SolvedForm& cs, int depth) {
    ++nodes;
    const Clause& c = p_.clause(ci);
    Instance inst = fresh_variant(c, e_.pool(), &a);
    SolvedForm cs2 = cs;
    if (!cs2.add(inst.constraint)) {
      ++nodes;  // failure leaf
      return {0.0, {ci}};
    }
    if (inst.body.empty()) {
      ++nodes;  // success leaf
      return {c.factor, {ci}};
    }
    double mn = 1.0, beta = c.factor;
    Eval out;
    out.trace.push_back(ci);
    mins_.push_back({c.factor, &beta});
    for (size_t j = 0; j < inst.body.size(); ++j) {
      Eval ch = max_node(inst.body[j], cs2, depth, 0.0);
      mn = std::min(mn, ch.value);
      beta = c.factor * mn;
      out.trace.insert(out.trace.end(), ch.trace.begin(), ch.trace.end());
      if (prune_ && j + 1 < inst.body.size()) {
        double top = -1;
        for (const double* al : maxs_) top = std::max(top, *al);
        if (beta <= top) {
          cutoffs.push_back({Cutoff::Kind::Alpha, c.id, beta, top});
          break;
        }
      }
    }
    mins_.pop_back();
    out.value = beta;
    return out;
  }

  Engine& e_;
  const Program& p_;
  int bound_;
  bool prune_;
  std::vector<const double*> maxs_;
  std::vector<MinAnc> mins_;
};

SearchResult run_search(Engine& e, const Goal& q, int depth_bound, bool prune, double alpha0) {
  if (depth_bound < 1) throw std::invalid_argument("depth bound must be at least 1");
  Searcher s(e, depth_bound, prune);
  auto ev = s.root(q, alpha0);
  SearchResult r;
  r.nodes = s.nodes;
  r.truncated = s.truncated;
  r.cutoffs = std::move(s.cutoffs);
  r.heuristic = alpha0 > 0;
  const Program& p = e.program();
  std::optional<ProofTree> tree;
  if (ev.value > 0 && !(alpha0 > 0 && ev.trace.empty() && !q.atoms.empty())) tree = e.replay(q, ev.trace);
  if (tree && std::abs(proof_value(p, *tree) - ev.value) <= 1e-12) {
    r.best_value = ev.value;
    r.best_tree = std::move(tree);
    return r;
  }
  if (ev.value <= 0 || (alpha0 > 0 && ev.trace.empty())) {
    r.best_value = 0;
    return r;
  }
  // the relaxed min/max value is not realised by a consistent proof
  r.fallback = true;
  auto all = e.enumerate(q, depth_bound);
  r.truncated = r.truncated || all.truncated;
  for (auto& t : all.trees) {
    double v = proof_value(p, t);
    if (v < alpha0) continue;
    if (!r.best_tree || v > r.best_value) {
      r.best_value = v;
      r.best_tree = t;
    }
  }
  return r;
}

}  // namespace

double proof_value(const Program& p, const std::vector<int>& trace) {
  if (trace.empty()) return 1.0;
  size_t pos = 0;
  double v = 1.0;
  while (pos < trace.size()) v = std::min(v, trace_value(p, trace, pos));
  return v;
}

double proof_value(const Program& p, const ProofTree& t) { return proof_value(p, t.trace); }

SearchResult minmax_search(Engine& e, const Goal& q, int depth_bound) {
  return run_search(e, q, depth_bound, false, 0.0);
}

SearchResult alphabeta_search(Engine& e, const Goal& q, int depth_bound, double initial_alpha) {
  return run_search(e, q, depth_bound, true, initial_alpha);
}

double MuTable::at(const std::string& rel, const std::vector<TypeId>& tuple) const {
  auto it = mu.find({rel, tuple});
  return it == mu.end() ? 0.0 : it->second;
}

MuTable pf_chain(const Program& p, int max_iters, double tol) {
  const Signature& sig = p.signature();
  const auto& mins = sig.minimal_types();
  struct Support {
    int clause;
    std::vector<TypeId> head;
    std::vector<std::vector<TypeId>> body;
  };
  std::vector<Support> supports;
  MuTable out;
  auto tuples = [&](int n) {
    std::vector<std::vector<TypeId>> all{{}};
    for (int i = 0; i < n; ++i) {
      std::vector<std::vector<TypeId>> next;
      for (auto& t : all)
        for (TypeId m : mins) {
          auto u = t;
          u.push_back(m);
          next.push_back(std::move(u));
        }
      all = std::move(next);
    }
    return all;
  };
  for (auto& rel : p.relations())
    for (auto& t : tuples(*p.arity(rel))) out.mu[{rel, t}] = 0.0;

  for (int ci = 0; ci < p.size(); ++ci) {
    const Clause& c = p.clause(ci);
    std::vector<Var> vs = c.head.args;
    for (auto& a : c.body) vs.insert(vs.end(), a.args.begin(), a.args.end());
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    double combos = std::pow(static_cast<double>(mins.size()), static_cast<double>(vs.size()));
    if (combos > 1e6) throw std::runtime_error("too many witness assignments for clause " + c.id);
    for (auto& assign : tuples(static_cast<int>(vs.size()))) {
      SolvedForm s(&sig);
      s.add(c.constraint);
      for (size_t i = 0; i < vs.size() && s.sat(); ++i) s.add(CAtom::type(vs[i], assign[i]));
      if (!s.sat()) continue;
      auto type_of = [&](Var v) { return assign[std::lower_bound(vs.begin(), vs.end(), v) - vs.begin()]; };
      Support sp{ci, {}, {}};
      for (Var v : c.head.args) sp.head.push_back(type_of(v));
      for (auto& a : c.body) {
        std::vector<TypeId> t;
        for (Var v : a.args) t.push_back(type_of(v));
        sp.body.push_back(std::move(t));
      }
      supports.push_back(std::move(sp));
    }
  }

  for (int it = 0; it < max_iters; ++it) {
    auto next = out.mu;
    for (auto& [k, v] : next) v = 0.0;
    for (auto& sp : supports) {
      const Clause& c = p.clause(sp.clause);
      double m = 1.0;
      for (size_t j = 0; j < sp.body.size(); ++j) m = std::min(m, out.mu.at({c.body[j].rel, sp.body[j]}));
      double& slot = next.at({c.head.rel, sp.head});
      slot = std::max(slot, c.factor * m);
    }
    double delta = 0;
    for (auto& [k, v] : next) delta = std::max(delta, std::abs(v - out.mu.at(k)));
    out.mu = std::move(next);
    out.history.push_back(out.mu);
    out.iterations = it + 1;
    if (delta <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace clg
