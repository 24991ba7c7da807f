#include "clg/resolution.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <unordered_map>

namespace clg {

std::vector<Var> goal_vars(const Goal& q) {
  std::vector<Var> out = q.constraint.vars();
  for (auto& a : q.atoms) out.insert(out.end(), a.args.begin(), a.args.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string ProofTree::key(const Program& p) const {
  std::string out;
  for (size_t i = 0; i < trace.size(); ++i) {
    if (i) out += ",";
    out += p.clause(trace[i]).id;
  }
  return out;
}

int DerivationTree::success_count() const {
  int n = 0;
  for (auto& d : nodes) n += d.status == DerivationNode::Status::Success;
  return n;
}

GoalNode Engine::initial(const Goal& q) const {
  GoalNode g;
  g.atoms = q.atoms;
  g.cs = SolvedForm(&program_.signature());
  g.cs.add(q.constraint);
  for (Var v : goal_vars(q)) g.cs.touch(v);
  if (!q.atoms.empty()) g.frames.push_back(static_cast<int>(q.atoms.size()));
  return g;
}

std::optional<GoalNode> Engine::reduce(const GoalNode& g, int clause, const std::vector<Var>& keep) {
  if (g.atoms.empty()) throw NotApplicable("goal has no atom to reduce");
  const Clause& c = program_.clause(clause);
  const Atom& sel = g.atoms.front();
  if (c.head.rel != sel.rel || c.head.args.size() != sel.args.size())
    throw NotApplicable("clause " + c.id + " does not define " + sel.rel);
  Instance inst = fresh_variant(c, pool_, &sel);
  GoalNode out;
  out.clause = clause;
  out.cs = g.cs;
  if (!out.cs.add(inst.constraint)) return std::nullopt;
  out.atoms = std::move(inst.body);
  out.atoms.insert(out.atoms.end(), g.atoms.begin() + 1, g.atoms.end());
  out.frames = g.frames;
  if (!out.frames.empty()) --out.frames.back();
  while (!out.frames.empty() && out.frames.back() == 0) out.frames.pop_back();
  if (!c.body.empty()) out.frames.push_back(static_cast<int>(c.body.size()));
  std::vector<Var> k = keep;
  for (auto& a : out.atoms) k.insert(k.end(), a.args.begin(), a.args.end());
  out.cs = out.cs.project(k);
  return out;
}

EnumResult Engine::enumerate(const Goal& q, int depth_bound) {
  EnumResult res;
  std::vector<Var> qv = goal_vars(q);
  GoalNode root = initial(q);
  if (!root.cs.sat()) return res;
  ProofTree proto;
  proto.query = q;
  proto.query_vars = qv;
  proto.root = root;
  std::deque<GoalNode> path;  // stable references while recursing
  std::vector<int> trace;
  auto dfs = [&](auto&& self, const GoalNode& g) -> void {
    if (g.success()) {
      ProofTree t = proto;
      t.steps.assign(path.begin(), path.end());
      t.trace = trace;
      t.answer = g.cs.project(qv);
      res.trees.push_back(std::move(t));
      return;
    }
    if (static_cast<int>(path.size()) >= depth_bound) {
      res.truncated = true;
      return;
    }
    for (int ci : program_.defining(g.atoms.front().rel)) {
      auto next = reduce(g, ci, qv);
      if (!next) continue;
      path.push_back(*next);
      trace.push_back(ci);
      self(self, path.back());
      path.pop_back();
      trace.pop_back();
    }
  };
  dfs(dfs, root);
  return res;
}

DerivationTree Engine::derivation(const Goal& q, int depth_bound) {
  DerivationTree dt;
  std::vector<Var> qv = goal_vars(q);
  DerivationNode r;
  r.goal = initial(q);
  if (!r.goal.cs.sat()) r.status = DerivationNode::Status::Failure;
  dt.nodes.push_back(std::move(r));
  auto dfs = [&](auto&& self, int id) -> void {
    auto& n = dt.nodes[id];
    if (n.status == DerivationNode::Status::Failure) return;
    if (n.goal.success()) {
      n.status = DerivationNode::Status::Success;
      return;
    }
    if (n.depth >= depth_bound) {
      n.status = DerivationNode::Status::Truncated;
      dt.truncated = true;
      return;
    }
    GoalNode g = n.goal;
    int depth = n.depth;
    for (int ci : program_.defining(g.atoms.front().rel)) {
      auto next = reduce(g, ci, qv);
      DerivationNode child;
      child.clause = ci;
      child.parent = id;
      child.depth = depth + 1;
      if (next)
        child.goal = std::move(*next);
      else
        child.status = DerivationNode::Status::Failure;
      int cid = static_cast<int>(dt.nodes.size());
      dt.nodes.push_back(std::move(child));
      dt.nodes[id].children.push_back(cid);
      self(self, cid);
    }
  };
  dfs(dfs, 0);
  return dt;
}

std::optional<ProofTree> Engine::replay(const Goal& q, const std::vector<int>& trace) {
  ProofTree t;
  t.query = q;
  t.query_vars = goal_vars(q);
  t.root = initial(q);
  if (!t.root.cs.sat()) return std::nullopt;
  const GoalNode* cur = &t.root;
  t.steps.reserve(trace.size());
  for (int ci : trace) {
    if (cur->success()) return std::nullopt;
    const Clause& c = program_.clause(ci);
    if (c.head.rel != cur->atoms.front().rel) return std::nullopt;
    auto next = reduce(*cur, ci, t.query_vars);
    if (!next) return std::nullopt;
    t.steps.push_back(std::move(*next));
    cur = &t.steps.back();
  }
  if (!cur->success()) return std::nullopt;
  t.trace = trace;
  t.answer = cur->cs.project(t.query_vars);
  return t;
}

VarNamer canonical_namer(const SolvedForm& s, const VarPool& pool, const std::vector<Var>& named) {
  auto labels = std::make_shared<std::unordered_map<Var, std::string>>();
  for (Var v : named) (*labels)[v] = pool.name(v);
  int next = 0;
  auto see = [&](Var v) {
    if (!labels->count(v)) (*labels)[v] = "_" + std::to_string(++next);
  };
  for (auto& a : s.atoms().atoms) {
    see(a.a);
    if (a.kind != CAtom::Kind::Type) see(a.b);
  }
  return [labels, &pool](Var v) {
    auto it = labels->find(v);
    return it != labels->end() ? it->second : pool.name(v);
  };
}

std::string render_answer(const ProofTree& t, const VarPool& pool) {
  return t.answer.render(canonical_namer(t.answer, pool, t.query_vars));
}

std::string render_node(const GoalNode& g, const Signature& sig, const VarNamer& name, bool local_only) {
  std::string out;
  size_t n = local_only ? static_cast<size_t>(g.local_len()) : g.atoms.size();
  for (size_t i = 0; i < n && i < g.atoms.size(); ++i) out += render_atom(g.atoms[i], name) + " & ";
  (void)sig;
  return out + g.cs.render(name);
}

}  // namespace clg
