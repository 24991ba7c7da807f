#include "clg/constraint.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace clg {

std::vector<Var> Constraint::vars() const {
  std::vector<Var> out;
  out.reserve(atoms.size() * 2);
  for (const auto& a : atoms) {
    out.push_back(a.a);
    if (a.kind != CAtom::Kind::Type) out.push_back(a.b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Constraint conjoin(const Constraint& a, const Constraint& b) {
  Constraint out = a;
  out.atoms.insert(out.atoms.end(), b.atoms.begin(), b.atoms.end());
  return out;
}

Constraint rename(const Constraint& c, const std::unordered_map<Var, Var>& rho) {
  auto map = [&](Var v) {
    auto it = rho.find(v);
    return it == rho.end() ? v : it->second;
  };
  std::unordered_map<Var, Var> image;
  for (Var v : c.vars()) {
    auto [it, fresh] = image.emplace(map(v), v);
    if (!fresh && it->second != v) throw RenameError("renaming is not injective on the constraint's variables");
  }
  Constraint out;
  out.atoms.reserve(c.atoms.size());
  for (auto a : c.atoms) {
    a.a = map(a.a);
    if (a.kind != CAtom::Kind::Type) a.b = map(a.b);
    out.atoms.push_back(a);
  }
  return out;
}

std::string render(const Constraint& c, const Signature& sig, const VarNamer& name) {
  if (c.atoms.empty()) return "true";
  std::string out;
  for (const auto& a : c.atoms) {
    if (!out.empty()) out += " & ";
    out += name(a.a);
    out += '=';
    switch (a.kind) {
      case CAtom::Kind::Type: out += sig.type_name(a.sym); break;
      case CAtom::Kind::Feat: out += sig.feature_name(a.sym) + ":" + name(a.b); break;
      case CAtom::Kind::Eq: out += name(a.b); break;
    }
  }
  return out;
}

int SolvedForm::node(Var v) {
  auto [it, fresh] = index_.emplace(v, static_cast<int>(nodes_.size()));
  if (fresh) {
    nodes_.push_back({it->second, sig_->top(), {}});
    node_var_.push_back(v);
  }
  return it->second;
}

int SolvedForm::find(int n) const {
  while (nodes_[n].parent != n) n = nodes_[n].parent;
  return n;
}

int SolvedForm::find_mut(int n) {
  int r = find(n);
  while (nodes_[n].parent != r) {
    int next = nodes_[n].parent;
    nodes_[n].parent = r;
    n = next;
  }
  return r;
}

bool SolvedForm::restrict(int r, TypeId t) {
  TypeId nt = sig_->meet(nodes_[r].type, t);
  if (nt == kInconsistent) return fail();
  if (nt != nodes_[r].type) {
    nodes_[r].type = nt;
    dirty_.push_back(r);
  }
  return true;
}

bool SolvedForm::propagate() {
  size_t pi = 0;
  while (sat_) {
    if (pi < pending_.size()) {
      auto [a, b] = pending_[pi++];
      int ra = find_mut(a), rb = find_mut(b);
      if (ra == rb) continue;
      // the root is always the class member with the least variable id
      if (node_var_[rb] < node_var_[ra]) std::swap(ra, rb);
      nodes_[rb].parent = ra;
      TypeId t = sig_->meet(nodes_[ra].type, nodes_[rb].type);
      if (t == kInconsistent) return fail();
      nodes_[ra].type = t;
      auto moved = std::move(nodes_[rb].arcs);
      nodes_[rb].arcs.clear();
      auto& arcs = nodes_[ra].arcs;
      for (auto [f, tgt] : moved) {
        auto it = std::lower_bound(arcs.begin(), arcs.end(), std::make_pair(f, -1));
        if (it != arcs.end() && it->first == f)
          pending_.emplace_back(it->second, tgt);
        else
          arcs.insert(it, {f, tgt});
      }
      dirty_.push_back(ra);
      continue;
    }
    if (dirty_.empty()) break;
    int r = find_mut(dirty_.back());
    dirty_.pop_back();
    TypeId t = nodes_[r].type;
    for (auto [f, tgt] : nodes_[r].arcs) {
      TypeId in = sig_->intro(f);
      if (in == kInconsistent) return fail();
      t = sig_->meet(t, in);
      if (t == kInconsistent) return fail();
    }
    nodes_[r].type = t;
    const bool minimal = sig_->minimal(t);
    // copy: restrict() may append to dirty_ but never touches arcs
    for (auto [f, tgt] : nodes_[r].arcs) {
      TypeId v = minimal ? sig_->approp(t, f) : sig_->value_bound(t, f);
      if (v == kInconsistent) {
        if (minimal) return fail();
        continue;
      }
      if (!restrict(find_mut(tgt), v)) return false;
    }
  }
  pending_.clear();
  dirty_.clear();
  return sat_;
}

bool SolvedForm::add(const CAtom& atom) {
  if (!sat_) return false;
  switch (atom.kind) {
    case CAtom::Kind::Type: {
      if (atom.sym < 0 || atom.sym >= sig_->type_count()) throw SignatureError("unknown type id");
      int r = find_mut(node(atom.a));
      if (!restrict(r, atom.sym)) return false;
      dirty_.push_back(r);
      break;
    }
    case CAtom::Kind::Feat: {
      if (atom.sym < 0 || atom.sym >= sig_->feature_count()) throw SignatureError("unknown feature id");
      int w = node(atom.b);
      int r = find_mut(node(atom.a));
      auto& arcs = nodes_[r].arcs;
      auto it = std::lower_bound(arcs.begin(), arcs.end(), std::make_pair(atom.sym, -1));
      if (it != arcs.end() && it->first == atom.sym)
        pending_.emplace_back(it->second, w);
      else
        arcs.insert(it, {atom.sym, w});
      dirty_.push_back(r);
      break;
    }
    case CAtom::Kind::Eq:
      pending_.emplace_back(node(atom.a), node(atom.b));
      break;
  }
  return propagate();
}

bool SolvedForm::add(const Constraint& c) {
  for (const auto& a : c.atoms)
    if (!add(a)) return false;
  return sat_;
}

bool SolvedForm::add(const SolvedForm& other) {
  if (!other.sat_) return fail();
  return add(other.atoms());
}

Var SolvedForm::rep(Var v) const {
  auto it = index_.find(v);
  if (it == index_.end()) return v;
  return node_var_[find(it->second)];
}

TypeId SolvedForm::type_of(Var v) const {
  auto it = index_.find(v);
  if (it == index_.end()) return sig_->top();
  return nodes_[find(it->second)].type;
}

std::optional<Var> SolvedForm::arc(Var v, FeatId f) const {
  auto it = index_.find(v);
  if (it == index_.end()) return std::nullopt;
  for (auto [g, tgt] : nodes_[find(it->second)].arcs)
    if (g == f) return node_var_[find(tgt)];
  return std::nullopt;
}

std::vector<std::pair<FeatId, Var>> SolvedForm::arcs(Var v) const {
  std::vector<std::pair<FeatId, Var>> out;
  auto it = index_.find(v);
  if (it == index_.end()) return out;
  for (auto [g, tgt] : nodes_[find(it->second)].arcs) out.emplace_back(g, node_var_[find(tgt)]);
  return out;
}

std::vector<Var> SolvedForm::vars() const {
  std::vector<Var> out = node_var_;
  std::sort(out.begin(), out.end());
  return out;
}

Constraint SolvedForm::atoms() const {
  Constraint out;
  if (!sat_) return out;
  std::vector<int> order(nodes_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return node_var_[x] < node_var_[y]; });
  std::unordered_map<int, std::vector<Var>> members;
  for (int n : order) {
    int r = find(n);
    if (r != n) members[r].push_back(node_var_[n]);
  }
  for (int n : order) {
    if (find(n) != n) continue;
    Var rv = node_var_[n];
    if (auto it = members.find(n); it != members.end())
      for (Var m : it->second) out.atoms.push_back(CAtom::eq(rv, m));
    if (nodes_[n].type != sig_->top()) out.atoms.push_back(CAtom::type(rv, nodes_[n].type));
    for (auto [f, tgt] : nodes_[n].arcs) out.atoms.push_back(CAtom::feat(rv, f, node_var_[find(tgt)]));
  }
  return out;
}

SolvedForm SolvedForm::project(const std::vector<Var>& keep) const {
  SolvedForm out(sig_);
  if (!sat_) {
    out.sat_ = false;
    return out;
  }
  std::unordered_set<int> seen;
  std::deque<int> queue;
  for (Var v : keep) {
    auto it = index_.find(v);
    if (it == index_.end()) continue;
    int r = find(it->second);
    if (seen.insert(r).second) queue.push_back(r);
  }
  while (!queue.empty()) {
    int r = queue.front();
    queue.pop_front();
    for (auto [f, tgt] : nodes_[r].arcs) {
      int t = find(tgt);
      if (seen.insert(t).second) queue.push_back(t);
    }
  }
  Constraint c;
  for (const auto& a : atoms().atoms)
    if (seen.count(find(index_.at(a.a)))) c.atoms.push_back(a);
  out.add(c);
  for (Var v : keep) out.touch(v);
  return out;
}

std::string SolvedForm::render(const VarNamer& name) const {
  if (!sat_) return "false";
  return clg::render(atoms(), *sig_, name);
}

bool SolvedForm::operator==(const SolvedForm& o) const {
  if (sat_ != o.sat_) return false;
  if (!sat_) return true;
  return atoms() == o.atoms();
}

SolvedForm solve(const Signature& sig, const Constraint& c) {
  SolvedForm s(&sig);
  s.add(c);
  return s;
}

Var VarPool::named(const std::string& name) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  Var v = static_cast<Var>(names_.size());
  names_.push_back(name);
  index_.emplace(name, v);
  return v;
}

Var VarPool::fresh(const std::string& base) {
  Var v = static_cast<Var>(names_.size());
  names_.push_back(base + "'" + std::to_string(v));
  return v;
}

std::optional<Var> VarPool::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace clg
