#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clg/signature.hpp"

namespace clg {

using Var = int;

struct CAtom {
  enum class Kind { Type, Feat, Eq };
  Kind kind = Kind::Type;
  Var a = 0;
  Var b = 0;    // feature target or equated variable
  int sym = 0;  // type for Type, feature for Feat

  static CAtom type(Var v, TypeId t) { return {Kind::Type, v, 0, t}; }
  static CAtom feat(Var v, FeatId f, Var w) { return {Kind::Feat, v, w, f}; }
  static CAtom eq(Var v, Var w) { return {Kind::Eq, v, w, 0}; }

  bool operator==(const CAtom&) const = default;
  auto operator<=>(const CAtom&) const = default;
};

struct RenameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Constraint {
  std::vector<CAtom> atoms;

  bool empty() const { return atoms.empty(); }
  // Sorted, duplicate-free list of constrained variables.
  std::vector<Var> vars() const;
  bool operator==(const Constraint&) const = default;
};

Constraint conjoin(const Constraint& a, const Constraint& b);
// Throws RenameError if the mapping is not injective on V(c).
Constraint rename(const Constraint& c, const std::unordered_map<Var, Var>& rho);

using VarNamer = std::function<std::string(Var)>;
std::string render(const Constraint& c, const Signature& sig, const VarNamer& name);

// Union-find normal form of a conjunction. Classes carry a type and
// deterministic feature arcs; propagation applies meets, feature congruence
// and appropriateness.
class SolvedForm {
 public:
  SolvedForm() = default;
  explicit SolvedForm(const Signature* sig) : sig_(sig) {}

  const Signature* signature() const { return sig_; }
  bool sat() const { return sat_; }

  bool add(const CAtom& atom);
  bool add(const Constraint& c);
  bool add(const SolvedForm& other);
  // Makes v known without constraining it.
  void touch(Var v) { node(v); }

  bool has(Var v) const { return index_.count(v) != 0; }
  Var rep(Var v) const;  // least variable id of v's class
  TypeId type_of(Var v) const;
  std::optional<Var> arc(Var v, FeatId f) const;
  std::vector<std::pair<FeatId, Var>> arcs(Var v) const;
  std::vector<Var> vars() const;
  size_t size() const { return node_var_.size(); }

  // Keeps only the classes reachable through arcs from the given variables.
  SolvedForm project(const std::vector<Var>& keep) const;
  // Canonical conjunct list: Eq to the class representative, Type if not top,
  // Feat between representatives. Ordered by representative.
  Constraint atoms() const;
  std::string render(const VarNamer& name) const;

  bool operator==(const SolvedForm& o) const;

 private:
  struct Node {
    int parent;
    TypeId type;
    std::vector<std::pair<FeatId, int>> arcs;  // sorted by feature, only on roots
  };

  int node(Var v);
  int find(int n) const;
  int find_mut(int n);
  bool fail() { sat_ = false; return false; }
  bool restrict(int r, TypeId t);
  bool propagate();

  const Signature* sig_ = nullptr;
  bool sat_ = true;
  std::vector<Node> nodes_;
  std::vector<Var> node_var_;
  std::unordered_map<Var, int> index_;
  std::vector<std::pair<int, int>> pending_;
  std::vector<int> dirty_;
};

SolvedForm solve(const Signature& sig, const Constraint& c);

// Interned variable names with a fresh-variable counter.
class VarPool {
 public:
  Var named(const std::string& name);
  Var fresh(const std::string& base);
  const std::string& name(Var v) const { return names_.at(v); }
  Var limit() const { return static_cast<Var>(names_.size()); }
  std::optional<Var> find(const std::string& name) const;
  VarNamer namer() const {
    return [this](Var v) { return name(v); };
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Var> index_;
};

}  // namespace clg
