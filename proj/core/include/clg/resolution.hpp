#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clg/constraint.hpp"
#include "clg/program.hpp"

namespace clg {

struct NotApplicable : std::logic_error {
  using std::logic_error::logic_error;
};

// One goal of an SLD derivation after goal reduction and constraint solving.
// frames holds, innermost last, how many atoms of each open clause body are
// still unresolved; the innermost open body is the node's local goal.
struct GoalNode {
  std::vector<Atom> atoms;
  SolvedForm cs;
  std::vector<int> frames;
  int clause = -1;  // clause index that produced the node, -1 for the root

  bool success() const { return atoms.empty(); }
  int local_len() const { return frames.empty() ? 0 : frames.back(); }
};

struct ProofTree {
  Goal query;
  std::vector<Var> query_vars;
  GoalNode root;
  std::vector<GoalNode> steps;
  std::vector<int> trace;  // clause indices, pre-order over the AND tree
  SolvedForm answer;       // projected on the query variables

  std::string key(const Program& p) const;  // clause ids joined by ','
  size_t node_count() const { return steps.size() + 1; }
  const GoalNode& node(size_t i) const { return i == 0 ? root : steps[i - 1]; }
};

struct EnumResult {
  std::vector<ProofTree> trees;
  bool truncated = false;
};

struct DerivationNode {
  enum class Status { Open, Success, Failure, Truncated };
  Status status = Status::Open;
  int clause = -1;
  int parent = -1;
  int depth = 0;
  GoalNode goal;  // empty for failure nodes
  std::vector<int> children;
};

struct DerivationTree {
  std::vector<DerivationNode> nodes;  // nodes[0] is the root
  bool truncated = false;
  int success_count() const;
};

class Engine {
 public:
  Engine(const Program& program, VarPool& pool) : program_(program), pool_(pool) {}

  const Program& program() const { return program_; }
  VarPool& pool() { return pool_; }

  GoalNode initial(const Goal& q) const;
  // Reduces the leftmost atom with the given clause and solves. nullopt on
  // UNSAT; NotApplicable if the clause does not define the selected atom.
  std::optional<GoalNode> reduce(const GoalNode& g, int clause, const std::vector<Var>& keep);
  EnumResult enumerate(const Goal& q, int depth_bound);
  DerivationTree derivation(const Goal& q, int depth_bound);
  // Rebuilds the proof tree with the given clause sequence, nullopt if it fails.
  std::optional<ProofTree> replay(const Goal& q, const std::vector<int>& trace);

 private:
  const Program& program_;
  VarPool& pool_;
};

std::vector<Var> goal_vars(const Goal& q);

// Names query variables by their pool names and every other variable _1, _2, ...
// in order of first occurrence in the canonical conjunct list.
VarNamer canonical_namer(const SolvedForm& s, const VarPool& pool, const std::vector<Var>& named);
std::string render_answer(const ProofTree& t, const VarPool& pool);
std::string render_node(const GoalNode& g, const Signature& sig, const VarNamer& name, bool local_only);

}  // namespace clg
