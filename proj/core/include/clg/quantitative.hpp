#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clg/resolution.hpp"

namespace clg {

// f x min over the AND tree encoded by the pre-order clause trace.
double proof_value(const Program& p, const ProofTree& t);
double proof_value(const Program& p, const std::vector<int>& trace);

struct Cutoff {
  enum class Kind { Alpha, Beta };
  Kind kind;
  std::string at;  // relation of the max-node, or clause id of the min-node
  double value;    // alpha x factor for beta cutoffs, beta for alpha cutoffs
  double bound;    // the ancestor value it was compared with
};

struct SearchResult {
  double best_value = 0;
  std::optional<ProofTree> best_tree;
  long nodes = 0;  // nodes generated in the min/max tree
  bool truncated = false;
  bool heuristic = false;
  // Body atoms are evaluated independently in the min/max tree. When sibling
  // bindings clash the value is recomputed from resolution proofs.
  bool fallback = false;
  std::vector<Cutoff> cutoffs;
};

SearchResult minmax_search(Engine& e, const Goal& q, int depth_bound);
SearchResult alphabeta_search(Engine& e, const Goal& q, int depth_bound, double initial_alpha = 0.0);

struct MuTable {
  using Key = std::pair<std::string, std::vector<TypeId>>;
  std::map<Key, double> mu;
  int iterations = 0;
  bool converged = false;
  std::vector<std::map<Key, double>> history;  // history[i] is the table after step i

  double at(const std::string& rel, const std::vector<TypeId>& tuple) const;
};

// Witness tuples range over the minimal types. Stops when no entry moves by
// more than tol or after max_iters steps.
MuTable pf_chain(const Program& p, int max_iters, double tol = 1e-12);

}  // namespace clg
