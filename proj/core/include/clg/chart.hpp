#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clg/loglinear.hpp"

namespace clg {

struct ChartOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Derivation {
  enum class Rule { Init, Predict, Complete };
  Rule rule = Rule::Init;
  int parent = -1;  // chart index of the clause whose selected atom was used
  int other = -1;   // program clause index (Predict) or unit chart index (Complete)
};

struct ChartClause {
  int id = 0;             // display number
  bool headless = false;  // goal clause
  Atom head;
  std::vector<Atom> body;
  SolvedForm cs;
  int origin = -1;       // chart index of the clause that predicted this line of work
  int last_clause = -1;  // program clause applied last
  std::vector<Derivation> derivs;

  bool unit() const { return body.empty(); }
  bool completed() const { return derivs.front().rule == Derivation::Rule::Complete; }
};

struct ChartOptions {
  int first_id = -1;  // -1: number after the last program clause
  size_t cap = 100000;
  // Adds to every predicted body atom the most specific type its arguments
  // can have in any proof of that relation.
  bool type_bounds = true;
};

struct Chart {
  const Program* program = nullptr;
  Goal query;
  std::vector<Var> query_vars;
  std::vector<ChartClause> clauses;  // clauses[0] is the initial goal clause
  std::vector<int> finals;           // chart indices

  int index_of_id(int id) const;
  int origin_final(int f) const;  // the goal clause a final completes
};

// Per relation and argument, the join of the types the argument can take in
// any proof; nullopt for relations without proofs.
std::map<std::string, std::optional<std::vector<TypeId>>> relation_bounds(const Program& p);

Chart earley_close(Engine& e, const Goal& q, const ChartOptions& opt = {});

std::string render_chart_clause(const Chart& c, int index, const VarPool& pool);
std::string render_chart(const Chart& c, const VarPool& pool);

// Clause traces of every tree a chart clause stands for, capped at limit.
std::vector<std::vector<int>> chart_traces(const Chart& c, int index, size_t limit = 100000);
std::vector<ProofTree> reconstruct(Engine& e, const Chart& c, int final_index, size_t limit = 100000);

// Indices of clauses that some final depends on, Init included.
std::vector<int> useful_clauses(const Chart& c);

struct BestParse {
  bool found = false;
  int final_index = -1;
  double log_weight = 0;
  double weight = 0;
  std::vector<int> trace;
  std::optional<ProofTree> tree;
  bool optimal = true;
  struct Decision {
    std::vector<int> members;  // chart indices of the class
    int chosen = -1;
    double log_weight = 0;
  };
  std::vector<Decision> decisions;
};

// log e^{lambda.nu} of the proof-tree node a chart clause stands for.
double chart_node_log_weight(const Chart& c, int index, const LogLinearModel& m, const VarPool& pool);

BestParse viterbi_best(Engine& e, const Chart& c, const LogLinearModel& m);

enum class HeuristicMode { Heuristic, Diagnostic };
// Compares completed clauses that agree up to renaming when constraints are
// ignored and keeps the best of each class. Heuristic mode drops clauses
// whose constraint clashes with every final.
BestParse heuristic_best(Engine& e, const Chart& c, const LogLinearModel& m, HeuristicMode mode);

}  // namespace clg
