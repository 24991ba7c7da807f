#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "clg/resolution.hpp"

namespace clg {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A goal-node pattern: the node's local goal must consist of exactly these
// atoms (in order) and each listed variable must carry exactly the given type.
// Pattern variables bind through atom arguments, otherwise by name to query
// variables. An optional clause id restricts the clause that produced the node.
struct Pattern {
  struct PAtom {
    std::string rel;
    std::vector<std::string> args;
  };
  std::vector<PAtom> atoms;
  std::vector<std::pair<std::string, std::string>> types;
  std::string clause;

  static Pattern parse(std::string_view text);
  std::string render() const;
};

struct Property {
  enum class Kind { ClauseCount, Subtree, AnswerType };
  std::string name;
  Kind kind = Kind::Subtree;
  std::string clause;  // ClauseCount
  Pattern pattern;     // Subtree
  std::string var;     // AnswerType
  std::string type;    // AnswerType

  std::string kind_name() const;
  std::string args() const;
  static Property make(const std::string& name, const std::string& kind, const std::string& args);
};

std::vector<Property> parse_properties(std::string_view text);
std::string render_properties(const std::vector<Property>& props);

// Resolves a query variable by name, nullopt if there is none.
using QueryVarLookup = std::function<std::optional<Var>(const std::string&)>;

bool match_node(const Pattern& pat, const Signature& sig, const std::vector<Atom>& local, const SolvedForm& cs,
                const std::string& clause_id, const QueryVarLookup& qv);

struct P0 {
  enum class Kind { Uniform, Scfg, Table };
  Kind kind = Kind::Uniform;
  std::map<std::string, double> pi;      // clause id -> probability
  std::map<std::string, double> log_p0;  // tree key -> log p0
};

struct LogLinearModel {
  std::vector<Property> props;
  std::vector<double> lambda;
  P0 p0;

  void validate() const;
  LogLinearModel extend(const Property& c, double alpha) const;
};

std::string model_to_json(const LogLinearModel& m);
LogLinearModel model_from_json(std::string_view text);

// Evaluation context for properties on proof trees.
struct TreeContext {
  const Program& program;
  const VarPool& pool;
};

// Counts of each property on t. Throws ModelError when two subtree
// properties claim the same node.
std::vector<double> nu_vector(const LogLinearModel& m, const ProofTree& t, const TreeContext& ctx);
std::vector<double> nu_vector(const std::vector<Property>& props, const ProofTree& t, const TreeContext& ctx);
double property_count(const Property& p, const ProofTree& t, const TreeContext& ctx);

// log p0 of t up to the normalising constant of a uniform p0 (0 for uniform).
double log_p0(const P0& p0, const ProofTree& t, const Program& prog);
double scfg_prob(const std::map<std::string, double>& pi, const ProofTree& t, const Program& prog);

double log_sum_exp(const std::vector<double>& xs);

// log of e^{lambda.nu(t)} p0(t) for a tree out of a support of the given size.
double log_weight(const LogLinearModel& m, const ProofTree& t, const TreeContext& ctx, size_t support_size);

struct Normalized {
  double log_z;
  std::vector<double> prob;
};
Normalized normalize(const LogLinearModel& m, const std::vector<ProofTree>& trees, const TreeContext& ctx);
std::vector<double> conditional(const LogLinearModel& m, const std::vector<ProofTree>& xy, const TreeContext& ctx);

// Numeric view of a corpus: property vectors and log p0 of every tree of X(y).
struct TreeRow {
  std::vector<double> nu;
  double log_p0 = 0;
  std::string key;
};
struct Item {
  std::string query;
  double count = 1;
  int gold = -1;
  std::vector<TreeRow> trees;
};
struct Dataset {
  int dim = 0;
  std::vector<Item> items;
  double total() const;
  size_t tree_count() const;
};

}  // namespace clg
