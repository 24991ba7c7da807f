#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "clg/constraint.hpp"
#include "clg/signature.hpp"

namespace clg {

struct ParseError : std::runtime_error {
  int line = 0;
  ParseError(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

struct Atom {
  std::string rel;
  std::vector<Var> args;
  bool operator==(const Atom&) const = default;
};

// Clause variables are local ids 0..var_names.size()-1.
struct Clause {
  std::string id;
  Atom head;
  std::vector<Atom> body;
  Constraint constraint;
  double factor = 1.0;
  std::string factor_name;  // symbolic factor, empty for literal factors
  std::vector<std::string> var_names;

  bool unit() const { return body.empty(); }
  bool operator==(const Clause& o) const {
    return id == o.id && head == o.head && body == o.body && constraint == o.constraint &&
           factor == o.factor && factor_name == o.factor_name;
  }
};

// Goals use variables of a VarPool.
struct Goal {
  std::vector<Atom> atoms;
  Constraint constraint;
};

using Weights = std::map<std::string, double>;

class Program {
 public:
  Program() = default;
  explicit Program(std::shared_ptr<const Signature> sig) : sig_(std::move(sig)) {}

  const Signature& signature() const { return *sig_; }
  std::shared_ptr<const Signature> signature_ptr() const { return sig_; }
  const std::vector<Clause>& clauses() const { return clauses_; }
  const Clause& clause(int i) const { return clauses_.at(i); }
  int size() const { return static_cast<int>(clauses_.size()); }
  // Indices of the clauses defining rel, in textual order.
  const std::vector<int>& defining(const std::string& rel) const;
  std::optional<int> arity(const std::string& rel) const;
  std::optional<int> index_of(const std::string& id) const;
  std::vector<std::string> relations() const;

  // Validates and appends. Throws ParseError.
  void add(Clause c, int line = 0);
  void declare_external(const std::string& rel, int arity);
  // Checks that every body relation is defined or external.
  void validate() const;
  // Rebinds symbolic factors. Throws ParseError on a missing name.
  void bind_weights(const Weights& w);
  std::string render() const;

 private:
  std::shared_ptr<const Signature> sig_;
  std::vector<Clause> clauses_;
  std::map<std::string, std::vector<int>> by_rel_;
  std::map<std::string, int> arity_;
  std::map<std::string, int> external_;
  std::map<std::string, int> id_index_;
};

Program parse_program(std::string_view text, std::shared_ptr<const Signature> sig,
                      const Weights* weights = nullptr);
Weights parse_weights(std::string_view text);

// Parses "atom & ... & X=t & ..." with variables interned in pool.
Goal parse_goal(std::string_view text, const Signature& sig, VarPool& pool);
std::string render_clause(const Clause& c, const Signature& sig);
std::string render_atom(const Atom& a, const VarNamer& name);
std::string render_goal(const Goal& g, const Signature& sig, const VarNamer& name);

// Copy of c over pool variables. When goal is given, head arguments are
// identified with the goal's arguments; every other variable is fresh.
struct Instance {
  Atom head;
  std::vector<Atom> body;
  Constraint constraint;
};
Instance fresh_variant(const Clause& c, VarPool& pool, const Atom* goal = nullptr);

struct CorpusEntry {
  std::string text;
  Goal goal;
  double count = 1;
  int gold = -1;
  int line = 0;
};
struct Corpus {
  std::vector<CorpusEntry> entries;
  double total() const;
};
Corpus parse_corpus(std::string_view text, const Signature& sig, VarPool& pool);

std::string read_file(const std::string& path);

}  // namespace clg
