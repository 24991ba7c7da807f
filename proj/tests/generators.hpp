#pragma once

#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

namespace gen {

// Small random program over s/1 and up to three leaf relations, with a
// corpus of s(Z) & Z=t queries and random clause-count / answer-type
// properties.
struct Instance {
  std::unique_ptr<fx::World> world;
  clg::TreeSets sets;
  clg::LogLinearModel model;
  clg::Dataset data;
  std::vector<std::string> ids, types;
};

inline clg::Property random_property(std::mt19937_64& rng, const std::vector<std::string>& ids,
                                     const std::vector<std::string>& types, const std::string& name) {
  auto pick = [&](size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); };
  if (std::uniform_int_distribution<int>(0, 2)(rng) > 0) return clg::Property::make(name, "clause-count", ids[pick(ids.size())]);
  return clg::Property::make(name, "answer-type", "Z " + types[pick(types.size())]);
}

// True if the property fires on some tree of the support.
inline bool occurs(const clg::Property& p, const clg::TreeSets& sets, const clg::TreeContext& ctx) {
  for (auto& col : clg::property_column(p, sets, ctx))
    for (double v : col)
      if (v != 0) return true;
  return false;
}

inline Instance random_instance(std::mt19937_64& rng, int max_props = 6) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (;;) {
    int k = pick(2, 4);
    std::vector<std::string> types;
    std::string sig = "type";
    for (int i = 0; i < k; ++i) {
      types.push_back("t" + std::to_string(i));
      sig += " t" + std::to_string(i);
    }
    sig += " < e\n";
    types.push_back("e");
    int m = pick(1, 3);
    std::ostringstream prog;
    std::vector<std::string> ids;
    int sc = pick(1, 2);
    for (int c = 0; c < sc; ++c) {
      int len = pick(1, 2);
      prog << "s" << c << " s(Z) :- ";
      for (int a = 0; a < len; ++a) prog << (a ? " & " : "") << "p" << pick(1, m) << "(Z)";
      prog << ".\n";
      ids.push_back("s" + std::to_string(c));
    }
    for (int r = 1; r <= m; ++r) {
      int n = pick(1, 2);
      for (int c = 0; c < n; ++c) {
        std::string id = "p" + std::to_string(r) + "_" + std::to_string(c);
        prog << id << " p" << r << "(Z) :- {Z=" << types[pick(0, k)] << "}.\n";
        ids.push_back(id);
      }
    }
    auto w = std::make_unique<fx::World>(sig, prog.str());
    std::ostringstream corpus;
    for (auto& t : types) {
      auto g = w->goal("s(Z) & Z=" + t);
      auto res = w->engine->enumerate(g, 10);
      if (!res.trees.empty() && !res.truncated) corpus << pick(1, 4) << " s(Z) & Z=" << t << "\n";
    }
    if (corpus.str().empty()) continue;
    Instance inst;
    inst.sets = clg::enumerate_corpus(*w->engine, w->corpus(corpus.str()), 10);
    int np = pick(1, max_props);
    inst.ids = ids;
    inst.types = types;
    for (int i = 0; static_cast<int>(inst.model.props.size()) < np && i < 50; ++i) {
      auto p = random_property(rng, ids, types, "c" + std::to_string(inst.model.props.size()));
      if (occurs(p, inst.sets, w->ctx())) inst.model.props.push_back(p);
    }
    if (inst.model.props.empty()) continue;
    inst.model.lambda.assign(inst.model.props.size(), 0.0);
    inst.data = clg::make_dataset(inst.model, inst.sets, w->ctx());
    inst.world = std::move(w);
    return inst;
  }
}

// Grammar with n_sent sentence types and 10 readings each; exactly one
// reading per sentence goes through the clause "gold".
struct Synthetic {
  std::unique_ptr<fx::World> world;
  std::vector<int> gold_reading;  // per sentence, 0-based
};

inline Synthetic synthetic_grammar(uint64_t seed, int n_sent, int readings = 10) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, readings - 1);
  std::ostringstream sig, prog;
  sig << "type sent reading\ntype";
  for (int k = 0; k < n_sent; ++k) sig << " w" << k;
  sig << " < sent\ntype";
  for (int j = 0; j < readings; ++j) sig << " rd" << j;
  sig << " < reading\n";
  Synthetic out;
  prog << "top s(Z) :- choose(R) & check(Z,R).\n";
  for (int j = 0; j < readings; ++j) prog << "ch" << j << " choose(R) :- {R=rd" << j << "}.\n";
  prog << "gold check(Z,R) :- g(Z,R).\n";
  prog << "plain check(Z,R) :- other(Z,R).\n";
  for (int k = 0; k < n_sent; ++k) {
    int gk = pick(rng);
    out.gold_reading.push_back(gk);
    prog << "g" << k << " g(Z,R) :- {Z=w" << k << " & R=rd" << gk << "}.\n";
    for (int j = 0; j < readings; ++j)
      if (j != gk) prog << "o" << k << "_" << j << " other(Z,R) :- {Z=w" << k << " & R=rd" << j << "}.\n";
  }
  out.world = std::make_unique<fx::World>(sig.str(), prog.str());
  return out;
}

// Tree sets for sentences [from, to) with gold set to the tree using "gold".
inline clg::TreeSets synthetic_sets(Synthetic& s, int from, int to) {
  std::ostringstream corpus;
  for (int k = from; k < to; ++k) corpus << "1 s(Z) & Z=w" << k << "\n";
  auto sets = clg::enumerate_corpus(*s.world->engine, s.world->corpus(corpus.str()), 10);
  int gold_clause = *s.world->prog.index_of("gold");
  for (size_t i = 0; i < sets.trees.size(); ++i)
    for (size_t t = 0; t < sets.trees[i].size(); ++t)
      for (int c : sets.trees[i][t].trace)
        if (c == gold_clause) sets.gold[i] = static_cast<int>(t);
  return sets;
}

inline std::string synthetic_properties(int readings = 10) {
  std::ostringstream p;
  p << "gold clause-count gold\n";
  for (int j = 0; j < readings; ++j) p << "read" << j << " clause-count ch" << j << "\n";
  return p.str();
}

}  // namespace gen
