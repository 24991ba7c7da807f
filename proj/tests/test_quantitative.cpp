#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace clg;

TEST_SUITE("quantitative") {

TEST_CASE("proof values") {
  auto w = fx::World::load("quant");
  auto q = w->goal(read_file(fx::path("quant/query.txt")));
  auto res = w->engine->enumerate(q, 20);
  REQUIRE(res.trees.size() == 2);
  CHECK(proof_value(w->prog, res.trees[0]) == doctest::Approx(.7));
  CHECK(proof_value(w->prog, res.trees[1]) == doctest::Approx(.5));
}

TEST_CASE("fixpoint chain") {
  auto w = fx::World::load("quant");
  auto mu = pf_chain(w->prog, 100);
  CHECK(mu.converged);
  CHECK(mu.at("q", {w->sig->type("a")}) == doctest::Approx(.7));
  CHECK(mu.at("q", {w->sig->type("b")}) == doctest::Approx(.5));
  CHECK(mu.at("p", {w->sig->type("a")}) == doctest::Approx(.7));
  // Monotone in the iteration count.
  for (size_t i = 1; i < mu.history.size(); ++i)
    for (auto& [k, v] : mu.history[i - 1]) CHECK(mu.history[i].at(k) >= v - 1e-12);
}

TEST_CASE("alpha-beta example") {
  auto w = fx::World::load("alphabeta");
  auto q = w->goal(read_file(fx::path("alphabeta/query.txt")));
  auto mm = minmax_search(*w->engine, q, 20);
  auto ab = alphabeta_search(*w->engine, q, 20);
  CHECK(mm.best_value == doctest::Approx(.56));
  CHECK(ab.best_value == doctest::Approx(.56));
  CHECK(ab.nodes < mm.nodes);
  REQUIRE(ab.best_tree);
  CHECK(proof_value(w->prog, *ab.best_tree) == doctest::Approx(.56));
  int alpha = 0, beta = 0;
  for (auto& c : ab.cutoffs) (c.kind == Cutoff::Kind::Alpha ? alpha : beta)++;
  CHECK(alpha == 1);
  CHECK(beta == 1);
}

TEST_CASE("search agrees with enumeration on random programs") {
  std::mt19937_64 rng(5);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const char* types[] = {"a", "b", "e"};
  for (int round = 0; round < 150; ++round) {
    std::ostringstream prog;
    int rels = pick(1, 3);
    int id = 0;
    // top relation over r1..rN, then leaves
    for (int c = 0; c < pick(1, 3); ++c) {
      prog << "c" << id++ << " ." << pick(1, 9) << " top(X) :- ";
      int len = pick(1, 3);
      for (int a = 0; a < len; ++a) prog << (a ? " & " : "") << "r" << pick(1, rels) << "(X)";
      prog << ".\n";
    }
    for (int r = 1; r <= rels; ++r)
      for (int c = 0; c < pick(1, 3); ++c)
        prog << "c" << id++ << " ." << pick(1, 9) << " r" << r << "(X) :- {X=" << types[pick(0, 2)] << "}.\n";
    fx::World w("type a b < e\n", prog.str());
    auto q = w.goal("top(X)");
    auto res = w.engine->enumerate(q, 10);
    auto mm = minmax_search(*w.engine, q, 10);
    auto ab = alphabeta_search(*w.engine, q, 10);
    double best = 0;
    for (auto& t : res.trees) best = std::max(best, proof_value(w.prog, t));
    CHECK(mm.best_value == doctest::Approx(best));
    CHECK(ab.best_value == doctest::Approx(best));
    CHECK(ab.nodes <= mm.nodes);
    if (!res.trees.empty()) {
      REQUIRE(ab.best_tree);
      CHECK(proof_value(w.prog, *ab.best_tree) == doctest::Approx(best));
    }
  }
}

}
