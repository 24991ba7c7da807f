#include <doctest.h>

#include <set>

#include "support.hpp"

using namespace clg;

TEST_SUITE("resolution") {

TEST_CASE("chapter two answers") {
  auto w = fx::World::load("ch2");
  auto q = w->goal(read_file(fx::path("ch2/query.txt")));
  auto res = w->engine->enumerate(q, 20);
  REQUIRE(res.trees.size() == 2);
  CHECK_FALSE(res.truncated);
  std::set<std::string> answers;
  Var x = *w->pool.find("X");
  for (auto& t : res.trees) answers.insert(w->sig->type_name(t.answer.type_of(x)));
  CHECK(answers == std::set<std::string>{"a", "b"});
  CHECK(res.trees[0].key(w->prog) == "1,2");
  CHECK(res.trees[1].key(w->prog) == "1,3");
  CHECK(render_answer(res.trees[0], w->pool).find("X=a") != std::string::npos);
}

TEST_CASE("derivation tree") {
  auto w = fx::World::load("ch2");
  auto q = w->goal("q(X) & X=a");
  auto d = w->engine->derivation(q, 20);
  CHECK(d.success_count() == 1);
  int failures = 0;
  for (auto& n : d.nodes) failures += n.status == DerivationNode::Status::Failure;
  CHECK(failures == 1);
  for (size_t i = 1; i < d.nodes.size(); ++i) {
    auto& n = d.nodes[i];
    CHECK(n.depth == d.nodes[n.parent].depth + 1);
  }
}

TEST_CASE("reduce and replay") {
  auto w = fx::World::load("ch2");
  auto q = w->goal("q(X) & X=e");
  auto root = w->engine->initial(q);
  CHECK_THROWS_AS(w->engine->reduce(root, 1, goal_vars(q)), NotApplicable);
  auto g = w->engine->reduce(root, 0, goal_vars(q));
  REQUIRE(g);
  CHECK(g->atoms.size() == 1);
  CHECK(g->atoms[0].rel == "p");
  for (auto& t : w->engine->enumerate(q, 20).trees) {
    auto r = w->engine->replay(q, t.trace);
    REQUIRE(r);
    CHECK(r->key(w->prog) == t.key(w->prog));
    CHECK(r->answer == t.answer);
  }
  CHECK_FALSE(w->engine->replay(w->goal("q(X) & X=a"), {0, 2}));
}

TEST_CASE("depth bound truncates recursion") {
  fx::World w("type a b < e\n", "n(X) :- n(X).\nn(X) :- {X=a}.\n");
  auto res = w.engine->enumerate(w.goal("n(X)"), 5);
  CHECK(res.truncated);
  CHECK(res.trees.size() == 5);
  auto none = w.engine->enumerate(w.goal("n(X) & X=b"), 5);
  CHECK(none.trees.empty());
}

TEST_CASE("feature structures through resolution") {
  auto w = fx::World::load("clinton", "indexed.sig", "indexed.clg");
  auto q = w->goal(read_file(fx::path("clinton/indexed-query.txt")));
  auto res = w->engine->enumerate(q, 20);
  CHECK(res.trees.size() == 2);
  for (auto& t : res.trees) {
    CHECK(t.answer.sat());
    auto r = w->engine->replay(q, t.trace);
    REQUIRE(r);
    CHECK(render_answer(*r, w->pool) == render_answer(t, w->pool));
  }
}

}
