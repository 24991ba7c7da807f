#include <doctest.h>

#include "support.hpp"

using namespace clg;

namespace {
std::shared_ptr<const Signature> sig_ab() { return std::make_shared<const Signature>(Signature::parse("type a b < e\n")); }
}  // namespace

TEST_SUITE("program") {

TEST_CASE("clause syntax") {
  auto p = parse_program(
      "# comment\n"
      "c1 .5 q(X) :- p(X) & {X=e}.\n"
      "p(X) :- {X=a}.\n"
      "p(X) :- {X=b}.\n",
      sig_ab());
  REQUIRE(p.size() == 3);
  CHECK(p.clause(0).id == "c1");
  CHECK(p.clause(0).factor == doctest::Approx(.5));
  CHECK(p.clause(1).id == "2");
  CHECK(p.clause(1).factor == 1.0);
  CHECK(p.clause(1).unit());
  CHECK(p.defining("p") == std::vector<int>{1, 2});
  CHECK(p.arity("q") == 1);
  CHECK(p.index_of("c1") == 0);
  // Render and reparse gives the same program.
  auto q = parse_program(p.render(), sig_ab());
  REQUIRE(q.size() == p.size());
  for (int i = 0; i < p.size(); ++i) CHECK(q.clause(i) == p.clause(i));
}

TEST_CASE("symbolic factors") {
  std::string text = "1 @w q(X) :- {X=a}.\n";
  // Unbound until weights are supplied.
  CHECK(parse_program(text, sig_ab(), nullptr).clause(0).factor_name == "w");
  Weights none;
  CHECK_THROWS_AS(parse_program(text, sig_ab(), &none), ParseError);
  Weights w = parse_weights("# c\nw .25\n");
  auto p = parse_program(text, sig_ab(), &w);
  CHECK(p.clause(0).factor == doctest::Approx(.25));
  CHECK(p.clause(0).factor_name == "w");
  Weights other{{"w", .75}};
  p.bind_weights(other);
  CHECK(p.clause(0).factor == doctest::Approx(.75));
  CHECK_THROWS_AS(p.bind_weights({}), ParseError);
  CHECK_THROWS_AS(parse_weights("w\n"), ParseError);
}

TEST_CASE("parse errors carry line numbers") {
  auto expect_line = [](const std::string& text, int line) {
    try {
      parse_program(text, sig_ab());
      FAIL("no error for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line == line);
    }
  };
  expect_line("q(X) :- {X=zzz}.\n", 1);
  expect_line("q(X).\nq(X,Y).\n", 2);
  expect_line("1 q(X).\n1 q(Y).\n", 2);
  expect_line("q(X) :- p(X)\n", 1);
  expect_line("1.5 q(X).\n", 1);
  expect_line("c 0 q(X).\n", 1);
  expect_line("c .5 .5 q(X).\n", 1);
  expect_line("q(X :- {X=a}.\n", 1);
  CHECK_THROWS_AS(parse_program("q(X) :- undefined(X).\n", sig_ab()), ParseError);
}

TEST_CASE("external relations") {
  auto p = parse_program("external lex/1\nq(X) :- lex(X).\n", sig_ab());
  CHECK(p.size() == 1);
  CHECK(p.arity("lex") == 1);
}

TEST_CASE("goals and corpora") {
  VarPool pool;
  auto s = Signature::parse("type a b < e\n");
  auto g = parse_goal("q(X) & X=e", s, pool);
  REQUIRE(g.atoms.size() == 1);
  CHECK(g.atoms[0].rel == "q");
  CHECK(g.constraint.atoms.size() == 1);
  auto c = parse_corpus("3 q(X) & X=a\n1 q(X) & X=b\n", s, pool);
  CHECK(c.entries.size() == 2);
  CHECK(c.total() == doctest::Approx(4));
}

TEST_CASE("fresh variants rename apart") {
  auto p = parse_program("q(X,Y) :- p(X) & {X=Y}.\np(X) :- {X=a}.\n",
                         std::make_shared<const Signature>(Signature::parse("type a b < e\n")));
  VarPool pool;
  Atom goal{"q", {pool.named("A"), pool.named("B")}};
  auto v1 = fresh_variant(p.clause(0), pool, &goal);
  auto v2 = fresh_variant(p.clause(0), pool);
  CHECK(v1.head.args == goal.args);
  CHECK(v1.body[0].args[0] == goal.args[0]);
  CHECK(v2.head.args[0] != goal.args[0]);
  CHECK(v2.head.args[0] != v1.head.args[0]);
  Atom wrong{"p", {pool.named("A")}};
  CHECK_THROWS(fresh_variant(p.clause(0), pool, &wrong));
}

}
