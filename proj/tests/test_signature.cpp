#include <doctest.h>

#include <random>

#include "clg/signature.hpp"

using clg::Signature;
using clg::SignatureError;

TEST_SUITE("signature") {

TEST_CASE("top and declared order") {
  auto s = Signature::parse("type a b < e\ntype c < a\n");
  CHECK(s.type_name(s.top()) == "top");
  auto a = s.type("a"), b = s.type("b"), c = s.type("c"), e = s.type("e");
  CHECK(s.leq(c, a));
  CHECK(s.leq(c, e));
  CHECK(s.leq(e, s.top()));
  CHECK_FALSE(s.leq(a, c));
  CHECK(s.meet(a, e) == a);
  CHECK(s.join(c, b) == e);
  CHECK(s.meet(a, b) == clg::kInconsistent);
  CHECK(s.minimal(c));
  CHECK(s.minimal(b));
  CHECK_FALSE(s.minimal(a));
}

TEST_CASE("features and appropriateness") {
  auto s = Signature::parse("type phrase word < sign\ntype n v < cat\napprop phrase CAT cat\napprop word CAT cat\napprop phrase DTR sign\n");
  auto cat = s.feature("CAT"), dtr = s.feature("DTR");
  CHECK(s.approp(s.type("phrase"), cat) == s.type("cat"));
  CHECK(s.approp(s.type("n"), cat) == clg::kInconsistent);
  CHECK(s.intro(cat) == s.type("sign"));
  CHECK(s.intro(dtr) == s.type("phrase"));
  CHECK(s.value_bound(s.type("sign"), dtr) == s.type("sign"));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(Signature::parse("type a < a\n"), SignatureError);
  CHECK_THROWS_AS(Signature::parse("type a < b\ntype b < a\n"), SignatureError);
  CHECK_THROWS_AS(Signature::parse("bogus line\n"), SignatureError);
  CHECK_THROWS_AS(Signature::parse("type a b < e\napprop a F nothing\n"), SignatureError);
  // a and b have two incomparable common upper bounds: no unique join
  CHECK_THROWS_AS(Signature::parse("type a b < c\ntype a b < d\n"), SignatureError);
  auto s = Signature::parse("type a\n");
  CHECK_THROWS(s.type("zzz"));
}

TEST_CASE("lattice laws on random hierarchies") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 40; ++round) {
    // A random tree is always a lattice with the implicit top.
    int n = std::uniform_int_distribution<int>(2, 12)(rng);
    std::string text;
    for (int i = 1; i < n; ++i) {
      int p = std::uniform_int_distribution<int>(0, i - 1)(rng);
      text += "type t" + std::to_string(i) + " < t" + std::to_string(p) + "\n";
    }
    text = "type t0\n" + text;
    auto s = Signature::parse(text);
    int k = s.type_count();
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        CHECK(s.meet(a, b) == s.meet(b, a));
        CHECK(s.join(a, b) == s.join(b, a));
        int j = s.join(a, b);
        CHECK(s.leq(a, j));
        CHECK(s.leq(b, j));
        int m = s.meet(a, b);
        if (m != clg::kInconsistent) {
          CHECK(s.leq(m, a));
          CHECK(s.leq(m, b));
        }
        CHECK((s.leq(a, b) == (m == a)));
        for (int c = 0; c < k; ++c)
          if (s.leq(a, b) && s.leq(b, c)) CHECK(s.leq(a, c));
      }
  }
}

TEST_CASE("render round trip") {
  auto s = Signature::parse("type a b < e\ntype f < top\napprop a F e\n");
  auto t = Signature::parse(s.render());
  CHECK(t.type_count() == s.type_count());
  CHECK(t.leq(t.type("a"), t.type("e")));
  CHECK(t.approp(t.type("a"), t.feature("F")) == t.type("e"));
}

}
