#include <doctest.h>

#include <cmath>
#include <random>

#include "clg/sampler.hpp"
#include "support.hpp"

using namespace clg;

TEST_SUITE("sampler") {

TEST_CASE("rng is reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0);
    CHECK(x < 1);
  }
  Rng c(1);
  std::vector<int> hits(3);
  for (int i = 0; i < 30000; ++i) hits[c.pick({.2, .3, .5})]++;
  CHECK(hits[0] / 30000.0 == doctest::Approx(.2).epsilon(.05));
  CHECK(hits[2] / 30000.0 == doctest::Approx(.5).epsilon(.05));
}

TEST_CASE("nomination probability is the clause product") {
  auto w = fx::World::load("baum");
  std::map<std::string, double> pi{{"11", 1}, {"21", .25}, {"22", .75}, {"31", .5}, {"32", .5}};
  Rng rng(3);
  auto q = w->goal("s(Z) & Z=e");
  for (int i = 0; i < 50; ++i) {
    auto n = nominate(*w->engine, q, pi, rng, 20);
    auto t = w->engine->replay(q, n.trace);
    REQUIRE(t);
    CHECK(n.prob == doctest::Approx(scfg_prob(pi, *t, w->prog)));
  }
  // Only a/a and b/b survive the shared variable; mismatches are rejected.
  std::map<std::string, int> freq;
  Rng r2(9);
  int rejected = 0;
  for (int i = 0; i < 4000; ++i) {
    auto n = nominate(*w->engine, q, pi, r2, 20);
    rejected += n.rejections;
    freq[std::to_string(n.trace.size()) + ":" + std::to_string(n.trace[1])]++;
  }
  CHECK(rejected > 0);
  // Oracle: p(aa) = .25*.5, p(bb) = .75*.5, conditioned on success.
  CHECK(freq["3:1"] / 4000.0 == doctest::Approx(.25).epsilon(.1));
}

TEST_CASE("acceptance identity") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 200; ++i) {
    Vec lam{u(g), u(g)}, nz{double(g() % 3), double(g() % 3)}, nx{double(g() % 3), double(g() % 3)};
    double qz = std::exp(u(g)), qx = std::exp(u(g));
    double pz = qz * std::exp(lam[0] * nz[0] + lam[1] * nz[1]);
    double px = qx * std::exp(lam[0] * nx[0] + lam[1] * nx[1]);
    CHECK(acceptance_general(pz, px, qz, qx) == doctest::Approx(acceptance_exponential(lam, nz, nx)));
    CHECK(acceptance_exponential(lam, nz, nx) <= 1);
  }
}

TEST_CASE("chain is deterministic for a seed") {
  auto w = fx::World::load("baum");
  ChainConfig cfg;
  cfg.steps = 300;
  cfg.seed = 77;
  cfg.pi = uniform_pi(w->prog);
  cfg.props = parse_properties("chi21 clause-count 21\n");
  cfg.lambda = {std::log(2.0)};
  auto q = w->goal("s(Z) & Z=e");
  auto a = mh_chain(*w->engine, q, cfg, w->ctx());
  auto b = mh_chain(*w->engine, q, cfg, w->ctx());
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(a.samples.size() == 300);
  for (size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].key == b.samples[i].key);
  CHECK(a.frequency == b.frequency);
  CHECK(a.accepted <= a.proposals);
  CHECK(a.acceptance == doctest::Approx(double(a.accepted) / a.proposals));
  cfg.seed = 78;
  auto c = mh_chain(*w->engine, q, cfg, w->ctx());
  bool differs = false;
  for (size_t i = 0; i < c.samples.size(); ++i) differs = differs || c.samples[i].key != a.samples[i].key;
  CHECK(differs);
}

TEST_CASE("chain approaches the target") {
  auto w = fx::World::load("baum");
  ChainConfig cfg;
  cfg.steps = 20000;
  cfg.seed = 5;
  cfg.pi = uniform_pi(w->prog);
  cfg.props = parse_properties("chi21 clause-count 21\n");
  cfg.lambda = {std::log(2.0)};
  auto r = mh_chain(*w->engine, w->goal("s(Z) & Z=e"), cfg, w->ctx());
  // Oracle: equal p_pi on both trees, weights 2 and 1.
  double n = 0;
  for (auto& [k, c] : r.frequency) n += c;
  CHECK(r.frequency["11,21,31"] / n == doctest::Approx(2.0 / 3).epsilon(.03));
}

TEST_CASE("sample tables") {
  std::vector<QuerySample> s{{2, {{1, 0}, {0, 1}}}, {1, {{1, 0}, {1, 0}, {1, 0}}}};
  auto t = sample_tables(s);
  CHECK(t.dim == 2);
  CHECK(t.N == 3);
  CHECK(t.L == 5);
  // per-query means (.5,.5) and (1,0) weighted by counts
  CHECK(t.t[0] == doctest::Approx(2 * .5 + 1));
  CHECK(t.t[1] == doctest::Approx(1));
  CHECK(t.s[0] == doctest::Approx(4));
  CHECK(t.s[1] == doctest::Approx(1));
  auto g = sampled_closed_form(t);
  // (1/K) ln(t / ((N/L) s)) with K = 1
  CHECK(g[0] == doctest::Approx(std::log(2.0 / (3.0 / 5 * 4))));
  CHECK(g[1] == doctest::Approx(std::log(1.0 / (3.0 / 5 * 1))));
  auto nt = sampled_newton(t, {0, 0});
  CHECK(nt.converged);
  for (size_t i = 0; i < 2; ++i) CHECK(nt.gamma[i] == doctest::Approx(g[i]).epsilon(1e-9));
  CHECK_THROWS(sample_tables({}));
}

}
