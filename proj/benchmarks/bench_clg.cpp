#include <benchmark/benchmark.h>

#include <memory>
#include <sstream>

#include "clg/chart.hpp"
#include "clg/estimation.hpp"
#include "clg/sampler.hpp"

using namespace clg;

namespace {

struct World {
  std::shared_ptr<const Signature> sig;
  Program prog;
  VarPool pool;
  std::unique_ptr<Engine> engine;
  World(const std::string& s, const std::string& p)
      : sig(std::make_shared<const Signature>(Signature::parse(s))), prog(parse_program(p, sig)) {
    engine = std::make_unique<Engine>(prog, pool);
  }
};

std::string data(const std::string& rel) { return read_file(std::string(CLG_DATA_DIR) + "/" + rel); }

// s(Z) :- a1(Z) & ... & ak(Z), each ai with two readings: 2^k trees.
std::unique_ptr<World> ambiguous(int k) {
  std::ostringstream p;
  p << "top s(Z) :- ";
  for (int i = 0; i < k; ++i) p << (i ? " & " : "") << "a" << i << "(Z)";
  p << ".\n";
  for (int i = 0; i < k; ++i) p << "x" << i << " a" << i << "(Z) :- {Z=e}.\ny" << i << " a" << i << "(Z) :- {Z=e}.\n";
  return std::make_unique<World>("type a b < e\n", p.str());
}

void BM_Enumerate(benchmark::State& st) {
  auto w = ambiguous(static_cast<int>(st.range(0)));
  Goal q = parse_goal("s(Z)", *w->sig, w->pool);
  for (auto _ : st) benchmark::DoNotOptimize(w->engine->enumerate(q, 64).trees.size());
  st.SetComplexityN(1 << st.range(0));
}
BENCHMARK(BM_Enumerate)->DenseRange(2, 10, 2)->Complexity();

void BM_ChartClinton(benchmark::State& st) {
  World w(data("clinton/indexed.sig"), data("clinton/indexed.clg"));
  Goal q = parse_goal(data("clinton/indexed-query.txt"), *w.sig, w.pool);
  for (auto _ : st) benchmark::DoNotOptimize(earley_close(*w.engine, q).clauses.size());
}
BENCHMARK(BM_ChartClinton);

void BM_ChartAmbiguous(benchmark::State& st) {
  auto w = ambiguous(static_cast<int>(st.range(0)));
  Goal q = parse_goal("s(Z)", *w->sig, w->pool);
  for (auto _ : st) benchmark::DoNotOptimize(earley_close(*w->engine, q).clauses.size());
}
BENCHMARK(BM_ChartAmbiguous)->DenseRange(2, 10, 2);

void BM_ImStep(benchmark::State& st) {
  int k = static_cast<int>(st.range(0));
  auto w = ambiguous(k);
  std::ostringstream props;
  for (int i = 0; i < k; ++i) props << "x" << i << " clause-count x" << i << "\n";
  Corpus corpus = parse_corpus("3 s(Z) & Z=a\n1 s(Z) & Z=b\n", *w->sig, w->pool);
  TreeSets sets = enumerate_corpus(*w->engine, corpus, 64);
  LogLinearModel m;
  m.props = parse_properties(props.str());
  m.lambda.assign(k, 0.1);
  Dataset d = make_dataset(m, sets, {w->prog, w->pool});
  for (auto _ : st) benchmark::DoNotOptimize(im_newton_step(d, m.lambda).gamma);
}
BENCHMARK(BM_ImStep)->DenseRange(2, 8, 2);

void BM_MhChain(benchmark::State& st) {
  auto w = ambiguous(6);
  Goal q = parse_goal("s(Z)", *w->sig, w->pool);
  ChainConfig cfg;
  cfg.steps = 1000;
  cfg.pi = uniform_pi(w->prog);
  cfg.props = parse_properties("x0 clause-count x0\n");
  cfg.lambda = {0.5};
  for (auto _ : st) benchmark::DoNotOptimize(mh_chain(*w->engine, q, cfg, {w->prog, w->pool}).accepted);
}
BENCHMARK(BM_MhChain);

}  // namespace
BENCHMARK_MAIN();
