#include "golden.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <sstream>

#include "clg/chart.hpp"
#include "clg/estimation.hpp"
#include "clg/quantitative.hpp"

namespace clg::golden {
namespace {

struct Bundle {
  std::shared_ptr<const Signature> sig;
  Program prog;
  VarPool pool;
  std::unique_ptr<Engine> engine;

  Bundle(const std::string& dir, const std::string& sig_file, const std::string& prog_file)
      : sig(std::make_shared<const Signature>(Signature::parse(read_file(dir + "/" + sig_file)))),
        prog(parse_program(read_file(dir + "/" + prog_file), sig)) {
    engine = std::make_unique<Engine>(prog, pool);
  }
  Goal goal_file(const std::string& path) { return parse_goal(read_file(path), *sig, pool); }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

Case check(const std::string& name, const std::function<std::string()>& body) {
  Case c{name, false, ""};
  try {
    c.detail = body();
    c.pass = c.detail.rfind("ok", 0) == 0;
  } catch (const std::exception& e) {
    c.detail = std::string("exception: ") + e.what();
  }
  return c;
}

}  // namespace

std::vector<Case> run(const std::string& data) {
  std::vector<Case> out;

  out.push_back(check("derivation-answers", [&] {
    Bundle b(data + "/ch2", "types.sig", "program.clg");
    Goal q = b.goal_file(data + "/ch2/query.txt");
    auto res = b.engine->enumerate(q, 20);
    std::set<std::string> got;
    Var x = *b.pool.find("X");
    for (auto& t : res.trees) got.insert(b.sig->type_name(t.answer.type_of(x)));
    std::set<std::string> want{"a", "b"};
    return std::string(got == want && res.trees.size() == 2 ? "ok" : "mismatch") + " answers=" +
           std::to_string(res.trees.size());
  }));

  out.push_back(check("quantitative-values", [&] {
    Bundle b(data + "/quant", "types.sig", "program.clg");
    Goal q = b.goal_file(data + "/quant/query.txt");
    auto res = b.engine->enumerate(q, 20);
    std::vector<double> v;
    for (auto& t : res.trees) v.push_back(proof_value(b.prog, t));
    std::sort(v.begin(), v.end());
    auto mu = pf_chain(b.prog, 100);
    TypeId a = b.sig->type("a"), bb = b.sig->type("b");
    bool ok = v.size() == 2 && near(v[0], .5, 1e-12) && near(v[1], .7, 1e-12) && mu.converged &&
              near(mu.at("q", {a}), .7, 1e-12) && near(mu.at("q", {bb}), .5, 1e-12);
    return std::string(ok ? "ok" : "mismatch") + " mu(q,a)=" + num(mu.at("q", {a})) +
           " mu(q,b)=" + num(mu.at("q", {bb}));
  }));

  out.push_back(check("alpha-beta", [&] {
    Bundle b(data + "/alphabeta", "types.sig", "program.clg");
    Goal q = b.goal_file(data + "/alphabeta/query.txt");
    auto mm = minmax_search(*b.engine, q, 20);
    auto ab = alphabeta_search(*b.engine, q, 20);
    int alpha = 0, beta = 0;
    for (auto& c : ab.cutoffs) (c.kind == Cutoff::Kind::Alpha ? alpha : beta)++;
    bool ok = near(ab.best_value, .56, 1e-12) && near(mm.best_value, .56, 1e-12) && ab.nodes < mm.nodes &&
              alpha == 1 && beta == 1;
    return std::string(ok ? "ok" : "mismatch") + " value=" + num(ab.best_value) + " nodes=" +
           std::to_string(ab.nodes) + "/" + std::to_string(mm.nodes);
  }));

  out.push_back(check("baum-counterexample", [&] {
    Bundle b(data + "/baum", "types.sig", "program.clg");
    Corpus corpus = parse_corpus(read_file(data + "/baum/corpus.txt"), *b.sig, b.pool);
    TreeSets sets = enumerate_corpus(*b.engine, corpus, 20);
    auto br = baum_estimate(b.prog, sets, uniform_pi(b.prog), 1);
    std::map<std::string, double> want{{"11", 1}, {"21", 2. / 3}, {"22", 1. / 3}, {"31", 2. / 3}, {"32", 1. / 3}};
    bool ok = true;
    for (auto& [id, p] : want) ok = ok && near(br.pi.at(id), p, 1e-9);
    TreeContext ctx{b.prog, b.pool};
    LogLinearModel renorm;
    renorm.p0.kind = P0::Kind::Scfg;
    renorm.p0.pi = br.pi;
    double l1 = std::exp(log_likelihood(make_dataset(renorm, sets, ctx), {}));
    LogLinearModel ll;
    ll.props = parse_properties(read_file(data + "/baum/properties.txt"));
    ll.lambda = {std::log(2.0)};
    double l2 = std::exp(log_likelihood(make_dataset(ll, sets, ctx), ll.lambda));
    ok = ok && near(l1, 16. / 125, 1e-9) && near(l2, 4. / 27, 1e-9) && l2 > l1;
    return std::string(ok ? "ok" : "mismatch") + " L'=" + num(l1) + " L''=" + num(l2);
  }));

  out.push_back(check("im-table", [&] {
    Bundle b(data + "/im", "types.sig", "program.clg");
    Corpus corpus = parse_corpus(read_file(data + "/im/corpus.txt"), *b.sig, b.pool);
    TreeSets sets = enumerate_corpus(*b.engine, corpus, 20);
    LogLinearModel m;
    m.props = parse_properties(read_file(data + "/im/properties.txt"));
    m.lambda.assign(m.props.size(), 0.0);
    Dataset d = make_dataset(m, sets, {b.prog, b.pool});
    ImOptions opt;
    opt.max_iters = 3;
    auto r = im_estimate(d, m.lambda, opt);
    const double L[] = {-17.224448, -15.772486, -15.753678, -15.753481};
    const double lam[][2] = {{1.5, .5}, {1.55, .45}, {1.555, .445}};
    bool ok = r.log.size() == 4;
    for (size_t i = 0; ok && i < 4; ++i) ok = near(r.log[i].L, L[i], 5e-6);
    for (size_t i = 0; ok && i < 3; ++i)
      for (int j = 0; j < 2; ++j) ok = ok && near(r.log[i + 1].lambda[j], std::log(lam[i][j]), 1e-9);
    return std::string(ok ? "ok" : "mismatch") + " L3=" + num(r.log.back().L);
  }));

  out.push_back(check("earley-chart", [&] {
    Bundle b(data + "/clinton", "indexed.sig", "indexed.clg");
    Goal q = b.goal_file(data + "/clinton/indexed-query.txt");
    ChartOptions o;
    o.first_id = 9;
    Chart ch = earley_close(*b.engine, q, o);
    std::vector<int> finals;
    for (int f : ch.finals) finals.push_back(ch.clauses[f].id);
    std::multiset<std::string> from_chart, from_enum;
    for (int f : ch.finals)
      for (auto& t : reconstruct(*b.engine, ch, f)) from_chart.insert(t.key(b.prog));
    for (auto& t : b.engine->enumerate(q, 20).trees) from_enum.insert(t.key(b.prog));
    auto rule = [&](int id) {
      std::string s = render_chart_clause(ch, ch.index_of_id(id), b.pool);
      return s.substr(s.rfind('('));
    };
    bool ok = ch.clauses.size() == 22 && ch.clauses.back().id == 30 && finals == std::vector<int>{27, 30} &&
              rule(10) == "(P 9,6)" && rule(17) == "(C 12,13)" && rule(27) == "(C 10,26)" &&
              rule(30) == "(C 10,29)" && from_chart == from_enum;
    return std::string(ok ? "ok" : "mismatch") + " clauses=" + std::to_string(ch.clauses.size());
  }));

  out.push_back(check("best-parse", [&] {
    Bundle b(data + "/heuristic", "types.sig", "program.clg");
    Goal q = b.goal_file(data + "/heuristic/query.txt");
    LogLinearModel m = model_from_json(read_file(data + "/heuristic/model.json"));
    Chart ch = earley_close(*b.engine, q);
    auto v = viterbi_best(*b.engine, ch, m);
    auto h = heuristic_best(*b.engine, ch, m, HeuristicMode::Heuristic);
    auto dg = heuristic_best(*b.engine, ch, m, HeuristicMode::Diagnostic);
    bool dead_end = !dg.found && !dg.decisions.empty() && dg.decisions.front().chosen >= 0 &&
                    ch.clauses[dg.decisions.front().chosen].id == 14 &&
                    near(std::exp(dg.decisions.front().log_weight), 5, 1e-9);
    bool ok = v.found && near(v.weight, 10, 1e-9) && ch.clauses[v.final_index].id == 17 && h.found &&
              near(h.weight, 9, 1e-9) && !h.optimal && ch.clauses[h.final_index].id == 18 && dead_end;
    return std::string(ok ? "ok" : "mismatch") + " exact=" + num(v.weight) + " heuristic=" + num(h.weight);
  }));

  return out;
}

}  // namespace clg::golden
