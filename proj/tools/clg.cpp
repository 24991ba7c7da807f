#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "clg/chart.hpp"
#include "clg/estimation.hpp"
#include "clg/quantitative.hpp"
#include "clg/sampler.hpp"
#include "golden.hpp"

#ifndef CLG_DATA_DIR
#define CLG_DATA_DIR "data"
#endif

using json = nlohmann::ordered_json;
using namespace clg;

namespace {

const CLI::Range kPositive(1, std::numeric_limits<int>::max());

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kFormat = 3, kEstimation = 4, kBudget = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Opts {
  std::string sig, program, weights;
  std::string query, query_file;
  std::string corpus, heldout, properties, candidates, model, pi, out;
  std::string data = CLG_DATA_DIR;
  std::string mode = "exact", sparse = "none", method;
  int depth = 20;
  int max_iters = 10000;
  int iters = 1;
  int rounds = 10;
  int steps = 10000;
  int burn_in = -1;
  int nbest = 1;
  int first_id = -1;
  int jobs = 1;
  size_t cap = 100000;
  uint64_t seed = 0;
  bool seed_given = false;
  double tol = 1e-6;
  double eps = 1e-6;
  bool newton = false;
  bool no_bounds = false;
  bool exhaustive = false;
  bool json = false;
};

struct Loaded {
  std::shared_ptr<const Signature> sig;
  Program prog;
  VarPool pool;
  std::unique_ptr<Engine> engine;
  TreeContext ctx() const { return {prog, pool}; }
};

std::unique_ptr<Loaded> load(const Opts& o) {
  if (o.sig.empty() || o.program.empty()) throw UsageError("--sig and --program are required");
  auto l = std::make_unique<Loaded>();
  l->sig = std::make_shared<const Signature>(Signature::parse(read_file(o.sig)));
  Weights w;
  if (!o.weights.empty()) w = parse_weights(read_file(o.weights));
  l->prog = parse_program(read_file(o.program), l->sig, o.weights.empty() ? nullptr : &w);
  l->engine = std::make_unique<Engine>(l->prog, l->pool);
  return l;
}

Goal query(const Opts& o, Loaded& l) {
  std::string text = o.query;
  if (text.empty() && !o.query_file.empty()) text = read_file(o.query_file);
  if (text.empty()) throw UsageError("a query is required (--query or --query-file)");
  return parse_goal(text, *l.sig, l.pool);
}

Corpus corpus(const std::string& path, Loaded& l) {
  if (path.empty()) throw UsageError("--corpus is required");
  return parse_corpus(read_file(path), *l.sig, l.pool);
}

LogLinearModel start_model(const Opts& o) {
  if (!o.model.empty()) return model_from_json(read_file(o.model));
  if (o.properties.empty()) throw UsageError("--model or --properties is required");
  LogLinearModel m;
  m.props = parse_properties(read_file(o.properties));
  m.lambda.assign(m.props.size(), 0.0);
  return m;
}

std::map<std::string, double> load_pi(const Opts& o, const Program& p) {
  if (o.pi.empty()) return uniform_pi(p);
  return parse_weights(read_file(o.pi));
}

json vec(const Vec& v) { return json(v); }

std::string num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

std::string join(const Vec& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
  return s;
}

void emit(const Opts& o, const json& j, const std::string& text) {
  if (o.json) {
    json out = {{"schema", 1}};
    for (auto& [k, v] : j.items()) out[k] = v;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

void write_model(const Opts& o, const LogLinearModel& m) {
  if (o.out.empty()) return;
  std::ofstream f(o.out);
  if (!f) throw UsageError("cannot write " + o.out);
  f << model_to_json(m) << "\n";
}

json model_json(const LogLinearModel& m) { return json::parse(model_to_json(m)); }

int cmd_parse(const Opts& o) {
  auto l = load(o);
  Goal q = query(o, *l);
  auto res = l->engine->enumerate(q, o.depth);
  json trees = json::array();
  std::ostringstream os;
  for (auto& t : res.trees) {
    trees.push_back({{"trace", t.key(l->prog)}, {"answer", render_answer(t, l->pool)}, {"nodes", t.node_count()}});
    os << t.key(l->prog) << "\t" << render_answer(t, l->pool) << "\n";
  }
  os << res.trees.size() << " proof tree(s)" << (res.truncated ? ", truncated at depth bound" : "") << "\n";
  emit(o, {{"trees", trees}, {"truncated", res.truncated}}, os.str());
  return kOk;
}

int cmd_quant(const Opts& o) {
  auto l = load(o);
  Goal q = query(o, *l);
  auto r = o.exhaustive ? minmax_search(*l->engine, q, o.depth) : alphabeta_search(*l->engine, q, o.depth);
  json cuts = json::array();
  std::ostringstream os;
  os << "value " << num(r.best_value) << "\nnodes " << r.nodes << "\n";
  if (r.best_tree) os << "tree " << r.best_tree->key(l->prog) << "\t" << render_answer(*r.best_tree, l->pool) << "\n";
  for (auto& c : r.cutoffs) {
    std::string k = c.kind == Cutoff::Kind::Alpha ? "alpha" : "beta";
    cuts.push_back({{"kind", k}, {"at", c.at}, {"value", c.value}, {"bound", c.bound}});
    os << k << " cutoff at " << c.at << ": " << num(c.value) << " vs " << num(c.bound) << "\n";
  }
  if (r.fallback) os << "note: sibling bindings clashed, value recomputed from resolution proofs\n";
  json j = {{"value", r.best_value}, {"nodes", r.nodes}, {"cutoffs", cuts}, {"truncated", r.truncated},
            {"fallback", r.fallback}};
  if (r.best_tree) j["tree"] = r.best_tree->key(l->prog);
  emit(o, j, os.str());
  return kOk;
}

int cmd_fixpoint(const Opts& o) {
  auto l = load(o);
  auto mu = pf_chain(l->prog, o.max_iters, o.tol);
  auto key = [&](const MuTable::Key& k) {
    std::string s = k.first + "(";
    for (size_t i = 0; i < k.second.size(); ++i) s += (i ? "," : "") + l->sig->type_name(k.second[i]);
    return s + ")";
  };
  json steps = json::array();
  std::ostringstream os;
  for (size_t i = 0; i < mu.history.size(); ++i) {
    json row = json::object();
    os << "step " << i + 1 << "\n";
    for (auto& [k, v] : mu.history[i]) {
      row[key(k)] = v;
      os << "  " << key(k) << " = " << num(v) << "\n";
    }
    steps.push_back(row);
  }
  os << (mu.converged ? "converged" : "not converged") << " after " << mu.iterations << " step(s)\n";
  emit(o, {{"steps", steps}, {"iterations", mu.iterations}, {"converged", mu.converged}}, os.str());
  return kOk;
}

Sparse sparse_of(const Opts& o) {
  Sparse s;
  if (o.sparse == "viterbi") s.mode = Sparse::Mode::Viterbi;
  if (o.sparse == "nbest") {
    s.mode = Sparse::Mode::NBest;
    s.n = o.nbest;
  }
  return s;
}

int cmd_estimate(const Opts& o) {
  auto l = load(o);
  Corpus c = corpus(o.corpus, *l);
  TreeSets sets = enumerate_corpus(*l->engine, c, o.depth);
  std::ostringstream os;
  if (o.method == "baum") {
    auto r = baum_estimate(l->prog, sets, load_pi(o, l->prog), o.iters, o.eps);
    LogLinearModel renorm;
    renorm.p0.kind = P0::Kind::Scfg;
    renorm.p0.pi = r.pi;
    double L = log_likelihood(make_dataset(renorm, sets, l->ctx()), {});
    for (auto& [id, p] : r.pi) os << id << "\t" << num(p) << "\n";
    os << "renormalized log-likelihood " << num(L) << "\n";
    for (auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    emit(o, {{"pi", r.pi}, {"history", r.history}, {"log_likelihood", L}, {"warnings", r.warnings}}, os.str());
    return kOk;
  }
  LogLinearModel m = start_model(o);
  Dataset d = make_dataset(m, sets, l->ctx());
  if (o.method == "im") {
    ImOptions opt;
    opt.tol = o.tol;
    opt.gamma_tol = o.tol;
    opt.max_iters = o.max_iters;
    opt.newton = o.newton;
    opt.sparse = sparse_of(o);
    auto r = im_estimate(d, m.lambda, opt);
    m.lambda = r.lambda;
    json log = json::array();
    for (auto& rec : r.log) {
      json row = {{"iteration", rec.iteration}, {"L", rec.L}, {"lambda", vec(rec.lambda)},
                  {"exp_lambda", json::array()}, {"A", rec.A}, {"max_gamma", rec.max_gamma}};
      for (double x : rec.lambda) row["exp_lambda"].push_back(std::exp(x));
      if (opt.sparse.mode != Sparse::Mode::None) {
        row["surrogate_before"] = rec.surrogate_before;
        row["surrogate_after"] = rec.surrogate_after;
      }
      log.push_back(row);
      Vec e;
      for (double x : rec.lambda) e.push_back(std::exp(x));
      os << rec.iteration << "\tL=" << num(rec.L) << "\texp(lambda)=" << join(e) << "\tA=" << num(rec.A) << "\n";
    }
    os << (r.converged ? "converged" : "stopped at iteration limit") << (r.box_hit ? " (parameter box reached)" : "")
       << "\n";
    write_model(o, m);
    emit(o, {{"log", log}, {"converged", r.converged}, {"box_hit", r.box_hit}, {"model", model_json(m)}},
         os.str());
    return kOk;
  }
  if (o.method == "cmle") {
    CmleOptions opt;
    opt.tol = o.tol;
    opt.max_iters = o.max_iters;
    auto r = conditional_mle(d, m.lambda, opt);
    m.lambda = r.lambda;
    auto ev = evaluate(d, m.lambda);
    os << "PL " << num(r.PL) << "\niterations " << r.iterations << "\nlambda " << join(r.lambda) << "\nC_test "
       << num(ev.c_test) << "%\n";
    write_model(o, m);
    emit(o, {{"PL", r.PL}, {"iterations", r.iterations}, {"converged", r.converged}, {"box_hit", r.box_hit},
             {"c_test", ev.c_test}, {"neg_pl", ev.neg_pl}, {"model", model_json(m)}},
         os.str());
    return kOk;
  }
  throw UsageError("unknown estimation method '" + o.method + "'");
}

std::vector<Candidate> candidates(const Opts& o, const TreeSets& train, const TreeSets* held, Loaded& l) {
  if (o.candidates.empty()) throw UsageError("--candidates is required");
  std::vector<Candidate> out;
  for (auto& p : parse_properties(read_file(o.candidates))) {
    Candidate c{p, property_column(p, train, l.ctx()), {}};
    if (held) c.heldout = property_column(p, *held, l.ctx());
    out.push_back(std::move(c));
  }
  return out;
}

int cmd_select(const Opts& o) {
  auto l = load(o);
  TreeSets sets = enumerate_corpus(*l->engine, corpus(o.corpus, *l), o.depth);
  LogLinearModel m = o.model.empty() && o.properties.empty() ? LogLinearModel{} : start_model(o);
  Dataset d = make_dataset(m, sets, l->ctx());
  auto cands = candidates(o, sets, nullptr, *l);
  std::vector<std::vector<std::vector<double>>> cols;
  for (auto& c : cands) cols.push_back(c.train);
  auto sel = select_property(d, m.lambda, cols);
  json gains = json::array();
  std::ostringstream os;
  for (size_t i = 0; i < cands.size(); ++i) {
    auto& g = sel.gains[i];
    gains.push_back({{"name", cands[i].prop.name}, {"gain", g.G}, {"alpha", g.alpha}, {"degenerate", g.degenerate}});
    os << cands[i].prop.name << "\tG=" << num(g.G) << "\talpha=" << num(g.alpha) << (g.degenerate ? "\tdegenerate" : "")
       << "\n";
  }
  std::string chosen = sel.chosen < 0 ? "" : cands[sel.chosen].prop.name;
  os << "selected " << (chosen.empty() ? "none" : chosen) << "\n";
  emit(o, {{"gains", gains}, {"selected", chosen}}, os.str());
  return kOk;
}

int cmd_infer(const Opts& o) {
  auto l = load(o);
  TreeSets sets = enumerate_corpus(*l->engine, corpus(o.corpus, *l), o.depth);
  std::optional<TreeSets> held;
  if (!o.heldout.empty()) held = enumerate_corpus(*l->engine, corpus(o.heldout, *l), o.depth);
  LogLinearModel m = o.model.empty() && o.properties.empty() ? LogLinearModel{} : start_model(o);
  Dataset d = make_dataset(m, sets, l->ctx());
  std::optional<Dataset> hd;
  if (held) hd = make_dataset(m, *held, l->ctx());
  ImOptions opt;
  opt.tol = o.tol;
  opt.gamma_tol = o.tol;
  opt.max_iters = o.max_iters;
  opt.newton = o.newton;
  auto r = combined_inference(m, d, candidates(o, sets, held ? &*held : nullptr, *l), o.rounds, opt,
                              hd ? &*hd : nullptr);
  json rounds = json::array();
  std::ostringstream os;
  for (auto& rr : r.rounds) {
    json row = {{"round", rr.round}, {"chosen", rr.chosen}, {"gain", rr.gain}, {"L", rr.L}, {"accepted", rr.accepted}};
    if (hd) row["heldout_L"] = rr.heldout_L;
    rounds.push_back(row);
    os << rr.round << "\t" << rr.chosen << "\tG=" << num(rr.gain) << "\tL=" << num(rr.L);
    if (hd) os << "\theldout=" << num(rr.heldout_L);
    os << (rr.accepted ? "" : "\trejected") << "\n";
  }
  os << "stop: " << r.stop_reason << "\n" << render_properties(r.model.props) << "lambda " << join(r.model.lambda)
     << "\n";
  write_model(o, r.model);
  emit(o, {{"rounds", rounds}, {"stop_reason", r.stop_reason}, {"model", model_json(r.model)}}, os.str());
  return kOk;
}

int cmd_sample(const Opts& o) {
  if (!o.seed_given) throw UsageError("--seed is required for sampling");
  auto l = load(o);
  Goal q = query(o, *l);
  LogLinearModel m = start_model(o);
  ChainConfig cfg;
  cfg.steps = o.steps;
  cfg.burn_in = o.burn_in;
  cfg.seed = o.seed;
  cfg.depth_bound = o.depth;
  cfg.pi = load_pi(o, l->prog);
  cfg.props = m.props;
  cfg.lambda = m.lambda;
  auto r = mh_chain(*l->engine, q, cfg, l->ctx());
  json freq = json::object();
  std::ostringstream os;
  for (auto& [k, n] : r.frequency) {
    double f = static_cast<double>(n) / r.samples.size();
    freq[k] = f;
    os << k << "\t" << num(f) << "\n";
  }
  os << "acceptance " << num(r.acceptance) << "\n";
  emit(o, {{"frequency", freq}, {"acceptance", r.acceptance}, {"proposals", r.proposals}, {"accepted", r.accepted}},
       os.str());
  return kOk;
}

ChartOptions chart_options(const Opts& o) {
  ChartOptions c;
  c.first_id = o.first_id;
  c.cap = o.cap;
  c.type_bounds = !o.no_bounds;
  return c;
}

int cmd_chart(const Opts& o) {
  auto l = load(o);
  Goal q = query(o, *l);
  Chart ch = earley_close(*l->engine, q, chart_options(o));
  json lines = json::array(), finals = json::array();
  for (size_t i = 0; i < ch.clauses.size(); ++i) lines.push_back(render_chart_clause(ch, static_cast<int>(i), l->pool));
  std::string text = render_chart(ch, l->pool) + "finals:";
  for (int f : ch.finals) {
    finals.push_back(ch.clauses[f].id);
    text += " " + std::to_string(ch.clauses[f].id);
  }
  emit(o, {{"clauses", lines}, {"finals", finals}}, text + "\n");
  return kOk;
}

int cmd_best(const Opts& o) {
  auto l = load(o);
  Goal q = query(o, *l);
  LogLinearModel m = start_model(o);
  Chart ch = earley_close(*l->engine, q, chart_options(o));
  BestParse b;
  if (o.mode == "exact")
    b = viterbi_best(*l->engine, ch, m);
  else if (o.mode == "heuristic")
    b = heuristic_best(*l->engine, ch, m, HeuristicMode::Heuristic);
  else if (o.mode == "diagnostic")
    b = heuristic_best(*l->engine, ch, m, HeuristicMode::Diagnostic);
  else
    throw UsageError("unknown mode '" + o.mode + "'");
  std::ostringstream os;
  json j = {{"mode", o.mode}, {"found", b.found}};
  if (b.found) {
    int id = ch.clauses[b.final_index].id;
    j["final"] = id;
    j["weight"] = b.weight;
    j["trace"] = b.tree->key(l->prog);
    j["answer"] = render_answer(*b.tree, l->pool);
    os << "final " << id << "\nweight " << num(b.weight) << "\ntree " << b.tree->key(l->prog) << "\t"
       << render_answer(*b.tree, l->pool) << "\n";
  } else {
    os << "no parse found\n";
  }
  if (o.mode != "exact") {
    j["optimal"] = b.optimal;
    os << "optimal " << (b.optimal ? "yes" : "no") << "\n";
    json ds = json::array();
    for (auto& d : b.decisions) {
      json members = json::array();
      os << "class";
      for (int i : d.members) {
        members.push_back(ch.clauses[i].id);
        os << " " << ch.clauses[i].id;
      }
      int chosen = d.chosen < 0 ? -1 : ch.clauses[d.chosen].id;
      double w = d.chosen < 0 ? 0 : std::exp(d.log_weight);
      ds.push_back({{"members", members}, {"chosen", chosen}, {"weight", w}});
      os << " -> " << (chosen < 0 ? std::string("none") : std::to_string(chosen) + " w=" + num(w)) << "\n";
    }
    j["decisions"] = ds;
  }
  emit(o, j, os.str());
  return kOk;
}

int cmd_eval(const Opts& o) {
  auto l = load(o);
  TreeSets sets = enumerate_corpus(*l->engine, corpus(o.corpus, *l), o.depth);
  LogLinearModel m = start_model(o);
  auto ev = evaluate(make_dataset(m, sets, l->ctx()), m.lambda);
  std::ostringstream os;
  os << "C_test " << num(ev.c_test) << "%\n-PL_test " << num(ev.neg_pl) << "\n";
  emit(o, {{"c_test", ev.c_test}, {"neg_pl", ev.neg_pl}}, os.str());
  return kOk;
}

int cmd_golden(const Opts& o) {
  auto cases = golden::run(o.data);
  json arr = json::array();
  std::ostringstream os;
  bool all = true;
  for (auto& c : cases) {
    all = all && c.pass;
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    os << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
  }
  emit(o, {{"cases", arr}, {"all_pass", all}}, os.str());
  return all ? kOk : kFail;
}

void report(const Opts& o, const std::string& category, const std::string& msg) {
  if (o.json)
    std::cerr << json{{"schema", 1}, {"error", category}, {"message", msg}}.dump() << "\n";
  else
    std::cerr << "error[" << category << "]: " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  Opts o;
  CLI::App app{"Constraint logic grammar engine: proof search, log-linear estimation and chart parsing"};
  app.require_subcommand(1);
  app.add_flag("--json", o.json, "Write JSON (schema 1) instead of text");
  app.add_option("--jobs", o.jobs, "Worker count; results do not depend on it")->check(kPositive);

  auto grammar = [&](CLI::App* s) {
    s->add_option("--sig", o.sig, "Type signature file")->check(CLI::ExistingFile);
    s->add_option("--program", o.program, "Program file")->check(CLI::ExistingFile);
    s->add_option("--weights", o.weights, "Values for symbolic clause factors")->check(CLI::ExistingFile);
    s->add_option("--depth", o.depth, "Depth bound for proof search")->check(kPositive);
  };
  auto goal = [&](CLI::App* s) {
    s->add_option("--query", o.query, "Query text");
    s->add_option("--query-file", o.query_file, "File holding the query")->check(CLI::ExistingFile);
  };
  auto model = [&](CLI::App* s) {
    s->add_option("--model", o.model, "Model JSON")->check(CLI::ExistingFile);
    s->add_option("--properties", o.properties, "Property file; parameters start at 0")->check(CLI::ExistingFile);
  };
  auto numeric = [&](CLI::App* s) {
    s->add_option("--tol", o.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
    s->add_option("--max-iters", o.max_iters, "Iteration limit")->check(kPositive);
  };
  auto chartopts = [&](CLI::App* s) {
    s->add_option("--first-id", o.first_id, "Number of the initial chart clause");
    s->add_option("--cap", o.cap, "Chart clause limit")->check(kPositive);
    s->add_flag("--no-type-bounds", o.no_bounds, "Predict without relation argument type bounds");
  };

  auto* parse = app.add_subcommand("parse", "Enumerate proof trees of a query");
  grammar(parse);
  goal(parse);
  auto* quant = app.add_subcommand("quant-best", "Best proof value by alpha-beta search");
  grammar(quant);
  goal(quant);
  quant->add_flag("--exhaustive", o.exhaustive, "Plain min/max search without cutoffs");
  auto* fix = app.add_subcommand("fixpoint", "Fuzzy relation denotations by the P_F chain");
  grammar(fix);
  fix->add_option("--max-iters", o.max_iters, "Step limit")->check(kPositive);
  fix->add_option("--tol", o.tol, "Stop when no entry moves more than this")->check(CLI::PositiveNumber);
  auto* est = app.add_subcommand("estimate", "Estimate parameters from an unparsed corpus");
  grammar(est);
  model(est);
  numeric(est);
  est->add_option("method", o.method, "baum | im | cmle")->required()->check(CLI::IsMember({"baum", "im", "cmle"}));
  est->add_option("--corpus", o.corpus, "Corpus file")->check(CLI::ExistingFile);
  est->add_option("--iters", o.iters, "Reestimation steps (baum)")->check(kPositive);
  est->add_option("--eps", o.eps, "Floor for unused clauses (baum)")->check(CLI::PositiveNumber);
  est->add_option("--pi", o.pi, "Starting clause probabilities (baum)")->check(CLI::ExistingFile);
  est->add_flag("--newton", o.newton, "Newton updates even when totals are constant (im)");
  est->add_option("--sparse", o.sparse, "E-step restriction (im)")->check(CLI::IsMember({"none", "viterbi", "nbest"}));
  est->add_option("--nbest", o.nbest, "N for --sparse nbest")->check(kPositive);
  est->add_option("--out", o.out, "Write the estimated model here");
  auto* sel = app.add_subcommand("select", "Rank candidate properties by gain");
  grammar(sel);
  model(sel);
  sel->add_option("--corpus", o.corpus, "Corpus file")->check(CLI::ExistingFile);
  sel->add_option("--candidates", o.candidates, "Candidate property file")->check(CLI::ExistingFile);
  auto* inf = app.add_subcommand("infer", "Alternate property selection and estimation");
  grammar(inf);
  model(inf);
  numeric(inf);
  inf->add_option("--corpus", o.corpus, "Training corpus")->check(CLI::ExistingFile);
  inf->add_option("--heldout", o.heldout, "Held-out corpus for the stopping rule")->check(CLI::ExistingFile);
  inf->add_option("--candidates", o.candidates, "Candidate property file")->check(CLI::ExistingFile);
  inf->add_option("--rounds", o.rounds, "Round limit")->check(kPositive);
  inf->add_flag("--newton", o.newton, "Newton updates");
  inf->add_option("--out", o.out, "Write the final model here");
  auto* smp = app.add_subcommand("sample", "Metropolis-Hastings sample of proof trees");
  grammar(smp);
  goal(smp);
  model(smp);
  smp->add_option("--pi", o.pi, "Nominating clause probabilities")->check(CLI::ExistingFile);
  smp->add_option("--steps", o.steps, "Chain length after burn-in")->check(kPositive);
  smp->add_option("--burn-in", o.burn_in, "Burn-in steps (default 10% of steps)")->check(CLI::Range(0, std::numeric_limits<int>::max()));
  smp->add_option("--seed", o.seed, "Random seed")->each([&](const std::string&) { o.seed_given = true; });
  auto* chart = app.add_subcommand("chart", "Earley deduction chart of a query");
  grammar(chart);
  goal(chart);
  chartopts(chart);
  auto* best = app.add_subcommand("best-parse", "Best parse from the chart");
  grammar(best);
  goal(best);
  model(best);
  chartopts(best);
  best->add_option("--mode", o.mode, "exact | heuristic | diagnostic")
      ->check(CLI::IsMember({"exact", "heuristic", "diagnostic"}));
  auto* ev = app.add_subcommand("eval", "Disambiguation accuracy on a corpus with gold parses");
  grammar(ev);
  model(ev);
  ev->add_option("--corpus", o.corpus, "Corpus with gold annotations")->check(CLI::ExistingFile);
  auto* gold = app.add_subcommand("golden", "Replay the bundled worked examples");
  gold->add_option("--data", o.data, "Example data directory")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*parse) return cmd_parse(o);
    if (*quant) return cmd_quant(o);
    if (*fix) return cmd_fixpoint(o);
    if (*est) return cmd_estimate(o);
    if (*sel) return cmd_select(o);
    if (*inf) return cmd_infer(o);
    if (*smp) return cmd_sample(o);
    if (*chart) return cmd_chart(o);
    if (*best) return cmd_best(o);
    if (*ev) return cmd_eval(o);
    if (*gold) return cmd_golden(o);
  } catch (const UsageError& e) {
    report(o, "usage", e.what());
    return kUsage;
  } catch (const ParseError& e) {
    report(o, "parse", e.what());
    return kFormat;
  } catch (const SignatureError& e) {
    report(o, "parse", e.what());
    return kFormat;
  } catch (const ModelError& e) {
    report(o, "format", e.what());
    return kFormat;
  } catch (const nlohmann::json::exception& e) {
    report(o, "format", e.what());
    return kFormat;
  } catch (const ChartOverflow& e) {
    report(o, "overflow", e.what());
    return kBudget;
  } catch (const SamplerError& e) {
    bool budget = std::string(e.what()).find("budget") != std::string::npos;
    report(o, budget ? "budget" : "estimation", e.what());
    return budget ? kBudget : kEstimation;
  } catch (const EstimationError& e) {
    report(o, "estimation", e.what());
    return kEstimation;
  } catch (const std::exception& e) {
    report(o, "internal", e.what());
    return kFail;
  }
  return kUsage;
}
