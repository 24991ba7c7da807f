#include "clg/sampler.hpp"

#include <cmath>
#include <numeric>

namespace clg {

size_t Rng::pick(const std::vector<double>& probs) {
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double u = uniform() * total;
  double acc = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

Nomination nominate(Engine& e, const Goal& y, const std::map<std::string, double>& pi, Rng& rng, int depth_bound,
                    int budget) {
  const Program& p = e.program();
  std::vector<Var> qv = goal_vars(y);
  GoalNode root = e.initial(y);
  if (!root.cs.sat()) throw SamplerError("query has no proof trees: unsatisfiable constraint");
  Nomination out;
  for (int attempt = 0; attempt < budget; ++attempt) {
    GoalNode g = root;
    std::vector<int> trace;
    double prob = 1;
    bool ok = true;
    while (!g.success()) {
      if (static_cast<int>(trace.size()) >= depth_bound) {
        ok = false;
        break;
      }
      const auto& defs = p.defining(g.atoms.front().rel);
      if (defs.empty()) {
        ok = false;
        break;
      }
      std::vector<double> w;
      for (int ci : defs) {
        auto it = pi.find(p.clause(ci).id);
        if (it == pi.end()) throw SamplerError("no nominating probability for clause " + p.clause(ci).id);
        w.push_back(it->second);
      }
      size_t k = rng.pick(w);
      auto next = e.reduce(g, defs[k], qv);
      trace.push_back(defs[k]);
      prob *= w[k];
      if (!next) {
        ok = false;
        break;
      }
      g = std::move(*next);
    }
    if (ok) {
      out.trace = std::move(trace);
      out.prob = prob;
      return out;
    }
    ++out.rejections;
  }
  throw SamplerError("rejection budget of " + std::to_string(budget) + " exhausted");
}

double acceptance_general(double p_z, double p_x, double q_z, double q_x) {
  return std::min(1.0, (p_z * q_x) / (p_x * q_z));
}

double acceptance_exponential(const Vec& lambda, const Vec& nu_z, const Vec& nu_x) {
  double d = 0;
  for (size_t i = 0; i < lambda.size(); ++i) d += lambda[i] * (nu_z[i] - nu_x[i]);
  return std::min(1.0, std::exp(d));
}

ChainResult mh_chain(Engine& e, const Goal& y, const ChainConfig& cfg, const TreeContext& ctx) {
  if (cfg.steps < 1) throw SamplerError("chain needs at least one step");
  if (cfg.lambda.size() != cfg.props.size()) throw SamplerError("parameter and property counts differ");
  int burn = cfg.burn_in < 0 ? cfg.steps / 10 : cfg.burn_in;
  Rng rng(cfg.seed);
  std::map<std::vector<int>, ChainState> cache;
  auto state_of = [&](const std::vector<int>& trace) -> const ChainState& {
    auto it = cache.find(trace);
    if (it != cache.end()) return it->second;
    auto t = e.replay(y, trace);
    if (!t) throw SamplerError("nominated derivation does not replay");
    ChainState s{t->key(ctx.program), trace, nu_vector(cfg.props, *t, ctx)};
    return cache.emplace(trace, std::move(s)).first->second;
  };
  ChainResult res;
  const ChainState* cur = &state_of(nominate(e, y, cfg.pi, rng, cfg.depth_bound).trace);
  for (int step = 0; step < burn + cfg.steps; ++step) {
    const ChainState* z = &state_of(nominate(e, y, cfg.pi, rng, cfg.depth_bound).trace);
    ++res.proposals;
    if (z->trace != cur->trace) {
      double a = acceptance_exponential(cfg.lambda, z->nu, cur->nu);
      if (rng.uniform() < a) {
        cur = z;
        ++res.accepted;
      }
    } else {
      ++res.accepted;
    }
    if (step >= burn) {
      res.samples.push_back(*cur);
      ++res.frequency[cur->key];
    }
  }
  res.acceptance = static_cast<double>(res.accepted) / res.proposals;
  return res;
}

SampleTables sample_tables(const std::vector<QuerySample>& samples) {
  if (samples.empty()) throw SamplerError("empty sample");
  SampleTables tab;
  tab.dim = -1;
  for (auto& q : samples) {
    if (q.nus.empty()) throw SamplerError("empty sample for a query");
    for (auto& nu : q.nus) {
      if (tab.dim < 0) tab.dim = static_cast<int>(nu.size());
      if (static_cast<int>(nu.size()) != tab.dim) throw SamplerError("sample vectors differ in length");
    }
  }
  tab.S.resize(tab.dim);
  tab.U.resize(tab.dim);
  tab.t.assign(tab.dim, 0.0);
  tab.s.assign(tab.dim, 0.0);
  for (auto& q : samples) {
    tab.N += q.count;
    double M = static_cast<double>(q.nus.size());
    for (auto& nu : q.nus) {
      tab.L += 1;
      double m = std::accumulate(nu.begin(), nu.end(), 0.0);
      for (int i = 0; i < tab.dim; ++i) {
        tab.S[i][nu[i]] += 1;
        if (nu[i] != 0) tab.U[i][m] += nu[i];
        tab.t[i] += q.count * nu[i] / M;
      }
    }
  }
  for (int i = 0; i < tab.dim; ++i)
    for (auto& [v, c] : tab.S[i]) tab.s[i] += v * c;
  return tab;
}

Vec sampled_closed_form(const SampleTables& tab) {
  std::optional<double> K;
  for (int i = 0; i < tab.dim; ++i)
    for (auto& [m, c] : tab.U[i]) {
      if (K && *K != m) throw SamplerError("property totals vary; use the Newton update");
      K = m;
    }
  Vec g(tab.dim, 0.0);
  if (!K) return g;
  for (int i = 0; i < tab.dim; ++i) {
    double denom = tab.N / tab.L * tab.s[i];
    g[i] = std::log(tab.t[i] / denom) / *K;
  }
  return g;
}

NewtonStep sampled_newton(const SampleTables& tab, const Vec& lambda, double inner_tol, int inner_max) {
  // Same root as the exact update once t and u are brought to one scale:
  // divide t0 - (N/L) u0 by N.
  CountTables ct;
  ct.U.resize(tab.dim);
  ct.t.assign(tab.dim, 0.0);
  for (int i = 0; i < tab.dim; ++i) {
    for (auto& [m, c] : tab.U[i]) ct.U[i][m] = c / tab.L;
    ct.t[i] = tab.t[i] / tab.N;
  }
  return im_newton_step(ct, lambda, inner_tol, inner_max);
}

}  // namespace clg
