#include "clg/estimation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace clg {

namespace {

double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double log_w(const TreeRow& r, const Vec& lambda) { return dot(lambda, r.nu) + r.log_p0; }

std::vector<double> item_logw(const Item& it, const Vec& lambda) {
  std::vector<double> lw;
  lw.reserve(it.trees.size());
  for (auto& r : it.trees) lw.push_back(log_w(r, lambda));
  return lw;
}

double log_z(const Dataset& d, const Vec& lambda) {
  std::vector<double> all;
  all.reserve(d.tree_count());
  for (auto& it : d.items)
    for (auto& r : it.trees) all.push_back(log_w(r, lambda));
  return log_sum_exp(all);
}

double nu_total(const TreeRow& r) { return std::accumulate(r.nu.begin(), r.nu.end(), 0.0); }

void check_dim(const Dataset& d, const Vec& v, const char* what) {
  if (static_cast<int>(v.size()) != d.dim)
    throw EstimationError(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                          std::to_string(d.dim));
}

// Solves g(a) = 0 for decreasing g on [lo, hi] by Newton steps kept inside a
// shrinking bracket. Returns the root and whether an end of the box was hit.
template <class F>
std::pair<double, bool> bracketed_newton(F f, double lo, double hi, double tol, int max_iter, int& iters,
                                         bool& converged) {
  auto [flo, dlo] = f(lo);
  auto [fhi, dhi] = f(hi);
  (void)dlo;
  (void)dhi;
  converged = true;
  iters = 0;
  if (flo <= 0) return {lo, true};
  if (fhi >= 0) return {hi, true};
  double a = std::clamp(0.0, lo, hi);
  for (iters = 1; iters <= max_iter; ++iters) {
    auto [fa, da] = f(a);
    if (fa == 0) return {a, false};
    if (fa > 0)
      lo = a;
    else
      hi = a;
    double next = da < 0 ? a - fa / da : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - a) < tol || hi - lo < tol) return {next, false};
    a = next;
  }
  converged = false;
  return {a, false};
}

}  // namespace

TreeSets enumerate_corpus(Engine& e, const Corpus& corpus, int depth_bound) {
  TreeSets out;
  std::map<std::string, size_t> seen;
  for (auto& entry : corpus.entries) {
    if (auto it = seen.find(entry.text); it != seen.end()) {
      out.counts[it->second] += entry.count;
      if (out.gold[it->second] != entry.gold)
        throw EstimationError("conflicting gold indices for query '" + entry.text + "'");
      continue;
    }
    auto res = e.enumerate(entry.goal, depth_bound);
    if (res.truncated)
      throw EstimationError("proof enumeration truncated at depth " + std::to_string(depth_bound) + " for query '" +
                            entry.text + "'");
    if (res.trees.empty()) throw EstimationError("query has no proof trees: '" + entry.text + "'");
    if (entry.gold >= static_cast<int>(res.trees.size()))
      throw EstimationError("gold index " + std::to_string(entry.gold) + " out of range for query '" + entry.text +
                            "'");
    seen[entry.text] = out.queries.size();
    out.queries.push_back(entry.text);
    out.counts.push_back(entry.count);
    out.gold.push_back(entry.gold);
    out.trees.push_back(std::move(res.trees));
  }
  return out;
}

Dataset make_dataset(const LogLinearModel& m, const TreeSets& sets, const TreeContext& ctx) {
  m.validate();
  Dataset d;
  d.dim = static_cast<int>(m.props.size());
  for (size_t q = 0; q < sets.queries.size(); ++q) {
    Item it;
    it.query = sets.queries[q];
    it.count = sets.counts[q];
    it.gold = sets.gold[q];
    for (auto& t : sets.trees[q]) {
      TreeRow r;
      r.nu = nu_vector(m, t, ctx);
      r.log_p0 = m.p0.kind == P0::Kind::Uniform ? 0.0 : log_p0(m.p0, t, ctx.program);
      r.key = t.key(ctx.program);
      it.trees.push_back(std::move(r));
    }
    d.items.push_back(std::move(it));
  }
  return d;
}

std::vector<std::vector<double>> property_column(const Property& c, const TreeSets& sets, const TreeContext& ctx) {
  std::vector<std::vector<double>> col;
  for (auto& ts : sets.trees) {
    std::vector<double> v;
    for (auto& t : ts) v.push_back(property_count(c, t, ctx));
    col.push_back(std::move(v));
  }
  return col;
}

Dataset with_column(const Dataset& d, const std::vector<std::vector<double>>& col) {
  if (col.size() != d.items.size()) throw EstimationError("candidate column does not match the data");
  Dataset out = d;
  out.dim += 1;
  for (size_t i = 0; i < out.items.size(); ++i) {
    if (col[i].size() != out.items[i].trees.size()) throw EstimationError("candidate column does not match the data");
    for (size_t j = 0; j < col[i].size(); ++j) out.items[i].trees[j].nu.push_back(col[i][j]);
  }
  return out;
}

double log_likelihood(const Dataset& d, const Vec& lambda) {
  check_dim(d, lambda, "parameter vector");
  double lz = log_z(d, lambda);
  double L = 0;
  for (auto& it : d.items) {
    double lg = log_sum_exp(item_logw(it, lambda)) - lz;
    if (!std::isfinite(lg)) throw EstimationError("query '" + it.query + "' has zero probability");
    L += it.count * lg;
  }
  return L;
}

std::vector<double> sparse_conditional(const Item& y, const Vec& lambda, const Sparse& s, size_t index) {
  if (y.trees.empty()) throw EstimationError("query '" + y.query + "' has no proof trees");
  auto lw = item_logw(y, lambda);
  std::vector<int> keep;
  switch (s.mode) {
    case Sparse::Mode::None:
      keep.resize(lw.size());
      std::iota(keep.begin(), keep.end(), 0);
      break;
    case Sparse::Mode::NBest:
    case Sparse::Mode::Viterbi: {
      int n = s.mode == Sparse::Mode::Viterbi ? 1 : s.n;
      if (n < 1) throw EstimationError("n-best size must be positive");
      keep.resize(lw.size());
      std::iota(keep.begin(), keep.end(), 0);
      std::stable_sort(keep.begin(), keep.end(), [&](int a, int b) { return lw[a] > lw[b]; });
      if (static_cast<int>(keep.size()) > n) keep.resize(n);
      break;
    }
    case Sparse::Mode::FixedSet:
      if (index >= s.fixed.size()) throw EstimationError("no fixed tree set for query '" + y.query + "'");
      keep = s.fixed[index];
      for (int k : keep)
        if (k < 0 || k >= static_cast<int>(lw.size())) throw EstimationError("fixed tree index out of range");
      break;
  }
  if (keep.empty()) throw EstimationError("empty sparse support for query '" + y.query + "'");
  std::vector<double> sub;
  for (int k : keep) sub.push_back(lw[k]);
  double lse = log_sum_exp(sub);
  std::vector<double> out(lw.size(), 0.0);
  for (int k : keep) out[k] = std::exp(lw[k] - lse);
  return out;
}

std::vector<std::vector<double>> conditionals(const Dataset& d, const Vec& lambda, const Sparse& s) {
  std::vector<std::vector<double>> out;
  for (size_t i = 0; i < d.items.size(); ++i) out.push_back(sparse_conditional(d.items[i], lambda, s, i));
  return out;
}

Expectations expectations(const Dataset& d, const Vec& lambda) {
  check_dim(d, lambda, "parameter vector");
  Expectations e;
  e.model.assign(d.dim, 0.0);
  e.empirical.assign(d.dim, 0.0);
  e.log_z = log_z(d, lambda);
  double N = d.total();
  for (auto& it : d.items) {
    auto k = sparse_conditional(it, lambda, {});
    for (size_t j = 0; j < it.trees.size(); ++j) {
      double p = std::exp(log_w(it.trees[j], lambda) - e.log_z);
      for (int i = 0; i < d.dim; ++i) {
        e.model[i] += p * it.trees[j].nu[i];
        e.empirical[i] += it.count / N * k[j] * it.trees[j].nu[i];
      }
    }
  }
  return e;
}

Vec likelihood_gradient(const Dataset& d, const Vec& lambda) {
  auto e = expectations(d, lambda);
  Vec g(d.dim);
  for (int i = 0; i < d.dim; ++i) g[i] = d.total() * (e.empirical[i] - e.model[i]);
  return g;
}

std::optional<double> constant_total(const Dataset& d) {
  std::optional<double> k;
  for (auto& it : d.items)
    for (auto& r : it.trees) {
      double t = nu_total(r);
      if (!k)
        k = t;
      else if (*k != t)
        return std::nullopt;
    }
  return k;
}

CountTables count_tables(const Dataset& d, const Vec& lambda, const Sparse& s) {
  check_dim(d, lambda, "parameter vector");
  CountTables tab;
  tab.S.resize(d.dim);
  tab.U.resize(d.dim);
  tab.T.assign(d.dim, std::vector<double>(d.items.size(), 0.0));
  tab.t.assign(d.dim, 0.0);
  double lz = log_z(d, lambda);
  double N = d.total();
  auto ks = conditionals(d, lambda, s);
  for (size_t y = 0; y < d.items.size(); ++y) {
    auto& it = d.items[y];
    for (size_t j = 0; j < it.trees.size(); ++j) {
      auto& r = it.trees[j];
      double p = std::exp(log_w(r, lambda) - lz);
      double m = nu_total(r);
      for (int i = 0; i < d.dim; ++i) {
        tab.S[i][r.nu[i]] += p;
        if (r.nu[i] != 0) tab.U[i][m] += p * r.nu[i];
        tab.T[i][y] += ks[y][j] * r.nu[i];
      }
    }
    for (int i = 0; i < d.dim; ++i) tab.t[i] += it.count / N * tab.T[i][y];
  }
  return tab;
}

Vec im_closed_form_step(const Dataset& d, const Vec& lambda, const Sparse& s) {
  auto K = constant_total(d);
  if (!K) throw EstimationError("property totals vary across trees; the closed-form update needs a constant total");
  if (*K <= 0) return Vec(d.dim, 0.0);
  auto tab = count_tables(d, lambda, s);
  Vec g(d.dim);
  for (int i = 0; i < d.dim; ++i) {
    double model = 0;
    for (auto& [v, mass] : tab.S[i]) model += v * mass;
    if (model <= 0) throw EstimationError("property " + std::to_string(i) + " never occurs in the support");
    g[i] = std::log(tab.t[i] / model) / *K;
  }
  return g;
}

NewtonStep im_newton_step(const CountTables& tab, const Vec& lambda, double inner_tol, int inner_max) {
  const double box = 20;
  NewtonStep out;
  size_t n = lambda.size();
  out.gamma.assign(n, 0.0);
  out.residual.assign(n, 0.0);
  out.converged = true;
  for (size_t i = 0; i < n; ++i) {
    double t0 = tab.t[i];
    auto f = [&](double a) {
      double u0 = 0, u1 = 0;
      for (auto& [m, mass] : tab.U[i]) {
        double e = mass * std::exp(a * m);
        u0 += e;
        u1 += e * m;
      }
      return std::pair{t0 - u0, -u1};
    };
    if (tab.U[i].empty()) {
      if (t0 > 0) throw EstimationError("property " + std::to_string(i) + " never occurs in the support");
      continue;
    }
    int it = 0;
    bool conv = false;
    auto [g, hit] = bracketed_newton(f, -box - lambda[i], box - lambda[i], inner_tol, inner_max, it, conv);
    if (!conv)
      throw EstimationError("Newton update for parameter " + std::to_string(i) + " did not converge in " +
                            std::to_string(inner_max) + " steps (last residual " + std::to_string(f(g).first) + ")");
    out.gamma[i] = g;
    out.box_hit = out.box_hit || hit;
    out.iterations = std::max(out.iterations, it);
    out.residual[i] = f(g).first;
  }
  return out;
}

NewtonStep im_newton_step(const Dataset& d, const Vec& lambda, double inner_tol, int inner_max, const Sparse& s) {
  return im_newton_step(count_tables(d, lambda, s), lambda, inner_tol, inner_max);
}

double auxiliary_A(const Dataset& d, const Vec& lambda, const Vec& gamma, const Sparse& s) {
  check_dim(d, gamma, "update vector");
  double lz = log_z(d, lambda);
  double N = d.total();
  auto ks = conditionals(d, lambda, s);
  double kg = 0, pe = 0;
  for (size_t y = 0; y < d.items.size(); ++y) {
    auto& it = d.items[y];
    for (size_t j = 0; j < it.trees.size(); ++j) {
      auto& r = it.trees[j];
      kg += it.count / N * ks[y][j] * dot(gamma, r.nu);
      double p = std::exp(log_w(r, lambda) - lz);
      double m = nu_total(r);
      double inner = 0;
      if (m == 0) {
        inner = 1;
      } else {
        for (int i = 0; i < d.dim; ++i)
          if (r.nu[i] != 0) inner += r.nu[i] / m * std::exp(gamma[i] * m);
      }
      pe += p * inner;
    }
  }
  return N * (1 + kg - pe);
}

Vec auxiliary_gradient_at_zero(const Dataset& d, const Vec& lambda) {
  // d/dgamma_i of N(1 + k[gamma.nu] - p[sum nu_i/nu_# e^{gamma_i nu_#}]) at 0
  auto tab = count_tables(d, lambda);
  Vec g(d.dim);
  for (int i = 0; i < d.dim; ++i) {
    double u0 = 0;
    for (auto& [m, mass] : tab.U[i]) u0 += mass;
    g[i] = d.total() * (tab.t[i] - u0);
  }
  return g;
}

namespace {

double surrogate(const Dataset& d, const Vec& lambda, const std::vector<std::vector<double>>& ks) {
  double lz = log_z(d, lambda);
  double F = 0;
  for (size_t y = 0; y < d.items.size(); ++y) {
    std::vector<double> sub;
    for (size_t j = 0; j < d.items[y].trees.size(); ++j)
      if (ks[y][j] > 0) sub.push_back(log_w(d.items[y].trees[j], lambda));
    F += d.items[y].count * (log_sum_exp(sub) - lz);
  }
  return F;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

}  // namespace

ImResult im_estimate(const Dataset& d, Vec lambda, const ImOptions& opt) {
  check_dim(d, lambda, "parameter vector");
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  bool sparse = opt.sparse.mode != Sparse::Mode::None;
  auto closed = constant_total(d).has_value() && !opt.newton;
  ImResult res;
  double L = log_likelihood(d, lambda);
  res.log.push_back({0, L, 0.0, lambda, 0.0, 0.0});
  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    Vec gamma;
    if (closed) {
      gamma = im_closed_form_step(d, lambda, opt.sparse);
    } else {
      auto ns = im_newton_step(d, lambda, opt.inner_tol, opt.inner_max, opt.sparse);
      gamma = ns.gamma;
    }
    Vec next = lambda;
    for (int i = 0; i < d.dim; ++i) {
      double v = lambda[i] + gamma[i];
      if (v > opt.box || v < -opt.box || !std::isfinite(v)) {
        v = std::clamp(std::isfinite(v) ? v : (v > 0 ? opt.box : -opt.box), -opt.box, opt.box);
        res.box_hit = true;
      }
      gamma[i] = v - lambda[i];
      next[i] = v;
    }
    ImRecord rec{iter, 0, 0, next, auxiliary_A(d, lambda, gamma, opt.sparse), 0};
    if (sparse) {
      auto ks = conditionals(d, lambda, opt.sparse);
      rec.surrogate_before = surrogate(d, lambda, ks);
      rec.surrogate_after = surrogate(d, next, ks);
    }
    double L2 = log_likelihood(d, next);
    if (!sparse && L2 < L - 1e-9)
      throw EstimationError("log-likelihood decreased from " + std::to_string(L) + " to " + std::to_string(L2) +
                            " at iteration " + std::to_string(iter));
    double mg = 0;
    for (double g : gamma) mg = std::max(mg, std::abs(g));
    rec.L = L2;
    rec.max_gamma = mg;
    rec.seconds = std::chrono::duration<double>(clock::now() - start).count();
    res.log.push_back(rec);
    double dL = std::abs(L2 - L);
    lambda = std::move(next);
    L = L2;
    if (dL < opt.tol && mg < opt.gamma_tol) {
      res.converged = true;
      break;
    }
  }
  res.lambda = lambda;
  res.grad_norm = d.dim ? norm(likelihood_gradient(d, lambda)) : 0.0;
  return res;
}

double gain_value(const Dataset& d, const Vec& lambda, const std::vector<std::vector<double>>& col, double alpha) {
  double lz = log_z(d, lambda);
  double N = d.total();
  double kc = 0, pe = 0;
  for (size_t y = 0; y < d.items.size(); ++y) {
    auto k = sparse_conditional(d.items[y], lambda, {});
    for (size_t j = 0; j < d.items[y].trees.size(); ++j) {
      kc += d.items[y].count / N * k[j] * col[y][j];
      pe += std::exp(log_w(d.items[y].trees[j], lambda) - lz) * std::exp(alpha * col[y][j]);
    }
  }
  return N * (1 + alpha * kc - pe);
}

Gain gain(const Dataset& d, const Vec& lambda, const std::vector<std::vector<double>>& col, double box) {
  check_dim(d, lambda, "parameter vector");
  if (col.size() != d.items.size()) throw EstimationError("candidate column does not match the data");
  Gain out;
  double lz = log_z(d, lambda);
  double N = d.total();
  std::map<double, double> S;  // model mass by candidate value
  double t0 = 0;
  bool any = false;
  for (size_t y = 0; y < d.items.size(); ++y) {
    if (col[y].size() != d.items[y].trees.size()) throw EstimationError("candidate column does not match the data");
    auto k = sparse_conditional(d.items[y], lambda, {});
    for (size_t j = 0; j < col[y].size(); ++j) {
      double c = col[y][j];
      any = any || c != 0;
      S[c] += std::exp(log_w(d.items[y].trees[j], lambda) - lz);
      t0 += d.items[y].count / N * k[j] * c;
    }
  }
  if (!any) {
    out.degenerate = true;
    return out;
  }
  auto f = [&](double a) {
    double s1 = 0, s2 = 0;
    for (auto& [v, mass] : S) {
      double e = mass * std::exp(a * v);
      s1 += e * v;
      s2 += e * v * v;
    }
    return std::pair{t0 - s1, -s2};
  };
  bool conv = false;
  auto [a, hit] = bracketed_newton(f, -box, box, 1e-12, 200, out.iterations, conv);
  out.alpha = a;
  out.box_hit = hit;
  double s0 = 0;
  for (auto& [v, mass] : S) s0 += mass * std::exp(a * v);
  out.G = N * (1 + a * t0 - s0);
  return out;
}

Selection select_property(const Dataset& d, const Vec& lambda,
                          const std::vector<std::vector<std::vector<double>>>& cols, double threshold) {
  if (cols.empty()) throw EstimationError("no candidate properties");
  Selection s;
  double best = threshold;
  for (size_t c = 0; c < cols.size(); ++c) {
    s.gains.push_back(gain(d, lambda, cols[c]));
    if (!s.gains.back().degenerate && s.gains.back().G > best) {
      best = s.gains.back().G;
      s.chosen = static_cast<int>(c);
    }
  }
  return s;
}

CombinedResult combined_inference(const LogLinearModel& start, const Dataset& train, std::vector<Candidate> cands,
                                  int max_rounds, const ImOptions& opt, const Dataset* heldout) {
  CombinedResult res;
  res.model = start;
  Dataset d = train;
  Dataset h = heldout ? *heldout : Dataset{};
  double hL = heldout ? log_likelihood(h, res.model.lambda) : 0.0;
  res.stop_reason = "round limit";
  for (int round = 1; round <= max_rounds; ++round) {
    if (cands.empty()) {
      res.stop_reason = "no candidates left";
      break;
    }
    std::vector<std::vector<std::vector<double>>> cols;
    for (auto& c : cands) cols.push_back(c.train);
    auto sel = select_property(d, res.model.lambda, cols);
    if (sel.chosen < 0) {
      res.stop_reason = "no candidate with positive gain";
      break;
    }
    Candidate c = cands[sel.chosen];
    Dataset d2 = with_column(d, c.train);
    Vec lam = res.model.lambda;
    lam.push_back(sel.gains[sel.chosen].alpha);
    auto im = im_estimate(d2, lam, opt);
    RoundRecord rec{round, c.prop.name, sel.gains[sel.chosen].G, im.log.back().L, 0.0, true};
    if (heldout) {
      Dataset h2 = with_column(h, c.heldout);
      double hL2 = log_likelihood(h2, im.lambda);
      rec.heldout_L = hL2;
      if (hL2 < hL) {
        rec.accepted = false;
        res.rounds.push_back(rec);
        res.stop_reason = "held-out likelihood decreased";
        break;
      }
      h = std::move(h2);
      hL = hL2;
    }
    res.rounds.push_back(rec);
    d = std::move(d2);
    res.model.props.push_back(c.prop);
    res.model.lambda = im.lambda;
    cands.erase(cands.begin() + sel.chosen);
  }
  return res;
}

namespace {

void require_gold(const Dataset& d) {
  for (auto& it : d.items)
    if (it.gold < 0 || it.gold >= static_cast<int>(it.trees.size()))
      throw EstimationError("query '" + it.query + "' has no valid gold tree index");
}

}  // namespace

double pseudo_log_likelihood(const Dataset& d, const Vec& lambda) {
  require_gold(d);
  double pl = 0;
  for (auto& it : d.items) {
    auto lw = item_logw(it, lambda);
    pl += it.count * (lw[it.gold] - log_sum_exp(lw));
  }
  return pl;
}

Vec pseudo_gradient(const Dataset& d, const Vec& lambda) {
  require_gold(d);
  Vec g(d.dim, 0.0);
  for (auto& it : d.items) {
    auto k = sparse_conditional(it, lambda, {});
    for (int i = 0; i < d.dim; ++i) {
      double e = 0;
      for (size_t j = 0; j < it.trees.size(); ++j) e += k[j] * it.trees[j].nu[i];
      g[i] += it.count * (it.trees[it.gold].nu[i] - e);
    }
  }
  return g;
}

CmleResult conditional_mle(const Dataset& d, Vec lambda, const CmleOptions& opt) {
  check_dim(d, lambda, "parameter vector");
  require_gold(d);
  CmleResult res;
  double N = d.total();
  double pl = pseudo_log_likelihood(d, lambda);
  double step = opt.step;
  auto projected = [&](const Vec& lam, const Vec& g) {
    Vec p = g;
    for (size_t i = 0; i < p.size(); ++i)
      if ((lam[i] >= opt.box && p[i] > 0) || (lam[i] <= -opt.box && p[i] < 0)) p[i] = 0;
    return p;
  };
  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    Vec g = pseudo_gradient(d, lambda);
    Vec pg = projected(lambda, g);
    if (norm(pg) / N < opt.tol) {
      res.converged = true;
      break;
    }
    bool moved = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      Vec next = lambda;
      for (size_t i = 0; i < next.size(); ++i) next[i] = std::clamp(lambda[i] + step * pg[i] / N, -opt.box, opt.box);
      double pl2 = pseudo_log_likelihood(d, next);
      if (pl2 >= pl) {
        moved = next != lambda;
        lambda = std::move(next);
        pl = pl2;
        step *= 2;
        break;
      }
      step /= 2;
    }
    if (!moved) {
      res.converged = norm(pg) / N < std::sqrt(opt.tol);
      break;
    }
  }
  for (double l : lambda)
    if (std::abs(l) >= opt.box) res.box_hit = true;
  res.lambda = lambda;
  res.PL = pl;
  res.grad_norm = norm(projected(lambda, pseudo_gradient(d, lambda))) / N;
  return res;
}

Evaluation evaluate(const Dataset& d, const Vec& lambda) {
  require_gold(d);
  Evaluation ev;
  double credit = 0, N = 0;
  for (auto& it : d.items) {
    auto lw = item_logw(it, lambda);
    double best = *std::max_element(lw.begin(), lw.end());
    int ties = 0;
    bool gold_best = false;
    for (size_t j = 0; j < lw.size(); ++j)
      if (lw[j] >= best - 1e-12 * std::max(1.0, std::abs(best))) {
        ++ties;
        gold_best = gold_best || static_cast<int>(j) == it.gold;
      }
    if (gold_best) credit += it.count / ties;
    N += it.count;
    ev.neg_pl -= it.count * (lw[it.gold] - log_sum_exp(lw));
  }
  ev.c_test = N > 0 ? 100.0 * credit / N : 0.0;
  return ev;
}

std::map<std::string, double> uniform_pi(const Program& p) {
  std::map<std::string, double> pi;
  for (auto& rel : p.relations()) {
    auto& defs = p.defining(rel);
    for (int ci : defs) pi[p.clause(ci).id] = 1.0 / static_cast<double>(defs.size());
  }
  return pi;
}

BaumResult baum_estimate(const Program& p, const TreeSets& sets, const std::map<std::string, double>& pi0,
                         int iterations, double eps) {
  BaumResult res;
  res.pi = pi0;
  for (int iter = 0; iter < iterations; ++iter) {
    std::map<std::string, double> counts;
    for (size_t q = 0; q < sets.trees.size(); ++q) {
      std::vector<double> lp;
      for (auto& t : sets.trees[q]) lp.push_back(std::log(scfg_prob(res.pi, t, p)));
      double lse = log_sum_exp(lp);
      if (!std::isfinite(lse)) throw EstimationError("query '" + sets.queries[q] + "' has zero probability");
      for (size_t j = 0; j < lp.size(); ++j) {
        double k = std::exp(lp[j] - lse);
        for (int ci : sets.trees[q][j].trace) counts[p.clause(ci).id] += sets.counts[q] * k;
      }
    }
    std::map<std::string, double> next;
    for (auto& rel : p.relations()) {
      double tot = 0;
      bool smoothed = false;
      for (int ci : p.defining(rel)) {
        double& c = counts[p.clause(ci).id];
        if (c <= 0) {
          c = eps;
          smoothed = true;
        }
        tot += c;
      }
      if (smoothed)
        res.warnings.push_back("iteration " + std::to_string(iter + 1) + ": zero expected counts for relation " +
                               rel + " smoothed with " + std::to_string(eps));
      for (int ci : p.defining(rel)) next[p.clause(ci).id] = counts[p.clause(ci).id] / tot;
    }
    res.pi = next;
    res.history.push_back(next);
  }
  return res;
}

}  // namespace clg
