#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "clg/estimation.hpp"

namespace clg {

struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// mt19937_64 with a fixed bits-to-double mapping, so draws are identical on
// every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : g_(seed) {}
  double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
  size_t pick(const std::vector<double>& probs);

 private:
  std::mt19937_64 g_;
};

struct Nomination {
  std::vector<int> trace;
  double prob = 0;  // p_pi of the tree, unconditioned
  int rejections = 0;
};

// Top-down clause choice with probabilities pi (by clause id); failed or
// over-deep derivations are discarded and restarted.
Nomination nominate(Engine& e, const Goal& y, const std::map<std::string, double>& pi, Rng& rng, int depth_bound,
                    int budget = 10000);

struct ChainConfig {
  int steps = 1000;
  int burn_in = -1;  // -1: 10% of steps
  uint64_t seed = 1;
  int depth_bound = 50;
  std::map<std::string, double> pi;
  std::vector<Property> props;
  Vec lambda;
};

struct ChainState {
  std::string key;
  std::vector<int> trace;
  Vec nu;
};

struct ChainResult {
  std::vector<ChainState> samples;  // after burn-in, one per step
  std::map<std::string, int> frequency;
  double acceptance = 0;
  int proposals = 0;
  int accepted = 0;
};

// Independence Metropolis-Hastings over X(y) for the target e^{lambda.nu} p_pi.
ChainResult mh_chain(Engine& e, const Goal& y, const ChainConfig& cfg, const TreeContext& ctx);

// Acceptance probability of moving from x to z in both forms.
double acceptance_general(double p_z, double p_x, double q_z, double q_x);
double acceptance_exponential(const Vec& lambda, const Vec& nu_z, const Vec& nu_x);

// Sample-based count tables. Each query contributes the property vectors of
// its sample points; the model side uses the combined sample rescaled by N/L.
struct QuerySample {
  double count = 1;
  std::vector<Vec> nus;
};
struct SampleTables {
  int dim = 0;
  double N = 0;  // corpus tokens
  double L = 0;  // combined sample size
  std::vector<std::map<double, double>> S;
  std::vector<std::map<double, double>> U;
  Vec t;  // sum over tokens of the per-query sample mean of nu_i
  Vec s;  // sum_v S[i][v] v
};
SampleTables sample_tables(const std::vector<QuerySample>& samples);
// (1/K) ln( t(i) / ((N/L) s(i)) ), needs constant nu_# = K.
Vec sampled_closed_form(const SampleTables& tab);
// Newton updates with t0 - (N/L) u0 over (N/L) u1.
NewtonStep sampled_newton(const SampleTables& tab, const Vec& lambda, double inner_tol = 1e-12, int inner_max = 100);

}  // namespace clg
