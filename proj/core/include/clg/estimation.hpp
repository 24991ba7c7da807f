#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clg/loglinear.hpp"

namespace clg {

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

// Enumerated tree sets of a corpus. Identical query texts are merged.
struct TreeSets {
  std::vector<std::string> queries;
  std::vector<double> counts;
  std::vector<int> gold;
  std::vector<std::vector<ProofTree>> trees;
};

// Throws EstimationError if some X(y) is empty or truncated.
TreeSets enumerate_corpus(Engine& e, const Corpus& corpus, int depth_bound);
Dataset make_dataset(const LogLinearModel& m, const TreeSets& sets, const TreeContext& ctx);
// One column per tree for a candidate property (same layout as Dataset).
std::vector<std::vector<double>> property_column(const Property& c, const TreeSets& sets, const TreeContext& ctx);
Dataset with_column(const Dataset& d, const std::vector<std::vector<double>>& col);

// Token-level log-likelihood: sum over tokens of ln g(y).
double log_likelihood(const Dataset& d, const Vec& lambda);

struct Expectations {
  Vec model;      // p[nu_i]
  Vec empirical;  // p~[k[nu_i]]
  double log_z = 0;
};
Expectations expectations(const Dataset& d, const Vec& lambda);
Vec likelihood_gradient(const Dataset& d, const Vec& lambda);  // token scale

// K if nu_# is the same on every tree, nullopt otherwise.
std::optional<double> constant_total(const Dataset& d);

// Restriction of X(y) used in place of k in the E-step.
struct Sparse {
  enum class Mode { None, NBest, Viterbi, FixedSet };
  Mode mode = Mode::None;
  int n = 1;
  std::vector<std::vector<int>> fixed;  // per item, tree indices (FixedSet)
};
std::vector<double> sparse_conditional(const Item& y, const Vec& lambda, const Sparse& s, size_t index = 0);
std::vector<std::vector<double>> conditionals(const Dataset& d, const Vec& lambda, const Sparse& s = {});

Vec im_closed_form_step(const Dataset& d, const Vec& lambda, const Sparse& s = {});

struct CountTables {
  // S[i][v]: model mass of nu_i = v; T[i][y]: k-expectation of nu_i given item y;
  // U[i][m]: model mass of nu_i at nu_# = m.
  std::vector<std::map<double, double>> S;
  std::vector<std::vector<double>> T;
  std::vector<std::map<double, double>> U;
  Vec t;  // p~[k[nu_i]]
};
CountTables count_tables(const Dataset& d, const Vec& lambda, const Sparse& s = {});

struct NewtonStep {
  Vec gamma;
  int iterations = 0;
  bool converged = false;
  bool box_hit = false;
  Vec residual;
};
NewtonStep im_newton_step(const Dataset& d, const Vec& lambda, double inner_tol = 1e-12, int inner_max = 100,
                          const Sparse& s = {});
NewtonStep im_newton_step(const CountTables& tab, const Vec& lambda, double inner_tol = 1e-12, int inner_max = 100);

// Token-scale auxiliary function (N times the normalised form), so that it
// bounds L(lambda + gamma) - L(lambda) directly.
double auxiliary_A(const Dataset& d, const Vec& lambda, const Vec& gamma, const Sparse& s = {});
Vec auxiliary_gradient_at_zero(const Dataset& d, const Vec& lambda);

struct ImOptions {
  double tol = 1e-6;
  double gamma_tol = 1e-6;
  int max_iters = 10000;
  bool newton = false;  // closed form when nu_# is constant unless set
  double inner_tol = 1e-12;
  int inner_max = 100;
  double box = 20;
  Sparse sparse;
};

struct ImRecord {
  int iteration;
  double L;
  double max_gamma;
  Vec lambda;
  double A;
  double seconds;
  double surrogate_before = 0;  // sparse runs: F at the old parameters
  double surrogate_after = 0;   // and at the new ones, same S(y)
};

struct ImResult {
  Vec lambda;
  std::vector<ImRecord> log;  // log[0] is the starting point
  bool converged = false;
  bool box_hit = false;
  double grad_norm = 0;
};

// Throws EstimationError if L decreases by more than 1e-9 (exact E-step only).
ImResult im_estimate(const Dataset& d, Vec lambda, const ImOptions& opt = {});

struct Gain {
  double alpha = 0;
  double G = 0;
  bool degenerate = false;
  bool box_hit = false;
  int iterations = 0;
};
// Token-scale gain of adding a property with the given column.
Gain gain(const Dataset& d, const Vec& lambda, const std::vector<std::vector<double>>& col, double box = 20);
double gain_value(const Dataset& d, const Vec& lambda, const std::vector<std::vector<double>>& col, double alpha);

struct Selection {
  int chosen = -1;  // -1: no candidate above threshold
  std::vector<Gain> gains;
};
Selection select_property(const Dataset& d, const Vec& lambda,
                          const std::vector<std::vector<std::vector<double>>>& cols, double threshold = 1e-9);

struct RoundRecord {
  int round;
  std::string chosen;
  double gain;
  double L;
  double heldout_L;
  bool accepted;
};

struct CombinedResult {
  LogLinearModel model;
  std::vector<RoundRecord> rounds;
  std::string stop_reason;
};

// Alternates property selection and IM. Candidates come as property plus its
// columns on the training and (optional) held-out sets.
struct Candidate {
  Property prop;
  std::vector<std::vector<double>> train;
  std::vector<std::vector<double>> heldout;
};
CombinedResult combined_inference(const LogLinearModel& start, const Dataset& train, std::vector<Candidate> cands,
                                  int max_rounds, const ImOptions& opt, const Dataset* heldout = nullptr);

double pseudo_log_likelihood(const Dataset& d, const Vec& lambda);  // sum count ln k(gold|y)
Vec pseudo_gradient(const Dataset& d, const Vec& lambda);

struct CmleOptions {
  double tol = 1e-6;
  int max_iters = 10000;
  double box = 20;
  double step = 1.0;
};
struct CmleResult {
  Vec lambda;
  double PL = 0;
  double grad_norm = 0;
  int iterations = 0;
  bool converged = false;
  bool box_hit = false;
};
CmleResult conditional_mle(const Dataset& d, Vec lambda, const CmleOptions& opt = {});

struct Evaluation {
  double c_test = 0;  // percent
  double neg_pl = 0;
};
Evaluation evaluate(const Dataset& d, const Vec& lambda);

// Expected-count reestimation of clause probabilities from X(y).
struct BaumResult {
  std::map<std::string, double> pi;
  std::vector<std::map<std::string, double>> history;
  std::vector<std::string> warnings;
};
BaumResult baum_estimate(const Program& p, const TreeSets& sets, const std::map<std::string, double>& pi0,
                         int iterations, double eps = 1e-6);
std::map<std::string, double> uniform_pi(const Program& p);

}  // namespace clg
