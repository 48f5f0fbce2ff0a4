#ifndef WADV_SOLVER_HPP
#define WADV_SOLVER_HPP

#include <vector>

#include "wadv/common.hpp"

namespace wadv::solver {

/// Constrained maximization problem: maximize f(x) subject to g(x) <= 0,
/// optionally with a hard projection onto a feasible box/ball.
/// eval and eval_grad are fused so implementations can share one forward
/// pass between the objective and the constraints.
class Problem {
 public:
  virtual ~Problem() = default;
  virtual Index dim() const = 0;
  virtual Index num_constraints() const = 0;
  virtual void eval(const RVec& x, double& f, RVec& g) const = 0;
  /// also fills df (dim) and jac (num_constraints x dim)
  virtual void eval_grad(const RVec& x, double& f, RVec& g, RVec& df,
                         Mat& jac) const = 0;
  virtual RVec project(const RVec& x) const { return x; }
};

struct Options {
  int max_outer = 10;
  int max_inner = 20;      // NCG ascent steps per multiplier update
  double rho_pen = 1.0;    // quadratic penalty weight
  double gamma0 = 0.1;     // multiplier step gamma_t = gamma0 / (1 + t)
  double tol = 1e-6;       // inner stationarity tolerance on the gradient
  double armijo_c1 = 1e-4;
  double step0 = 1.0;
  int max_backtracks = 40;
};

struct Trace {
  std::vector<double> objective;      // per outer iteration
  std::vector<double> lagrangian;
  std::vector<double> max_violation;  // max_i g_i(x), <= 0 means feasible
  std::vector<double> lambda_min;     // stays >= 0 by construction
};

struct Result {
  RVec x;             // best-found point
  RVec x_final;       // last iterate
  RVec lambda;        // final multipliers
  Trace trace;
  double best_objective = 0.0;
  int outer_iterations = 0;
};

/// Augmented-Lagrangian outer loop with multiplier update
/// lambda <- max{0, lambda + gamma_t g(x)} and a Polak-Ribiere+ nonlinear
/// conjugate gradient inner ascent with Armijo backtracking.
Result maximize(const Problem& problem, const RVec& x0, const Options& opt);

}  // namespace wadv::solver

#endif  // WADV_SOLVER_HPP
