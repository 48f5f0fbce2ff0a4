#include "wadv/solver.hpp"

#include <cmath>

namespace wadv::solver {

namespace {

// inequality-form augmented Lagrangian term: lambda*ghat + rho/2 ghat^2 with
// ghat = max(g, -lambda/rho); matches the max{0, lambda + rho g} multiplier
// estimate used for the gradient
double penalty_value(const RVec& g, const RVec& lambda, double rho) {
  double acc = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    const double ghat = std::max(g[i], -lambda[i] / rho);
    acc += lambda[i] * ghat + 0.5 * rho * ghat * ghat;
  }
  return acc;
}

}  // namespace

Result maximize(const Problem& problem, const RVec& x0, const Options& opt) {
  const Index n = problem.dim();
  const Index nc = problem.num_constraints();
  if (x0.size() != n) throw std::invalid_argument("x0 dimension mismatch");

  RVec x = problem.project(x0);
  RVec lambda = RVec::Zero(nc);

  Result res;
  res.x = x;
  res.best_objective = -std::numeric_limits<double>::infinity();
  double best_score = -std::numeric_limits<double>::infinity();

  const auto lag_value = [&](const RVec& xx, double& fout, RVec& gout) {
    problem.eval(xx, fout, gout);
    return fout - penalty_value(gout, lambda, opt.rho_pen);
  };

  double f = 0.0;
  RVec gvals(nc);
  RVec df(n);
  Mat jac(nc, n);

  for (int t = 0; t < opt.max_outer; ++t) {
    // inner NCG ascent of L(., lambda)
    problem.eval_grad(x, f, gvals, df, jac);
    RVec mult = (lambda + opt.rho_pen * gvals).cwiseMax(0.0);
    RVec grad = df - jac.transpose() * mult;
    double lval = f - penalty_value(gvals, lambda, opt.rho_pen);
    RVec dir = grad;
    double alpha = opt.step0;

    for (int it = 0; it < opt.max_inner; ++it) {
      if (!std::isfinite(lval) || !std::isfinite(f))
        throw NumericalError("objective diverged (NaN) in inner ascent");
      if (grad.lpNorm<Eigen::Infinity>() < opt.tol) break;
      double dd = dir.dot(grad);
      if (dd <= 0.0) {  // conjugacy lost, restart on the gradient
        dir = grad;
        dd = grad.squaredNorm();
        if (dd <= 0.0) break;
      }

      // Armijo backtracking on the projected candidate; never accept a
      // step that decreases the augmented Lagrangian
      bool accepted = false;
      double a = alpha;
      RVec xc;
      double fc = 0.0, lc = 0.0;
      RVec gc(nc);
      for (int bt = 0; bt < opt.max_backtracks; ++bt) {
        xc = problem.project(x + a * dir);
        lc = lag_value(xc, fc, gc);
        if (std::isfinite(lc) &&
            lc >= lval + opt.armijo_c1 * a * dd &&
            (xc - x).squaredNorm() > 0.0) {
          accepted = true;
          break;
        }
        a *= 0.5;
      }
      if (!accepted) break;  // stationary up to the projection

      x = xc;
      f = fc;
      gvals = gc;
      lval = lc;
      alpha = std::min(a * 2.0, opt.step0 * 16.0);

      RVec grad_new;
      {
        double f2;
        problem.eval_grad(x, f2, gvals, df, jac);
        f = f2;
        mult = (lambda + opt.rho_pen * gvals).cwiseMax(0.0);
        grad_new = df - jac.transpose() * mult;
      }
      // Polak-Ribiere+ with automatic restart when beta clips to zero
      const double denom = grad.squaredNorm();
      double beta = denom > 0.0
                        ? grad_new.dot(grad_new - grad) / denom
                        : 0.0;
      beta = std::max(0.0, beta);
      dir = grad_new + beta * dir;
      grad = grad_new;
    }

    if (!std::isfinite(f))
      throw NumericalError("objective diverged (NaN) after inner ascent");

    // multiplier ascent: lambda <- max{0, lambda + gamma_t g}
    const double gamma = opt.gamma0 / (1.0 + t);
    lambda = (lambda + gamma * gvals).cwiseMax(0.0);

    res.trace.objective.push_back(f);
    res.trace.lagrangian.push_back(f -
                                   penalty_value(gvals, lambda, opt.rho_pen));
    res.trace.max_violation.push_back(nc > 0 ? gvals.maxCoeff() : 0.0);
    res.trace.lambda_min.push_back(nc > 0 ? lambda.minCoeff() : 0.0);
    res.outer_iterations = t + 1;

    // best-found: objective penalized by any constraint violation
    const double viol = nc > 0 ? std::max(0.0, gvals.maxCoeff()) : 0.0;
    const double score = f - 1e3 * viol;
    if (score > best_score) {
      best_score = score;
      res.x = x;
      res.best_objective = f;
    }
  }
  res.x_final = x;
  res.lambda = lambda;
  return res;
}

}  // namespace wadv::solver
