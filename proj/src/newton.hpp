#pragma once

// Internal damped-Newton kernel shared by the equation solvers. Not part
// of the public headers.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "eqc/lee.hpp"

namespace eqc::detail {

// Evaluates the residual at x; returns false when the point is not
// evaluable (domain error or non-finite result).
using ResidualFn =
    std::function<bool(const std::vector<double>&, Eigen::VectorXd&)>;

struct NewtonOutcome {
  bool converged = false;
  bool singular_everywhere = true;
  std::vector<double> x;
  double residual_inf = std::numeric_limits<double>::infinity();
};

inline bool fd_jacobian(const ResidualFn& residual, const std::vector<double>& x,
                        Eigen::MatrixXd& J) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd plus(n), minus(n);
  std::vector<double> xp = x;
  for (int j = 0; j < n; ++j) {
    double h = std::max(1e-6, 1e-6 * std::fabs(x[j]));
    xp[j] = x[j] + h;
    if (!residual(xp, plus)) return false;
    xp[j] = x[j] - h;
    if (!residual(xp, minus)) return false;
    xp[j] = x[j];
    J.col(j) = (plus - minus) / (2.0 * h);
  }
  return J.allFinite();
}

inline NewtonOutcome newton_solve(const ResidualFn& residual,
                                  std::vector<double> x,
                                  const SolveSettings& s) {
  const int n = static_cast<int>(x.size());
  NewtonOutcome out;

  Eigen::VectorXd F(n), Fnew(n);
  if (!residual(x, F) || !F.allFinite()) return out;

  Eigen::MatrixXd J(n, n);
  for (int iter = 0; iter < s.max_iter; ++iter) {
    double rinf = F.lpNorm<Eigen::Infinity>();
    if (rinf <= s.tol) {
      out.converged = true;
      out.x = x;
      out.residual_inf = rinf;
      return out;
    }

    if (!fd_jacobian(residual, x, J)) return out;

    Eigen::VectorXd step;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (lu.isInvertible()) {
      out.singular_everywhere = false;
      step = lu.solve(-F);
    } else {
      // rank-deficient Jacobian: minimum-norm least-squares step keeps
      // families of solutions reachable instead of aborting
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
      step = cod.solve(-F);
    }
    if (!step.allFinite()) return out;

    double base = F.norm();
    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> trial(n);
    for (int bt = 0; bt <= s.max_backtracks; ++bt) {
      for (int i = 0; i < n; ++i) trial[i] = x[i] + alpha * step[i];
      if (residual(trial, Fnew) && Fnew.allFinite() && Fnew.norm() < base) {
        x = trial;
        F = Fnew;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.x = x;
      out.residual_inf = rinf;
      return out;  // stalled: no descent along the Newton direction
    }
  }
  double rinf = F.lpNorm<Eigen::Infinity>();
  if (rinf <= s.tol) {
    out.converged = true;
    out.x = x;
    out.residual_inf = rinf;
  }
  return out;
}

// Greedy clustering shared by the multi-start drivers.
struct SolutionClusters {
  std::vector<Solution> clusters;

  void add(const std::vector<double>& x, double residual, double radius) {
    for (Solution& c : clusters) {
      double d = 0.0;
      for (size_t i = 0; i < x.size(); ++i)
        d = std::max(d, std::fabs(x[i] - c.x[i]));
      if (d <= radius) {
        ++c.support;
        if (residual < c.residual) {
          c.x = x;
          c.residual = residual;
        }
        return;
      }
    }
    clusters.push_back({x, residual, 1});
  }
};

}  // namespace eqc::detail
