#include "eqc/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "eqc/errors.hpp"
#include "eqc/intervention.hpp"

namespace eqc {

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::reached_t_max: return "reached-t-max";
    case Termination::converged: return "converged";
    case Termination::diverged: return "diverged";
    case Termination::domain_violation: return "domain-violation";
  }
  return "?";
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::oscillatory: return "oscillatory";
    case Verdict::diverged: return "diverged";
    case Verdict::ambiguous: return "ambiguous";
  }
  return "?";
}

namespace {

bool finite_state(const std::vector<double>& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

double max_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

Trajectory integrate_from(const Model& m, std::vector<double> x0,
                          const IntegrateSettings& s) {
  if (!(s.t_max > 0.0)) throw ModelError("t_max must be positive");
  if (!(s.dt > 0.0)) throw ModelError("dt must be positive");

  const int n = m.n_vars();
  const long n_steps = static_cast<long>(std::ceil(s.t_max / s.dt));
  const long stride =
      std::max<long>(1, (n_steps + s.max_samples - 1) / std::max(1, s.max_samples - 1));

  Trajectory traj;
  std::vector<double> x = std::move(x0);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  std::vector<double> scratch(static_cast<size_t>(m.scratch_size()));

  double t = 0.0;
  long consecutive_ok = 0;

  auto eval = [&](const std::vector<double>& state, std::vector<double>& out) {
    try {
      m.eval_rhs(state, out, scratch);
    } catch (const EvalError& e) {
      throw EvalError(std::string(e.what()) + " at t=" + format_double(t));
    }
  };

  auto record = [&](const std::vector<double>& state, double residual) {
    traj.times.push_back(t);
    traj.states.push_back(state);
    traj.residuals.push_back(residual);
    if (!traj.first_domain_violation && !m.in_domain(state))
      traj.first_domain_violation = t;
  };

  for (long step = 0;; ++step) {
    eval(x, k1);
    double residual = max_abs(k1);

    bool sample_point = (step % stride == 0) || t >= s.t_max;
    if (sample_point) {
      record(x, residual);
      if (residual <= s.tol)
        ++consecutive_ok;
      else
        consecutive_ok = 0;
      long n_recorded = static_cast<long>(traj.times.size());
      if (consecutive_ok >= 10 && consecutive_ok * 20 >= n_recorded) {
        traj.termination = Termination::converged;
        return traj;
      }
    }
    if (t >= s.t_max) {
      traj.termination = Termination::reached_t_max;
      return traj;
    }

    double h = std::min(s.dt, s.t_max - t);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    eval(tmp, k2);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    eval(tmp, k3);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    eval(tmp, k4);
    for (int i = 0; i < n; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t += h;

    if (!finite_state(x) || max_abs(x) > s.divergence_guard) {
      record(x, std::numeric_limits<double>::infinity());
      traj.termination = Termination::diverged;
      return traj;
    }
  }
}

Trajectory integrate(const Model& m, const IntegrateSettings& s) {
  return integrate_from(m, m.initial_state(), s);
}

Trajectory integrate(const Model& m, double t_max, double dt) {
  IntegrateSettings s;
  s.t_max = t_max;
  s.dt = dt;
  return integrate(m, s);
}

EquilibriumReport detect_equilibrium(const Trajectory& traj, const Model& m,
                                     double tol) {
  if (traj.times.empty()) throw ModelError("empty trajectory");

  EquilibriumReport rep;
  rep.basin_samples = 1;
  rep.residual_series = traj.residuals;
  if (rep.residual_series.size() != traj.times.size()) {
    rep.residual_series.clear();
    std::vector<double> f(m.n_vars());
    std::vector<double> scratch(static_cast<size_t>(m.scratch_size()));
    for (const auto& x : traj.states) {
      m.eval_rhs(x, f, scratch);
      rep.residual_series.push_back(max_abs(f));
    }
  }

  const long n = static_cast<long>(rep.residual_series.size());
  const long window = std::min<long>(n, std::max<long>(10, (n + 19) / 20));

  if (traj.termination == Termination::diverged) {
    rep.verdict = Verdict::diverged;
    rep.residual = rep.residual_series.back();
    return rep;
  }

  double trailing_max = 0.0;
  for (long i = n - window; i < n; ++i)
    trailing_max = std::max(trailing_max, rep.residual_series[i]);

  if (trailing_max <= tol) {
    rep.verdict = Verdict::converged;
    rep.point = traj.states.back();
    rep.residual = rep.residual_series.back();
    rep.distinct_limits = 1;
    return rep;
  }

  long mid_start = std::max<long>(0, n / 2 - window / 2);
  long mid_end = std::min(n, mid_start + window);
  double mid_max = 0.0;
  for (long i = mid_start; i < mid_end; ++i)
    mid_max = std::max(mid_max, rep.residual_series[i]);

  rep.residual = rep.residual_series.back();
  // bounded but not decaying: trailing max within a factor 2 of mid max
  if (2.0 * trailing_max >= mid_max)
    rep.verdict = Verdict::oscillatory;
  else
    rep.verdict = Verdict::ambiguous;
  return rep;
}

namespace {

struct Cluster {
  std::vector<double> rep;  // representative point (first member)
  int support = 0;
};

int assign_cluster(std::vector<Cluster>& clusters, const std::vector<double>& x,
                   double radius) {
  for (size_t c = 0; c < clusters.size(); ++c) {
    double d = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
      d = std::max(d, std::fabs(x[i] - clusters[c].rep[i]));
    if (d <= radius) {
      ++clusters[c].support;
      return static_cast<int>(c);
    }
  }
  clusters.push_back({x, 1});
  return static_cast<int>(clusters.size()) - 1;
}

}  // namespace

EquilibriumReport probe_stability(const Model& m, const ProbeSettings& s) {
  if (s.n_samples < 2) throw ModelError("probe_stability needs n_samples >= 2");

  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // sampling box per variable; clamped variables stay at their init so
  // that sampling ranges only over initial states the intervention allows
  std::vector<std::pair<double, double>> box(m.n_vars());
  std::vector<bool> frozen(m.n_vars(), false);
  EquilibriumReport rep;
  for (int i = 0; i < m.n_vars(); ++i) {
    const VarDecl& v = m.vars()[i];
    if (m.rhs_is_zero(i)) {
      frozen[i] = true;
      box[i] = {v.init, v.init};
      rep.frozen.push_back(v.name);
      continue;
    }
    double lo = std::max(v.lo, v.init - s.box_halfwidth);
    double hi = std::min(v.hi, v.init + s.box_halfwidth);
    if (!(lo <= hi)) throw ModelError("empty sampling box for " + v.name);
    box[i] = {lo, hi};
  }

  IntegrateSettings is = s.integrate;
  is.tol = std::min(is.tol, s.tol);

  std::vector<Cluster> clusters;
  const double radius = 10.0 * s.tol;
  int n_converged = 0;
  bool any_diverged = false, any_oscillatory = false, any_ambiguous = false;
  double worst_converged_residual = 0.0;

  for (int k = 0; k < s.n_samples; ++k) {
    std::vector<double> x0(m.n_vars());
    for (int i = 0; i < m.n_vars(); ++i)
      x0[i] = box[i].first + (box[i].second - box[i].first) * unit(rng);

    Trajectory traj = integrate_from(m, x0, is);
    EquilibriumReport one = detect_equilibrium(traj, m, s.tol);

    SampleSummary summary;
    summary.x0 = std::move(x0);
    summary.verdict = one.verdict;
    summary.final_residual = one.residual;
    if (one.verdict == Verdict::converged) {
      ++n_converged;
      summary.limit = one.point;
      assign_cluster(clusters, *one.point, radius);
      worst_converged_residual =
          std::max(worst_converged_residual, one.residual);
    } else if (one.verdict == Verdict::diverged) {
      any_diverged = true;
    } else if (one.verdict == Verdict::oscillatory) {
      any_oscillatory = true;
    } else {
      any_ambiguous = true;
    }
    rep.samples.push_back(std::move(summary));
  }

  rep.basin_samples = s.n_samples;
  rep.distinct_limits = static_cast<int>(clusters.size());
  if (n_converged == s.n_samples) {
    rep.verdict = Verdict::converged;
    rep.residual = worst_converged_residual;
  } else if (any_diverged) {
    rep.verdict = Verdict::diverged;
  } else if (any_oscillatory) {
    rep.verdict = Verdict::oscillatory;
  } else {
    rep.verdict = Verdict::ambiguous;
    (void)any_ambiguous;
  }
  if (!clusters.empty()) {
    rep.point = clusters.front().rep;
    if (clusters.size() == 1) {
      try {
        rep.jacobian_eigenvalues = jacobian_eigenvalues(m, *rep.point);
      } catch (const EvalError&) {
        rep.notes.push_back("jacobian not evaluable at the sampled limit");
      }
    }
  }
  if (rep.distinct_limits > 1)
    rep.notes.push_back("multiple limit clusters: equilibrium not unique");
  return rep;
}

EquilibriumReport probe_stability(const Model& m, int n_samples, unsigned seed,
                                  double tol) {
  ProbeSettings s;
  s.n_samples = n_samples;
  s.seed = seed;
  s.tol = tol;
  return probe_stability(m, s);
}

std::vector<WrtResult> probe_stability_wrt(
    const Model& m, const std::vector<std::vector<std::string>>& family,
    const WrtSettings& s) {
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<WrtResult> out;
  for (const auto& targets : family) {
    WrtResult res;
    res.targets = targets;

    if (targets.empty()) {
      WrtDraw draw;
      draw.report = probe_stability(m, s.probe);
      res.stable = draw.report.stable_sampled();
      res.draws.push_back(std::move(draw));
      out.push_back(std::move(res));
      continue;
    }

    res.stable = true;
    for (int k = 0; k < s.xi_samples; ++k) {
      InterventionSpec spec;
      spec.mode = InterventionSpec::Mode::hard;
      spec.targets = targets;
      for (const std::string& t : targets) {
        int ai = m.atom_index(t);
        if (ai < 0) throw ModelError("unknown intervention target: " + t);
        for (int slot : m.atoms()[ai].members) {
          const VarDecl& v = m.vars()[slot];
          double lo, hi;
          auto it = s.xi_range.find(v.name);
          if (it != s.xi_range.end()) {
            lo = it->second.first;
            hi = it->second.second;
          } else {
            lo = std::max(v.lo, v.init - s.box_halfwidth);
            hi = std::min(v.hi, v.init + s.box_halfwidth);
          }
          if (!(lo <= hi)) throw ModelError("empty clamp box for " + v.name);
          spec.values[v.name] = lo + (hi - lo) * unit(rng);
        }
      }
      WrtDraw draw;
      draw.xi = spec.values;
      draw.report = probe_stability(apply_hard_intervention(m, spec), s.probe);
      res.stable = res.stable && draw.report.stable_sampled();
      res.draws.push_back(std::move(draw));
    }
    out.push_back(std::move(res));
  }
  return out;
}

Eigen::MatrixXd jacobian(const Model& m, const std::vector<double>& x) {
  const int n = m.n_vars();
  Eigen::MatrixXd J(n, n);
  std::vector<double> plus(n), minus(n), xp(x), scratch(
      static_cast<size_t>(m.scratch_size()));
  for (int j = 0; j < n; ++j) {
    double h = std::max(1e-6, 1e-6 * std::fabs(x[j]));
    xp[j] = x[j] + h;
    m.eval_rhs(xp, plus, scratch);
    xp[j] = x[j] - h;
    m.eval_rhs(xp, minus, scratch);
    xp[j] = x[j];
    for (int i = 0; i < n; ++i) J(i, j) = (plus[i] - minus[i]) / (2.0 * h);
  }
  return J;
}

std::vector<std::complex<double>> jacobian_eigenvalues(
    const Model& m, const std::vector<double>& x) {
  Eigen::MatrixXd J = jacobian(m, x);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(J);
  std::vector<std::complex<double>> out(static_cast<size_t>(J.rows()));
  for (int i = 0; i < J.rows(); ++i) out[i] = solver.eigenvalues()[i];
  // deterministic order: by real part, then imaginary part
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

}  // namespace eqc
