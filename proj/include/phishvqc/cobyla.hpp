// COBYLA: Powell's constrained optimization by linear approximation.
//
// A simplex of n+1 evaluated points supports linear models of the objective
// and of every constraint c_k(x) >= 0. Each iteration solves the trust-region
// subproblem (TRSTLP) inside radius rho; rho halves from rho_begin down to
// rho_end. A merit function f + mu * max_violation arbitrates between
// objective decrease and feasibility.
//
// The control flow follows Powell's 1994 reference code step for step so that
// evaluation sequences agree with the widely deployed Fortran version.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phishvqc/error.hpp"

namespace phishvqc {

struct OptimizerConfig {
  // Budget counted in objective evaluations.
  std::size_t max_iterations = 300;
  double rho_begin = 1.0;
  double rho_end = 1e-4;
  // Unused by the (deterministic) algorithm; echoed into reports.
  std::optional<std::uint64_t> seed;
};

enum class Termination { MaxIterations, RhoConverged, RoundingErrors };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::MaxIterations: return "max-iterations";
    case Termination::RhoConverged: return "rho-converged";
    case Termination::RoundingErrors: return "rounding-errors";
  }
  return "unknown";
}

struct OptimizationTrace {
  // Best objective value seen after each evaluation.
  std::vector<double> best_value_per_iteration;
  std::size_t evaluations_used = 0;
  std::vector<double> final_params;
  double final_value = 0.0;
  double final_max_violation = 0.0;
  Termination termination = Termination::MaxIterations;
};

using Objective = std::function<double(std::span<const double>)>;
// Writes c_k(x) for k < constraint_count into `out`; feasible iff all >= 0.
using Constraints = std::function<void(std::span<const double>, std::span<double>)>;
using ProgressCallback = std::function<void(std::size_t iteration, double best_value)>;

namespace detail {

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Rounding-error guard used throughout Powell's code: a scalar product is
// treated as zero when it is tiny relative to the sum of absolute terms.
inline bool negligible(double abs_sum, double value) {
  const double acca = abs_sum + 0.1 * std::abs(value);
  const double accb = abs_sum + 0.2 * std::abs(value);
  return abs_sum >= acca || acca >= accb;
}

// A few reference constants are single-precision literals; reproduce their
// exact double values so evaluation sequences match.
inline constexpr double kTiny = static_cast<double>(1.0e-6f);
inline constexpr double kEps = static_cast<double>(2.2e-16f);

inline bool negligible_single(double abs_sum, double value) {
  const double acca = abs_sum + static_cast<double>(0.1f) * std::abs(value);
  const double accb = abs_sum + static_cast<double>(0.2f) * std::abs(value);
  return abs_sum >= acca || acca >= accb;
}

// Trust-region subproblem. Columns 0..m-1 of `a` are constraint gradients,
// column m is minus the objective gradient, `b` holds the constraint values
// at the simplex pole (negated). Stage one minimizes the largest linearized
// violation within radius rho; any remaining freedom then reduces the
// objective. Returns false when degeneracy stops dx short of length rho.
inline bool trust_region_step(std::size_t n, std::size_t m, const DenseMatrix& a,
                              std::span<const double> b, double rho,
                              std::span<double> dx) {
  DenseMatrix z(n, n);
  std::vector<double> zdota(n, 0.0), sdirn(n, 0.0), dxnew(n, 0.0);
  std::vector<double> vmultc(m + 1, 0.0), vmultd(m + 1, 0.0);
  std::vector<std::size_t> iact(m + 1, 0);

  auto column_dot = [&](const std::vector<double>& v, std::size_t col) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a(i, col) * v[i];
    return s;
  };
  // Givens rotation mixing columns k and k+1 of z so that column k picks up
  // the component of constraint `kw` (reordering the active set).
  auto rotate_pair = [&](std::size_t k, std::size_t kw) {
    const std::size_t kp = k + 1;
    double sp = 0.0;
    for (std::size_t i = 0; i < n; ++i) sp += z(i, k) * a(i, kw);
    const double temp = std::sqrt(sp * sp + zdota[kp] * zdota[kp]);
    const double alpha = zdota[kp] / temp;
    const double beta = sp / temp;
    zdota[kp] = alpha * zdota[k];
    zdota[k] = temp;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = alpha * z(i, kp) + beta * z(i, k);
      z(i, kp) = alpha * z(i, k) - beta * z(i, kp);
      z(i, k) = t;
    }
  };
  // Moves the active constraint at `from` to the end of the active list.
  auto move_to_end = [&](std::size_t from, std::size_t nact) {
    if (from + 1 >= nact) return;
    const std::size_t isave = iact[from];
    const double vsave = vmultc[from];
    std::size_t k = from;
    do {
      const std::size_t kw = iact[k + 1];
      rotate_pair(k, kw);
      iact[k] = kw;
      vmultc[k] = vmultc[k + 1];
      ++k;
    } while (k + 1 < nact);
    iact[k] = isave;
    vmultc[k] = vsave;
  };

  enum class Step { Restart, Iterate, AfterAdd, Delete, StageTwoDir, LineStep, SwitchStage, Degenerate };

  bool ifull = true;
  std::size_t mcon = m;
  std::size_t nact = 0;
  std::size_t icon = 0;
  std::size_t kk = 0;
  double resmax = 0.0;
  double optold = 0.0;
  std::size_t nactx = 0;
  int icount = 0;

  for (std::size_t i = 0; i < n; ++i) {
    z(i, i) = 1.0;
    dx[i] = 0.0;
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (b[k] > resmax) {
      resmax = b[k];
      icon = k;
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    iact[k] = k;
    vmultc[k] = resmax - b[k];
  }

  Step step = resmax == 0.0 ? Step::SwitchStage : Step::Restart;
  for (;;) {
    switch (step) {
      case Step::Restart:
        // Give up a stage after three iterations that neither improve the
        // stage objective nor grow the active set.
        optold = 0.0;
        icount = 0;
        step = Step::Iterate;
        break;

      case Step::Iterate: {
        double optnew;
        if (mcon == m) {
          optnew = resmax;
        } else {
          optnew = 0.0;
          for (std::size_t i = 0; i < n; ++i) optnew -= dx[i] * a(i, mcon - 1);
        }
        if (icount == 0 || optnew < optold) {
          optold = optnew;
          nactx = nact;
          icount = 3;
        } else if (nact > nactx) {
          nactx = nact;
          icount = 3;
        } else {
          --icount;
          if (icount == 0) {
            step = Step::Degenerate;
            break;
          }
        }

        if (icon < nact) {
          step = Step::Delete;
          break;
        }

        // Add constraint iact[icon]: rotate the trailing columns of z so they
        // are orthogonal to its gradient.
        kk = iact[icon];
        for (std::size_t i = 0; i < n; ++i) dxnew[i] = a(i, kk);
        double tot = 0.0;
        for (std::size_t k = n; k-- > nact;) {
          double sp = 0.0, spabs = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double t = z(i, k) * dxnew[i];
            sp += t;
            spabs += std::abs(t);
          }
          if (negligible(spabs, sp)) sp = 0.0;
          if (tot == 0.0) {
            tot = sp;
          } else {
            const std::size_t kp = k + 1;
            const double t = std::sqrt(sp * sp + tot * tot);
            const double alpha = sp / t;
            const double beta = tot / t;
            tot = t;
            for (std::size_t i = 0; i < n; ++i) {
              const double zi = alpha * z(i, k) + beta * z(i, kp);
              z(i, kp) = alpha * z(i, kp) - beta * z(i, k);
              z(i, k) = zi;
            }
          }
        }

        if (tot != 0.0) {
          ++nact;
          zdota[nact - 1] = tot;
          vmultc[icon] = vmultc[nact - 1];
          vmultc[nact - 1] = 0.0;
          step = Step::AfterAdd;
          break;
        }

        // The new gradient is a combination of the active ones; find the
        // active constraint to drop from the linear-combination multipliers.
        double ratio = -1.0;
        for (std::size_t k = nact; k-- > 0;) {
          double zdotv = 0.0, zdvabs = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double t = z(i, k) * dxnew[i];
            zdotv += t;
            zdvabs += std::abs(t);
          }
          if (!negligible(zdvabs, zdotv)) {
            const double t = zdotv / zdota[k];
            if (t > 0.0 && iact[k] < m) {
              const double tempa = vmultc[k] / t;
              if (ratio < 0.0 || tempa < ratio) ratio = tempa;
            }
            if (k >= 1) {
              const std::size_t kw = iact[k];
              for (std::size_t i = 0; i < n; ++i) dxnew[i] -= t * a(i, kw);
            }
            vmultd[k] = t;
          } else {
            vmultd[k] = 0.0;
          }
        }
        if (ratio < 0.0) {
          step = Step::Degenerate;
          break;
        }

        for (std::size_t k = 0; k < nact; ++k) {
          vmultc[k] = std::max(0.0, vmultc[k] - ratio * vmultd[k]);
        }
        // The reference reorders from position icon here, which is never
        // inside the active set on this path, so no reordering happens.
        move_to_end(icon, nact);
        double t = 0.0;
        for (std::size_t i = 0; i < n; ++i) t += z(i, nact - 1) * a(i, kk);
        if (t == 0.0) {
          step = Step::Degenerate;
          break;
        }
        zdota[nact - 1] = t;
        vmultc[icon] = 0.0;
        vmultc[nact - 1] = ratio;
        step = Step::AfterAdd;
        break;
      }

      case Step::AfterAdd: {
        iact[icon] = iact[nact - 1];
        iact[nact - 1] = kk;
        // Keep the objective as the last active constraint in stage two.
        if (mcon > m && kk != mcon - 1) {
          const std::size_t k = nact - 2;
          double sp = 0.0;
          for (std::size_t i = 0; i < n; ++i) sp += z(i, k) * a(i, kk);
          const double t = std::sqrt(sp * sp + zdota[nact - 1] * zdota[nact - 1]);
          const double alpha = zdota[nact - 1] / t;
          const double beta = sp / t;
          zdota[nact - 1] = alpha * zdota[k];
          zdota[k] = t;
          for (std::size_t i = 0; i < n; ++i) {
            const double zi = alpha * z(i, nact - 1) + beta * z(i, k);
            z(i, nact - 1) = alpha * z(i, k) - beta * z(i, nact - 1);
            z(i, k) = zi;
          }
          iact[nact - 1] = iact[k];
          iact[k] = kk;
          std::swap(vmultc[k], vmultc[nact - 1]);
        }
        if (mcon > m) {
          step = Step::StageTwoDir;
          break;
        }
        const std::size_t last = iact[nact - 1];
        const double t = (column_dot(sdirn, last) - 1.0) / zdota[nact - 1];
        for (std::size_t i = 0; i < n; ++i) sdirn[i] -= t * z(i, nact - 1);
        step = Step::LineStep;
        break;
      }

      case Step::Delete: {
        move_to_end(icon, nact);
        --nact;
        if (mcon > m) {
          step = Step::StageTwoDir;
          break;
        }
        double t = 0.0;
        for (std::size_t i = 0; i < n; ++i) t += sdirn[i] * z(i, nact);
        for (std::size_t i = 0; i < n; ++i) sdirn[i] -= t * z(i, nact);
        step = Step::LineStep;
        break;
      }

      case Step::StageTwoDir: {
        const double t = 1.0 / zdota[nact - 1];
        for (std::size_t i = 0; i < n; ++i) sdirn[i] = t * z(i, nact - 1);
        step = Step::LineStep;
        break;
      }

      case Step::LineStep: {
        // Step to the trust-region boundary, or just far enough to zero the
        // violation in stage one.
        double dd = rho * rho, sd = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (std::abs(dx[i]) >= kTiny * rho) dd -= dx[i] * dx[i];
          sd += dx[i] * sdirn[i];
          ss += sdirn[i] * sdirn[i];
        }
        if (dd <= 0.0) {
          step = Step::Degenerate;
          break;
        }
        double t = std::sqrt(ss * dd);
        if (std::abs(sd) >= kTiny * t) t = std::sqrt(ss * dd + sd * sd);
        const double stpful = dd / (t + sd);
        double stepl = stpful;
        if (mcon == m) {
          if (negligible(stepl, resmax)) {
            step = Step::SwitchStage;
            break;
          }
          stepl = std::min(stepl, resmax);
        }

        for (std::size_t i = 0; i < n; ++i) dxnew[i] = dx[i] + stepl * sdirn[i];
        double resold = 0.0;
        if (mcon == m) {
          resold = resmax;
          resmax = 0.0;
          for (std::size_t k = 0; k < nact; ++k) {
            const std::size_t c = iact[k];
            resmax = std::max(resmax, b[c] - column_dot(dxnew, c));
          }
        }

        // Multipliers the active set would have at dxnew.
        if (nact > 0) {
          for (std::size_t k = nact; k-- > 0;) {
            double zdotw = 0.0, zdwabs = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double tt = z(i, k) * dxnew[i];
              zdotw += tt;
              zdwabs += std::abs(tt);
            }
            if (negligible(zdwabs, zdotw)) zdotw = 0.0;
            vmultd[k] = zdotw / zdota[k];
            if (k == 0) break;
            const std::size_t c = iact[k];
            for (std::size_t i = 0; i < n; ++i) dxnew[i] -= vmultd[k] * a(i, c);
          }
          if (mcon > m) vmultd[nact - 1] = std::max(0.0, vmultd[nact - 1]);
        }

        // Residuals of the inactive constraints at dxnew.
        for (std::size_t i = 0; i < n; ++i) dxnew[i] = dx[i] + stepl * sdirn[i];
        for (std::size_t k = nact; k < mcon; ++k) {
          const std::size_t c = iact[k];
          double sum = resmax - b[c];
          double sumabs = resmax + std::abs(b[c]);
          for (std::size_t i = 0; i < n; ++i) {
            const double tt = a(i, c) * dxnew[i];
            sum += tt;
            sumabs += std::abs(tt);
          }
          if (negligible_single(sumabs, sum)) sum = 0.0;
          vmultd[k] = sum;
        }

        // Largest fraction of the step that keeps every multiplier and
        // residual nonnegative.
        double ratio = 1.0;
        bool blocked = false;
        for (std::size_t k = 0; k < mcon; ++k) {
          if (vmultd[k] > -kEps && vmultd[k] < kEps) vmultd[k] = 0.0;
          if (vmultd[k] < 0.0) {
            const double tt = vmultc[k] / (vmultc[k] - vmultd[k]);
            if (tt < ratio) {
              ratio = tt;
              icon = k;
              blocked = true;
            }
          }
        }

        const double keep = 1.0 - ratio;
        for (std::size_t i = 0; i < n; ++i) dx[i] = keep * dx[i] + ratio * dxnew[i];
        for (std::size_t k = 0; k < mcon; ++k) {
          vmultc[k] = std::max(0.0, keep * vmultc[k] + ratio * vmultd[k]);
        }
        if (mcon == m) resmax = resold + ratio * (resmax - resold);

        if (blocked) {
          step = Step::Iterate;
          break;
        }
        if (stepl == stpful) return ifull;
        if (std::isnan(stepl)) {
          std::fill(dx.begin(), dx.end(), stepl);
          return ifull;
        }
        step = Step::SwitchStage;
        break;
      }

      case Step::SwitchStage:
        mcon = m + 1;
        icon = mcon - 1;
        iact[mcon - 1] = mcon - 1;
        vmultc[mcon - 1] = 0.0;
        step = Step::Restart;
        break;

      case Step::Degenerate:
        if (mcon == m) {
          step = Step::SwitchStage;
          break;
        }
        ifull = false;
        return ifull;
    }
  }
}

}  // namespace detail

inline void validate(const OptimizerConfig& config, std::size_t n_params) {
  if (!(config.rho_begin > 0.0) || !(config.rho_end > 0.0)) {
    throw InvalidConfig("rho_begin and rho_end must be positive");
  }
  if (!(config.rho_end < config.rho_begin)) {
    throw InvalidConfig("rho_end must be smaller than rho_begin");
  }
  if (config.max_iterations < n_params + 2) {
    throw InvalidConfig("evaluation budget " + std::to_string(config.max_iterations) +
                        " is below n + 2 = " + std::to_string(n_params + 2));
  }
}

// General form with `constraint_count` inequality constraints c_k(x) >= 0.
inline OptimizationTrace minimize_constrained(const Objective& objective,
                                              const Constraints& constraints,
                                              std::size_t constraint_count,
                                              std::span<const double> initial,
                                              const OptimizerConfig& config,
                                              const ProgressCallback& callback = {}) {
  const std::size_t n = initial.size();
  const std::size_t m = constraint_count;
  if (n == 0) throw InvalidInput("COBYLA needs at least one variable");
  validate(config, n);
  if (m > 0 && !constraints) throw InvalidInput("constraint callback missing");

  constexpr double kAlpha = 0.25, kBeta = 2.1, kGamma = 0.5, kDelta = 1.1;
  const double rhoend = config.rho_end;
  const std::size_t maxfun = config.max_iterations;

  std::vector<double> x(initial.begin(), initial.end());
  std::vector<double> con(m + 2, 0.0);
  std::vector<double> dx(n, 0.0), w(n, 0.0);
  std::vector<double> vsig(n, 0.0), veta(n, 0.0), sigbar(n, 0.0);
  // sim: columns 0..n-1 are edge vectors, column n is the pole vertex.
  detail::DenseMatrix sim(n, n + 1), simi(n, n), datmat(m + 2, n + 1), a(n, m + 1);

  OptimizationTrace trace;
  trace.best_value_per_iteration.reserve(maxfun);
  std::vector<double> best_x = x;
  double best_f = 0.0;
  double best_res = 0.0;
  bool have_best = false;

  double rho = config.rho_begin;
  double parmu = 0.0;
  std::size_t nfvals = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sim(i, n) = x[i];
    sim(i, i) = rho;
    simi(i, i) = 1.0 / rho;
  }

  std::size_t jdrop = n;
  bool ibrnch = false;
  bool iflag = false;
  double parsig = 0.0, pareta = 0.0;
  double prerec = 0.0, prerem = 0.0;
  double f = 0.0, resmax = 0.0;

  std::vector<double> cvals(m, 0.0);
  auto evaluate = [&] {
    ++nfvals;
    f = objective(x);
    if (m > 0) constraints(x, cvals);
    bool finite = std::isfinite(f);
    for (double c : cvals) finite = finite && std::isfinite(c);
    if (!finite) {
      throw OptimizationError("objective or constraint returned a non-finite value at evaluation " +
                                  std::to_string(nfvals),
                              x);
    }
    resmax = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      con[k] = cvals[k];
      resmax = std::max(resmax, -cvals[k]);
    }
    con[m] = f;
    con[m + 1] = resmax;

    if (!have_best || resmax < best_res || (resmax == best_res && f < best_f)) {
      have_best = true;
      best_f = f;
      best_res = resmax;
      best_x = x;
    }
    trace.best_value_per_iteration.push_back(best_f);
    if (callback) callback(nfvals, best_f);
  };

  // Replace vertex jdrop by the pole-relative step dx and refresh simi.
  auto replace_vertex = [&](std::size_t j_out) {
    double temp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sim(i, j_out) = dx[i];
      temp += simi(j_out, i) * dx[i];
    }
    for (std::size_t i = 0; i < n; ++i) simi(j_out, i) /= temp;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == j_out) continue;
      double t = 0.0;
      for (std::size_t i = 0; i < n; ++i) t += simi(j, i) * dx[i];
      for (std::size_t i = 0; i < n; ++i) simi(j, i) -= t * simi(j_out, i);
    }
  };

  enum class Step { Evaluate, Iterate, TrustRegion, AfterTrial, ReduceRho, Finish };
  Step step = Step::Evaluate;

  while (step != Step::Finish) {
    switch (step) {
      case Step::Evaluate: {
        if (nfvals >= maxfun && nfvals > 0) {
          trace.termination = Termination::MaxIterations;
          step = Step::Finish;
          break;
        }
        evaluate();
        if (ibrnch) {
          step = Step::AfterTrial;
          break;
        }
        for (std::size_t k = 0; k < m + 2; ++k) datmat(k, jdrop) = con[k];
        if (nfvals > n + 1) {
          ibrnch = true;
          step = Step::Iterate;
          break;
        }
        // Building the initial simplex: keep the better of the pole and the
        // new vertex at the pole.
        if (jdrop < n) {
          if (datmat(m, n) <= f) {
            x[jdrop] = sim(jdrop, n);
          } else {
            sim(jdrop, n) = x[jdrop];
            for (std::size_t k = 0; k < m + 2; ++k) {
              datmat(k, jdrop) = datmat(k, n);
              datmat(k, n) = con[k];
            }
            for (std::size_t k = 0; k <= jdrop; ++k) {
              sim(jdrop, k) = -rho;
              double temp = 0.0;
              for (std::size_t i = k; i <= jdrop; ++i) temp -= simi(i, k);
              simi(jdrop, k) = temp;
            }
          }
        }
        if (nfvals <= n) {
          jdrop = nfvals - 1;
          x[jdrop] += rho;
          step = Step::Evaluate;
          break;
        }
        ibrnch = true;
        step = Step::Iterate;
        break;
      }

      case Step::Iterate: {
        // Move the vertex with the least merit value into pole position.
        double phimin = datmat(m, n) + parmu * datmat(m + 1, n);
        std::size_t nbest = n;
        for (std::size_t j = 0; j < n; ++j) {
          const double temp = datmat(m, j) + parmu * datmat(m + 1, j);
          if (temp < phimin) {
            nbest = j;
            phimin = temp;
          } else if (temp == phimin && parmu == 0.0 && datmat(m + 1, j) < datmat(m + 1, nbest)) {
            nbest = j;
          }
        }
        if (nbest < n) {
          for (std::size_t i = 0; i < m + 2; ++i) std::swap(datmat(i, n), datmat(i, nbest));
          for (std::size_t i = 0; i < n; ++i) {
            const double temp = sim(i, nbest);
            sim(i, nbest) = 0.0;
            sim(i, n) += temp;
            double tempa = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
              sim(i, k) -= temp;
              tempa -= simi(k, i);
            }
            simi(nbest, i) = tempa;
          }
        }

        double error = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            double temp = i == j ? -1.0 : 0.0;
            for (std::size_t k = 0; k < n; ++k) temp += simi(i, k) * sim(k, j);
            error = std::max(error, std::abs(temp));
          }
        }
        if (error > 0.1) {
          trace.termination = Termination::RoundingErrors;
          step = Step::Finish;
          break;
        }

        // Linear model gradients; column m holds minus the objective gradient.
        for (std::size_t k = 0; k <= m; ++k) {
          con[k] = -datmat(k, n);
          for (std::size_t j = 0; j < n; ++j) w[j] = datmat(k, j) + con[k];
          for (std::size_t i = 0; i < n; ++i) {
            double temp = 0.0;
            for (std::size_t j = 0; j < n; ++j) temp += w[j] * simi(j, i);
            a(i, k) = k == m ? -temp : temp;
          }
        }

        // Simplex acceptability.
        iflag = true;
        parsig = kAlpha * rho;
        pareta = kBeta * rho;
        for (std::size_t j = 0; j < n; ++j) {
          double wsig = 0.0, weta = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            wsig += simi(j, i) * simi(j, i);
            weta += sim(i, j) * sim(i, j);
          }
          vsig[j] = 1.0 / std::sqrt(wsig);
          veta[j] = std::sqrt(weta);
          if (vsig[j] < parsig || veta[j] > pareta) iflag = false;
        }
        if (ibrnch || iflag) {
          step = Step::TrustRegion;
          break;
        }

        // Geometry step: replace the worst-shaped vertex.
        jdrop = n;
        double temp = pareta;
        for (std::size_t j = 0; j < n; ++j) {
          if (veta[j] > temp) {
            jdrop = j;
            temp = veta[j];
          }
        }
        if (jdrop == n) {
          for (std::size_t j = 0; j < n; ++j) {
            if (vsig[j] < temp) {
              jdrop = j;
              temp = vsig[j];
            }
          }
        }

        temp = kGamma * rho * vsig[jdrop];
        for (std::size_t i = 0; i < n; ++i) dx[i] = temp * simi(jdrop, i);
        double cvmaxp = 0.0, cvmaxm = 0.0, sum = 0.0;
        for (std::size_t k = 0; k <= m; ++k) {
          sum = 0.0;
          for (std::size_t i = 0; i < n; ++i) sum += a(i, k) * dx[i];
          if (k < m) {
            const double c = datmat(k, n);
            cvmaxp = std::max(cvmaxp, -sum - c);
            cvmaxm = std::max(cvmaxm, sum - c);
          }
        }
        const double dxsign = parmu * (cvmaxp - cvmaxm) > sum + sum ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) dx[i] *= dxsign;
        replace_vertex(jdrop);
        for (std::size_t j = 0; j < n; ++j) x[j] = sim(j, n) + dx[j];
        step = Step::Evaluate;
        break;
      }

      case Step::TrustRegion: {
        const bool full = detail::trust_region_step(n, m, a, con, rho, dx);
        if (std::any_of(dx.begin(), dx.end(), [](double d) { return std::isnan(d); })) {
          trace.termination = Termination::RoundingErrors;
          step = Step::Finish;
          break;
        }
        if (!full) {
          double len2 = 0.0;
          for (double d : dx) len2 += d * d;
          if (len2 < 0.25 * rho * rho) {
            ibrnch = true;
            step = Step::ReduceRho;
            break;
          }
        }

        // Predicted objective change and worst violation at pole + dx.
        double resnew = 0.0, sum = 0.0;
        con[m] = 0.0;
        for (std::size_t k = 0; k <= m; ++k) {
          sum = con[k];
          for (std::size_t i = 0; i < n; ++i) sum -= a(i, k) * dx[i];
          if (k < m) resnew = std::max(resnew, sum);
        }

        double barmu = 0.0;
        prerec = datmat(m + 1, n) - resnew;
        if (prerec > 0.0) barmu = sum / prerec;
        if (parmu < 1.5 * barmu) {
          parmu = 2.0 * barmu;
          const double phi = datmat(m, n) + parmu * datmat(m + 1, n);
          bool pole_changed = false;
          for (std::size_t j = 0; j < n; ++j) {
            const double temp = datmat(m, j) + parmu * datmat(m + 1, j);
            if (temp < phi ||
                (temp == phi && parmu == 0.0 && datmat(m + 1, j) < datmat(m + 1, n))) {
              pole_changed = true;
              break;
            }
          }
          if (pole_changed) {
            step = Step::Iterate;
            break;
          }
        }
        prerem = parmu * prerec - sum;

        for (std::size_t i = 0; i < n; ++i) x[i] = sim(i, n) + dx[i];
        ibrnch = true;
        step = Step::Evaluate;
        break;
      }

      case Step::AfterTrial: {
        const double vmold = datmat(m, n) + parmu * datmat(m + 1, n);
        const double vmnew = f + parmu * resmax;
        double trured = vmold - vmnew;
        if (parmu == 0.0 && f == datmat(m, n)) {
          prerem = prerec;
          trured = datmat(m + 1, n) - resmax;
        }

        // Pick the vertex to replace with the trial point.
        double ratio = trured <= 0.0 ? 1.0 : 0.0;
        std::size_t drop = n;
        for (std::size_t j = 0; j < n; ++j) {
          double temp = 0.0;
          for (std::size_t i = 0; i < n; ++i) temp += simi(j, i) * dx[i];
          temp = std::abs(temp);
          if (temp > ratio) {
            drop = j;
            ratio = temp;
          }
          sigbar[j] = temp * vsig[j];
        }

        double edgmax = kDelta * rho;
        std::size_t far = n;
        for (std::size_t j = 0; j < n; ++j) {
          if (sigbar[j] >= parsig || sigbar[j] >= vsig[j]) {
            double temp = veta[j];
            if (trured > 0.0) {
              temp = 0.0;
              for (std::size_t i = 0; i < n; ++i) {
                const double d = dx[i] - sim(i, j);
                temp += d * d;
              }
              temp = std::sqrt(temp);
            }
            if (temp > edgmax) {
              far = j;
              edgmax = temp;
            }
          }
        }
        if (far < n) drop = far;
        if (drop == n) {
          step = Step::ReduceRho;
          break;
        }

        jdrop = drop;
        replace_vertex(jdrop);
        for (std::size_t k = 0; k < m + 2; ++k) datmat(k, jdrop) = con[k];

        if (trured > 0.0 && trured >= 0.1 * prerem) {
          step = Step::Iterate;
          break;
        }
        step = Step::ReduceRho;
        break;
      }

      case Step::ReduceRho: {
        if (!iflag) {
          ibrnch = false;
          step = Step::Iterate;
          break;
        }
        if (rho > rhoend) {
          rho *= 0.5;
          if (rho <= 1.5 * rhoend) rho = rhoend;
          if (parmu > 0.0) {
            double denom = 0.0, cmin = 0.0, cmax = 0.0;
            for (std::size_t k = 0; k <= m; ++k) {
              cmin = datmat(k, n);
              cmax = cmin;
              for (std::size_t i = 0; i < n; ++i) {
                cmin = std::min(cmin, datmat(k, i));
                cmax = std::max(cmax, datmat(k, i));
              }
              if (k < m && cmin < 0.5 * cmax) {
                const double temp = std::max(cmax, 0.0) - cmin;
                denom = denom <= 0.0 ? temp : std::min(denom, temp);
              }
            }
            if (denom == 0.0) {
              parmu = 0.0;
            } else if (cmax - cmin < parmu * denom) {
              parmu = (cmax - cmin) / denom;
            }
          }
          step = Step::Iterate;
          break;
        }
        trace.termination = Termination::RhoConverged;
        step = Step::Finish;
        break;
      }

      case Step::Finish:
        break;
    }
  }

  trace.evaluations_used = nfvals;
  trace.final_params = std::move(best_x);
  trace.final_value = best_f;
  trace.final_max_violation = best_res;
  return trace;
}

inline OptimizationTrace minimize(const Objective& objective, std::span<const double> initial,
                                  const OptimizerConfig& config,
                                  const ProgressCallback& callback = {}) {
  return minimize_constrained(objective, Constraints{}, 0, initial, config, callback);
}

}  // namespace phishvqc
