#pragma once

#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace linkopt {

/// Inner solver failed to reach the requested level precision.  Distinct from
/// a line-search failure: the loops convert it into a flagged trajectory
/// instead of refining further.
class InnerNonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArmijoParams {
  double sigma = 0.1;    // sufficient-decrease fraction, in (0,1)
  double alpha0 = 1.0;   // initial step, rescaled once by 1/||g||_inf at x0
  double beta = 0.5;     // backtracking factor, in (0,1)
  int hard_cap = 60;     // trial cap for the exact line search
  int trial_cap_base = 10;
  int trial_cap_slope = 1;  // approximate search allows trial_cap_base + slope*n trials at level n

  int trial_cap(int level) const { return trial_cap_base + trial_cap_slope * level; }
};

struct MasterParams {
  double omega = 0.5;        // decrease-test exponent, in (0,1)
  double sigma_prime = 0.01; // decrease-test scale, in (0,1)
  double delta0 = 0.5;       // Delta(n) = delta0^n, delta0 in (0,1)
  int n_start = 4;
  long max_outer = 100000;
  int max_level = 200;
  double delta_tol = 1e-6;  // terminate only once Delta(n) is below this
  double stat_tol = 1e-6;   // ... and the projected-gradient displacement is below this
  double delta_floor = 1e-14;  // never refine past the round-off plateau
  double target_confirm_delta = 1e-10;  // precision of the one-off target confirmation

  double delta(int n) const;
};

/// One inner evaluation of the approximate objective at precision delta.
/// J and grad are in the optimizer's internal minimization framing.
struct Evaluation {
  double J = 0.0;
  std::vector<double> grad;  // restricted to the facultative coordinates
  long inner_steps = 0;
  bool inner_converged = true;
};

/// Seam between the generic loop and a concrete ranking problem.  evaluate()
/// must hot-start its inner iterations from the previous call's state; for
/// fixed x the values converge to the exact objective and gradient as
/// delta -> 0.  The feasible set is always the box [0,1]^dim.
class ProblemAdapter {
 public:
  virtual ~ProblemAdapter() = default;
  virtual std::size_t dim() const = 0;
  virtual Evaluation evaluate(std::span<const double> x, double delta) = 0;
  virtual void reset_hot_start() = 0;
  virtual bool maximizing() const { return false; }  // internal J = -objective when true

  long assemblies() const { return assemblies_; }
  long inner_total() const { return inner_total_; }

 protected:
  long assemblies_ = 0;
  long inner_total_ = 0;
};

struct ArmijoResult {
  bool failed = false;
  std::vector<double> x_next;
  double alpha = 0.0;
  int m = 0;
  double J_next = 0.0;
};

/// Armijo line search along the projected arc with exact J and grad J
/// (oracle problems only): x+ = P(x - beta^m alpha0 grad J), m the first
/// trial with J(x+) - J(x) <= -sigma ||x - x+||_2^2 / (beta^m alpha0).
/// The box bounds default to the weight box [0,1].
ArmijoResult armijo_exact_step(std::span<const double> x,
                               const std::function<double(std::span<const double>)>& J,
                               const std::function<std::vector<double>(std::span<const double>)>& gradJ,
                               const ArmijoParams& params, double lo = 0.0, double hi = 1.0);

/// Approximate Armijo search at level n: same test with J_n, g_n at precision
/// Delta(n); every trial point costs one fresh hot-started evaluation.  At
/// most trial_cap(n) trials; exhausting them is a failure marker, not an error.
struct ApproxArmijoResult {
  bool failed = false;
  std::vector<double> x_next;
  double alpha = 0.0;
  int m = 0;
  Evaluation eval_next;  // evaluation at the accepted point (valid when !failed)
};
ApproxArmijoResult approx_armijo(std::span<const double> x, const Evaluation& at_x, int level,
                                 double alpha0_eff, ProblemAdapter& adapter,
                                 const MasterParams& mp, const ArmijoParams& ap);

struct StepRecord {
  long iter = 0;
  int level = 0;
  double delta = 0.0;
  double J_before = 0.0;  // J_n at x_i   (internal framing)
  double J_after = 0.0;   // J_n at x_{i+1}
  double decrease_threshold = 0.0;  // -sigma' Delta(n)^omega
  double alpha = 0.0;
  int m = 0;
  long inner_steps = 0;  // inner iterations spent on this outer step (all trials)
  double wall_ms = 0.0;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  std::vector<double> x_final;
  double J_final = 0.0;  // internal framing
  bool converged = false;
  std::string status;
  int final_level = 0;
  double final_delta = 0.0;
  double final_displacement = 0.0;  // ||x - P(x - alpha0_eff g_n(x))||_inf at exit
  double alpha0_eff = 0.0;
  long total_inner = 0;
  long total_assemblies = 0;
};

/// Master loop: runs the approximate Armijo search at level n, accepting a
/// step only when J_n decreases by at least sigma' Delta(n)^omega; otherwise
/// the level is refined (n is nondecreasing along the run).  Terminates once
/// Delta(n) < delta_tol and the level-n projected-gradient displacement
/// ||x - P(x - alpha0 g_n(x))||_inf is below stat_tol, or at the outer cap.
/// The displacement uses the nominal alpha0; the 1/||g||_inf rescale applies
/// to the line-search steps only.
/// When stop_below_J is finite the run also ends as soon as an accepted step
/// reaches J <= stop_below_J (cost-to-target benchmarking).
Trajectory master_optimize(std::span<const double> x0, ProblemAdapter& adapter,
                           const MasterParams& mp, const ArmijoParams& ap,
                           double stop_below_J = std::numeric_limits<double>::quiet_NaN());

/// Baseline: plain projected gradient where every evaluation runs the inner
/// iterations to the fixed tolerance eps (hot-started).  Stops when the
/// projected-gradient displacement drops below stat_tol (default: eps).
/// When stop_below_J is finite the run also ends as soon as an accepted step
/// reaches J <= stop_below_J (benchmark use).
Trajectory fixed_precision_gradient(std::span<const double> x0, ProblemAdapter& adapter,
                                    double eps, const ArmijoParams& ap, double stat_tol = -1.0,
                                    long max_outer = 100000,
                                    double stop_below_J = std::numeric_limits<double>::quiet_NaN());

}  // namespace linkopt
