#ifndef POROFRAC_SOLVER_HPP
#define POROFRAC_SOLVER_HPP

#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "porofrac/model.hpp"

namespace porofrac {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Direct sparse LU with an accuracy guarantee: Ruiz equilibration,
/// then iterative refinement until ||Ax-b||/||b|| < 1e-10 (or the
/// double-precision floor eps*|A||x| for right-hand sides that are
/// small against A*x). Errors on singular matrices and refinement
/// breakdown.
Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& A,
                             const Eigen::VectorXd& b);

/// Same contract as sparse_solve, but reuses the symbolic analysis
/// across calls with an identical sparsity pattern (the Newton and
/// phase-field systems of one model never change pattern).
class CachedSparseSolver {
 public:
  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& A,
                        const Eigen::VectorXd& b);

 private:
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>
      lu_;
  bool analyzed_ = false;
};

/// Per-run scratch: one cached solver for the monolithic block and one
/// for the phase-field system.
struct SolverWorkspace {
  CachedSparseSolver up;
  CachedSparseSolver d;
};

struct TimeStepping {
  double dt = 0.1;
  double T_end = 1.0;
  double tol_newton = 1e-8;  // relative
  int max_newton = 25;
  double tol_stag = 1e-5;    // absolute, on |E_u| + |E_p|
  int max_stag = 50;
};

struct NewtonReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
  bool converged = false;
};

/// Monolithic Newton on the (u,p) block at frozen d. Throws
/// SolverError on non-convergence or solver breakdown.
NewtonReport newton_up(const FemModel& model, FieldState& state, double dt,
                       const TimeStepping& ts,
                       SolverWorkspace* workspace = nullptr);

struct StaggerReport {
  int passes = 0;
  int newton_total = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

/// One time step of the staggered scheme: alternate the monolithic
/// (u,p) solve (at the previous phase-field iterate) with a history
/// update and the linear d solve, until |E_u| + |E_p| <= tol_stag.
/// d is clamped to [0,1] after every pass. Throws SolverError when
/// max_stag is exceeded.
StaggerReport staggered_step(const FemModel& model, FieldState& state,
                             double dt, const TimeStepping& ts,
                             SolverWorkspace* workspace = nullptr);

enum class Termination { TimeElapsed, CrackReachedBoundary, Diverged };

const char* termination_name(Termination t);

/// P(t) = max over nodes of p, one entry per completed time step.
struct PressureCurve {
  std::vector<double> times;
  std::vector<double> values;
  Termination reason = Termination::TimeElapsed;
};

struct ForwardResult {
  PressureCurve curve;
  int steps_completed = 0;
  int newton_total = 0;
  int stagger_total = 0;
  std::string failure_detail;  // set when reason == Diverged
};

/// Called after each completed step (VTK dumps, diagnostics).
using StepCallback =
    std::function<void(int step, double t, const FieldState&)>;

/// March from t=0 to T_end, recording the maximum pressure each step.
/// Terminates early when the phase field reaches the boundary (min d
/// within two element layers of the boundary drops below 0.1) or when
/// a step fails.
ForwardResult time_march(const FemModel& model, FieldState& state,
                         const TimeStepping& ts,
                         const StepCallback& on_step = {});

}  // namespace porofrac

#endif
