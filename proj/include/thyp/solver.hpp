#pragma once

#include "thyp/spectral.hpp"
#include "thyp/symbol.hpp"

#include <optional>
#include <string>
#include <vector>

namespace thyp {

struct SolveConfig {
    double s = 2.0;               ///< Sobolev index, must exceed N/2 + 1
    double T_request = 1.0;       ///< signed length of the requested interval
    double dt_cfl = 0.4;          ///< CFL safety factor
    double dt_max = 0.01;         ///< cap on the step when wave speeds are small
    double fixed_dt = 0.0;        ///< if > 0, overrides the CFL step
    double picard_tol = 1e-10;    ///< stop when ‖u_n - u_{n-1}‖_{C(I;H⁰)} ≤ tol
    int picard_max = 30;
    int T_halvings_max = 12;      ///< smallest window is |T_request| / 2^max
    int energy_stride = 1;        ///< steps between energy evaluations (0: none)
    double margin_floor = 1e-3;
    double blowup_abs = 1e6;      ///< 𝔹-norm proxy sentinel
    double blowup_factor = 10.0;  ///< growth sentinel ...
    double blowup_window = 0.01;  ///< ... within this fraction of |T|
    double resolution_tol = 1e-6; ///< tail fraction that marks loss of resolution
    double seed_perturbation = 0.0;

    /// Throws ConfigError on s ≤ N/2 + 1 or non-positive tolerances.
    void validate(int N) const;
};

/// Snapshots with their time derivatives; interpolation is cubic Hermite.
struct Trajectory {
    std::vector<double> times;
    std::vector<TorusField> states;
    std::vector<TorusField> rates;

    std::size_t size() const { return times.size(); }
    const TorusField& back() const { return states.back(); }
    TorusField at(double t) const;
    /// Time-independent trajectory u(t) ≡ u.
    static Trajectory constant(double t, const TorusField& u);
};

struct IterateRecord {
    int window = 0;
    int n = 0;
    double sup_norm_s = 0.0;      ///< sup_t ‖u_n(t)‖_s
    double sup_rate_norm = 0.0;   ///< sup_t ‖∂_t u_n(t)‖_{s-1}
    double diff_prev = 0.0;       ///< ‖u_n - u_{n-1}‖_{C(I;H⁰)}
    double min_margin = 0.0;
    double t_begin = 0.0, t_end = 0.0;
};

struct IterateHistory {
    std::vector<IterateRecord> records;
};

enum class ContinuationKind { ReachedHorizon, MarginVanishing, NormBlowup };
const char* to_string(ContinuationKind kind);

struct ContinuationStatus {
    ContinuationKind kind = ContinuationKind::ReachedHorizon;
    double t = 0.0;      ///< evidence time
    double value = 0.0;  ///< min margin or 𝔹-norm proxy at detection
    std::string detail;
};

struct EnergySample {
    double t = 0.0;
    double energy = 0.0;   ///< (N_s u, u)
    double sobolev = 0.0;  ///< ‖u‖_s
    double margin = 0.0;
    double bnorm = 0.0;
    double tail = 0.0;
};

struct SolveOutcome {
    Trajectory trajectory;
    std::vector<EnergySample> energies;
    IterateHistory history;
    bool converged = false;
    ContinuationStatus status;
    double T_actual = 0.0;
    bool resolution_lost = false;

    bool halted() const { return status.kind != ContinuationKind::ReachedHorizon; }
};

/// -A^i(t,x,v) ∂_i u + R(t,x,v), dealiased.
TorusField linear_rhs(const SystemDef& sys, const TorusField& v, const TorusField& u, double t);

/// Time grid from t0 to t1 with step dt; the last step is shortened.
std::vector<double> time_grid(double t0, double t1, double dt);

/// Step size from the CFL rule along a frozen trajectory.
double cfl_step(const SystemDef& sys, const Trajectory& v_traj, const SolveConfig& cfg);

/// Classic RK4 for ∂_t u = linear_rhs(v(t), u) over the given times.
Trajectory evolve_on_grid(const SystemDef& sys, const Trajectory& v_traj, const TorusField& u0,
                          const std::vector<double>& times);
Trajectory evolve_linear(const SystemDef& sys, const Trajectory& v_traj, const TorusField& u0,
                         double t0, double t1, const SolveConfig& cfg);

SolveOutcome picard_solve(const SystemDef& sys, const TorusField& u0, const SolveConfig& cfg,
                          double t_start = 0.0);

/// max over shared snapshot times of ‖a(t) - b(t)‖₀.
double difference_norm(const Trajectory& a, const Trajectory& b);

/// Pointwise diagnostics of one accepted step.
struct StepObservation {
    double t = 0.0;
    double min_margin = 0.0;
    double max_state = 0.0;
    double max_gradient = 0.0;
    double max_rate = 0.0;
    double bnorm = 0.0;  ///< max over grid of |u| + |∇u| + |∂_t u|
    double tail = 0.0;
};

StepObservation observe_step(const SystemDef& sys, const TorusField& u, const TorusField& rate,
                             double t, double s);

/// Runtime check of the continuation trichotomy.
class ContinuationMonitor {
public:
    ContinuationMonitor(const SolveConfig& cfg, double t_start);

    /// Returns a halting status, or nothing while the solve may continue.
    std::optional<ContinuationStatus> observe(const StepObservation& obs);
    ContinuationStatus reached(double t) const;
    bool resolution_lost() const { return resolution_lost_; }
    const std::vector<StepObservation>& history() const { return history_; }

private:
    std::optional<double> predict_blowup() const;

    SolveConfig cfg_;
    double t_start_;
    double dir_;
    bool resolution_lost_ = false;
    std::vector<StepObservation> history_;
};

struct EnergyReport {
    double a = 1.0;
    double b = 0.0;
    double max_slack = 0.0;  ///< max relative gap between envelope and data
    std::size_t samples = 0;
};

/// Smallest envelope E(t) ≤ a e^{bt} (E(0) + bt) of E = ‖u(t)‖_s², b ≥ 0.
EnergyReport verify_energy_growth(const SolveOutcome& outcome);

/// Fixed smooth perturbation direction with ‖w‖_s = 1.
TorusField smooth_unit_profile(const TorusGrid& grid, int m, double s);

struct DependenceRow {
    double delta = 0.0;
    double difference = 0.0;
};

struct DependenceTable {
    std::vector<DependenceRow> rows;
    double order = 0.0;  ///< log-log slope of difference against δ
};

DependenceTable continuous_dependence_probe(const SystemDef& sys, const TorusField& u0,
                                            const std::vector<double>& deltas,
                                            const SolveConfig& cfg);

}  // namespace thyp
