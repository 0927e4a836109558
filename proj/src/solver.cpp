#include "thyp/solver.hpp"

#include "thyp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace thyp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec point_vec(const TorusGrid& g, std::size_t p) { return g.point(p); }

std::vector<double> as_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

double min_margin(const SystemDef& sys, const TorusField& u) {
    double m = kInf;
    for (std::size_t p = 0; p < u.points(); ++p) m = std::min(m, sys.domain.margin(u.state(p)));
    return m;
}

// Largest snapshot index stride keeping at most `cap` samples.
std::size_t stride_for(std::size_t n, std::size_t cap) { return std::max<std::size_t>(1, n / cap); }

double max_wave_speed(const SystemDef& sys, const Trajectory& v) {
    double lam = 0.0;
    const std::size_t stride = stride_for(v.size(), 8);
    for (std::size_t k = 0; k < v.size(); k += stride) {
        const TorusField& f = v.states[k];
        for (std::size_t p = 0; p < f.points(); ++p) {
            lam = std::max(lam, spectral_radius_bound(sys, v.times[k], point_vec(f.grid(), p),
                                                      f.state(p)));
        }
    }
    const TorusField& f = v.states.back();
    for (std::size_t p = 0; p < f.points(); ++p) {
        lam = std::max(lam, spectral_radius_bound(sys, v.times.back(), point_vec(f.grid(), p),
                                                  f.state(p)));
    }
    return lam;
}

// max_t ‖a(t) - b.at(t)‖₀ over the times of a.
double difference_on_times(const Trajectory& a, const Trajectory& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        d = std::max(d, l2_norm(a.states[k] - b.at(a.times[k])));
    }
    return d;
}

struct WindowResult {
    bool converged = false;
    bool left_domain = false;
    bool non_finite = false;
    std::string reason;
    Trajectory trajectory;
};

WindowResult run_window(const SystemDef& sys, const TorusField& start, double t0, double t1,
                        const SolveConfig& cfg, int window, IterateHistory& history) {
    WindowResult res;
    TorusField seed_state = start;
    if (cfg.seed_perturbation != 0.0) {
        seed_state.axpy(cfg.seed_perturbation,
                        smooth_unit_profile(start.grid(), start.components(), cfg.s));
    }
    Trajectory prev = Trajectory::constant(t0, seed_state);
    double dt = cfl_step(sys, prev, cfg);
    std::vector<double> times = time_grid(t0, t1, dt);

    double prev_diff = kInf;
    int growth = 0;
    for (int n = 1; n <= cfg.picard_max; ++n) {
        Trajectory cur;
        try {
            cur = evolve_on_grid(sys, prev, start, times);
        } catch (const StateOutsideDomain& e) {
            res.left_domain = true;
            res.reason = e.what();
            return res;
        } catch (const NonFinite& e) {
            res.non_finite = true;
            res.reason = e.what();
            return res;
        }
        const double diff = difference_on_times(cur, prev);

        IterateRecord rec;
        rec.window = window;
        rec.n = n;
        rec.diff_prev = diff;
        rec.t_begin = t0;
        rec.t_end = t1;
        rec.min_margin = kInf;
        for (std::size_t k = 0; k < cur.size(); ++k) {
            rec.sup_norm_s = std::max(rec.sup_norm_s, sobolev_norm(cur.states[k], cfg.s));
            rec.sup_rate_norm =
                std::max(rec.sup_rate_norm, sobolev_norm(cur.rates[k], cfg.s - 1.0));
            rec.min_margin = std::min(rec.min_margin, min_margin(sys, cur.states[k]));
        }
        history.records.push_back(rec);

        if (diff <= cfg.picard_tol) {
            res.converged = true;
            res.trajectory = std::move(cur);
            return res;
        }
        growth = diff > prev_diff ? growth + 1 : 0;
        if (growth >= 3) {
            res.reason = "Picard differences grew for 3 consecutive iterates";
            return res;
        }
        prev_diff = diff;
        if (cfg.fixed_dt <= 0.0) {
            // regrid when the new iterate carries faster waves than the grid allows
            const double dt_new = cfl_step(sys, cur, cfg);
            if (dt_new < 0.8 * dt) {
                dt = dt_new;
                times = time_grid(t0, t1, dt);
            }
        }
        prev = std::move(cur);
    }
    res.reason = "Picard iteration cap reached";
    return res;
}

double linear_fit_root(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den <= 0.0) return kInf;
    const double slope = (n * sxy - sx * sy) / den;
    const double icpt = (sy - slope * sx) / n;
    if (!(slope < 0.0)) return kInf;
    return -icpt / slope;
}

}  // namespace

// ---------------------------------------------------------------- config

void SolveConfig::validate(int N) const {
    auto fail = [](const std::string& msg) { throw ConfigError("solve config: " + msg); };
    if (!(s > 0.5 * N + 1.0)) {
        std::ostringstream os;
        os << "Sobolev index s = " << s << " must exceed N/2 + 1 = " << 0.5 * N + 1.0;
        fail(os.str());
    }
    if (!(T_request != 0.0) || !std::isfinite(T_request)) fail("T must be finite and nonzero");
    if (!(dt_cfl > 0.0) || !(dt_max > 0.0) || fixed_dt < 0.0) fail("step controls must be positive");
    if (!(picard_tol > 0.0) || picard_max < 1) fail("Picard tolerance and cap must be positive");
    if (T_halvings_max < 0) fail("halvings cap must be non-negative");
    if (energy_stride < 0) fail("energy stride must be non-negative");
    if (!(margin_floor > 0.0)) fail("margin floor must be positive");
    if (!(blowup_abs > 0.0) || !(blowup_factor > 1.0) || !(blowup_window > 0.0)) {
        fail("blow-up sentinels must be positive");
    }
    if (!(resolution_tol > 0.0)) fail("resolution tolerance must be positive");
}

const char* to_string(ContinuationKind kind) {
    switch (kind) {
        case ContinuationKind::ReachedHorizon: return "ReachedHorizon";
        case ContinuationKind::MarginVanishing: return "MarginVanishing";
        case ContinuationKind::NormBlowup: return "NormBlowup";
    }
    return "unknown";
}

// ---------------------------------------------------------------- trajectory

Trajectory Trajectory::constant(double t, const TorusField& u) {
    Trajectory tr;
    tr.times = {t};
    tr.states = {u};
    tr.rates = {TorusField(u.grid(), u.components())};
    return tr;
}

TorusField Trajectory::at(double t) const {
    if (times.size() == 1) return states.front();
    const bool forward = times.back() > times.front();
    // index k with t in [times[k], times[k+1]] along the direction of travel
    std::size_t lo = 0, hi = times.size() - 1;
    auto before = [&](double a, double b) { return forward ? a < b : a > b; };
    if (!before(times.front(), t)) return states.front();
    if (!before(t, times.back())) return states.back();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (before(t, times[mid])) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if (t == times[lo]) return states[lo];
    if (t == times[hi]) return states[hi];
    const double h = times[hi] - times[lo];
    const double x = (t - times[lo]) / h;
    const double x2 = x * x, x3 = x2 * x;
    const double h00 = 2 * x3 - 3 * x2 + 1, h10 = x3 - 2 * x2 + x;
    const double h01 = -2 * x3 + 3 * x2, h11 = x3 - x2;
    TorusField out = h00 * states[lo];
    out.axpy(h10 * h, rates[lo]);
    out.axpy(h01, states[hi]);
    out.axpy(h11 * h, rates[hi]);
    return out;
}

// ---------------------------------------------------------------- linear evolution

TorusField linear_rhs(const SystemDef& sys, const TorusField& v, const TorusField& u, double t) {
    const TorusGrid& g = u.grid();
    if (!(v.grid() == g)) throw GridMismatch("linear_rhs: v and u on different grids");
    std::vector<TorusField> grads;
    grads.reserve(static_cast<std::size_t>(sys.N));
    for (int i = 0; i < sys.N; ++i) grads.push_back(spectral_derivative(u, i));

    TorusField out(g, sys.m);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Vec z = v.state(p);
        const Vec x = g.point(p);
        if (!sys.domain.contains(z)) {
            std::string what = "frozen coefficient state left the admissible region";
            std::string constraint;
            if (sys.domain.violation) {
                if (auto name = sys.domain.violation(z)) {
                    constraint = *name;
                    what += " (" + *name + ")";
                }
            }
            throw StateOutsideDomain(what, as_std(x), constraint);
        }
        Vec acc = sys.source(t, x, z);
        for (int i = 0; i < sys.N; ++i) {
            acc -= sys.coeff(t, x, z, i) * grads[static_cast<std::size_t>(i)].state(p);
        }
        out.set_state(p, acc);
    }
    return dealias(out);
}

std::vector<double> time_grid(double t0, double t1, double dt) {
    const double span = std::abs(t1 - t0);
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    std::vector<double> times{t0};
    const auto steps = static_cast<long>(std::floor(span / dt));
    for (long k = 1; k <= steps; ++k) {
        const double t = t0 + dir * static_cast<double>(k) * dt;
        if (std::abs(t1 - t) <= 1e-12 * std::max(1.0, span)) break;
        times.push_back(t);
    }
    times.push_back(t1);
    return times;
}

double cfl_step(const SystemDef& sys, const Trajectory& v_traj, const SolveConfig& cfg) {
    if (cfg.fixed_dt > 0.0) return cfg.fixed_dt;
    const double lam = max_wave_speed(sys, v_traj);
    const double h = v_traj.states.front().grid().spacing();
    double dt = cfg.dt_max;
    if (lam > 0.0) dt = std::min(dt, cfg.dt_cfl * h / lam);
    return dt;
}

Trajectory evolve_on_grid(const SystemDef& sys, const Trajectory& v_traj, const TorusField& u0,
                          const std::vector<double>& times) {
    Trajectory out;
    out.times = times;
    out.states.reserve(times.size());
    out.rates.reserve(times.size());
    TorusField u = u0;
    TorusField vk = v_traj.at(times.front());
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double t = times[k];
        const double dt = times[k + 1] - t;
        const TorusField vmid = v_traj.at(t + 0.5 * dt);
        TorusField vnext = v_traj.at(t + dt);

        const TorusField k1 = linear_rhs(sys, vk, u, t);
        const TorusField k2 = linear_rhs(sys, vmid, u + (0.5 * dt) * k1, t + 0.5 * dt);
        const TorusField k3 = linear_rhs(sys, vmid, u + (0.5 * dt) * k2, t + 0.5 * dt);
        const TorusField k4 = linear_rhs(sys, vnext, u + dt * k3, t + dt);

        out.states.push_back(u);
        out.rates.push_back(k1);

        u.axpy(dt / 6.0, k1).axpy(dt / 3.0, k2).axpy(dt / 3.0, k3).axpy(dt / 6.0, k4);
        if (!u.finite()) {
            std::ostringstream os;
            os << "non-finite state at t = " << t + dt;
            throw NonFinite(os.str());
        }
        vk = std::move(vnext);
    }
    out.rates.push_back(linear_rhs(sys, vk, u, times.back()));
    out.states.push_back(std::move(u));
    return out;
}

Trajectory evolve_linear(const SystemDef& sys, const Trajectory& v_traj, const TorusField& u0,
                         double t0, double t1, const SolveConfig& cfg) {
    return evolve_on_grid(sys, v_traj, u0, time_grid(t0, t1, cfl_step(sys, v_traj, cfg)));
}

// ---------------------------------------------------------------- monitor

StepObservation observe_step(const SystemDef& sys, const TorusField& u, const TorusField& rate,
                             double t, double) {
    StepObservation obs;
    obs.t = t;
    obs.min_margin = min_margin(sys, u);
    std::vector<TorusField> grads;
    for (int i = 0; i < u.grid().dim(); ++i) grads.push_back(spectral_derivative(u, i));
    for (std::size_t p = 0; p < u.points(); ++p) {
        const double a = u.state(p).norm();
        double g2 = 0.0;
        for (const auto& gi : grads) g2 += gi.state(p).squaredNorm();
        const double g = std::sqrt(g2);
        const double r = rate.state(p).norm();
        obs.max_state = std::max(obs.max_state, a);
        obs.max_gradient = std::max(obs.max_gradient, g);
        obs.max_rate = std::max(obs.max_rate, r);
        obs.bnorm = std::max(obs.bnorm, a + g + r);
    }
    obs.tail = tail_fraction(u, 0.0);
    return obs;
}

ContinuationMonitor::ContinuationMonitor(const SolveConfig& cfg, double t_start)
    : cfg_(cfg), t_start_(t_start), dir_(cfg.T_request >= 0 ? 1.0 : -1.0) {}

std::optional<ContinuationStatus> ContinuationMonitor::observe(const StepObservation& obs) {
    const double T = std::abs(cfg_.T_request);
    const double elapsed = dir_ * (obs.t - t_start_);

    if (obs.min_margin < cfg_.margin_floor) {
        ContinuationStatus st{ContinuationKind::MarginVanishing, obs.t, obs.min_margin,
                              "admissible-region margin fell below the floor"};
        if (!history_.empty() && history_.back().min_margin > obs.min_margin) {
            const auto& prev = history_.back();
            const double frac =
                (prev.min_margin - cfg_.margin_floor) / (prev.min_margin - obs.min_margin);
            st.t = prev.t + frac * (obs.t - prev.t);
        }
        history_.push_back(obs);
        return st;
    }
    if (obs.bnorm > cfg_.blowup_abs) {
        history_.push_back(obs);
        return ContinuationStatus{ContinuationKind::NormBlowup, obs.t, obs.bnorm,
                                  "B-norm proxy exceeded the absolute sentinel"};
    }
    for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
        if (elapsed - dir_ * (it->t - t_start_) > cfg_.blowup_window * T) break;
        if (obs.bnorm > cfg_.blowup_factor * it->bnorm) {
            history_.push_back(obs);
            return ContinuationStatus{ContinuationKind::NormBlowup, obs.t, obs.bnorm,
                                      "B-norm proxy grew past the relative sentinel"};
        }
    }
    history_.push_back(obs);
    if (obs.tail > cfg_.resolution_tol && !resolution_lost_) {
        resolution_lost_ = true;
        if (auto tau = predict_blowup(); tau && *tau <= T) {
            return ContinuationStatus{
                ContinuationKind::NormBlowup, t_start_ + dir_ * *tau, obs.bnorm,
                "grid resolution lost; reciprocal norm growth extrapolates to a blow-up time"};
        }
    }
    return std::nullopt;
}

// Linear extrapolation of 1/q to zero, q ∈ {max|u|, max|∇u|, max|∂_t u|},
// over the second half of the elapsed history. Earliest root wins.
std::optional<double> ContinuationMonitor::predict_blowup() const {
    if (history_.size() < 4) return std::nullopt;
    const double now = dir_ * (history_.back().t - t_start_);
    double best = kInf;
    for (int q = 0; q < 3; ++q) {
        std::vector<double> x, y;
        for (const auto& h : history_) {
            const double tau = dir_ * (h.t - t_start_);
            if (tau < 0.5 * now) continue;
            const double val = q == 0 ? h.max_state : (q == 1 ? h.max_gradient : h.max_rate);
            if (!(val > 0.0)) continue;
            x.push_back(tau);
            y.push_back(1.0 / val);
        }
        if (x.size() < 4) continue;
        const double root = linear_fit_root(x, y);
        if (root >= now) best = std::min(best, root);
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

ContinuationStatus ContinuationMonitor::reached(double t) const {
    ContinuationStatus st;
    st.kind = ContinuationKind::ReachedHorizon;
    st.t = t;
    st.value = history_.empty() ? 0.0 : history_.back().bnorm;
    st.detail = "requested horizon reached";
    return st;
}

// ---------------------------------------------------------------- Picard

SolveOutcome picard_solve(const SystemDef& sys, const TorusField& u0, const SolveConfig& cfg,
                          double t_start) {
    cfg.validate(sys.N);
    if (u0.components() != sys.m || u0.grid().dim() != sys.N) {
        throw GridMismatch("initial datum does not match the system dimensions");
    }
    if (!u0.finite()) throw NonFiniteField("initial datum has non-finite values");
    for (std::size_t p = 0; p < u0.points(); ++p) {
        const Vec z = u0.state(p);
        if (!sys.domain.contains(z)) {
            std::string name = "region";
            if (sys.domain.violation) {
                if (auto v = sys.domain.violation(z)) name = *v;
            }
            throw AdmissibilityViolation("initial datum violates admissibility ('" + name + "')",
                                         name, as_std(u0.grid().point(p)));
        }
    }
    const double margin0 = min_margin(sys, u0);
    if (!(margin0 > cfg.margin_floor)) {
        std::ostringstream os;
        os << "initial datum margin " << margin0 << " does not exceed the floor "
           << cfg.margin_floor;
        throw StateOutsideDomain(os.str());
    }

    SolveOutcome out;
    const double dir = cfg.T_request > 0 ? 1.0 : -1.0;
    const double T = std::abs(cfg.T_request);
    const double horizon = t_start + cfg.T_request;
    const double min_window = T / std::ldexp(1.0, cfg.T_halvings_max);

    ContinuationMonitor monitor(cfg, t_start);
    TorusField u = dealias(u0);
    out.trajectory.times.push_back(t_start);
    out.trajectory.states.push_back(u);
    out.trajectory.rates.push_back(linear_rhs(sys, u, u, t_start));
    monitor.observe(observe_step(sys, u, out.trajectory.rates.back(), t_start, cfg.s));

    double t0 = t_start;
    double window = T;
    int window_index = 0;
    std::optional<ContinuationStatus> halt;
    while (!halt && dir * (horizon - t0) > 1e-12 * std::max(1.0, T)) {
        const double len = std::min(window, dir * (horizon - t0));
        const double t1 = (len == dir * (horizon - t0)) ? horizon : t0 + dir * len;
        WindowResult res = run_window(sys, u, t0, t1, cfg, window_index, out.history);
        if (!res.converged) {
            if (window * 0.5 >= min_window * (1.0 - 1e-12)) {
                window *= 0.5;
                continue;
            }
            if (res.left_domain) {
                halt = ContinuationStatus{ContinuationKind::MarginVanishing, t0,
                                          monitor.history().back().min_margin,
                                          "iterates leave the admissible region on every window "
                                          "down to the minimum length"};
                break;
            }
            if (monitor.resolution_lost() || res.non_finite) {
                halt = ContinuationStatus{ContinuationKind::NormBlowup, t0,
                                          monitor.history().back().bnorm,
                                          "iteration breaks down after loss of resolution"};
                break;
            }
            std::ostringstream os;
            os << "Picard iteration failed at t = " << t0 << " on the minimum window: "
               << res.reason;
            throw NoConvergence(os.str());
        }
        ++window_index;
        Trajectory& w = res.trajectory;
        std::size_t accepted = w.size();
        for (std::size_t k = 1; k < w.size(); ++k) {
            if (auto st = monitor.observe(observe_step(sys, w.states[k], w.rates[k], w.times[k],
                                                       cfg.s))) {
                halt = st;
                accepted = k + 1;
                break;
            }
        }
        for (std::size_t k = 1; k < accepted; ++k) {
            out.trajectory.times.push_back(w.times[k]);
            out.trajectory.states.push_back(std::move(w.states[k]));
            out.trajectory.rates.push_back(std::move(w.rates[k]));
        }
        u = out.trajectory.back();
        t0 = out.trajectory.times.back();
    }

    out.converged = !halt.has_value();
    out.status = halt ? *halt : monitor.reached(t0);
    out.T_actual = dir * (out.trajectory.times.back() - t_start);
    out.resolution_lost = monitor.resolution_lost();

    if (cfg.energy_stride > 0) {
        const auto& tr = out.trajectory;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            if (k % static_cast<std::size_t>(cfg.energy_stride) != 0 && k + 1 != tr.size()) {
                continue;
            }
            const TorusField& s = tr.states[k];
            EnergySample e;
            e.t = tr.times[k];
            e.energy = energy_functional(s, s, sys, cfg.s, e.t);
            e.sobolev = sobolev_norm(s, cfg.s);
            const StepObservation obs = observe_step(sys, s, tr.rates[k], e.t, cfg.s);
            e.margin = obs.min_margin;
            e.bnorm = obs.bnorm;
            e.tail = tail_fraction(s, cfg.s);
            out.energies.push_back(e);
        }
    }
    return out;
}

double difference_norm(const Trajectory& a, const Trajectory& b) {
    if (a.size() == 0 || b.size() == 0) throw GridMismatch("difference_norm: empty trajectory");
    if (!(a.states.front().grid() == b.states.front().grid()) ||
        a.states.front().components() != b.states.front().components()) {
        throw GridMismatch("difference_norm: trajectories live on different grids");
    }
    const double scale = std::max({1.0, std::abs(a.times.front()), std::abs(a.times.back())});
    double d = 0.0;
    std::size_t j = 0;
    bool shared = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t i = j; i < b.size(); ++i) {
            if (std::abs(a.times[k] - b.times[i]) <= 1e-12 * scale) {
                d = std::max(d, l2_norm(a.states[k] - b.states[i]));
                j = i + 1;
                shared = true;
                break;
            }
        }
    }
    if (!shared) throw GridMismatch("difference_norm: no shared snapshot times");
    return d;
}

// ---------------------------------------------------------------- energy envelope

EnergyReport verify_energy_growth(const SolveOutcome& outcome) {
    const auto& es = outcome.energies;
    if (es.size() < 3) throw InsufficientSamples("energy fit needs at least 3 samples");
    std::vector<double> t, E;
    for (const auto& e : es) {
        t.push_back(std::abs(e.t - es.front().t));
        E.push_back(e.sobolev * e.sobolev);
    }
    const double E0 = E.front();

    auto shape = [&](double b, double tk) { return std::exp(b * tk) * (E0 + b * tk); };
    auto a_of = [&](double b) {
        double a = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double env = shape(b, t[k]);
            if (env > 0.0) a = std::max(a, E[k] / env);
        }
        return a;
    };
    // area under the envelope (trapezoid on the recorded times)
    auto cost = [&](double b) {
        const double a = a_of(b);
        double area = 0.0;
        for (std::size_t k = 1; k < t.size(); ++k) {
            area += 0.5 * (t[k] - t[k - 1]) * (shape(b, t[k]) + shape(b, t[k - 1]));
        }
        return a * area;
    };

    EnergyReport rep;
    rep.samples = es.size();
    if (E0 == 0.0 && std::all_of(E.begin(), E.end(), [](double v) { return v == 0.0; })) {
        return rep;
    }
    double best_b = 0.0;
    double best = cost(0.0);
    std::vector<double> grid{0.0};
    for (double e = -12.0; e <= 3.0; e += 0.25) grid.push_back(std::pow(10.0, e));
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double c = cost(grid[i]);
        if (c < best) {
            best = c;
            best_b = grid[i];
            best_i = i;
        }
    }
    if (best_i > 0) {
        double lo = grid[best_i - 1];
        double hi = best_i + 1 < grid.size() ? grid[best_i + 1] : grid[best_i];
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 100; ++it) {
            const double m1 = hi - phi * (hi - lo);
            const double m2 = lo + phi * (hi - lo);
            if (cost(m1) < cost(m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        const double mid = 0.5 * (lo + hi);
        if (cost(mid) < best) best_b = mid;
    }
    rep.b = best_b;
    rep.a = a_of(best_b);
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double env = rep.a * shape(rep.b, t[k]);
        if (env > 0.0) rep.max_slack = std::max(rep.max_slack, (env - E[k]) / env);
    }
    return rep;
}

// ---------------------------------------------------------------- dependence probe

TorusField smooth_unit_profile(const TorusGrid& grid, int m, double s) {
    TorusField w(grid, m);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Vec x = grid.point(p);
        const double sum = x.sum();
        for (int c = 0; c < m; ++c) {
            w(c, p) = std::cos(sum + 0.7 * c) + 0.5 * std::sin(2.0 * x[0] - 0.3 * c);
        }
    }
    w *= 1.0 / sobolev_norm(w, s);
    return w;
}

DependenceTable continuous_dependence_probe(const SystemDef& sys, const TorusField& u0,
                                            const std::vector<double>& deltas,
                                            const SolveConfig& cfg) {
    SolveConfig base_cfg = cfg;
    base_cfg.energy_stride = 0;
    const SolveOutcome base = picard_solve(sys, u0, base_cfg);
    if (!base.converged) {
        throw NoConvergence(std::string("dependence probe: base solve halted with ") +
                            to_string(base.status.kind));
    }
    // pin the step so perturbed runs share the base snapshot times
    if (base_cfg.fixed_dt <= 0.0 && base.trajectory.size() > 1) {
        base_cfg.fixed_dt = std::abs(base.trajectory.times[1] - base.trajectory.times[0]);
    }
    const SolveOutcome pinned = picard_solve(sys, u0, base_cfg);
    const TorusField w = smooth_unit_profile(u0.grid(), u0.components(), cfg.s);

    DependenceTable table;
    std::vector<double> lx, ly;
    for (double delta : deltas) {
        TorusField ud = u0;
        ud.axpy(delta, w);
        if (sys.project) {
            for (std::size_t p = 0; p < ud.points(); ++p) {
                Vec z = ud.state(p);
                sys.project(z);
                ud.set_state(p, z);
            }
        }
        const SolveOutcome run = picard_solve(sys, ud, base_cfg);
        const double d = difference_norm(run.trajectory, pinned.trajectory);
        table.rows.push_back({delta, d});
        if (delta > 0.0 && d > 0.0) {
            lx.push_back(std::log(delta));
            ly.push_back(std::log(d));
        }
    }
    if (lx.size() >= 2) {
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        table.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return table;
}

}  // namespace thyp
