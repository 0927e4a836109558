#include "thyp/errors.hpp"
#include "thyp/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace thyp::models {

namespace {

const Eigen::Vector4d kMetricDiag(-1.0, 1.0, 1.0, 1.0);

Eigen::Vector4d velocity(const Vec& state) { return state.head<4>(); }

// 𝖯^{αβ} = η^{αβ} + u^α u^β
Eigen::Matrix4d orthogonal_projector(const Eigen::Vector4d& u) {
    Eigen::Matrix4d proj = u * u.transpose();
    proj.diagonal() += kMetricDiag;
    return proj;
}

double minkowski_square(const Eigen::Vector4d& u) {
    return u.cwiseProduct(kMetricDiag).dot(u);
}

// Evolution form: Â^j = (A^0)^{-1} A^j and R̂ = (A^0)^{-1} R.
struct EvolutionForm {
    Eigen::PartialPivLU<Mat> lu;

    explicit EvolutionForm(const Mat& A0) : lu(A0) {
        const double rc = lu.rcond();
        if (!(rc > 1e-13)) {
            throw SingularTimeMatrix("time matrix A^0 is singular (rcond = " +
                                     std::to_string(rc) + ")");
        }
    }
};

Constraint normalization(double slack) {
    Constraint c{"normalization", true, [slack](const Vec& z) {
                     return slack - std::abs(minkowski_square(velocity(z)) + 1.0);
                 }};
    // ∇(u·u) = 2 η u
    c.grad_norm = [](const Vec& z) { return 2.0 * velocity(z).norm(); };
    return c;
}

Constraint future_directed() {
    return {"u0_positive", true, [](const Vec& z) { return z[0]; }};
}

}  // namespace

Vec four_velocity(const std::array<double, 3>& v) {
    const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    const double gamma = 1.0 / std::sqrt(1.0 - v2);
    Vec u(4);
    u << gamma, gamma * v[0], gamma * v[1], gamma * v[2];
    return u;
}

Vec euler_state(const std::array<double, 3>& v, double rho, double s) {
    Vec z(6);
    z << four_velocity(v), rho, s;
    return z;
}

Vec bulk_state(const std::array<double, 3>& v, double rho, double n, double Pi) {
    Vec z(7);
    z << four_velocity(v), rho, n, Pi;
    return z;
}

void normalize_velocity(Vec& state) {
    state[0] = std::sqrt(1.0 + state.segment<3>(1).squaredNorm());
}

std::array<Mat, 4> euler_matrices(const EquationOfState& eos, const Vec& state) {
    const Eigen::Vector4d u = velocity(state);
    const double rho = state[4], s = state[5];
    const double h = eos.p(rho, s) + rho;
    const double cs2 = eos.dp_drho(rho, s);
    const double dps = eos.dp_daux(rho, s);
    const Eigen::Matrix4d proj = orthogonal_projector(u);

    std::array<Mat, 4> A;
    for (int a = 0; a < 4; ++a) {
        Mat M = Mat::Zero(6, 6);
        M.topLeftCorner(4, 4) = h * u[a] * Mat::Identity(4, 4);
        M.block(0, 4, 4, 1) = proj.col(a) * cs2;
        M.block(0, 5, 4, 1) = proj.col(a) * dps;
        M(4, a) = h;
        M(4, 4) = u[a];
        M(5, 5) = u[a];
        A[static_cast<std::size_t>(a)] = std::move(M);
    }
    return A;
}

// Momentum rows: 𝖯^β_ν ∂_μ T^{μν}; energy row: -u_ν ∂_μ T^{μν}; then particle
// number and the relaxation equation for Π.
std::array<Mat, 4> bulk_matrices(const EquationOfState& eos, const Coefficient& tau,
                                 const Coefficient& zeta, const Vec& state) {
    const Eigen::Vector4d u = velocity(state);
    const double rho = state[4], n = state[5], Pi = state[6];
    const double h = rho + eos.p(rho, n) + Pi;
    const double p_rho = eos.dp_drho(rho, n);
    const double p_n = eos.dp_daux(rho, n);
    const double t = tau(rho, n, Pi);
    const double z = zeta(rho, n, Pi);
    const Eigen::Matrix4d proj = orthogonal_projector(u);

    std::array<Mat, 4> A;
    for (int a = 0; a < 4; ++a) {
        Mat M = Mat::Zero(7, 7);
        M.topLeftCorner(4, 4) = h * u[a] * Mat::Identity(4, 4);
        M.block(0, 4, 4, 1) = proj.col(a) * p_rho;
        M.block(0, 5, 4, 1) = proj.col(a) * p_n;
        M.block(0, 6, 4, 1) = proj.col(a);
        M(4, a) = h;
        M(4, 4) = u[a];
        M(5, a) = n;
        M(5, 5) = u[a];
        M(6, a) = z;
        M(6, 6) = t * u[a];
        A[static_cast<std::size_t>(a)] = std::move(M);
    }
    return A;
}

std::vector<Constraint> euler_constraints(const EquationOfState& eos, double slack) {
    return {
        normalization(slack),
        future_directed(),
        {"rho_positive", true, [](const Vec& z) { return z[4]; }},
        {"enthalpy_positive", true, [eos](const Vec& z) { return eos.p(z[4], z[5]) + z[4]; }},
        {"dp_drho_positive", true, [eos](const Vec& z) { return eos.dp_drho(z[4], z[5]); }},
        {"causality", false, [eos](const Vec& z) { return 1.0 - eos.dp_drho(z[4], z[5]); }},
    };
}

std::vector<Constraint> bulk_constraints(const EquationOfState& eos, const Coefficient& tau,
                                         const Coefficient& zeta, double slack) {
    auto h = [eos](const Vec& z) { return z[4] + eos.p(z[4], z[5]) + z[6]; };
    return {
        normalization(slack),
        future_directed(),
        {"rho_positive", true, [](const Vec& z) { return z[4]; }},
        {"enthalpy_positive", true, h},
        {"n_positive", true, [](const Vec& z) { return z[5]; }},
        {"dp_drho_positive", true, [eos](const Vec& z) { return eos.dp_drho(z[4], z[5]); }},
        {"dp_dn_positive", true, [eos](const Vec& z) { return eos.dp_daux(z[4], z[5]); }},
        {"tau_positive", true, [tau](const Vec& z) { return tau(z[4], z[5], z[6]); }},
        {"zeta_positive", true, [zeta](const Vec& z) { return zeta(z[4], z[5], z[6]); }},
        {"effective_sound_speed", false,
         [eos, h](const Vec& z) {
             return eos.dp_drho(z[4], z[5]) + z[5] / h(z) * eos.dp_daux(z[4], z[5]);
         }},
        {"causality", false,
         [eos, tau, zeta, h](const Vec& z) {
             const double ratio = zeta(z[4], z[5], z[6]) / tau(z[4], z[5], z[6]);
             return 1.0 - eos.dp_drho(z[4], z[5]) -
                    (z[5] * eos.dp_daux(z[4], z[5]) + ratio) / h(z);
         }},
    };
}

AdmissibleRegion region_from_constraints(std::vector<Constraint> cs) {
    auto first_violation = [cs](const Vec& z) -> std::optional<std::string> {
        for (const auto& c : cs) {
            const double v = c.g(z);
            const bool ok = c.strict ? v > 0.0 : v >= 0.0;
            if (!ok) return c.name;
        }
        return std::nullopt;
    };
    AdmissibleRegion r;
    r.violation = first_violation;
    r.contains = [first_violation](const Vec& z) { return !first_violation(z).has_value(); };
    r.margin = [cs, first_violation](const Vec& z) {
        if (first_violation(z)) return 0.0;
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& c : cs) {
            const double v = c.g(z);
            double grad = 0.0;
            if (c.grad_norm) {
                grad = c.grad_norm(z);
            } else {
                Vec zp = z, zm = z;
                double acc = 0.0;
                for (Eigen::Index j = 0; j < z.size(); ++j) {
                    const double step = 1e-6 * std::max(1.0, std::abs(z[j]));
                    zp[j] = z[j] + step;
                    zm[j] = z[j] - step;
                    const double d = (c.g(zp) - c.g(zm)) / (2.0 * step);
                    acc += d * d;
                    zp[j] = zm[j] = z[j];
                }
                grad = std::sqrt(acc);
            }
            if (grad > 0.0) margin = std::min(margin, std::max(v, 0.0) / grad);
        }
        return margin;
    };
    return r;
}

SystemDef make_relativistic_euler(const EquationOfState& eos, FluidOptions opts) {
    SystemDef sys;
    sys.name = "relativistic-euler";
    sys.m = 6;
    sys.N = opts.space_dim;
    sys.coeff = [eos](double, const Vec&, const Vec& z, int i) -> Mat {
        const auto A = euler_matrices(eos, z);
        const EvolutionForm ev(A[0]);
        return ev.lu.solve(A[static_cast<std::size_t>(i + 1)]);
    };
    sys.source = [](double, const Vec&, const Vec&) { return Vec::Zero(6); };
    sys.domain = region_from_constraints(euler_constraints(eos, opts.normalization_slack));
    sys.project = normalize_velocity;
    return sys;
}

SystemDef make_bulk_viscous(const EquationOfState& eos, Coefficient tau, Coefficient zeta,
                            FluidOptions opts) {
    SystemDef sys;
    sys.name = "bulk-viscous";
    sys.m = 7;
    sys.N = opts.space_dim;
    sys.coeff = [eos, tau, zeta](double, const Vec&, const Vec& z, int i) -> Mat {
        const auto A = bulk_matrices(eos, tau, zeta, z);
        const EvolutionForm ev(A[0]);
        return ev.lu.solve(A[static_cast<std::size_t>(i + 1)]);
    };
    sys.source = [eos, tau, zeta](double, const Vec&, const Vec& z) -> Vec {
        const auto A = bulk_matrices(eos, tau, zeta, z);
        const EvolutionForm ev(A[0]);
        Vec R = Vec::Zero(7);
        R[6] = -z[6];
        return ev.lu.solve(R);
    };
    sys.domain =
        region_from_constraints(bulk_constraints(eos, tau, zeta, opts.normalization_slack));
    sys.project = normalize_velocity;
    return sys;
}

namespace {

std::array<double, 3> random_velocity(double speed_max, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::array<double, 3> d{normal(rng), normal(rng), normal(rng)};
    const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    const double speed = speed_max * unit(rng);
    for (double& c : d) c *= speed / len;
    return d;
}

}  // namespace

std::vector<Vec> sample_euler_states(const SystemDef& sys, const FluidSampleRanges& r,
                                     int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec> out;
    for (int attempt = 0; attempt < 100 * count && static_cast<int>(out.size()) < count;
         ++attempt) {
        const auto v = random_velocity(r.speed_max, rng);
        const double rho = r.rho_min + (r.rho_max - r.rho_min) * unit(rng);
        const double s = r.aux_min + (r.aux_max - r.aux_min) * unit(rng);
        Vec z = euler_state(v, rho, s);
        if (sys.domain.contains(z)) out.push_back(std::move(z));
    }
    return out;
}

std::vector<Vec> sample_bulk_states(const SystemDef& sys, const FluidSampleRanges& r,
                                    int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec> out;
    for (int attempt = 0; attempt < 100 * count && static_cast<int>(out.size()) < count;
         ++attempt) {
        const auto v = random_velocity(r.speed_max, rng);
        const double rho = r.rho_min + (r.rho_max - r.rho_min) * unit(rng);
        const double n = r.aux_min + (r.aux_max - r.aux_min) * unit(rng);
        const double Pi = r.Pi_min + (r.Pi_max - r.Pi_min) * unit(rng);
        Vec z = bulk_state(v, rho, n, Pi);
        if (sys.domain.contains(z)) out.push_back(std::move(z));
    }
    return out;
}

}  // namespace thyp::models
