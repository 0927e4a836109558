#pragma once

#include "thyp/symbol.hpp"

#include <array>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace thyp::models {

/// Pressure as a function of energy density ϱ and one auxiliary variable
/// (entropy s for Euler, baryon density n for the bulk-viscous model).
struct EquationOfState {
    std::string name;
    std::string aux_label = "aux";
    std::function<double(double rho, double aux)> p;
    std::function<double(double rho, double aux)> dp_drho;
    std::function<double(double rho, double aux)> dp_daux;

    /// p = K ϱ^Γ.
    static EquationOfState barotropic(double K, double gamma);
    /// p = K ϱ^Γ + B aux^β (aux clamped at zero).
    static EquationOfState power_sum(double K, double gamma, double B, double beta);
    /// Monotone cubic (PCHIP) interpolation of tabulated p(ϱ); no aux dependence.
    static EquationOfState tabulated(std::vector<double> rho, std::vector<double> p);
    /// Reads "rho,p" CSV (header optional).
    static EquationOfState from_csv(const std::string& path);
};

/// State-dependent transport coefficient τ(ϱ, n, Π) or ζ(ϱ, n, Π).
using Coefficient = std::function<double(double rho, double n, double Pi)>;
Coefficient constant(double value);

// ----- toy systems

/// A¹ = diag(speeds), R = 0, U = R^m, N = 1.
SystemDef make_advection(const std::vector<double>& speeds);
/// m = N = 1, A¹(ζ) = ζ, R = 0.
SystemDef make_burgers();
/// Scalar transport at `speed` with constant source -rate on U = {ζ > 0}.
SystemDef make_drift(double speed, double rate);
/// Constant-coefficient linear system, A¹ = matrix, R = 0, N = 1.
SystemDef make_constant_coefficient(const Mat& matrix);

// ----- relativistic fluids (Minkowski metric, signature -+++)

struct FluidOptions {
    int space_dim = 3;
    double normalization_slack = 1e-4;  ///< admissible |u·u + 1|
};

/// Φ = (u^0..u^3, ϱ, s).
SystemDef make_relativistic_euler(const EquationOfState& eos, FluidOptions opts = {});

/// Φ = (u^0..u^3, ϱ, n, Π).
SystemDef make_bulk_viscous(const EquationOfState& eos, Coefficient tau, Coefficient zeta,
                            FluidOptions opts = {});

/// Four-velocity with spatial part γ·v.
Vec four_velocity(const std::array<double, 3>& v);
Vec euler_state(const std::array<double, 3>& v, double rho, double s);
Vec bulk_state(const std::array<double, 3>& v, double rho, double n, double Pi);
/// u^0 recomputed from the spatial components so that u·u = -1.
void normalize_velocity(Vec& state);

/// Covariant-form matrices A^α (α = 0..3) of the first-order form
/// A^α ∂_α Φ = R(Φ), before inverting A^0.
std::array<Mat, 4> euler_matrices(const EquationOfState& eos, const Vec& state);
std::array<Mat, 4> bulk_matrices(const EquationOfState& eos, const Coefficient& tau,
                                 const Coefficient& zeta, const Vec& state);

/// Named admissibility inequalities; each value is >= 0 (or > 0 for strict
/// ones) when satisfied.
struct Constraint {
    std::string name;
    bool strict;
    std::function<double(const Vec&)> g;
    /// |∇g|; finite differences when unset.
    std::function<double(const Vec&)> grad_norm = {};
};
std::vector<Constraint> euler_constraints(const EquationOfState& eos, double slack);
std::vector<Constraint> bulk_constraints(const EquationOfState& eos, const Coefficient& tau,
                                         const Coefficient& zeta, double slack);
/// Region built from constraints: margin = min_k g_k / |∇g_k| (finite differences).
AdmissibleRegion region_from_constraints(std::vector<Constraint> cs);

/// Throws AdmissibilityViolation naming the first failing inequality.
void check_admissible(const SystemDef& sys, const Vec& state);

/// Eigenvalues of the symbol at ξ = direction, ascending with multiplicity.
std::vector<double> characteristic_speeds(const SystemDef& sys, double t, const Vec& x,
                                          const Vec& state, const Vec& direction);

// ----- state sampling for scans

struct FluidSampleRanges {
    double rho_min = 0.5, rho_max = 2.0;
    double aux_min = 0.5, aux_max = 1.5;   ///< s or n
    double Pi_min = 0.0, Pi_max = 0.0;
    double speed_max = 0.9;                ///< |v| of the boost
};

/// Random admissible Euler states (rejection sampled against the region).
std::vector<Vec> sample_euler_states(const SystemDef& sys, const FluidSampleRanges& r,
                                     int count, std::mt19937_64& rng);
std::vector<Vec> sample_bulk_states(const SystemDef& sys, const FluidSampleRanges& r,
                                    int count, std::mt19937_64& rng);
/// Uniform samples in a box, kept if admissible.
std::vector<Vec> sample_box_states(const SystemDef& sys, const Vec& lo, const Vec& hi,
                                   int count, std::mt19937_64& rng);

}  // namespace thyp::models
