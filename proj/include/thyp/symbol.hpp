#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace thyp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Open set U of admissible states.
///
/// `margin` is a lower estimate of the distance to the complement of U and
/// is zero outside. `violation`, when set, names the first failing
/// inequality of a state (empty optional if the state is admissible).
struct AdmissibleRegion {
    std::function<bool(const Vec&)> contains;
    std::function<double(const Vec&)> margin;
    std::function<std::optional<std::string>(const Vec&)> violation;

    static AdmissibleRegion whole_space();
};

/// Quasilinear system ∂_t u + A^i(t,x,u) ∂_i u = R(t,x,u) on the N-torus.
struct SystemDef {
    using CoeffFn = std::function<Mat(double t, const Vec& x, const Vec& state, int i)>;
    using SourceFn = std::function<Vec(double t, const Vec& x, const Vec& state)>;

    std::string name;
    int m = 0;  ///< state dimension
    int N = 0;  ///< space dimension
    CoeffFn coeff;
    SourceFn source;
    AdmissibleRegion domain;
    /// Optional map onto a constraint manifold, used when building data.
    std::function<void(Vec&)> project;
};

struct ToleranceSet {
    double cluster = 1e-8;  ///< relative eigenvalue merge distance
    double real = 1e-9;     ///< relative imaginary-part cutoff
    double rank = 1e-8;     ///< relative singular-value cutoff for null spaces
    double cond = 1e8;      ///< cap on cond(S)
    double resid = 1e-9;    ///< residual checks in tests and projections
};

/// Diagonalization of one symbol matrix.
struct EigenStructure {
    std::vector<double> lambdas;     ///< ascending cluster representatives
    std::vector<int> multiplicity;   ///< per cluster
    Mat S;                           ///< rows: unit-norm left eigenvectors
    Mat D;                           ///< diag of lambdas repeated by multiplicity
    Mat P;                           ///< S^T S
    Mat V;                           ///< right eigenvectors, columns grouped like S rows
    double gap = std::numeric_limits<double>::infinity();
    double condS = 1.0;
    double imag_ratio = 0.0;  ///< max |Im λ| / ‖A‖ seen by the eigensolver
    double norm = 0.0;        ///< ‖A‖ (Frobenius)

    int clusters() const { return static_cast<int>(lambdas.size()); }
    /// First row of cluster k inside S.
    int offset(int k) const;
};

Mat assemble_symbol(const SystemDef& sys, double t, const Vec& x, const Vec& state,
                    const Vec& xi, bool closure = false);

EigenStructure eigendecompose(const Mat& A, const ToleranceSet& tols = {});

/// Structure at a symbol sample point, applying the ξ = 0 convention
/// (S = I, D = 0, P = I).
EigenStructure symbol_structure(const SystemDef& sys, double t, const Vec& x,
                                const Vec& state, const Vec& xi,
                                const ToleranceSet& tols = {});

std::vector<Mat> build_projections(const EigenStructure& es, const ToleranceSet& tols = {});
Mat build_symmetrizer(const EigenStructure& es);

/// Riesz projection by trapezoid quadrature of the resolvent on a circle.
/// Cross-check for build_projections only.
Mat contour_projection(const Mat& A, double center, double radius, int nodes = 64);

/// Max over ξ ∈ {e_1..e_N} sums: Σ_i ρ(A^i). Used for CFL steps.
double spectral_radius_bound(const SystemDef& sys, double t, const Vec& x, const Vec& state);

enum class FailureKind { ComplexSpectrum, Defective, OutsideDomain, Singular };
const char* to_string(FailureKind kind);

struct SamplePlan {
    std::vector<double> times{0.0};
    std::vector<Vec> points;      ///< torus points, size N each
    std::vector<Vec> states;      ///< size m each
    std::vector<Vec> directions;  ///< normalized on use
    double radius = std::numeric_limits<double>::infinity();  ///< R of B_R
    int max_witnesses = 8;
    ToleranceSet tols{};
};

struct Witness {
    double t = 0.0;
    Vec x;
    Vec state;
    Vec xi;
    FailureKind kind = FailureKind::Defective;
    std::string message;
};

struct HyperbolicityReport {
    std::size_t samples = 0;
    double worst_imag = 0.0;
    double worst_condS = 0.0;
    double min_gap = std::numeric_limits<double>::infinity();
    double lambda0 = std::numeric_limits<double>::quiet_NaN();
    double lambda1 = std::numeric_limits<double>::quiet_NaN();
    bool pass = true;
    std::size_t failures = 0;
    std::vector<Witness> witnesses;
};

HyperbolicityReport scan_hyperbolicity(const SystemDef& sys, const SamplePlan& plan);

/// Deterministic quasi-uniform unit directions in R^N: {+1, -1} for N = 1,
/// equally spaced angles for N = 2, a Fibonacci lattice for N = 3.
std::vector<Vec> unit_directions(int N, int count);

}  // namespace thyp
