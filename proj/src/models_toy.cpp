#include "thyp/errors.hpp"
#include "thyp/models.hpp"

#include <algorithm>

namespace thyp::models {

SystemDef make_advection(const std::vector<double>& speeds) {
    SystemDef sys;
    sys.name = "advection";
    sys.m = static_cast<int>(speeds.size());
    sys.N = 1;
    Mat A = Mat::Zero(sys.m, sys.m);
    for (int i = 0; i < sys.m; ++i) A(i, i) = speeds[static_cast<std::size_t>(i)];
    sys.coeff = [A](double, const Vec&, const Vec&, int) { return A; };
    const int m = sys.m;
    sys.source = [m](double, const Vec&, const Vec&) { return Vec::Zero(m); };
    sys.domain = AdmissibleRegion::whole_space();
    return sys;
}

SystemDef make_burgers() {
    SystemDef sys;
    sys.name = "burgers";
    sys.m = 1;
    sys.N = 1;
    sys.coeff = [](double, const Vec&, const Vec& z, int) { return Mat::Constant(1, 1, z[0]); };
    sys.source = [](double, const Vec&, const Vec&) { return Vec::Zero(1); };
    sys.domain = AdmissibleRegion::whole_space();
    return sys;
}

SystemDef make_drift(double speed, double rate) {
    SystemDef sys;
    sys.name = "drift";
    sys.m = 1;
    sys.N = 1;
    sys.coeff = [speed](double, const Vec&, const Vec&, int) {
        return Mat::Constant(1, 1, speed);
    };
    sys.source = [rate](double, const Vec&, const Vec&) { return Vec::Constant(1, -rate); };
    sys.domain.contains = [](const Vec& z) { return z[0] > 0.0; };
    sys.domain.margin = [](const Vec& z) { return std::max(z[0], 0.0); };
    sys.domain.violation = [](const Vec& z) -> std::optional<std::string> {
        if (z[0] > 0.0) return std::nullopt;
        return "positivity";
    };
    return sys;
}

SystemDef make_constant_coefficient(const Mat& matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
        throw ConfigError("constant-coefficient system needs a square matrix");
    }
    SystemDef sys;
    sys.name = "constant-coefficient";
    sys.m = static_cast<int>(matrix.rows());
    sys.N = 1;
    sys.coeff = [matrix](double, const Vec&, const Vec&, int) { return matrix; };
    const int m = sys.m;
    sys.source = [m](double, const Vec&, const Vec&) { return Vec::Zero(m); };
    sys.domain = AdmissibleRegion::whole_space();
    return sys;
}

void check_admissible(const SystemDef& sys, const Vec& state) {
    if (sys.domain.violation) {
        if (auto name = sys.domain.violation(state)) {
            throw AdmissibilityViolation("state violates admissibility inequality '" + *name + "'",
                                         *name);
        }
        return;
    }
    if (!sys.domain.contains(state)) {
        throw AdmissibilityViolation("state outside admissible region", "region");
    }
}

std::vector<double> characteristic_speeds(const SystemDef& sys, double t, const Vec& x,
                                          const Vec& state, const Vec& direction) {
    const EigenStructure es = eigendecompose(assemble_symbol(sys, t, x, state, direction));
    std::vector<double> speeds;
    for (int c = 0; c < es.clusters(); ++c) {
        for (int k = 0; k < es.multiplicity[static_cast<std::size_t>(c)]; ++k) {
            speeds.push_back(es.lambdas[static_cast<std::size_t>(c)]);
        }
    }
    return speeds;
}

std::vector<Vec> sample_box_states(const SystemDef& sys, const Vec& lo, const Vec& hi,
                                   int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec> out;
    for (int attempt = 0; attempt < 100 * count && static_cast<int>(out.size()) < count;
         ++attempt) {
        Vec z(lo.size());
        for (Eigen::Index i = 0; i < lo.size(); ++i) z[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
        if (sys.domain.contains(z)) out.push_back(std::move(z));
    }
    return out;
}

}  // namespace thyp::models
