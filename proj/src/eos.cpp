#include "thyp/errors.hpp"
#include "thyp/models.hpp"

#include <boost/math/special_functions/fpclassify.hpp>

namespace boost::math::interpolators {
using boost::math::isnan;
}

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace thyp::models {

EquationOfState EquationOfState::barotropic(double K, double gamma) {
    EquationOfState eos;
    eos.name = "barotropic";
    eos.p = [K, gamma](double rho, double) { return K * std::pow(rho, gamma); };
    eos.dp_drho = [K, gamma](double rho, double) {
        return K * gamma * std::pow(rho, gamma - 1.0);
    };
    eos.dp_daux = [](double, double) { return 0.0; };
    return eos;
}

EquationOfState EquationOfState::power_sum(double K, double gamma, double B, double beta) {
    EquationOfState eos;
    eos.name = "power-sum";
    eos.p = [=](double rho, double aux) {
        return K * std::pow(rho, gamma) + B * std::pow(std::max(aux, 0.0), beta);
    };
    eos.dp_drho = [=](double rho, double) { return K * gamma * std::pow(rho, gamma - 1.0); };
    eos.dp_daux = [=](double, double aux) {
        return B * beta * std::pow(std::max(aux, 0.0), beta - 1.0);
    };
    return eos;
}

EquationOfState EquationOfState::tabulated(std::vector<double> rho, std::vector<double> p) {
    if (rho.size() < 4 || rho.size() != p.size()) {
        throw ConfigError("tabulated EOS needs at least 4 (rho, p) samples");
    }
    for (std::size_t i = 1; i < rho.size(); ++i) {
        if (!(rho[i] > rho[i - 1])) throw ConfigError("tabulated EOS: rho must increase");
        if (p[i] < p[i - 1]) throw ConfigError("tabulated EOS: p must be non-decreasing");
    }
    const double lo = rho.front();
    const double hi = rho.back();
    using Interp = boost::math::interpolators::pchip<std::vector<double>>;
    auto interp = std::make_shared<Interp>(std::move(rho), std::move(p));
    const double p_lo = (*interp)(lo), p_hi = (*interp)(hi);
    const double d_lo = interp->prime(lo), d_hi = interp->prime(hi);

    EquationOfState eos;
    eos.name = "tabulated";
    // linear extrapolation with the end slopes outside the table
    eos.p = [=](double r, double) {
        if (r < lo) return p_lo + d_lo * (r - lo);
        if (r > hi) return p_hi + d_hi * (r - hi);
        return (*interp)(r);
    };
    eos.dp_drho = [=](double r, double) {
        if (r < lo) return d_lo;
        if (r > hi) return d_hi;
        return interp->prime(r);
    };
    eos.dp_daux = [](double, double) { return 0.0; };
    return eos;
}

EquationOfState EquationOfState::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open EOS table " + path);
    std::vector<double> rho, p;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double r = 0.0, q = 0.0;
        if (!(ls >> r >> q)) {
            if (rho.empty()) continue;  // header
            throw ConfigError("malformed EOS table line: " + line);
        }
        rho.push_back(r);
        p.push_back(q);
    }
    return tabulated(std::move(rho), std::move(p));
}

Coefficient constant(double value) {
    return [value](double, double, double) { return value; };
}

}  // namespace thyp::models
