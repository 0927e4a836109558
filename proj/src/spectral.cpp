#include "thyp/spectral.hpp"

#include "thyp/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace thyp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW plans keyed by (dim, n, sign), each owning aligned scratch buffers.
class PlanCache {
public:
    struct Entry {
        fftw_plan plan = nullptr;
        fftw_complex* in = nullptr;
        fftw_complex* out = nullptr;
        std::size_t size = 0;
        ~Entry() {
            if (plan) fftw_destroy_plan(plan);
            fftw_free(in);
            fftw_free(out);
        }
    };

    Entry& get(int dim, int n, int sign) {
        const auto key = std::make_tuple(dim, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return *it->second;
        auto e = std::make_unique<Entry>();
        std::vector<int> dims(static_cast<std::size_t>(dim), n);
        e->size = 1;
        for (int d = 0; d < dim; ++d) e->size *= static_cast<std::size_t>(n);
        e->in = fftw_alloc_complex(e->size);
        e->out = fftw_alloc_complex(e->size);
        e->plan = fftw_plan_dft(dim, dims.data(), e->in, e->out, sign, FFTW_ESTIMATE);
        auto& ref = *e;
        plans_.emplace(key, std::move(e));
        return ref;
    }

private:
    std::map<std::tuple<int, int, int>, std::unique_ptr<Entry>> plans_;
};

PlanCache& plan_cache() {
    thread_local PlanCache cache;
    return cache;
}

// Unnormalized DFT of one component: out[k] = Σ_j in[j] e^{sign·i·2π jk/n}.
void dft(const TorusGrid& g, const Complex* in, Complex* out, int sign) {
    auto& e = plan_cache().get(g.dim(), g.n(), sign);
    std::memcpy(static_cast<void*>(e.in), in, sizeof(Complex) * e.size);
    fftw_execute(e.plan);
    std::memcpy(static_cast<void*>(out), e.out, sizeof(Complex) * e.size);
}

double abs2_wavenumber(const std::vector<int>& k) {
    double s = 0.0;
    for (int v : k) s += static_cast<double>(v) * v;
    return s;
}

void require_same_grid(const TorusField& a, const TorusField& b) {
    if (!(a.grid() == b.grid()) || a.components() != b.components()) {
        throw GridMismatch("fields live on different grids or component counts");
    }
}

// Nonzero retained modes grouped by direction: the integer vector reduced
// by its gcd with the first nonzero entry positive. P depends on ξ only
// through this class (degree-0 homogeneity and P(-ξ) = P(ξ)).
std::map<std::vector<int>, std::vector<std::size_t>> direction_classes(const TorusGrid& g) {
    std::map<std::vector<int>, std::vector<std::size_t>> classes;
    for (std::size_t f = 0; f < g.size(); ++f) {
        if (!g.retained(f)) continue;
        std::vector<int> k = g.wavenumber(f);
        int d = 0;
        for (int v : k) d = std::gcd(d, std::abs(v));
        if (d == 0) continue;
        for (int& v : k) v /= d;
        const auto first = std::find_if(k.begin(), k.end(), [](int v) { return v != 0; });
        if (*first < 0) {
            for (int& v : k) v = -v;
        }
        classes[k].push_back(f);
    }
    return classes;
}

// Keeps only the listed modes (plus nothing else) and transforms back.
TorusField project_modes(const Spectrum& full, const std::vector<std::size_t>& modes) {
    Spectrum part{full.grid, full.m,
                  std::vector<Complex>(full.coeffs.size(), Complex{0.0, 0.0})};
    for (int c = 0; c < full.m; ++c) {
        for (std::size_t f : modes) part(c, f) = full(c, f);
    }
    return inverse_transform(part);
}

std::vector<std::size_t> zero_mode() { return {0}; }

using ClassFn = std::function<void(const std::vector<std::size_t>& modes,
                                   const std::vector<Mat>& P)>;

// Tabulates P(t, x, v(x), d) on the grid for each direction class d.
void for_each_class(const TorusField& v, const SystemDef& sys, double t,
                    const ToleranceSet& tols, const ClassFn& fn) {
    const TorusGrid& g = v.grid();
    std::vector<Vec> states(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
        states[p] = v.state(p);
        if (!sys.domain.contains(states[p])) {
            const Vec x = g.point(p);
            throw StateOutsideDomain("Op(P): frozen state outside admissible region",
                                     std::vector<double>(x.data(), x.data() + x.size()));
        }
    }
    std::vector<Mat> table(g.size());
    for (const auto& [dir, modes] : direction_classes(g)) {
        Vec xi(g.dim());
        for (int d = 0; d < g.dim(); ++d) xi[d] = dir[static_cast<std::size_t>(d)];
        for (std::size_t p = 0; p < g.size(); ++p) {
            const Vec x = g.point(p);
            try {
                table[p] = symbol_structure(sys, t, x, states[p], xi, tols).P;
            } catch (const Error& e) {
                throw SymbolFailure(std::string("Op(P): ") + e.what(),
                                    std::vector<double>(x.data(), x.data() + x.size()),
                                    std::vector<double>(xi.data(), xi.data() + xi.size()));
            }
        }
        fn(modes, table);
    }
}

void add_pointwise(TorusField& out, const std::vector<Mat>& P, const TorusField& f) {
    for (std::size_t p = 0; p < f.points(); ++p) {
        const Vec y = P[p] * f.state(p);
        for (int c = 0; c < f.components(); ++c) out(c, p) += y[c];
    }
}

TorusField multiply_pointwise(const std::vector<Mat>& P, const TorusField& f) {
    TorusField out(f.grid(), f.components());
    add_pointwise(out, P, f);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- grid

TorusGrid::TorusGrid(int dim, int n) : dim_(dim), n_(n) {
    if (dim < 1) throw std::invalid_argument("TorusGrid: dimension must be >= 1");
    if (n < 2 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("TorusGrid: points per dimension must be a power of two");
    }
    size_ = 1;
    for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(n);
}

double TorusGrid::spacing() const { return kTwoPi / n_; }

Vec TorusGrid::point(std::size_t flat) const {
    Vec x(dim_);
    for (int d = dim_ - 1; d >= 0; --d) {
        x[d] = spacing() * static_cast<double>(flat % static_cast<std::size_t>(n_));
        flat /= static_cast<std::size_t>(n_);
    }
    return x;
}

std::vector<int> TorusGrid::wavenumber(std::size_t flat) const {
    std::vector<int> k(static_cast<std::size_t>(dim_));
    for (int d = dim_ - 1; d >= 0; --d) {
        const int j = static_cast<int>(flat % static_cast<std::size_t>(n_));
        k[static_cast<std::size_t>(d)] = j < n_ / 2 ? j : j - n_;
        flat /= static_cast<std::size_t>(n_);
    }
    return k;
}

bool TorusGrid::retained(std::size_t flat) const {
    for (int v : wavenumber(flat)) {
        if (std::abs(v) > cutoff()) return false;
    }
    return true;
}

// ---------------------------------------------------------------- field

TorusField::TorusField(TorusGrid grid, int m)
    : grid_(grid), m_(m), values_(static_cast<std::size_t>(m) * grid.size(), 0.0) {}

Vec TorusField::state(std::size_t flat) const {
    Vec v(m_);
    for (int c = 0; c < m_; ++c) v[c] = (*this)(c, flat);
    return v;
}

void TorusField::set_state(std::size_t flat, const Vec& v) {
    for (int c = 0; c < m_; ++c) (*this)(c, flat) = v[c];
}

TorusField& TorusField::operator+=(const TorusField& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

TorusField& TorusField::operator-=(const TorusField& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

TorusField& TorusField::operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
}

TorusField& TorusField::axpy(double a, const TorusField& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * o.values_[i];
    return *this;
}

bool TorusField::finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

TorusField operator+(TorusField a, const TorusField& b) { return a += b; }
TorusField operator-(TorusField a, const TorusField& b) { return a -= b; }
TorusField operator*(double a, TorusField f) { return f *= a; }

// ---------------------------------------------------------------- transforms

Spectrum transform(const TorusField& f) {
    if (!f.finite()) throw NonFiniteField("transform: field has non-finite values");
    const TorusGrid& g = f.grid();
    const double weight = std::pow(g.spacing(), g.dim());
    Spectrum s{g, f.components(), std::vector<Complex>(f.values().size())};
    std::vector<Complex> buf(g.size());
    for (int c = 0; c < f.components(); ++c) {
        for (std::size_t p = 0; p < g.size(); ++p) buf[p] = f(c, p);
        dft(g, buf.data(), &s.coeffs[c * g.size()], FFTW_FORWARD);
    }
    for (Complex& z : s.coeffs) z *= weight;
    return s;
}

TorusField inverse_transform(const Spectrum& s) {
    const TorusGrid& g = s.grid;
    const double weight = 1.0 / std::pow(kTwoPi, g.dim());
    TorusField f(g, s.m);
    std::vector<Complex> buf(g.size());
    for (int c = 0; c < s.m; ++c) {
        dft(g, &s.coeffs[c * g.size()], buf.data(), FFTW_BACKWARD);
        for (std::size_t p = 0; p < g.size(); ++p) f(c, p) = weight * buf[p].real();
    }
    return f;
}

TorusField bessel_potential(const TorusField& f, double s) {
    if (s == 0.0) return f;
    Spectrum sp = transform(f);
    const TorusGrid& g = f.grid();
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double mult = std::pow(1.0 + abs2_wavenumber(g.wavenumber(p)), 0.5 * s);
        for (int c = 0; c < f.components(); ++c) sp(c, p) *= mult;
    }
    return inverse_transform(sp);
}

double sobolev_norm(const TorusField& f, double s) {
    const Spectrum sp = transform(f);
    const TorusGrid& g = f.grid();
    double acc = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double mult = std::pow(1.0 + abs2_wavenumber(g.wavenumber(p)), s);
        for (int c = 0; c < f.components(); ++c) acc += mult * std::norm(sp(c, p));
    }
    return std::sqrt(acc / std::pow(kTwoPi, g.dim()));
}

double inner(const TorusField& f, const TorusField& g) {
    require_same_grid(f, g);
    const double weight = std::pow(f.grid().spacing(), f.grid().dim());
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) acc += f.values()[i] * g.values()[i];
    return weight * acc;
}

double l2_norm(const TorusField& f) { return std::sqrt(inner(f, f)); }

double tail_fraction(const TorusField& f, double s) {
    const Spectrum sp = transform(f);
    const TorusGrid& g = f.grid();
    const double band = 2.0 * g.cutoff() / 3.0;
    double total = 0.0;
    double tail = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto k = g.wavenumber(p);
        const double mult = std::pow(1.0 + abs2_wavenumber(k), s);
        double e = 0.0;
        for (int c = 0; c < f.components(); ++c) e += mult * std::norm(sp(c, p));
        total += e;
        const int kmax = std::abs(*std::max_element(
            k.begin(), k.end(), [](int a, int b) { return std::abs(a) < std::abs(b); }));
        if (kmax > band) tail += e;
    }
    return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

TorusField spectral_derivative(const TorusField& f, int i) {
    Spectrum sp = transform(f);
    const TorusGrid& g = f.grid();
    for (std::size_t p = 0; p < g.size(); ++p) {
        const Complex mult = g.retained(p)
                                 ? Complex{0.0, static_cast<double>(g.wavenumber(p)[i])}
                                 : Complex{0.0, 0.0};
        for (int c = 0; c < f.components(); ++c) sp(c, p) *= mult;
    }
    return inverse_transform(sp);
}

TorusField dealias(const TorusField& f) {
    Spectrum sp = transform(f);
    const TorusGrid& g = f.grid();
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (g.retained(p)) continue;
        for (int c = 0; c < f.components(); ++c) sp(c, p) = 0.0;
    }
    return inverse_transform(sp);
}

// ---------------------------------------------------------------- Op(P)

TorusField apply_quantized_symmetrizer(const TorusField& v, const TorusField& f,
                                       const SystemDef& sys, double t,
                                       const ToleranceSet& tols) {
    if (!(v.grid() == f.grid())) throw GridMismatch("Op(P): v and f on different grids");
    const Spectrum sp = transform(f);
    TorusField out = project_modes(sp, zero_mode());
    for_each_class(v, sys, t, tols, [&](const auto& modes, const auto& P) {
        add_pointwise(out, P, project_modes(sp, modes));
    });
    return out;
}

TorusField apply_quantized_symmetrizer_adjoint(const TorusField& v, const TorusField& g,
                                               const SystemDef& sys, double t,
                                               const ToleranceSet& tols) {
    if (!(v.grid() == g.grid())) throw GridMismatch("Op(P)*: v and g on different grids");
    TorusField out = project_modes(transform(g), zero_mode());
    for_each_class(v, sys, t, tols, [&](const auto& modes, const auto& P) {
        out += project_modes(transform(multiply_pointwise(P, g)), modes);
    });
    return out;
}

TorusField apply_symmetrized(const TorusField& v, const TorusField& f, const SystemDef& sys,
                             double t, const ToleranceSet& tols) {
    if (!(v.grid() == f.grid())) throw GridMismatch("Op(P): v and f on different grids");
    const Spectrum sp = transform(f);
    TorusField out = project_modes(sp, zero_mode());
    for_each_class(v, sys, t, tols, [&](const auto& modes, const auto& P) {
        TorusField q = multiply_pointwise(P, project_modes(sp, modes));
        q += project_modes(transform(multiply_pointwise(P, f)), modes);
        out.axpy(0.5, q);
    });
    return out;
}

double energy_functional(const TorusField& v, const TorusField& u, const SystemDef& sys,
                         double s, double t, const ToleranceSet& tols) {
    const TorusField w = bessel_potential(u, s);
    return inner(apply_symmetrized(v, w, sys, t, tols), w);
}

}  // namespace thyp
