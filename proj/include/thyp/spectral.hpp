#pragma once

#include "thyp/symbol.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace thyp {

using Complex = std::complex<double>;

/// Uniform periodic grid on [0, 2π)^N with n points per dimension.
///
/// Flat indices are row-major: the last dimension varies fastest.
class TorusGrid {
public:
    TorusGrid() = default;
    TorusGrid(int dim, int n);

    int dim() const { return dim_; }
    int n() const { return n_; }
    std::size_t size() const { return size_; }
    double spacing() const;
    /// Largest retained |ξ_i| under the 2/3 rule.
    int cutoff() const { return n_ / 3; }

    Vec point(std::size_t flat) const;
    /// Integer frequency of FFT slot `flat` along each dimension.
    std::vector<int> wavenumber(std::size_t flat) const;
    bool retained(std::size_t flat) const;

    bool operator==(const TorusGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }

private:
    int dim_ = 0;
    int n_ = 0;
    std::size_t size_ = 0;
};

/// Real m-component field on a TorusGrid, stored component-major:
/// values[c * grid.size() + flat].
class TorusField {
public:
    TorusField() = default;
    TorusField(TorusGrid grid, int m);

    const TorusGrid& grid() const { return grid_; }
    int components() const { return m_; }
    std::size_t points() const { return grid_.size(); }

    double& operator()(int c, std::size_t flat) { return values_[c * grid_.size() + flat]; }
    double operator()(int c, std::size_t flat) const { return values_[c * grid_.size() + flat]; }

    Vec state(std::size_t flat) const;
    void set_state(std::size_t flat, const Vec& v);

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    TorusField& operator+=(const TorusField& o);
    TorusField& operator-=(const TorusField& o);
    TorusField& operator*=(double a);
    /// this += a * o
    TorusField& axpy(double a, const TorusField& o);

    bool finite() const;

private:
    TorusGrid grid_;
    int m_ = 0;
    std::vector<double> values_;
};

TorusField operator+(TorusField a, const TorusField& b);
TorusField operator-(TorusField a, const TorusField& b);
TorusField operator*(double a, TorusField f);

/// Fourier coefficients f̂(ξ) = ∫ e^{-ix·ξ} f dx, approximated by the grid
/// quadrature, in FFT slot order (component-major like TorusField).
struct Spectrum {
    TorusGrid grid;
    int m = 0;
    std::vector<Complex> coeffs;

    Complex& operator()(int c, std::size_t flat) { return coeffs[c * grid.size() + flat]; }
    Complex operator()(int c, std::size_t flat) const { return coeffs[c * grid.size() + flat]; }
};

Spectrum transform(const TorusField& f);
/// Inverse transform; the imaginary part is discarded.
TorusField inverse_transform(const Spectrum& s);

/// Multiplies f̂(ξ) by (1 + |ξ|²)^{s/2}.
TorusField bessel_potential(const TorusField& f, double s);
double sobolev_norm(const TorusField& f, double s);
/// Grid quadrature L² norm.
double l2_norm(const TorusField& f);
/// Grid quadrature L² inner product.
double inner(const TorusField& f, const TorusField& g);
/// Fraction of the H^s norm carried by the upper third of the retained band.
double tail_fraction(const TorusField& f, double s);

/// ∂_i f by Fourier multiplication, with the 2/3-rule mask applied.
TorusField spectral_derivative(const TorusField& f, int i);
/// Zeroes every mode outside the 2/3-rule band.
TorusField dealias(const TorusField& f);

/// Op(P) f(x) = (2π)^{-N} Σ_ξ e^{ix·ξ} P(t, x, v(x), ξ) f̂(ξ) over retained modes,
/// with P(·, 0) = I.
TorusField apply_quantized_symmetrizer(const TorusField& v, const TorusField& f,
                                       const SystemDef& sys, double t,
                                       const ToleranceSet& tols = {});
/// Discrete L² adjoint of apply_quantized_symmetrizer.
TorusField apply_quantized_symmetrizer_adjoint(const TorusField& v, const TorusField& g,
                                               const SystemDef& sys, double t,
                                               const ToleranceSet& tols = {});
/// (Op(P) + Op(P)^*) / 2.
TorusField apply_symmetrized(const TorusField& v, const TorusField& f, const SystemDef& sys,
                             double t, const ToleranceSet& tols = {});

/// (N_s u, u) with N_s = ⟨∇⟩^s sym(Op(P)) ⟨∇⟩^s.
double energy_functional(const TorusField& v, const TorusField& u, const SystemDef& sys,
                         double s, double t, const ToleranceSet& tols = {});

}  // namespace thyp
