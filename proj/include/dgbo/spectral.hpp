#pragma once

#include "dgbo/field.hpp"

#include <complex>
#include <string>
#include <vector>

namespace dgbo {

// Dispersion exponent a in [0,1] with the derived phase symbol
// omega(xi) = xi*|xi|^{1+a}; the free evolution multiplies mode xi by
// exp(-i*t*omega(xi)). a=0 and a=1 are the two classical endpoints of the
// family.
struct DispersionParams {
    double a = 0.0;

    explicit DispersionParams(double a_exponent);

    // Phase symbol xi*|xi|^{1+a}. Odd in xi.
    double omega(double xi) const;

    // omega evaluated on a grid's FFT-ordered wavenumbers with the unpaired
    // Nyquist mode zeroed (odd symbol, zeroing preserves realness).
    std::vector<double> omega_table(const Grid& g) const;
};

// Spectrum multiplied by |xi|^s; the xi=0 mode is set to zero. For s < 0 a
// nonzero mean (|f_hat(0)| > 1e-10) is flagged through *warning when the
// pointer is given. Requires s >= -1.
Field riesz_derivative(const Field& f, double s, std::string* warning = nullptr);

// Spectrum multiplied by (1 + xi^2)^{s/2}.
Field bessel_potential(const Field& f, double s);

// Spectrum multiplied by -i*sgn(xi); zero and Nyquist modes are zeroed.
// Composing with d/dx gives riesz_derivative(.,1).
Field hilbert_transform(const Field& f);

// Free propagator: mode xi multiplied by exp(-i*t*omega(xi)). Unit-modulus
// symbol, so the L2 norm is preserved exactly.
Field linear_propagator(const Field& f, double t, const DispersionParams& p);

// k-th derivative of f_hat with respect to xi, returned on the grid's
// FFT-ordered wavenumbers: the transform of (-i x)^k f(x). For k >= 1 the x
// weight is cut off outside |x| <= 0.4*L so box-edge values cannot pollute
// the moment weighting; k is limited to 0..5.
std::vector<std::complex<double>> xi_derivative(const Field& f, int k);

} // namespace dgbo
