#include "dgbo/spectral.hpp"

#include "dgbo/errors.hpp"

#include <cmath>
#include <string>

namespace dgbo {

DispersionParams::DispersionParams(double a_exponent) : a(a_exponent) {
    if (!(a >= 0.0 && a <= 1.0))
        throw config_error("dispersion exponent must lie in [0,1], got " + std::to_string(a));
}

double DispersionParams::omega(double xi) const {
    return xi * std::pow(std::abs(xi), 1.0 + a);
}

std::vector<double> DispersionParams::omega_table(const Grid& g) const {
    std::vector<double> w(g.n_points);
    for (std::size_t k = 0; k < g.n_points; ++k)
        w[k] = omega(g.wavenumbers[k]);
    w[g.nyquist_index()] = 0.0;
    return w;
}

Field riesz_derivative(const Field& f, double s, std::string* warning) {
    if (s < -1.0)
        throw config_error("riesz derivative order must be >= -1, got " + std::to_string(s));
    const Grid& g = f.grid();
    auto spec = f.spectrum();
    if (s < 0.0 && std::abs(spec[0]) > 1e-10 && warning)
        *warning = "riesz_derivative: negative order applied to a field with nonzero mean; zero mode annihilated";
    spec[0] = 0.0;
    for (std::size_t k = 1; k < g.n_points; ++k)
        spec[k] *= std::pow(std::abs(g.wavenumbers[k]), s);
    return Field::from_spectrum(f.grid_ptr(), spec);
}

Field bessel_potential(const Field& f, double s) {
    const Grid& g = f.grid();
    auto spec = f.spectrum();
    for (std::size_t k = 0; k < g.n_points; ++k) {
        const double xi = g.wavenumbers[k];
        spec[k] *= std::pow(1.0 + xi * xi, 0.5 * s);
    }
    return Field::from_spectrum(f.grid_ptr(), spec);
}

Field hilbert_transform(const Field& f) {
    const Grid& g = f.grid();
    auto spec = f.spectrum();
    const std::complex<double> mi(0.0, -1.0);
    spec[0] = 0.0;
    for (std::size_t k = 1; k < g.n_points; ++k)
        spec[k] *= mi * ((g.wavenumbers[k] > 0.0) ? 1.0 : -1.0);
    spec[g.nyquist_index()] = 0.0;
    return Field::from_spectrum(f.grid_ptr(), spec);
}

Field linear_propagator(const Field& f, double t, const DispersionParams& p) {
    const Grid& g = f.grid();
    auto spec = f.spectrum();
    const auto w = p.omega_table(g);
    for (std::size_t k = 0; k < g.n_points; ++k)
        spec[k] *= std::exp(std::complex<double>(0.0, -t * w[k]));
    return Field::from_spectrum(f.grid_ptr(), spec);
}

std::vector<std::complex<double>> xi_derivative(const Field& f, int k) {
    if (k < 0 || k > 5)
        throw config_error("xi derivative order must be in 0..5, got " + std::to_string(k));
    const Grid& g = f.grid();
    if (k == 0) return f.spectrum();
    const double window = 0.4 * g.box_length;
    std::vector<std::complex<double>> weighted(g.n_points);
    const std::complex<double> mi(0.0, -1.0);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double x = g.nodes[j];
        std::complex<double> w = (std::abs(x) <= window) ? 1.0 : 0.0;
        for (int m = 0; m < k; ++m) w *= mi * x;
        weighted[j] = w * f.samples()[j];
    }
    return detail::forward_transform(g, weighted);
}

} // namespace dgbo
