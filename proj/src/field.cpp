#include "dgbo/field.hpp"

#include "dgbo/errors.hpp"
#include "dgbo/fft.hpp"

#include <cmath>
#include <utility>

namespace dgbo {

namespace detail {

std::vector<std::complex<double>> forward_transform(const Grid& g,
                                                    const std::vector<std::complex<double>>& values) {
    const std::size_t n = g.n_points;
    std::vector<std::complex<double>> out(n);
    fft_forward(n, values.data(), out.data());
    const double dx = g.spacing();
    for (std::size_t k = 0; k < n; ++k)
        out[k] *= (k % 2 == 0) ? dx : -dx;
    return out;
}

std::vector<std::complex<double>> inverse_transform(const Grid& g,
                                                    const std::vector<std::complex<double>>& spectrum) {
    const std::size_t n = g.n_points;
    std::vector<std::complex<double>> tmp(n), out(n);
    for (std::size_t k = 0; k < n; ++k)
        tmp[k] = (k % 2 == 0) ? spectrum[k] : -spectrum[k];
    fft_backward(n, tmp.data(), out.data());
    const double inv = 1.0 / g.box_length;
    for (std::size_t j = 0; j < n; ++j)
        out[j] *= inv;
    return out;
}

} // namespace detail

Field::Field(GridPtr grid, std::vector<double> samples)
    : grid_(std::move(grid)), samples_(std::move(samples)) {
    if (!grid_) throw config_error("field requires a grid");
    if (samples_.size() != grid_->n_points)
        throw config_error("sample count does not match grid size");
    for (double v : samples_)
        if (!std::isfinite(v)) throw config_error("field samples must be finite");
    std::vector<std::complex<double>> tmp(samples_.begin(), samples_.end());
    spectrum_ = detail::forward_transform(*grid_, tmp);
}

Field Field::from_spectrum(GridPtr grid, const std::vector<std::complex<double>>& spectrum) {
    if (!grid) throw config_error("field requires a grid");
    if (spectrum.size() != grid->n_points)
        throw config_error("spectrum size does not match grid size");
    auto values = detail::inverse_transform(*grid, spectrum);
    std::vector<double> samples(grid->n_points);
    for (std::size_t j = 0; j < samples.size(); ++j)
        samples[j] = values[j].real();
    return Field(std::move(grid), std::move(samples));
}

Field Field::zeros(GridPtr grid) {
    if (!grid) throw config_error("field requires a grid");
    const std::size_t n = grid->n_points;
    return Field(std::move(grid), std::vector<double>(n, 0.0));
}

double Field::l2_norm() const {
    double s = 0.0;
    for (double v : samples_) s += v * v;
    return std::sqrt(s * grid_->spacing());
}

} // namespace dgbo
