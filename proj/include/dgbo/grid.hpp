#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace dgbo {

// Uniform periodic grid on [-L/2, L/2) with the matching discrete wavenumber
// set. Wavenumbers are stored in FFT order: 2*pi/L * {0, 1, ..., n/2-1, -n/2,
// ..., -1}, so wavenumbers[k] pairs with spectrum index k everywhere.
struct Grid {
    std::size_t n_points = 0;
    double box_length = 0.0;
    std::vector<double> nodes;
    std::vector<double> wavenumbers;

    double spacing() const { return box_length / static_cast<double>(n_points); }
    double xi_spacing() const;
    double xi_max() const;
    std::size_t nyquist_index() const { return n_points / 2; }
};

using GridPtr = std::shared_ptr<const Grid>;

// Throws config_error for odd counts, counts below 16, or non-positive length.
GridPtr make_grid(std::size_t n_points, double box_length);

} // namespace dgbo
