#include "dgbo/grid.hpp"

#include "dgbo/errors.hpp"

#include <cmath>
#include <string>

namespace dgbo {

double Grid::xi_spacing() const {
    return 2.0 * M_PI / box_length;
}

double Grid::xi_max() const {
    return xi_spacing() * static_cast<double>(n_points / 2);
}

GridPtr make_grid(std::size_t n_points, double box_length) {
    if (n_points < 16 || n_points % 2 != 0)
        throw config_error("grid size must be an even integer >= 16, got " + std::to_string(n_points));
    if (!(box_length > 0.0))
        throw config_error("box length must be positive, got " + std::to_string(box_length));

    auto g = std::make_shared<Grid>();
    g->n_points = n_points;
    g->box_length = box_length;
    g->nodes.resize(n_points);
    g->wavenumbers.resize(n_points);
    const double dx = box_length / static_cast<double>(n_points);
    const double dxi = 2.0 * M_PI / box_length;
    const auto n = static_cast<std::ptrdiff_t>(n_points);
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        g->nodes[static_cast<std::size_t>(j)] = -0.5 * box_length + dx * static_cast<double>(j);
        // FFT index j maps to signed mode j for j < n/2 and j - n beyond.
        const std::ptrdiff_t k = (j < n / 2) ? j : j - n;
        g->wavenumbers[static_cast<std::size_t>(j)] = dxi * static_cast<double>(k);
    }
    return g;
}

} // namespace dgbo
