#pragma once

#include "dgbo/grid.hpp"

#include <complex>
#include <vector>

namespace dgbo {

// Real-valued function sampled on a Grid, with the matching spectral view.
//
// Normalization: spectrum[k] approximates the continuum transform
// integral of f(x) exp(-i xi_k x) dx, i.e. spectrum[k] = dx * (-1)^k * DFT_k
// for the node layout starting at -L/2. Parseval then reads
// dx * sum f_j^2 = (1/L) * sum |spectrum_k|^2.
//
// A Field is immutable once constructed and both representations are realized
// at construction, so concurrent reads need no synchronization. The stored
// spectrum is always the exact transform of the stored samples; building from
// a spectrum realizes samples first (real part) and re-derives the spectrum
// from them, which keeps the pair consistent even for inputs without exact
// conjugate symmetry.
class Field {
  public:
    Field(GridPtr grid, std::vector<double> samples);

    static Field from_spectrum(GridPtr grid, const std::vector<std::complex<double>>& spectrum);
    static Field zeros(GridPtr grid);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<double>& samples() const { return samples_; }
    const std::vector<std::complex<double>>& spectrum() const { return spectrum_; }

    // sqrt(dx * sum f_j^2), the discrete L2 norm.
    double l2_norm() const;

  private:
    GridPtr grid_;
    std::vector<double> samples_;
    std::vector<std::complex<double>> spectrum_;
};

namespace detail {

// spectrum[k] = dx * (-1)^k * DFT_k of the (possibly complex) node values.
std::vector<std::complex<double>> forward_transform(const Grid& g,
                                                    const std::vector<std::complex<double>>& values);

// Inverse of forward_transform, returning complex node values.
std::vector<std::complex<double>> inverse_transform(const Grid& g,
                                                    const std::vector<std::complex<double>>& spectrum);

} // namespace detail

} // namespace dgbo
