#pragma once

#include "dgbo/field.hpp"

#include <functional>
#include <optional>
#include <string>

namespace dgbo {

// Weight selection for moments and weighted norms.
//
// Two algebraic conventions are supported, both reducing to the same thing at
// r=1: the default squared weight is (1 + x^{2r}); with angle_bracket set it
// is (1 + x^2)^r, the r-th power of the squared bracket weight. When
// truncation_n is set the bracket weight is replaced by its truncated version
// <x>_N (smooth, non-decreasing, equal to sqrt(1+x^2) for |x| <= N, constant
// 2N for |x| >= 3N, derivative at most 1), raised to 2r.
//
// Every weight is hard-zeroed outside |x| <= W. window_half_width defaults to
// 0.4*L, keeping the box edge out of all x-weighted quadratures.
struct WeightSpec {
    double r = 0.0;
    std::optional<double> window_half_width;
    std::optional<int> truncation_n;
    bool angle_bracket = false;
};

enum class Conserved { I1, I2, I3 };

// I1 = integral of u, I2 = integral of u^2, I3 = integral of |D^{1/2}u|^2 +
// u^3/3. The quadratic part of I3 is evaluated spectrally as
// (1/L) sum |xi| |u_hat|^2, which is the same quadrature by Parseval.
double functional_I(const Field& u, Conserved which);

// Windowed moment: integral over |x| <= W of x^k u (or x^k u^2). k in 0..2.
// Sets *warning when boundary_mass(u) > 1e-8 * I2(u).
double moment(const Field& u, int k, bool of_square, const WeightSpec& w = {},
              std::string* warning = nullptr);

// Windowed weighted norm, square root of the weighted L2 integral described
// on WeightSpec. Same boundary-mass warning as moment.
double weighted_norm(const Field& u, const WeightSpec& w = {}, std::string* warning = nullptr);

// Mass sitting next to the box edge: integral of u^2 over |x| > 0.9*(L/2).
double boundary_mass(const Field& u);

// The truncated bracket weight <x>_N at a point. Profile: exact bracket up to
// |x|=N, then a monotone smoothstep ramp whose slope starts at the bracket's
// own slope N/<N> and whose total rise lands exactly on the plateau value 2N;
// the ramp closes at |x| = N + s*2N with s <= 1, and the weight is constant 2N
// from there on (in particular for all |x| >= 3N).
double truncated_angle_weight(double x, int n_trunc);

// Effective window half width for a spec on a grid (resolves the 0.4*L default).
double resolve_window(const WeightSpec& w, const Grid& g);

// Named diagnostics for time series: "I1", "I2", "I3", "M1", "M2", "xM_sq",
// "Zr:<r>", "ZrN:<r>,<N>", "boundary_mass". Unknown names are rejected.
using Probe = std::function<double(const Field&)>;
Probe make_probe(const std::string& name);

} // namespace dgbo
