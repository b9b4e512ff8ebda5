#pragma once

#include "dgbo/field.hpp"

#include <complex>
#include <string>
#include <vector>

namespace dgbo {

/// @file stein.hpp
/// @brief Pointwise fractional derivative, fractional weighted norms, and the
///        asymptotic and expansion diagnostics built on them.
///
/// The central object is the square-root singular integral
///   D^b f(x) = ( integral |f(x)-f(y)|^2 / |x-y|^{1+2b} dy )^{1/2},
/// evaluated by composite quadrature: a Taylor model inside a small ball
/// around y=x, midpoint quadrature out to an outer radius, and a closed-form
/// estimate for the remaining tail.

// How the quadrature accounts for the integral beyond the outer radius R.
//
// sup_bound:   2 sup|f|^2 R^{-2b}/(2b), a uniform upper estimate.
// local_value: 2 |f(x)|^2 R^{-2b}/(2b), exact when f vanishes beyond R and
//              the right model when the far field decorrelates from f(x);
//              this is the model the spectral norm route relies on.
// none:        truncate. The only model under which D^b(f + const) = D^b f
//              holds exactly, since the quadrature then uses differences only.
enum class TailModel { sup_bound, local_value, none };

struct SteinParams {
    double b = 0.5;           // order, in (0,1)
    double inner_cutoff = 0.0; // Taylor ball radius; 0 picks half a spacing
    double outer_limit = 0.0;  // quadrature radius; 0 picks 0.9 * half extent
    TailModel tail_model = TailModel::sup_bound;
};

// Parameters tuned for fractional_weighted_norm: auto cutoffs and the
// local_value tail (the order b is overridden by the norm's theta).
SteinParams spectral_norm_params();

// Pointwise D^b on uniformly spaced samples (real or complex); the grid enters
// only through the spacing. Rejects b outside (0,1), an inner cutoff above the
// spacing, and an outer limit above the sampled extent.
std::vector<double> stein_derivative(const std::vector<std::complex<double>>& f, double spacing,
                                     const SteinParams& p);
std::vector<double> stein_derivative(const std::vector<double>& f, double spacing,
                                     const SteinParams& p);
// Convenience overload on the physical samples of a field.
std::vector<double> stein_derivative(const Field& f, const SteinParams& p);

// The decay norm |(|x|^{k+theta} u)|_{L2} evaluated on the Fourier side:
// k-th xi-derivative of the spectrum, then D^theta on the xi grid, then the
// L2(dxi) norm, scaled by the Plancherel constant of the fractional weight.
// Warns (when a sink is given) if boundary mass taints the x-moments.
double fractional_weighted_norm(const Field& u, int k, double theta,
                                SteinParams p = spectral_norm_params(),
                                std::string* warning = nullptr);

// Residual of the k-th xi-derivative product expansion: the left side applies
// a high-order finite-difference derivative k times to (phase * spectrum); the
// right side assembles the closed-form expansion from exact xi-derivatives of
// the spectrum and the phase-derivative factors. Returns the maximum
// difference over the clean band, relative to the band's largest right-side
// value. k must lie in 1..5.
double expansion_check(const Field& f, double t, double a, int k);

// Slope and square-integrability report for D^theta(|xi|^alpha * cutoff).
struct DsteinReport {
    double small_eta_slope; // fitted on |eta| in [1e-3, 1e-2]; NaN when alpha >= theta
    double tail_slope;      // fitted on |eta| in [1e2, 1e3]
    double l2_coarse;       // ladder norm starting at eta = 1e-6
    double l2_fine;         // ladder norm starting at eta = 1.25e-7
    double l2_change;       // relative change between the two rungs
    bool l2_converged;      // change below 5 percent
};

// Evaluates D^theta of |xi|^alpha (optionally times sgn) under a smoothstep
// cutoff supported on [-2,2], on log-spaced evaluation points; fits the
// small-eta and tail slopes and runs the two-rung refinement ladder for the
// L2 membership indicator. alpha must exceed -1/2, theta lie in (0,1).
DsteinReport dstein_asymptotics(double alpha, double theta, bool signed_variant = false);

// Fitted-constant report for D^b of the free-propagator phase at fixed time.
struct PhaseBoundReport {
    std::vector<double> x;        // evaluation points
    std::vector<double> value;    // D^b of the phase
    std::vector<double> envelope; // t^{b/(2+a)} + t^b |x|^{(1+a)b}
    double max_ratio;             // max of value/envelope over the points
};
PhaseBoundReport pointwise_phase_bound(double t, double a, double b);

} // namespace dgbo
