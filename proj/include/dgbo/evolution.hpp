#pragma once

#include "dgbo/field.hpp"
#include "dgbo/functionals.hpp"
#include "dgbo/spectral.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dgbo {

// Time-stepping controls shared by the production integrator and the
// short-time fixed-point oracle.
struct SolverConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    double dealias_fraction = 2.0 / 3.0;
    enum class Integrator { if_rk4, picard_oracle };
    Integrator integrator = Integrator::if_rk4;
    int picard_max_iter = 60;
    double picard_tol = 1e-14;
    int record_every = 1;
    // Test hook: drop the nonlinear term so the stepper must reproduce the
    // free propagator exactly.
    bool nonlinearity_disabled = false;
};

// Everything a run leaves behind: sample times, one value series per probe
// (plus an automatic boundary_mass series), warnings, a manifest echoing the
// configuration and grid conventions, and the final state.
struct RunRecord {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> diagnostics;
    std::vector<std::string> warnings;
    std::string manifest;
    std::optional<Field> final_state;
};

// -1/2 d/dx (u^2), dealiased before and after the pointwise square: modes
// with |k| above dealias_fraction * n/2 are zeroed.
Field nonlinear_rhs(const Field& u, const SolverConfig& cfg);

// Integrate u_t + D^{a+1} u_x + u u_x = 0 to t_final. The integrating-factor
// variable v_hat = exp(i t omega) u_hat makes the linear phase exact; the
// nonlinear part advances by classical RK4. Probes are recorded at t=0, every
// record_every-th step, and at t_final. Aborts (solver_abort) when any sample
// passes 1e12 or the advective CFL dt * max|u| * xi_max >= 1 fails.
RunRecord evolve(const Field& u0, const DispersionParams& p, const SolverConfig& cfg,
                 const std::vector<std::string>& probes);

// Short-time solution of the integral form u(t) = U(t)u0 - int_0^t U(t-s)
// (1/2)(u^2)_x ds by fixed-point iteration, discretized on 8 consecutive
// panels, each carrying an 8-point Gauss-Legendre rule with the iterate
// history held at the quadrature nodes and evaluated between nodes by
// barycentric interpolation. Inner time integrals use a nested 8-point rule.
// Iteration stops below cfg.picard_tol in the sup norm of the spectrum;
// residual growth over 3 consecutive sweeps raises solver_abort advising a
// smaller horizon.
Field picard_oracle(const Field& u0, const DispersionParams& p, const SolverConfig& cfg,
                    double t);

} // namespace dgbo
