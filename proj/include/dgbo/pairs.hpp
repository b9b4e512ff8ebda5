#pragma once

#include "dgbo/field.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace dgbo {

/// @file pairs.hpp
/// @brief Construction of distinct initial-data pairs with matched moments.
///
/// A pair (perturbed, base) is built as perturbed = base + sum c_i g_i over a
/// small family of localized profiles g_i. A damped Newton iteration drives
/// the selected moment equalities to zero while holding the perturbation on
/// the sphere of radius `separation`, so the two data are provably distinct
/// and provably matched, and the result ships with a machine-checkable
/// certificate.

// One moment equality between the two data of a pair.
enum class Constraint {
    equal_L2,              // integral of u^2
    equal_mass,            // integral of u
    equal_first_moment,    // integral of x u
    equal_second_moment,   // integral of x^2 u
    equal_x_square_moment, // integral of x u^2
    equal_I3,              // quadratic-plus-cubic invariant
};

std::string constraint_name(Constraint c);

// Constraint selection plus optional preprocessing of the base profile
// (projection to zero mean, optionally also zero first moment).
struct MomentConstraints {
    std::vector<Constraint> tags;
    bool zero_mean = false;
    bool zero_first_moment = false;

    // Mass, first moment, and L2 norm matched.
    static MomentConstraints dgbo_preset();
    // All six equalities matched.
    static MomentConstraints bo_preset();
};

// The perturbation family: base profile, basis profiles, and coefficients.
// Provide at least one more basis function than constraints so a nontrivial
// solution manifold exists; an under-provisioned family surfaces as a
// degenerate-Jacobian error from match_pair.
struct PerturbationFamily {
    Field base;
    std::vector<Field> basis;
    std::vector<double> coefficients;

    // sum c_i g_i on the base grid.
    Field perturbation() const;
    // base + sum c_i g_i.
    Field perturbed() const;
};

// Gaussian-times-Hermite basis of degrees 0..m-1 at the given width, each
// element normalized to unit L2 norm on the grid of `base`.
PerturbationFamily hermite_family(const Field& base, std::size_t m, double width);

// One residual per tag, LHS minus RHS of the corresponding equality between
// perturbed and base, each evaluated with the functionals module.
std::vector<double> constraint_residual(const PerturbationFamily& fam,
                                        const MomentConstraints& cons);

// Solver evidence attached to a matched pair.
struct PairCertificate {
    // (constraint name, residual) per tag, in tag order.
    std::vector<std::pair<std::string, double>> residuals;
    double separation = 0.0;           // measured L2 distance of the pair
    double requested_separation = 0.0; // the sphere radius asked for
    std::vector<double> coefficients;  // solved family coefficients
    int iterations = 0;
    std::vector<double> residual_history; // sup-norm residual after each step
    double quadratic_constant = 0.0;      // fitted C in r_{k+1} <= C r_k^2

    // "name value" lines, full double precision; ends with a newline.
    std::string to_text() const;
};

struct MatchedPair {
    Field perturbed;
    Field base;
    PairCertificate certificate;
};

// Damped Newton with line search over the family coefficients, solving
// residual(c) = 0 together with the sphere equation |sum c_i g_i| = separation.
// Throws config_error for an under-determined basis (Jacobian rank below the
// constraint count) and solver_abort when 100 iterations fail to reach tol.
MatchedPair match_pair(PerturbationFamily fam, const MomentConstraints& cons,
                       double separation, double tol = 1e-12);

// Subtracts a fixed even localized profile scaled to cancel the integral of f
// (and, if requested, an odd one to cancel the first moment). Output mass is
// zero to quadrature rounding.
Field make_zero_mean(const Field& f, bool also_first_moment = false);

} // namespace dgbo
