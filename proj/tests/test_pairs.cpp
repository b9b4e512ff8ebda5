#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dgbo/errors.hpp"
#include "dgbo/functionals.hpp"
#include "dgbo/pairs.hpp"
#include "dgbo/spectral.hpp"

#include "test_util.hpp"

#include <cmath>
#include <vector>

using namespace dgbo;
using testutil::sample;

namespace {

// Independent quadrature routes, deliberately not going through the
// functionals module: raw full-box sums and a physical-space I3.
double raw_moment(const Field& u, int k, bool of_square) {
    const Grid& g = u.grid();
    double s = 0.0;
    for (std::size_t j = 0; j < g.n_points; ++j) {
        double v = u.samples()[j];
        if (of_square) v *= v;
        s += std::pow(g.nodes[j], k) * v;
    }
    return s * g.spacing();
}

double raw_i3(const Field& u) {
    Field half = riesz_derivative(u, 0.5);
    const Grid& g = u.grid();
    double s = 0.0;
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double d = half.samples()[j];
        const double v = u.samples()[j];
        s += d * d + v * v * v / 3.0;
    }
    return s * g.spacing();
}

double raw_value(const Field& u, Constraint c) {
    switch (c) {
    case Constraint::equal_L2: return raw_moment(u, 0, true);
    case Constraint::equal_mass: return raw_moment(u, 0, false);
    case Constraint::equal_first_moment: return raw_moment(u, 1, false);
    case Constraint::equal_second_moment: return raw_moment(u, 2, false);
    case Constraint::equal_x_square_moment: return raw_moment(u, 1, true);
    case Constraint::equal_I3: return raw_i3(u);
    }
    return 0.0;
}

} // namespace

TEST_CASE("constraint residuals") {
    auto g = make_grid(1024, 100.0);
    Field base = sample(g, [](double x) { return std::exp(-x * x); });

    PerturbationFamily fam = hermite_family(base, 4, 1.5);
    auto r0 = constraint_residual(fam, MomentConstraints::dgbo_preset());
    for (double v : r0) CHECK(v == 0.0);

    // Odd perturbation of an even base: mass untouched, first moment moved.
    Field odd = sample(g, [](double x) { return x * std::exp(-x * x); });
    PerturbationFamily fo{base, {odd}, {0.3}};
    MomentConstraints two;
    two.tags = {Constraint::equal_mass, Constraint::equal_first_moment};
    auto r = constraint_residual(fo, two);
    CHECK(std::abs(r[0]) <= 1e-13);
    CHECK(r[1] == doctest::Approx(0.3 * std::sqrt(M_PI) / 2.0).epsilon(1e-10));

    // Fixed nonzero coefficients: finite, reproducible, and matching an
    // independent quadrature of both profiles.
    PerturbationFamily fr = hermite_family(base, 4, 1.5);
    fr.coefficients = {0.1, -0.05, 0.02, 0.03};
    auto cons = MomentConstraints::dgbo_preset();
    auto ra = constraint_residual(fr, cons);
    auto rb = constraint_residual(fr, cons);
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(std::isfinite(ra[i]));
        CHECK(ra[i] == rb[i]);
        const double indep =
            raw_value(fr.perturbed(), cons.tags[i]) - raw_value(fr.base, cons.tags[i]);
        CHECK(ra[i] == doctest::Approx(indep).epsilon(1e-10));
    }

    MomentConstraints dup;
    dup.tags = {Constraint::equal_mass, Constraint::equal_mass};
    CHECK_THROWS_AS(constraint_residual(fr, dup), config_error);
}

TEST_CASE("single linear constraint with an adapted basis") {
    auto g = make_grid(1024, 100.0);
    Field base = sample(g, [](double x) { return std::exp(-x * x); });
    Field bump = make_zero_mean(sample(g, [](double x) { return std::exp(-4.0 * x * x); }));

    MomentConstraints cons;
    cons.tags = {Constraint::equal_mass};
    PerturbationFamily fam{base, {bump}, {0.0}};
    auto pair = match_pair(fam, cons, 0.05);

    CHECK(std::abs(pair.certificate.residuals[0].second) <= 1e-12);
    CHECK(pair.certificate.separation == doctest::Approx(0.05).epsilon(1e-10));
    // The perturbation is the bump itself, scaled to the sphere.
    Field diff(g, [&] {
        std::vector<double> d(g->n_points);
        for (std::size_t j = 0; j < g->n_points; ++j)
            d[j] = pair.perturbed.samples()[j] - pair.base.samples()[j];
        return d;
    }());
    double dot = 0.0;
    for (std::size_t j = 0; j < g->n_points; ++j)
        dot += diff.samples()[j] * bump.samples()[j];
    dot *= g->spacing();
    CHECK(std::abs(dot) / (diff.l2_norm() * bump.l2_norm()) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(pair.certificate.iterations <= 5);
}

TEST_CASE("matched pair with three constraints") {
    auto g = make_grid(1024, 100.0);
    Field base = sample(g, [](double x) { return std::exp(-x * x); });
    auto cons = MomentConstraints::dgbo_preset();
    auto pair = match_pair(hermite_family(base, 5, 1.5), cons, 0.1);

    for (const auto& [name, res] : pair.certificate.residuals) {
        CAPTURE(name);
        CHECK(std::abs(res) <= 1e-12);
    }
    CHECK(std::abs(pair.certificate.separation - 0.1) <= 1e-10);

    // Independent validation pass: fresh quadrature route on both fields.
    for (Constraint c : cons.tags)
        CHECK(std::abs(raw_value(pair.perturbed, c) - raw_value(pair.base, c)) <= 1e-11);

    // The perturbed datum really is a different function.
    double linf = 0.0;
    for (std::size_t j = 0; j < g->n_points; ++j)
        linf = std::max(linf,
                        std::abs(pair.perturbed.samples()[j] - pair.base.samples()[j]));
    CHECK(linf > 1e-3);

    // Convergence monitor: history decreasing at the end, constant finite.
    const auto& h = pair.certificate.residual_history;
    REQUIRE(h.size() >= 3);
    CHECK(h.back() <= 1e-12);
    CHECK(h[h.size() - 2] > h.back());
    CHECK(std::isfinite(pair.certificate.quadratic_constant));
}

TEST_CASE("matched pair with all six constraints") {
    auto g = make_grid(1024, 100.0);
    Field base = sample(g, [](double x) { return std::exp(-x * x); });
    auto cons = MomentConstraints::bo_preset();
    auto pair = match_pair(hermite_family(base, 8, 1.5), cons, 0.05);

    REQUIRE(pair.certificate.residuals.size() == 6);
    for (const auto& [name, res] : pair.certificate.residuals) {
        CAPTURE(name);
        CHECK(std::abs(res) <= 1e-12);
    }
    CHECK(std::abs(pair.certificate.separation - 0.05) <= 1e-10);
    for (Constraint c : cons.tags)
        CHECK(std::abs(raw_value(pair.perturbed, c) - raw_value(pair.base, c)) <= 1e-11);

    // Serialized certificate carries every residual by name.
    std::string text = pair.certificate.to_text();
    for (const auto& [name, res] : pair.certificate.residuals)
        CHECK(text.find(name) != std::string::npos);
    CHECK(text.find("separation") != std::string::npos);
}

TEST_CASE("degenerate family is rejected") {
    auto g = make_grid(512, 100.0);
    Field base = sample(g, [](double x) { return std::exp(-x * x); });
    Field one = sample(g, [](double x) { return std::exp(-2.0 * x * x); });
    MomentConstraints cons;
    cons.tags = {Constraint::equal_mass, Constraint::equal_first_moment};
    // Two copies of the same profile span a line; two constraints cannot both
    // be controlled from it.
    PerturbationFamily fam{base, {one, one}, {0.0, 0.0}};
    CHECK_THROWS_AS(match_pair(fam, cons, 0.05), config_error);
}

TEST_CASE("zero mean projection") {
    auto g = make_grid(1024, 100.0);

    Field already = sample(g, [](double x) { return x * std::exp(-x * x); });
    Field same = make_zero_mean(already);
    double linf = 0.0;
    for (std::size_t j = 0; j < g->n_points; ++j)
        linf = std::max(linf, std::abs(same.samples()[j] - already.samples()[j]));
    CHECK(linf <= 1e-12);
    // Valid datum for the cancellation-time experiment: zero mass but
    // a nonzero first moment matching the closed form.
    CHECK(std::abs(raw_moment(same, 0, false)) <= 1e-12);
    CHECK(raw_moment(same, 1, false) ==
          doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-10));

    Field even = sample(g, [](double x) { return std::exp(-x * x); });
    Field fixed = make_zero_mean(even);
    CHECK(std::abs(raw_moment(fixed, 0, false)) <= 1e-12);
    CHECK(std::abs(raw_moment(fixed, 1, false)) <= 1e-12);

    Field both = make_zero_mean(sample(g, [](double x) {
        return std::exp(-0.25 * (x - 1.0) * (x - 1.0));
    }), true);
    CHECK(std::abs(raw_moment(both, 0, false)) <= 1e-12);
    CHECK(std::abs(raw_moment(both, 1, false)) <= 1e-12);
}
