/// @file lab.cpp
/// @brief Config round-trip, experiment drivers, and artifact writers.
///
/// Layout: JSON schema handling first, then the named-profile builder, then
/// one driver per experiment kind, then the output writers and the CLI-facing
/// run_lab pipeline. Every driver returns a LabReport; policy about exit
/// codes and files lives entirely in write_outputs / run_lab so the drivers
/// stay testable in memory.

#include "dgbo/lab.hpp"

#include "dgbo/errors.hpp"
#include "dgbo/evolution.hpp"
#include "dgbo/pairs.hpp"
#include "dgbo/spectral.hpp"
#include "dgbo/stein.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

namespace dgbo {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 7> kKinds = {
    "evolve",     "identities",  "tstar",           "pair-match",
    "diff-decay", "stein-suite", "expansion-suite",
};

bool recognized_kind(const std::string& k) {
    return std::find(kKinds.begin(), kKinds.end(), k) != kKinds.end();
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmtg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || (it.key() == k);
        if (!ok)
            throw config_error("unknown key \"" + it.key() + "\" in " + where);
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

ProfileSpec parse_profile(const json& j, const char* where) {
    if (!j.is_object()) throw config_error(std::string(where) + " must be an object");
    check_keys(j, {"profile", "params", "amplitude", "zero_mean", "zero_first_moment"}, where);
    ProfileSpec p;
    p.name = get_or<std::string>(j, "profile", p.name);
    p.params = get_or<std::vector<double>>(j, "params", p.params);
    p.amplitude = get_or<double>(j, "amplitude", p.amplitude);
    p.zero_mean = get_or<bool>(j, "zero_mean", p.zero_mean);
    p.zero_first_moment = get_or<bool>(j, "zero_first_moment", p.zero_first_moment);
    return p;
}

json emit_profile(const ProfileSpec& p) {
    return json{{"profile", p.name},
                {"params", p.params},
                {"amplitude", p.amplitude},
                {"zero_mean", p.zero_mean},
                {"zero_first_moment", p.zero_first_moment}};
}

} // namespace

LabConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config root must be a JSON object");
    check_keys(j,
               {"kind", "grid", "dispersion_a", "solver", "initial_data", "initial_data_2",
                "pair", "suite", "probes", "refinement"},
               "config");

    LabConfig c;
    c.kind = get_or<std::string>(j, "kind", std::string{});
    if (!c.kind.empty() && !recognized_kind(c.kind))
        throw config_error("unrecognized experiment kind \"" + c.kind + "\"");

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, {"n", "box_length"}, "grid");
        c.grid_n = get_or<std::size_t>(g, "n", c.grid_n);
        c.box_length = get_or<double>(g, "box_length", c.box_length);
    }

    c.dispersion_a = get_or<double>(j, "dispersion_a", c.dispersion_a);
    if (!(c.dispersion_a >= 0.0 && c.dispersion_a <= 1.0))
        throw config_error("dispersion_a must lie in [0, 1]");

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        check_keys(s, {"dt", "t_final", "record_every", "integrator", "dealias_fraction"},
                   "solver");
        c.dt = get_or<double>(s, "dt", c.dt);
        c.t_final = get_or<double>(s, "t_final", c.t_final);
        c.record_every = get_or<int>(s, "record_every", c.record_every);
        c.integrator = get_or<std::string>(s, "integrator", c.integrator);
        c.dealias_fraction = get_or<double>(s, "dealias_fraction", c.dealias_fraction);
    }
    if (c.integrator != "if_rk4" && c.integrator != "picard_oracle")
        throw config_error("integrator must be if_rk4 or picard_oracle");

    if (j.contains("initial_data")) c.initial_data = parse_profile(j.at("initial_data"), "initial_data");
    if (j.contains("initial_data_2"))
        c.initial_data_2 = parse_profile(j.at("initial_data_2"), "initial_data_2");

    if (j.contains("pair")) {
        const json& p = j.at("pair");
        check_keys(p,
                   {"preset", "basis_size", "basis_width", "separation", "tolerance",
                    "certificate", "null_pair"},
                   "pair");
        c.pair.preset = get_or<std::string>(p, "preset", c.pair.preset);
        c.pair.basis_size = get_or<std::size_t>(p, "basis_size", c.pair.basis_size);
        c.pair.basis_width = get_or<double>(p, "basis_width", c.pair.basis_width);
        c.pair.separation = get_or<double>(p, "separation", c.pair.separation);
        c.pair.tolerance = get_or<double>(p, "tolerance", c.pair.tolerance);
        c.pair.certificate = get_or<std::string>(p, "certificate", c.pair.certificate);
        c.pair.null_pair = get_or<bool>(p, "null_pair", c.pair.null_pair);
    }

    if (j.contains("suite")) {
        const json& s = j.at("suite");
        check_keys(s,
                   {"orders", "times", "a_values", "alphas", "thetas", "signed_profile",
                    "phase_times", "phase_a", "phase_b"},
                   "suite");
        c.suite.orders = get_or<std::vector<int>>(s, "orders", c.suite.orders);
        c.suite.times = get_or<std::vector<double>>(s, "times", c.suite.times);
        c.suite.a_values = get_or<std::vector<double>>(s, "a_values", c.suite.a_values);
        c.suite.alphas = get_or<std::vector<double>>(s, "alphas", c.suite.alphas);
        c.suite.thetas = get_or<std::vector<double>>(s, "thetas", c.suite.thetas);
        c.suite.signed_profile = get_or<bool>(s, "signed_profile", c.suite.signed_profile);
        c.suite.phase_times = get_or<std::vector<double>>(s, "phase_times", c.suite.phase_times);
        c.suite.phase_a = get_or<double>(s, "phase_a", c.suite.phase_a);
        c.suite.phase_b = get_or<double>(s, "phase_b", c.suite.phase_b);
    }

    c.probes = get_or<std::vector<std::string>>(j, "probes", c.probes);
    c.refinement = get_or<bool>(j, "refinement", c.refinement);
    return c;
}

std::string emit_config_text(const LabConfig& c) {
    json j;
    j["kind"] = c.kind;
    j["grid"] = {{"n", c.grid_n}, {"box_length", c.box_length}};
    j["dispersion_a"] = c.dispersion_a;
    j["solver"] = {{"dt", c.dt},
                   {"t_final", c.t_final},
                   {"record_every", c.record_every},
                   {"integrator", c.integrator},
                   {"dealias_fraction", c.dealias_fraction}};
    j["initial_data"] = emit_profile(c.initial_data);
    if (c.initial_data_2) j["initial_data_2"] = emit_profile(*c.initial_data_2);
    j["pair"] = {{"preset", c.pair.preset},
                 {"basis_size", c.pair.basis_size},
                 {"basis_width", c.pair.basis_width},
                 {"separation", c.pair.separation},
                 {"tolerance", c.pair.tolerance},
                 {"certificate", c.pair.certificate},
                 {"null_pair", c.pair.null_pair}};
    j["suite"] = {{"orders", c.suite.orders},
                  {"times", c.suite.times},
                  {"a_values", c.suite.a_values},
                  {"alphas", c.suite.alphas},
                  {"thetas", c.suite.thetas},
                  {"signed_profile", c.suite.signed_profile},
                  {"phase_times", c.suite.phase_times},
                  {"phase_a", c.suite.phase_a},
                  {"phase_b", c.suite.phase_b}};
    j["probes"] = c.probes;
    j["refinement"] = c.refinement;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

Field build_profile(const ProfileSpec& ps, const GridPtr& g, bool reflect) {
    const double sgn = reflect ? -1.0 : 1.0;
    std::vector<double> s(g->n_points, 0.0);

    if (ps.name == "gaussian_sum") {
        if (ps.params.empty() || ps.params.size() % 3 != 0)
            throw config_error(
                "gaussian_sum params must be (coefficient, width, center) triples");
        for (std::size_t i = 1; i < ps.params.size(); i += 3)
            if (!(ps.params[i] > 0.0)) throw config_error("gaussian widths must be positive");
        for (std::size_t jn = 0; jn < g->n_points; ++jn) {
            const double x = sgn * g->nodes[jn];
            double v = 0.0;
            for (std::size_t i = 0; i + 2 < ps.params.size(); i += 3) {
                const double y = (x - ps.params[i + 2]) / ps.params[i + 1];
                v += ps.params[i] * std::exp(-y * y);
            }
            s[jn] = ps.amplitude * v;
        }
    } else if (ps.name == "polynomial_gaussian_sum") {
        if (ps.params.empty() || ps.params.size() % 4 != 0)
            throw config_error("polynomial_gaussian_sum params must be "
                               "(coefficient, width, center, degree) quadruples");
        for (std::size_t i = 0; i < ps.params.size(); i += 4) {
            if (!(ps.params[i + 1] > 0.0))
                throw config_error("gaussian widths must be positive");
            const double d = ps.params[i + 3];
            if (!(d >= 0.0 && d <= 8.0 && d == std::floor(d)))
                throw config_error("polynomial degrees must be integers in 0..8");
        }
        for (std::size_t jn = 0; jn < g->n_points; ++jn) {
            const double x = sgn * g->nodes[jn];
            double v = 0.0;
            for (std::size_t i = 0; i + 3 < ps.params.size(); i += 4) {
                const double y = (x - ps.params[i + 2]) / ps.params[i + 1];
                v += ps.params[i] * std::pow(x, ps.params[i + 3]) * std::exp(-y * y);
            }
            s[jn] = ps.amplitude * v;
        }
    } else if (ps.name == "odd_gaussian") {
        if (ps.params.size() != 1 || !(ps.params[0] > 0.0))
            throw config_error("odd_gaussian takes a single positive width parameter");
        for (std::size_t jn = 0; jn < g->n_points; ++jn) {
            const double x = sgn * g->nodes[jn];
            const double y = x / ps.params[0];
            s[jn] = ps.amplitude * x * std::exp(-y * y);
        }
    } else {
        throw config_error("unknown profile \"" + ps.name + "\"");
    }

    Field f(g, std::move(s));
    if (ps.zero_mean || ps.zero_first_moment) f = make_zero_mean(f, ps.zero_first_moment);
    return f;
}

namespace {

// ---------------------------------------------------------------------------
// Shared driver helpers
// ---------------------------------------------------------------------------

SolverConfig solver_of(const LabConfig& c) {
    SolverConfig s;
    s.dt = c.dt;
    s.t_final = c.t_final;
    s.record_every = c.record_every;
    s.dealias_fraction = c.dealias_fraction;
    s.integrator = (c.integrator == "picard_oracle") ? SolverConfig::Integrator::picard_oracle
                                                     : SolverConfig::Integrator::if_rk4;
    return s;
}

void add_verdict(LabReport& rep, std::string name, double dev, double tol, bool skip = false) {
    LabVerdict v;
    v.name = std::move(name);
    v.deviation = dev;
    v.tolerance = tol;
    v.status = skip ? "SKIP" : ((dev <= tol) ? "PASS" : "FAIL");
    rep.verdicts.push_back(std::move(v));
}

void add_note(LabReport& rep, const std::string& key, const std::string& value) {
    rep.notes.emplace_back(key, value);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

// Fourth central difference of the spectrum across xi = 0, normalized by the
// mode spacing to the fourth power. Large values flag a kink in u_hat at the
// origin, the low-frequency obstruction to persistent spatial decay.
double lowfreq_indicator(const Field& u) {
    const auto& F = u.spectrum();
    const std::size_t n = F.size();
    const std::complex<double> d =
        F[2] - 4.0 * F[1] + 6.0 * F[0] - 4.0 * F[n - 1] + F[n - 2];
    const double dxi = u.grid().xi_spacing();
    return std::abs(d) / (dxi * dxi * dxi * dxi);
}

Field field_difference(const Field& a, const Field& b) {
    std::vector<double> s(a.samples());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] -= b.samples()[j];
    return Field(a.grid_ptr(), std::move(s));
}

double sup_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.samples()) m = std::max(m, std::abs(v));
    return m;
}

// Least-squares fit y ~ c0 + c1 t + c2 t^2.
std::array<double, 3> quadratic_fit(const std::vector<double>& t, const std::vector<double>& y) {
    Eigen::MatrixXd A(t.size(), 3);
    Eigen::VectorXd b(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = t[i];
        A(i, 2) = t[i] * t[i];
        b(i) = y[i];
    }
    Eigen::Vector3d c = A.completeOrthogonalDecomposition().solve(b);
    return {c(0), c(1), c(2)};
}

// First sign change of y along t after start_index, located by linear
// interpolation; NaN when the series never changes sign.
double first_crossing(const std::vector<double>& t, const std::vector<double>& y,
                      std::size_t start_index) {
    for (std::size_t i = start_index + 1; i < y.size(); ++i) {
        if (y[i] == 0.0) return t[i];
        if (y[i - 1] * y[i] < 0.0)
            return t[i - 1] + (t[i] - t[i - 1]) * (-y[i - 1]) / (y[i] - y[i - 1]);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

LabReport run_evolve_kind(const LabConfig& cfg) {
    auto g = make_grid(cfg.grid_n, cfg.box_length);
    Field u0 = build_profile(cfg.initial_data, g);
    DispersionParams p(cfg.dispersion_a);
    RunRecord rec = evolve(u0, p, solver_of(cfg), cfg.probes);

    LabReport rep;
    rep.times = rec.times;
    for (const auto& name : cfg.probes) {
        rep.columns.push_back(name);
        rep.series.push_back(rec.diagnostics.at(name));
    }
    if (rec.diagnostics.count("boundary_mass") && !contains(cfg.probes, "boundary_mass")) {
        rep.columns.push_back("boundary_mass");
        rep.series.push_back(rec.diagnostics.at("boundary_mass"));
    }
    for (const auto& w : rec.warnings) add_note(rep, "warning", w);
    return rep;
}

// ---------------------------------------------------------------------------
// identities
// ---------------------------------------------------------------------------

LabReport run_identities_kind(const LabConfig& cfg) {
    auto g = make_grid(cfg.grid_n, cfg.box_length);
    DispersionParams p(cfg.dispersion_a);
    const SolverConfig sc = solver_of(cfg);
    Field u0 = build_profile(cfg.initial_data, g);

    std::vector<std::string> cols = {"I1", "I2", "I3", "M1", "M2", "xM_sq"};
    for (const auto& extra : cfg.probes)
        if (!contains(cols, extra)) cols.push_back(extra);

    RunRecord rec = evolve(u0, p, sc, cols);
    LabReport rep;
    rep.times = rec.times;
    for (const auto& name : cols) {
        rep.columns.push_back(name);
        rep.series.push_back(rec.diagnostics.at(name));
    }
    if (rec.diagnostics.count("boundary_mass") && !contains(cols, "boundary_mass")) {
        rep.columns.push_back("boundary_mass");
        rep.series.push_back(rec.diagnostics.at("boundary_mass"));
    }
    for (const auto& w : rec.warnings) add_note(rep, "warning", w);

    // x-weighted identities are meaningless once mass reaches the window
    // edge, so a boundary warning downgrades them to SKIP.
    const bool windowed_ok = rec.warnings.empty();
    const auto& T = rec.times;
    const auto& i1 = rec.diagnostics.at("I1");
    const auto& i2 = rec.diagnostics.at("I2");
    const auto& i3 = rec.diagnostics.at("I3");
    const auto& m1 = rec.diagnostics.at("M1");
    const auto& m2 = rec.diagnostics.at("M2");
    const auto& xm = rec.diagnostics.at("xM_sq");

    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i) {
        d1 = std::max(d1, std::abs(i1[i] - i1[0]));
        d2 = std::max(d2, std::abs(i2[i] - i2[0]));
        d3 = std::max(d3, std::abs(i3[i] - i3[0]));
    }
    add_verdict(rep, "mean_conserved", d1, 1e-8 * (1.0 + std::abs(i1[0])));
    add_verdict(rep, "squared_norm_conserved", d2 / i2[0], 1e-8);
    if (cfg.dispersion_a == 0.0)
        add_verdict(rep, "energy_conserved", d3, 1e-6 * std::max(1.0, std::abs(i3[0])));

    // d/dt of the first moment is half the squared norm, at every a.
    double dlaw = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i)
        dlaw = std::max(dlaw, std::abs(m1[i] - m1[0] - 0.5 * T[i] * i2[0]));
    const double law_scale = std::max(1.0, std::abs(m1[0]) + 0.5 * T.back() * i2[0]);
    add_verdict(rep, "first_moment_law", dlaw, 1e-6 * law_scale, !windowed_ok);

    // Centered-difference rate identities, valid on the a=0 endpoint only.
    if (cfg.dispersion_a == 0.0 && T.size() >= 3) {
        double dev_ic = 0.0, scale_ic = 1e-12;
        double dev_iic = 0.0, scale_iic = 1e-12;
        for (std::size_t i = 0; i + 1 < T.size(); ++i) {
            if (i == 0) continue;
            const double span = T[i + 1] - T[i - 1];
            const double rate_xm = (xm[i + 1] - xm[i - 1]) / span;
            const double rate_m2 = (m2[i + 1] - m2[i - 1]) / span;
            dev_ic = std::max(dev_ic, std::abs(rate_xm - 2.0 * i3[i]));
            scale_ic = std::max(scale_ic, std::abs(2.0 * i3[i]));
            dev_iic = std::max(dev_iic, std::abs(rate_m2 - xm[i]));
            scale_iic = std::max(scale_iic, std::abs(xm[i]));
        }
        add_verdict(rep, "x_square_mass_rate", dev_ic / scale_ic, 1e-4, !windowed_ok);
        add_verdict(rep, "second_moment_rate", dev_iic / scale_iic, 1e-4, !windowed_ok);
    }

    // Pair branch: the x^2-weighted mass of the difference is an explicit
    // quadratic in time, with coefficients read off the data at t=0. The x^2
    // weight amplifies the algebraic dispersion tail, and the 0.4L window
    // would clip a piece of it that the law accounts for; while nothing has
    // reached the box edge the full-box sum is the faithful quadrature, so
    // the pair is marched side by side and the difference is weighed across
    // the whole box at each record time.
    if (cfg.initial_data_2) {
        if (cfg.dispersion_a != 0.0)
            throw config_error("the x^2-weighted difference law needs dispersion_a = 0");
        WeightSpec full_box;
        full_box.window_half_width = 0.5 * cfg.box_length;
        Field ua = u0;
        Field ub = build_profile(*cfg.initial_data_2, g);
        const double d_i3 = functional_I(ua, Conserved::I3) - functional_I(ub, Conserved::I3);
        const double d_xsq =
            moment(ua, 1, true, full_box) - moment(ub, 1, true, full_box);

        std::vector<double> m2w;
        std::vector<std::string> pair_warnings;
        auto weigh = [&] {
            std::string warn;
            m2w.push_back(moment(field_difference(ua, ub), 2, false, full_box, &warn));
            if (!warn.empty()) pair_warnings.push_back(warn);
        };
        weigh();
        for (std::size_t i = 1; i < T.size(); ++i) {
            SolverConfig one = sc;
            one.t_final = T[i] - T[i - 1];
            one.record_every = 1 << 30;
            RunRecord ra = evolve(ua, p, one, {});
            RunRecord rb = evolve(ub, p, one, {});
            ua = *ra.final_state;
            ub = *rb.final_state;
            for (const auto& w : ra.warnings) pair_warnings.push_back(w);
            for (const auto& w : rb.warnings) pair_warnings.push_back(w);
            weigh();
        }
        std::vector<std::string> seen;
        for (const auto& kv : rep.notes)
            if (kv.first == "warning") seen.push_back(kv.second);
        for (const auto& w : pair_warnings)
            if (!contains(seen, w)) {
                seen.push_back(w);
                add_note(rep, "warning", w);
            }
        const bool pair_ok = windowed_ok && pair_warnings.empty();

        rep.columns.push_back("M2_w");
        rep.series.push_back(m2w);
        if (T.size() >= 3) {
            const auto fit = quadratic_fit(T, m2w);
            add_note(rep, "x2w_fit_constant", fmt17(fit[0]));
            add_note(rep, "x2w_fit_linear", fmt17(fit[1]));
            add_note(rep, "x2w_fit_quadratic", fmt17(fit[2]));
            add_verdict(rep, "x2w_quadratic_coefficient", std::abs(fit[2] - d_i3),
                        std::max(1e-4 * std::abs(d_i3), 1e-6), !pair_ok);
            add_verdict(rep, "x2w_linear_coefficient", std::abs(fit[1] - d_xsq),
                        std::max(1e-4 * std::abs(d_xsq), 1e-6), !pair_ok);
        }
        if (std::abs(d_i3) < 1e-8 && std::abs(d_xsq) < 1e-8) {
            double dev = 0.0;
            for (std::size_t i = 0; i < T.size(); ++i)
                dev = std::max(dev, std::abs(m2w[i] - m2w[0]));
            add_verdict(rep, "x2w_constant", dev, 1e-6, !pair_ok);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// tstar
// ---------------------------------------------------------------------------

LabReport run_tstar_kind(const LabConfig& cfg) {
    auto g = make_grid(cfg.grid_n, cfg.box_length);
    DispersionParams p(cfg.dispersion_a);

    Field phi = make_zero_mean(build_profile(cfg.initial_data, g), false);
    const double m1_0 = moment(phi, 1, false);
    const double i2_0 = functional_I(phi, Conserved::I2);
    if (std::abs(m1_0) < 1e-8)
        throw config_error("t* undefined: the datum carries no first moment");
    const double tstar = -4.0 * m1_0 / i2_0;

    LabReport rep;
    add_note(rep, "tstar", fmt17(tstar));

    // Flipping the sign of the datum flips the predicted crossing time.
    {
        std::vector<double> neg(phi.samples());
        for (double& v : neg) v = -v;
        Field phin(g, std::move(neg));
        const double ts_neg = -4.0 * moment(phin, 1, false) / functional_I(phin, Conserved::I2);
        add_verdict(rep, "sign_flip_reflects_tstar", std::abs(ts_neg + tstar),
                    1e-12 * std::max(1.0, std::abs(tstar)));
    }

    // Negative targets run as forward problems on the space-reflected datum;
    // the first moment of the reflected run is minus the original one and the
    // crossing times carry over unchanged in magnitude.
    const bool reflected = tstar < 0.0;
    Field v0 = reflected ? make_zero_mean(build_profile(cfg.initial_data, g, true), false) : phi;
    const double target = std::abs(tstar);

    SolverConfig sc = solver_of(cfg);
    const long nsteps = static_cast<long>(std::ceil(1.5 * target / sc.dt));
    sc.t_final = static_cast<double>(nsteps) * sc.dt;

    RunRecord rec = evolve(v0, p, sc, {"M1", "I2"});
    const auto& T = rec.times;
    const auto& m1 = rec.diagnostics.at("M1");
    const auto& i2 = rec.diagnostics.at("I2");

    std::vector<double> G(T.size(), 0.0);
    for (std::size_t i = 1; i < T.size(); ++i)
        G[i] = G[i - 1] + 0.5 * (m1[i - 1] + m1[i]) * (T[i] - T[i - 1]);

    rep.times = T;
    rep.columns = {"M1", "I2", "G"};
    rep.series = {m1, i2, G};
    if (rec.diagnostics.count("boundary_mass")) {
        rep.columns.push_back("boundary_mass");
        rep.series.push_back(rec.diagnostics.at("boundary_mass"));
    }
    for (const auto& w : rec.warnings) add_note(rep, "warning", w);

    double dlaw = 0.0;
    for (std::size_t i = 0; i < T.size(); ++i)
        dlaw = std::max(dlaw, std::abs(m1[i] - m1[0] - 0.5 * T[i] * i2[0]));
    add_verdict(rep, "first_moment_law", dlaw,
                1e-6 * std::max(1.0, std::abs(m1[0]) + 0.5 * T.back() * i2[0]),
                !rec.warnings.empty());

    const double cross_m1 = first_crossing(T, m1, 0);
    const double cross_g = first_crossing(T, G, 1);
    const double dev_m1 = std::isnan(cross_m1) ? std::numeric_limits<double>::infinity()
                                               : std::abs(cross_m1 - 0.5 * target);
    const double dev_g = std::isnan(cross_g) ? std::numeric_limits<double>::infinity()
                                             : std::abs(cross_g - target);
    add_verdict(rep, "first_moment_crossing", dev_m1, 2.0 * sc.dt);
    add_verdict(rep, "antiderivative_crossing", dev_g, 2.0 * sc.dt);

    // Low-frequency indicator at half, full, and one-and-a-half times the
    // crossing scale, each from its own exact-horizon run.
    const std::array<std::pair<const char*, double>, 3> marks = {{
        {"indicator_half_tstar", 0.5},
        {"indicator_tstar", 1.0},
        {"indicator_three_half_tstar", 1.5},
    }};
    for (const auto& [label, frac] : marks) {
        SolverConfig one = sc;
        const long ns = std::max<long>(1, static_cast<long>(std::llround(frac * target / sc.dt)));
        one.t_final = static_cast<double>(ns) * sc.dt;
        one.record_every = static_cast<int>(std::min<long>(ns, 1 << 30));
        Field fin = *evolve(v0, p, one, {}).final_state;
        const double signed_t = (reflected ? -1.0 : 1.0) * one.t_final;
        add_note(rep, std::string(label) + "_time", fmt17(signed_t));
        add_note(rep, label, fmt17(lowfreq_indicator(fin)));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// pair plumbing shared by pair-match and diff-decay
// ---------------------------------------------------------------------------

struct BuiltPair {
    Field u1;
    Field u2;
    PairCertificate certificate;
    std::string preset;
};

MomentConstraints preset_of(const std::string& name) {
    if (name == "dgbo") return MomentConstraints::dgbo_preset();
    if (name == "bo") return MomentConstraints::bo_preset();
    throw config_error("unknown pair preset \"" + name + "\" (expected dgbo or bo)");
}

BuiltPair solve_pair(const LabConfig& cfg, const GridPtr& g) {
    Field base = build_profile(cfg.initial_data, g);
    PerturbationFamily fam = hermite_family(base, cfg.pair.basis_size, cfg.pair.basis_width);
    MatchedPair mp =
        match_pair(std::move(fam), preset_of(cfg.pair.preset), cfg.pair.separation,
                   cfg.pair.tolerance);
    return {std::move(mp.perturbed), std::move(mp.base), std::move(mp.certificate),
            cfg.pair.preset};
}

std::string reconstruction_block(const LabConfig& cfg) {
    std::ostringstream os;
    os << "# reconstruction\n";
    os << "grid_n " << cfg.grid_n << "\n";
    os << "grid_box_length " << fmt17(cfg.box_length) << "\n";
    os << "profile " << cfg.initial_data.name << "\n";
    os << "profile_params";
    for (double v : cfg.initial_data.params) os << " " << fmt17(v);
    os << "\n";
    os << "amplitude " << fmt17(cfg.initial_data.amplitude) << "\n";
    os << "zero_mean " << (cfg.initial_data.zero_mean ? 1 : 0) << "\n";
    os << "zero_first_moment " << (cfg.initial_data.zero_first_moment ? 1 : 0) << "\n";
    os << "preset " << cfg.pair.preset << "\n";
    os << "basis_size " << cfg.pair.basis_size << "\n";
    os << "basis_width " << fmt17(cfg.pair.basis_width) << "\n";
    return os.str();
}

// Rebuild a matched pair from a certificate file and re-verify its residuals
// from scratch; stored numbers are never trusted.
BuiltPair load_certificate(const std::string& path, const GridPtr& g) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open certificate file " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos) continue;
        kv[line.substr(0, sp)] = line.substr(sp + 1);
    }
    const auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw config_error("certificate file is missing the \"" + key + "\" entry");
        return it->second;
    };
    const auto parse_doubles = [](const std::string& text) {
        std::istringstream is(text);
        std::vector<double> out;
        double v;
        while (is >> v) out.push_back(v);
        return out;
    };

    const auto grid_n = static_cast<std::size_t>(std::stoull(need("grid_n")));
    const double box_len = std::stod(need("grid_box_length"));
    if (grid_n != g->n_points || std::abs(box_len - g->box_length) > 1e-12 * g->box_length)
        throw config_error("certificate grid does not match the configured grid");

    ProfileSpec ps;
    ps.name = need("profile");
    ps.params = parse_doubles(need("profile_params"));
    ps.amplitude = std::stod(need("amplitude"));
    ps.zero_mean = need("zero_mean") == "1";
    ps.zero_first_moment = need("zero_first_moment") == "1";

    const std::string preset = need("preset");
    const auto basis_size = static_cast<std::size_t>(std::stoull(need("basis_size")));
    const double basis_width = std::stod(need("basis_width"));
    const std::vector<double> coeffs = parse_doubles(need("coefficients"));
    if (coeffs.size() != basis_size)
        throw config_error("certificate coefficient count does not match its basis size");

    Field base = build_profile(ps, g);
    PerturbationFamily fam = hermite_family(base, basis_size, basis_width);
    fam.coefficients = coeffs;
    const MomentConstraints cons = preset_of(preset);
    const std::vector<double> r = constraint_residual(fam, cons);

    PairCertificate cert;
    cert.coefficients = coeffs;
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        cert.residuals.emplace_back(constraint_name(cons.tags[i]), r[i]);
        worst = std::max(worst, std::abs(r[i]));
    }
    if (worst > 1e-8)
        throw config_error("certificate residuals exceed 1e-8 when recomputed on this grid; "
                           "regenerate the pair");
    Field u1 = fam.perturbed();
    cert.separation = field_difference(u1, base).l2_norm();
    return {std::move(u1), std::move(base), std::move(cert), preset};
}

// ---------------------------------------------------------------------------
// pair-match
// ---------------------------------------------------------------------------

LabReport run_pair_match_kind(const LabConfig& cfg) {
    auto g = make_grid(cfg.grid_n, cfg.box_length);
    BuiltPair bp = solve_pair(cfg, g);
    const PairCertificate& cert = bp.certificate;

    LabReport rep;
    for (const auto& [name, value] : cert.residuals)
        add_verdict(rep, "residual[" + name + "]", std::abs(value), cfg.pair.tolerance);
    add_verdict(rep, "separation_on_sphere",
                std::abs(cert.separation - cert.requested_separation),
                1e-10 * std::max(1.0, cert.requested_separation));
    add_note(rep, "iterations", std::to_string(cert.iterations));
    add_note(rep, "quadratic_constant", fmt17(cert.quadratic_constant));
    add_note(rep, "separation", fmt17(cert.separation));

    rep.certificate_text =
        "# matched pair certificate\n" + cert.to_text() + reconstruction_block(cfg);
    return rep;
}

// ---------------------------------------------------------------------------
// diff-decay
// ---------------------------------------------------------------------------

struct DecayTrace {
    std::vector<double> times;
    std::vector<double> zhat0;
    std::vector<double> dzhat0;
    std::vector<double> dzhat0_windowed;
    std::vector<double> xw4;
    std::vector<double> xw5;
    std::vector<double> wsup;
    std::vector<double> ind_w;
    std::vector<double> ind_u1;
};

// March the two states side by side: each record interval is one evolve()
// call per state (the stepper is memoryless across steps, so chunking does
// not change the trajectory), then the difference diagnostics are taken with
// both states at the same time.
DecayTrace co_evolve(Field u1, Field u2, const DispersionParams& p, const SolverConfig& sc,
                     bool want_fifth) {
    DecayTrace tr;
    const long total = static_cast<long>(std::llround(sc.t_final / sc.dt));
    if (!(sc.dt > 0.0) || total <= 0 ||
        std::abs(sc.t_final - static_cast<double>(total) * sc.dt) >
            1e-12 * std::max(1.0, sc.t_final))
        throw config_error("diff-decay needs t_final to be a positive multiple of dt");

    const auto record = [&](double t) {
        Field w = field_difference(u1, u2);
        tr.times.push_back(t);
        tr.zhat0.push_back(std::abs(w.spectrum()[0]));
        // The xi slope of w_hat at zero is the full-line first moment of w;
        // the difference vanishes at the box edge, so the raw node sum is the
        // faithful discretization. A windowed reading under the moment
        // conventions is recorded alongside. Both drift linearly in time at a
        // rate set by the box size (the phase kink at xi = 0 pairs with the
        // x weight at order dxi^{2+a}), so the 1e-8 verdicts need production
        // grids, not desk grids.
        double raw = 0.0;
        for (std::size_t j = 0; j < w.samples().size(); ++j)
            raw += w.grid().nodes[j] * w.samples()[j];
        tr.dzhat0.push_back(std::abs(raw * w.grid().spacing()));
        tr.dzhat0_windowed.push_back(std::abs(xi_derivative(w, 1)[0]));
        WeightSpec w4;
        w4.r = 4.0;
        w4.angle_bracket = true;
        tr.xw4.push_back(weighted_norm(w, w4));
        if (want_fifth) {
            WeightSpec w5;
            w5.r = 5.0;
            w5.angle_bracket = true;
            tr.xw5.push_back(weighted_norm(w, w5));
        }
        tr.wsup.push_back(sup_abs(w));
        tr.ind_w.push_back(lowfreq_indicator(w));
        tr.ind_u1.push_back(lowfreq_indicator(u1));
    };

    record(0.0);
    long done = 0;
    while (done < total) {
        const long take = std::min<long>(std::max(1, sc.record_every), total - done);
        SolverConfig one = sc;
        one.t_final = static_cast<double>(take) * sc.dt;
        one.record_every = static_cast<int>(take);
        u1 = *evolve(u1, p, one, {}).final_state;
        u2 = *evolve(u2, p, one, {}).final_state;
        done += take;
        record(static_cast<double>(done) * sc.dt);
    }
    return tr;
}

BuiltPair build_decay_pair(const LabConfig& cfg, const GridPtr& g) {
    if (cfg.pair.null_pair) {
        Field base = build_profile(cfg.initial_data, g);
        return {base, base, {}, cfg.pair.preset};
    }
    if (!cfg.pair.certificate.empty()) return load_certificate(cfg.pair.certificate, g);
    return solve_pair(cfg, g);
}

void append_trace(LabReport& rep, const DecayTrace& tr, bool want_fifth) {
    rep.times = tr.times;
    rep.columns = {"w_hat_at_zero", "w_hat_xi_slope_at_zero", "w_first_moment_windowed",
                   "w_weighted4_norm"};
    rep.series = {tr.zhat0, tr.dzhat0, tr.dzhat0_windowed, tr.xw4};
    if (want_fifth) {
        rep.columns.push_back("w_weighted5_norm");
        rep.series.push_back(tr.xw5);
    }
    rep.columns.insert(rep.columns.end(), {"w_sup", "w_lowfreq_indicator", "u1_lowfreq_indicator"});
    rep.series.insert(rep.series.end(), {tr.wsup, tr.ind_w, tr.ind_u1});
}

LabReport run_diff_decay_kind(const LabConfig& cfg) {
    if (cfg.pair.preset == "bo" && cfg.dispersion_a != 0.0)
        throw config_error("the bo preset diagnostics assume dispersion_a = 0");
    if (cfg.refinement && !cfg.pair.certificate.empty())
        throw config_error("the refinement study re-solves the pair on each grid; "
                           "drop the certificate path");

    auto g = make_grid(cfg.grid_n, cfg.box_length);
    const DispersionParams p(cfg.dispersion_a);
    const SolverConfig sc = solver_of(cfg);
    const bool want_fifth = !cfg.pair.null_pair && cfg.pair.preset == "bo";

    BuiltPair bp = build_decay_pair(cfg, g);
    DecayTrace tr = co_evolve(bp.u1, bp.u2, p, sc, want_fifth);

    LabReport rep;
    append_trace(rep, tr, want_fifth);

    const auto vmax = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    };
    if (cfg.pair.null_pair) {
        add_verdict(rep, "null_pair_exact_zero", vmax(tr.wsup), 0.0);
    } else {
        add_verdict(rep, "w_hat_at_zero", vmax(tr.zhat0), 1e-8);
        add_verdict(rep, "w_hat_xi_slope_at_zero", vmax(tr.dzhat0), 1e-8);
    }

    if (cfg.refinement) {
        LabConfig fine = cfg;
        fine.grid_n *= 2;
        fine.box_length *= 2.0;
        fine.refinement = false;
        auto gf = make_grid(fine.grid_n, fine.box_length);
        BuiltPair bpf = build_decay_pair(fine, gf);
        DecayTrace trf = co_evolve(bpf.u1, bpf.u2, p, sc, want_fifth);

        // Compare the weighted norm at the record time nearest t = 1 and the
        // indicator at the final time. The indicator contrast is recorded,
        // not asserted.
        std::size_t idx = 0;
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            if (std::abs(tr.times[i] - 1.0) < std::abs(tr.times[idx] - 1.0)) idx = i;
        const double tiny = 1e-300;
        const double xw4_change =
            std::abs(trf.xw4[idx] - tr.xw4[idx]) / std::max(tr.xw4[idx], tiny);
        const double ind_contrast = std::abs(trf.ind_u1.back() - tr.ind_u1.back()) /
                                    std::max(tr.ind_u1.back(), tiny);
        add_verdict(rep, "w_weighted4_grid_converged", xw4_change, 0.05);
        add_note(rep, "w_weighted4_compare_time", fmt17(tr.times[idx]));
        add_note(rep, "w_weighted4_coarse", fmt17(tr.xw4[idx]));
        add_note(rep, "w_weighted4_fine", fmt17(trf.xw4[idx]));
        add_note(rep, "u1_indicator_coarse", fmt17(tr.ind_u1.back()));
        add_note(rep, "u1_indicator_fine", fmt17(trf.ind_u1.back()));
        add_note(rep, "u1_indicator_contrast",
                 fmt17(ind_contrast) + " (recorded, not asserted)");
    }
    return rep;
}

// ---------------------------------------------------------------------------
// stein-suite
// ---------------------------------------------------------------------------

LabReport run_stein_suite_kind(const LabConfig& cfg) {
    const SuiteSpec& s = cfg.suite;
    if (s.alphas.size() != s.thetas.size())
        throw config_error("suite.alphas and suite.thetas must have equal length");

    LabReport rep;
    for (std::size_t i = 0; i < s.alphas.size(); ++i) {
        const double alpha = s.alphas[i];
        const double theta = s.thetas[i];
        const std::string tag = "[alpha=" + fmtg(alpha) + ";theta=" + fmtg(theta) + "]";
        const DsteinReport r = dstein_asymptotics(alpha, theta, s.signed_profile);

        if (alpha < theta)
            add_verdict(rep, "small_eta_slope" + tag,
                        std::abs(r.small_eta_slope - (alpha - theta)), 0.05);
        add_verdict(rep, "tail_slope" + tag, std::abs(r.tail_slope + (0.5 + theta)), 0.05);

        // The weighted ladder converges exactly when theta < alpha + 1/2;
        // right at the edge neither outcome is stable enough to grade.
        const double margin = theta - (alpha + 0.5);
        if (std::abs(margin) > 0.02) {
            LabVerdict v;
            v.name = (margin < 0.0 ? "ladder_converges" : "ladder_diverges") + tag;
            v.deviation = r.l2_change;
            v.tolerance = 0.05;
            if (margin < 0.0)
                v.status = (r.l2_converged && r.l2_change <= 0.05) ? "PASS" : "FAIL";
            else
                v.status = r.l2_converged ? "FAIL" : "PASS";
            rep.verdicts.push_back(std::move(v));
        }
        add_note(rep, "ladder_norm_coarse" + tag, fmt17(r.l2_coarse));
        add_note(rep, "ladder_norm_fine" + tag, fmt17(r.l2_fine));
    }

    for (double t : s.phase_times) {
        const PhaseBoundReport pb = pointwise_phase_bound(t, s.phase_a, s.phase_b);
        add_verdict(rep, "phase_envelope_ratio[t=" + fmtg(t) + "]", pb.max_ratio, 10.0);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// expansion-suite
// ---------------------------------------------------------------------------

LabReport run_expansion_suite_kind(const LabConfig& cfg) {
    LabReport rep;
    const SuiteSpec& s = cfg.suite;
    if (s.orders.empty()) return rep;

    std::vector<double> times = s.times.empty() ? std::vector<double>{0.0} : s.times;
    std::vector<double> avals =
        s.a_values.empty() ? std::vector<double>{cfg.dispersion_a} : s.a_values;

    auto g = make_grid(cfg.grid_n, cfg.box_length);
    Field f = build_profile(cfg.initial_data, g);

    for (double a : avals)
        for (double t : times)
            for (int k : s.orders) {
                const double res = expansion_check(f, t, a, k);
                const double tol = (t == 0.0) ? 1e-8 : (k <= 4 ? 1e-6 : 1e-5);
                add_verdict(rep,
                            "expansion_residual[k=" + std::to_string(k) + ";a=" + fmtg(a) +
                                ";t=" + fmtg(t) + "]",
                            res, tol);
            }
    return rep;
}

} // namespace

// ---------------------------------------------------------------------------
// Dispatch, artifacts, pipeline
// ---------------------------------------------------------------------------

LabReport run_experiment(const LabConfig& cfg) {
    if (cfg.kind == "evolve") return run_evolve_kind(cfg);
    if (cfg.kind == "identities") return run_identities_kind(cfg);
    if (cfg.kind == "tstar") return run_tstar_kind(cfg);
    if (cfg.kind == "pair-match") return run_pair_match_kind(cfg);
    if (cfg.kind == "diff-decay") return run_diff_decay_kind(cfg);
    if (cfg.kind == "stein-suite") return run_stein_suite_kind(cfg);
    if (cfg.kind == "expansion-suite") return run_expansion_suite_kind(cfg);
    throw config_error("unrecognized experiment kind \"" + cfg.kind + "\"");
}

int write_outputs(const LabConfig& cfg, const LabReport& rep, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw config_error("cannot create output directory " + out_dir);
    const fs::path dir(out_dir);

    for (const auto& col : rep.series)
        if (col.size() != rep.times.size())
            throw std::runtime_error("series length does not match the time count");

    {
        std::ofstream f(dir / "series.csv");
        f << "t";
        for (const auto& name : rep.columns) f << "," << name;
        f << "\n";
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            f << fmt17(rep.times[i]);
            for (const auto& col : rep.series) f << "," << fmt17(col[i]);
            f << "\n";
        }
    }

    {
        json m;
        m["config"] = json::parse(emit_config_text(cfg));
        m["conventions"] = {
            {"node_layout", "x_j = -L/2 + j*L/n, j = 0..n-1"},
            {"wavenumber_order", "fft (0..n/2-1, -n/2..-1) times 2*pi/L"},
            {"normalization",
             "spectrum_k = dx * sum_j u_j exp(-i xi_k x_j); parseval dx*sum u^2 = "
             "(1/L)*sum |spectrum|^2"},
            {"quadrature",
             "all integrals dx * sum over nodes; single-field x-weights windowed to "
             "|x| <= 0.4L, pair-difference x-weights taken over the whole box"},
            {"thread_cap", "DGBO_THREADS"},
        };
        std::ofstream f(dir / "manifest.json");
        f << m.dump(2) << "\n";
    }

    bool failed = false;
    {
        std::ofstream f(dir / "verdicts.txt");
        for (const auto& v : rep.verdicts) {
            char dev[40], tol[40];
            std::snprintf(dev, sizeof dev, "%.9g", v.deviation);
            std::snprintf(tol, sizeof tol, "%.9g", v.tolerance);
            f << v.name << ", " << dev << ", " << tol << ", " << v.status << "\n";
            failed = failed || (v.status == "FAIL");
        }
    }

    {
        std::ofstream f(dir / "report.txt");
        for (const auto& [key, value] : rep.notes) f << key << " " << value << "\n";
    }

    if (!rep.certificate_text.empty()) {
        std::ofstream f(dir / "certificate.txt");
        f << rep.certificate_text;
    }
    return failed ? 2 : 0;
}

int run_lab(const std::string& kind, const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) throw config_error("cannot open config file " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();

    LabConfig cfg = parse_config_text(ss.str());
    if (cfg.kind.empty())
        cfg.kind = kind;
    else if (cfg.kind != kind)
        throw config_error("config kind \"" + cfg.kind + "\" does not match the subcommand \"" +
                           kind + "\"");
    if (!recognized_kind(cfg.kind))
        throw config_error("unrecognized experiment kind \"" + cfg.kind + "\"");
    if (!cfg.pair.certificate.empty() && !std::filesystem::exists(cfg.pair.certificate))
        throw config_error("referenced certificate path does not exist: " + cfg.pair.certificate);

    const LabReport rep = run_experiment(cfg);
    return write_outputs(cfg, rep, out_dir);
}

} // namespace dgbo
