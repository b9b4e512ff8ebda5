/// @file acceptance_main.cpp
/// @brief End-to-end acceptance run for the simulation laboratory.
///
/// Each numbered block below grades one advertised capability of the
/// laboratory against a fixed tolerance, prints a single PASS or FAIL line,
/// and the process exits nonzero when anything failed. Tolerances are pinned
/// here rather than inherited from the library so a regression in the lab's
/// own grading cannot silently relax the gate.

#include "dgbo/errors.hpp"
#include "dgbo/evolution.hpp"
#include "dgbo/functionals.hpp"
#include "dgbo/lab.hpp"
#include "dgbo/pairs.hpp"
#include "dgbo/spectral.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

using namespace dgbo;

namespace {

int g_failures = 0;

void grade(int idx, const std::string& label, bool ok) {
    std::printf("%2d  %-64s %s\n", idx, label.c_str(), ok ? "PASS" : "FAIL");
    if (!ok) ++g_failures;
}

bool guarded(int idx, const std::string& label, const std::function<bool()>& body) {
    bool ok = false;
    try {
        ok = body();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "criterion %d aborted: %s\n", idx, e.what());
        ok = false;
    }
    grade(idx, label, ok);
    return ok;
}

const std::vector<double>& column(const LabReport& rep, const std::string& name) {
    for (std::size_t i = 0; i < rep.columns.size(); ++i)
        if (rep.columns[i] == name) return rep.series[i];
    throw std::runtime_error("missing column " + name);
}

const LabVerdict* verdict(const LabReport& rep, const std::string& name) {
    for (const auto& v : rep.verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

bool verdict_pass(const LabReport& rep, const std::string& name) {
    const LabVerdict* v = verdict(rep, name);
    return v != nullptr && v->status == "PASS";
}

std::optional<double> note_value(const LabReport& rep, const std::string& key) {
    for (const auto& kv : rep.notes)
        if (kv.first == key) return std::stod(kv.second);
    return std::nullopt;
}

double max_drift(const std::vector<double>& s) {
    double m = 0.0;
    for (double v : s) m = std::max(m, std::abs(v - s[0]));
    return m;
}

// Desk-scale conservation run shared by the first two blocks.
LabConfig conservation_config(double a) {
    LabConfig cfg;
    cfg.kind = "identities";
    cfg.grid_n = 1024;
    cfg.box_length = 100.0;
    cfg.dispersion_a = a;
    cfg.dt = 0.001;
    cfg.t_final = 1.0;
    cfg.record_every = 10;
    cfg.initial_data.params = {0.6, 1.0, 0.0, -0.3, 2.0, 0.0};
    return cfg;
}

// Even triple Gaussian with zero mass and zero second moment, wide box so
// the x-weighted readings stay clean over a full time unit.
LabConfig moment_law_config(double a) {
    LabConfig cfg;
    cfg.kind = "identities";
    cfg.grid_n = 4096;
    cfg.box_length = 400.0;
    cfg.dispersion_a = a;
    cfg.dt = 0.002;
    cfg.t_final = 1.0;
    cfg.record_every = 10;
    cfg.initial_data.params = {1.2,  4.0, 0.0, -1.536, 5.5, 0.0,
                               0.52114285714285713, 7.0, 0.0};
    return cfg;
}

// Raw quadrature routes that bypass the pairs module entirely, mirroring the
// constraint list one integral at a time.
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

bool match_and_requadrate(const MomentConstraints& cons, std::size_t basis_size,
                          double basis_width, double separation) {
    auto g = make_grid(1024, 100.0);
    std::vector<double> v(g->n_points);
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = std::exp(-g->nodes[j] * g->nodes[j]);
    Field base(g, v);

    PerturbationFamily fam = hermite_family(base, basis_size, basis_width);
    MatchedPair pair = match_pair(fam, cons, separation, 1e-12);

    bool ok = true;
    for (const auto& named : pair.certificate.residuals)
        ok = ok && std::abs(named.second) <= 1e-12;

    double l2 = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double d = pair.perturbed.samples()[j] - pair.base.samples()[j];
        l2 += d * d;
    }
    l2 = std::sqrt(l2 * g->spacing());
    ok = ok && std::abs(l2 - separation) <= 1e-10;

    // Independent pass: every matched quantity re-integrated by raw sums.
    for (Constraint c : cons.tags)
        ok = ok && std::abs(raw_value(pair.perturbed, c) - raw_value(pair.base, c)) <= 1e-11;
    return ok;
}

} // namespace

int main() {
    // 1. Squared-norm conservation across the dispersion family.
    std::vector<LabReport> cons_runs;
    guarded(1, "squared norm conserved to 1e-8 for a in {0, 0.5, 1}", [&] {
        bool ok = true;
        for (double a : {0.0, 0.5, 1.0}) {
            cons_runs.push_back(run_experiment(conservation_config(a)));
            const auto& i2 = column(cons_runs.back(), "I2");
            ok = ok && max_drift(i2) / std::abs(i2[0]) <= 1e-8;
        }
        return ok;
    });

    // 2. Cubic energy conservation at the nonlocal endpoint.
    guarded(2, "cubic energy conserved to 1e-6 at a = 0", [&] {
        if (cons_runs.empty()) return false;
        const auto& i3 = column(cons_runs.front(), "I3");
        return max_drift(i3) / std::abs(i3[0]) <= 1e-6;
    });

    // 3. First-moment growth law M1(t) = M1(0) + (t/2) I2(0).
    guarded(3, "first moment grows at half the squared norm, a in {0, 0.5, 1}", [&] {
        bool ok = true;
        for (double a : {0.0, 0.5, 1.0}) {
            const LabReport rep = run_experiment(moment_law_config(a));
            const auto& t = rep.times;
            const auto& m1 = column(rep, "M1");
            const auto& i2 = column(rep, "I2");
            double dev = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i)
                dev = std::max(dev, std::abs(m1[i] - m1[0] - 0.5 * t[i] * i2[0]));
            ok = ok && dev <= 1e-6 * (1.0 + std::abs(m1[0]));
        }
        return ok;
    });

    // 4. The two x-weighted rate identities at a = 0, each in the regime
    // where its discretization is clean: the x u^2 rate tolerates a long
    // desk-box run, the x^2 u rate needs a short horizon on a wide box.
    guarded(4, "x-weighted rates match 2*I3 and the x u^2 moment to 1e-4", [&] {
        LabConfig slow;
        slow.kind = "identities";
        slow.grid_n = 1024;
        slow.box_length = 100.0;
        slow.dispersion_a = 0.0;
        slow.dt = 0.002;
        slow.t_final = 1.0;
        slow.record_every = 5;
        slow.initial_data.params = {0.6, 1.0, 0.0, -0.3, 2.0, 0.0};
        const LabReport a = run_experiment(slow);
        const LabVerdict* ic = verdict(a, "x_square_mass_rate");

        LabConfig fast;
        fast.kind = "identities";
        fast.grid_n = 4096;
        fast.box_length = 400.0;
        fast.dispersion_a = 0.0;
        fast.dt = 0.0015;
        fast.t_final = 0.03;
        fast.record_every = 2;
        fast.initial_data.params = {5.0, 1.0, 8.0, -4.0, 2.0, 8.0, 1.0, 3.0, 8.0};
        fast.initial_data.amplitude = 0.35;
        const LabReport b = run_experiment(fast);
        const LabVerdict* iic = verdict(b, "second_moment_rate");

        return ic != nullptr && ic->status == "PASS" && ic->deviation <= 1e-4 &&
               iic != nullptr && iic->status == "PASS" && iic->deviation <= 1e-4;
    });

    // 5. The x^2-weighted mass of an unconstrained pair difference is an
    // exact quadratic in time; the regression must recover both derivative
    // coefficients. The pair is a norm-preserving dilation, so the targets
    // are genuinely nonzero.
    guarded(5, "difference x^2 mass regression recovers both coefficients to 1e-4", [&] {
        LabConfig cfg;
        cfg.kind = "identities";
        cfg.grid_n = 4096;
        cfg.box_length = 400.0;
        cfg.dispersion_a = 0.0;
        cfg.dt = 0.0025;
        cfg.t_final = 1.0;
        cfg.record_every = 8;
        cfg.initial_data.name = "polynomial_gaussian_sum";
        cfg.initial_data.params = {1.0, 1.0, 0.0, 0.0, -0.5, 2.0, 0.0, 0.0,
                                   0.8, 1.0, 0.0, 1.0, -0.1, 2.0, 0.0, 1.0};
        ProfileSpec dilated;
        dilated.name = "polynomial_gaussian_sum";
        dilated.params = {1.0, 1.25, 0.0, 0.0, -0.5, 2.5, 0.0, 0.0,
                          0.64, 1.25, 0.0, 1.0, -0.08, 2.5, 0.0, 1.0};
        dilated.amplitude = 0.89442719099991586;
        cfg.initial_data_2 = dilated;

        const LabReport rep = run_experiment(cfg);
        const auto fit1 = note_value(rep, "x2w_fit_linear");
        const auto fit2 = note_value(rep, "x2w_fit_quadratic");
        if (!fit1 || !fit2) return false;

        // Targets re-derived here from the data, independent of the fit.
        auto g = make_grid(cfg.grid_n, cfg.box_length);
        Field u = build_profile(cfg.initial_data, g);
        Field w = build_profile(*cfg.initial_data_2, g);
        const double d_i3 = functional_I(u, Conserved::I3) - functional_I(w, Conserved::I3);
        WeightSpec full;
        full.window_half_width = 0.5 * cfg.box_length;
        const double d_xsq = moment(u, 1, true, full) - moment(w, 1, true, full);

        return std::abs(*fit2 - d_i3) <= 1e-4 * std::abs(d_i3) &&
               std::abs(*fit1 - d_xsq) <= 1e-4 * std::abs(d_xsq);
    });

    // 6. The decay-restoring reference time of an odd Gaussian has a closed
    // form, and both recorded crossings land on it.
    bool crit6 = guarded(6, "reference time -8*sqrt(2) and both crossings within 2*dt", [&] {
        LabConfig cfg;
        cfg.kind = "tstar";
        cfg.grid_n = 4096;
        cfg.box_length = 400.0;
        cfg.dispersion_a = 0.0;
        cfg.dt = 0.01;
        cfg.initial_data.name = "odd_gaussian";
        cfg.initial_data.params = {1.0};

        const LabReport rep = run_experiment(cfg);
        const auto ts = note_value(rep, "tstar");
        if (!ts || std::abs(*ts + 8.0 * std::sqrt(2.0)) > 1e-6) return false;
        return verdict_pass(rep, "sign_flip_reflects_tstar") &&
               verdict_pass(rep, "first_moment_crossing") &&
               verdict_pass(rep, "antiderivative_crossing");
    });

    // 7. Short-time expansion residuals of the free propagator on
    // mean-corrected data across the dispersion family.
    guarded(7, "expansion residuals at orders 1..5 within 1e-6 / 1e-5", [&] {
        LabConfig cfg;
        cfg.kind = "expansion-suite";
        cfg.grid_n = 4096;
        cfg.box_length = 800.0;
        cfg.initial_data.params = {1.0, 2.0, 0.0, -0.5, 4.0, 0.0};
        cfg.suite.orders = {1, 2, 3, 4, 5};
        cfg.suite.times = {0.0, 1.0};
        cfg.suite.a_values = {0.25, 0.5, 0.75};

        const LabReport rep = run_experiment(cfg);
        if (rep.verdicts.size() != 30) return false;
        bool ok = true;
        for (const auto& v : rep.verdicts) {
            const bool fifth = v.name.find("[k=5;") != std::string::npos;
            ok = ok && v.deviation <= (fifth ? 1e-5 : 1e-6);
        }
        return ok;
    });

    // 8. Scaling asymptotics of the pointwise regularity functional and the
    // weighted ladder cutoff on either side of the critical line.
    guarded(8, "asymptotic slopes within 0.05 and the ladder flips at theta = a + 1/2", [&] {
        LabConfig cfg;
        cfg.kind = "stein-suite";
        cfg.suite.alphas = {0.3, 0.8, 0.3};
        cfg.suite.thetas = {0.7, 0.25, 0.9};

        const LabReport rep = run_experiment(cfg);
        const LabVerdict* small = verdict(rep, "small_eta_slope[alpha=0.3;theta=0.7]");
        const LabVerdict* tail_hi = verdict(rep, "tail_slope[alpha=0.3;theta=0.7]");
        const LabVerdict* tail_lo = verdict(rep, "tail_slope[alpha=0.8;theta=0.25]");
        if (!small || !tail_hi || !tail_lo) return false;
        return small->deviation <= 0.05 && tail_hi->deviation <= 0.05 &&
               tail_lo->deviation <= 0.05 &&
               verdict_pass(rep, "ladder_converges[alpha=0.3;theta=0.7]") &&
               verdict_pass(rep, "ladder_diverges[alpha=0.3;theta=0.9]");
    });

    // 9. Moment matching under both presets, re-validated by quadrature
    // routes that do not touch the pairs module.
    guarded(9, "matched pairs hold to 1e-12 under an independent quadrature pass", [&] {
        return match_and_requadrate(MomentConstraints::dgbo_preset(), 5, 1.5, 0.1) &&
               match_and_requadrate(MomentConstraints::bo_preset(), 8, 1.5, 0.05);
    });

    // 10. On a matched pair the difference spectrum stays flat at the
    // origin for the whole recorded window. The 1e-8 bounds are only
    // attainable on a production grid; the box-size drift of the slope
    // reading is documented with the laboratory.
    bool crit10 = guarded(10, "pair difference flat at xi = 0 to 1e-8 over t in [0, 2]", [&] {
        LabConfig cfg;
        cfg.kind = "diff-decay";
        cfg.grid_n = 8192;
        cfg.box_length = 800.0;
        cfg.dispersion_a = 0.5;
        cfg.dt = 0.002;
        cfg.t_final = 2.0;
        cfg.record_every = 100;
        cfg.initial_data.params = {0.4, 2.5, 0.0, -0.2, 5.0, 0.0};
        cfg.pair.preset = "dgbo";
        cfg.pair.basis_size = 5;
        cfg.pair.basis_width = 1.5;
        cfg.pair.separation = 0.1;

        const LabReport rep = run_experiment(cfg);
        const LabVerdict* zero = verdict(rep, "w_hat_at_zero");
        const LabVerdict* slope = verdict(rep, "w_hat_xi_slope_at_zero");
        return zero != nullptr && zero->deviation <= 1e-8 && slope != nullptr &&
               slope->deviation <= 1e-8;
    });

    // 11. The stepper against the fixed-point oracle, both routes built on
    // disjoint time discretizations.
    guarded(11, "stepper matches the fixed point oracle to 1e-7 for a in {0, 0.5, 1}", [&] {
        auto g = make_grid(1024, 100.0);
        std::vector<double> v(g->n_points);
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = std::exp(-g->nodes[j] * g->nodes[j]);
        Field u0(g, v);

        bool ok = true;
        for (double a : {0.0, 0.5, 1.0}) {
            DispersionParams p(a);
            SolverConfig rk;
            rk.dt = 5e-4;
            rk.t_final = 0.05;
            rk.record_every = 1 << 30;
            Field via_rk = *evolve(u0, p, rk, {}).final_state;
            SolverConfig pc;
            Field via_picard = picard_oracle(u0, p, pc, 0.05);
            double s = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                const double d = via_rk.samples()[j] - via_picard.samples()[j];
                s += d * d;
            }
            ok = ok && std::sqrt(s * g->spacing()) <= 1e-7;
        }
        return ok;
    });

    // 12. The deep decay-gain statements have no desk-scale observable; they
    // are covered by the crossing and flatness mechanisms above plus a
    // recorded (not asserted) grid-convergence contrast of the low-frequency
    // indicator, with the windowed norm required to converge.
    guarded(12, "mechanism checks plus recorded indicator contrast on refinement", [&] {
        LabConfig cfg;
        cfg.kind = "diff-decay";
        cfg.grid_n = 1024;
        cfg.box_length = 100.0;
        cfg.dispersion_a = 0.5;
        cfg.dt = 0.005;
        cfg.t_final = 1.0;
        cfg.record_every = 20;
        cfg.initial_data.name = "polynomial_gaussian_sum";
        cfg.initial_data.params = {-0.20676057692039673, 2.0, 0.0, 0.0,
                                   0.085421385764151703, 2.0, 0.0, 1.0,
                                   0.18233263567845645,  2.0, 0.0, 2.0,
                                   0.048924980147247846, 2.0, 0.0, 3.0};
        cfg.pair.preset = "dgbo";
        cfg.pair.basis_size = 5;
        cfg.pair.basis_width = 1.5;
        cfg.pair.separation = 0.1;
        cfg.refinement = true;

        const LabReport rep = run_experiment(cfg);
        const auto contrast = note_value(rep, "u1_indicator_contrast");
        if (contrast)
            std::printf("    recorded low-frequency indicator contrast: %.3f\n", *contrast);
        return contrast.has_value() && verdict_pass(rep, "w_weighted4_grid_converged") &&
               crit6 && crit10;
    });

    if (g_failures > 0) {
        std::printf("%d of 12 acceptance checks failed\n", g_failures);
        return 1;
    }
    std::printf("all 12 acceptance checks passed\n");
    return 0;
}
