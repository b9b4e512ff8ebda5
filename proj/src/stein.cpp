#include "dgbo/stein.hpp"

#include "dgbo/errors.hpp"
#include "dgbo/functionals.hpp"
#include "dgbo/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <thread>

namespace dgbo {

namespace {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

unsigned thread_budget() {
    if (const char* s = std::getenv("DGBO_THREADS")) {
        const long v = std::strtol(s, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
    }
    const unsigned h = std::thread::hardware_concurrency();
    return h ? h : 1;
}

// Independent per-index work, each index writing only its own slot, so the
// result is identical for any thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t budget = std::min<std::size_t>(thread_budget(), count ? count : 1);
    if (budget <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(budget);
    for (std::size_t t = 0; t < budget; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
        });
    for (auto& th : pool) th.join();
}

void validate_order(double b) {
    if (!(b > 0.0 && b < 1.0)) throw config_error("fractional order must lie in (0,1)");
}

} // namespace

SteinParams spectral_norm_params() {
    SteinParams p;
    p.tail_model = TailModel::local_value;
    return p;
}

std::vector<double> stein_derivative(const cvec& f, double spacing, const SteinParams& p) {
    validate_order(p.b);
    if (!(spacing > 0.0)) throw config_error("sample spacing must be positive");
    const std::size_t n = f.size();
    if (n < 4) throw config_error("need at least 4 samples");

    const double extent = spacing * static_cast<double>(n);
    const double eps = p.inner_cutoff > 0.0 ? p.inner_cutoff : 0.5 * spacing;
    const double rq = p.outer_limit > 0.0 ? p.outer_limit : 0.45 * extent;
    if (eps > spacing * (1.0 + 1e-12))
        throw config_error("inner cutoff must not exceed the sample spacing");
    if (rq > extent * (1.0 + 1e-12))
        throw config_error("outer limit must not exceed the sampled extent");

    const double b = p.b;
    double sup_sq = 0.0;
    for (const cplx& v : f) sup_sq = std::max(sup_sq, std::norm(v));
    const double tail_scale = std::pow(rq, -2.0 * b) / (2.0 * b);
    const double core_scale = std::pow(eps, 2.0 - 2.0 * b) / (1.0 - b);

    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) {
        // Taylor model on the excluded ball, slope from divided differences.
        cplx slope;
        if (i == 0)
            slope = (f[1] - f[0]) / spacing;
        else if (i + 1 == n)
            slope = (f[n - 1] - f[n - 2]) / spacing;
        else
            slope = (f[i + 1] - f[i - 1]) / (2.0 * spacing);
        double acc = std::norm(slope) * core_scale;

        // Midpoint rule over node cells, one cell per sample.
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = spacing * std::abs(static_cast<double>(i) - static_cast<double>(j));
            if (d <= eps || d > rq) continue;
            acc += std::norm(f[i] - f[j]) / std::pow(d, 1.0 + 2.0 * b) * spacing;
        }

        switch (p.tail_model) {
        case TailModel::sup_bound: acc += 2.0 * sup_sq * tail_scale; break;
        case TailModel::local_value: acc += 2.0 * std::norm(f[i]) * tail_scale; break;
        case TailModel::none: break;
        }
        out[i] = std::sqrt(acc);
    });
    return out;
}

std::vector<double> stein_derivative(const std::vector<double>& f, double spacing,
                                     const SteinParams& p) {
    cvec c(f.begin(), f.end());
    return stein_derivative(c, spacing, p);
}

std::vector<double> stein_derivative(const Field& f, const SteinParams& p) {
    cvec c(f.samples().begin(), f.samples().end());
    return stein_derivative(c, f.grid().spacing(), p);
}

double fractional_weighted_norm(const Field& u, int k, double theta, SteinParams p,
                                std::string* warning) {
    if (!(theta > 0.0 && theta < 1.0)) throw config_error("theta must lie in (0,1)");
    p.b = theta;

    if (warning) {
        const double bm = boundary_mass(u);
        const double mass = functional_I(u, Conserved::I2);
        if (bm > 1e-8 * mass)
            *warning = "boundary mass is not negligible; the decay norm reflects the periodic "
                       "box, not the real line";
    }

    // xi-sorted spectrum of (-ix)^k u.
    const Grid& g = u.grid();
    const std::size_t n = g.n_points;
    cvec fftordered = xi_derivative(u, k);
    cvec sorted(n);
    for (std::size_t j = 0; j < n; ++j) sorted[j] = fftordered[(j + n / 2) % n];

    const double dxi = g.xi_spacing();
    std::vector<double> d = stein_derivative(sorted, dxi, p);
    double sum = 0.0;
    for (double v : d) sum += v * v;
    // Plancherel constant of the |x|^theta weight.
    const double k_theta = M_PI / (2.0 * std::tgamma(1.0 + 2.0 * theta) * std::sin(M_PI * theta));
    return std::sqrt(sum * dxi / (8.0 * M_PI * k_theta));
}

double expansion_check(const Field& f, double t, double a, int k) {
    if (k < 1 || k > 5) throw config_error("expansion order k must lie in 1..5");
    DispersionParams dp(a); // validates the range of a

    const Grid& g = f.grid();
    const std::size_t n = g.n_points;
    const double dxi = g.xi_spacing();

    // xi-sorted spectrum, phase, and exact xi-derivatives of the spectrum.
    std::vector<double> xi(n);
    for (std::size_t j = 0; j < n; ++j)
        xi[j] = dxi * (static_cast<double>(j) - static_cast<double>(n / 2));
    std::vector<cvec> deriv(static_cast<std::size_t>(k) + 1, cvec(n));
    for (int j = 0; j <= k; ++j) {
        cvec fo = xi_derivative(f, j);
        for (std::size_t i = 0; i < n; ++i) deriv[j][i] = fo[(i + n / 2) % n];
    }
    cvec psi(n), lhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        psi[i] = std::exp(cplx(0.0, -t * dp.omega(xi[i])));
        lhs[i] = psi[i] * deriv[0][i];
    }

    // Left side: k passes of the 8th-order first-derivative stencil, applied
    // circularly (the spectrum is negligible at the band edge).
    static const double stencil[9] = {1.0 / 280.0, -4.0 / 105.0, 1.0 / 5.0,  -4.0 / 5.0, 0.0,
                                      4.0 / 5.0,   -1.0 / 5.0,   4.0 / 105.0, -1.0 / 280.0};
    cvec tmp(n);
    for (int pass = 0; pass < k; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc(0.0);
            for (int o = -4; o <= 4; ++o) {
                const std::size_t idx = (i + n + static_cast<std::size_t>(o + 4) - 4) % n;
                acc += stencil[o + 4] * lhs[idx];
            }
            tmp[i] = acc / dxi;
        }
        lhs.swap(tmp);
    }

    // Right side: psi * sum_j C(k,j) B_{k-j} d^j f, with B the complete Bell
    // polynomials in the derivatives of the phase exponent -i t xi|xi|^{1+a}.
    const double c1 = 2.0 + a;
    const double c2 = c1 * (1.0 + a);
    const double c3 = c2 * a;
    const double c4 = c3 * (a - 1.0);
    const double c5 = c4 * (a - 2.0);
    static const double binom[6][6] = {{1, 0, 0, 0, 0, 0}, {1, 1, 0, 0, 0, 0},
                                       {1, 2, 1, 0, 0, 0}, {1, 3, 3, 1, 0, 0},
                                       {1, 4, 6, 4, 1, 0}, {1, 5, 10, 10, 5, 1}};
    cvec rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xi[i];
        const double ax = std::abs(x);
        const double sg = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        const cplx mits(0.0, -t);
        cplx m[6];
        m[1] = mits * c1 * std::pow(ax, 1.0 + a);
        m[2] = mits * c2 * std::pow(ax, a) * sg;
        m[3] = mits * c3 * (ax > 0.0 ? std::pow(ax, a - 1.0) : 0.0);
        m[4] = mits * c4 * (ax > 0.0 ? std::pow(ax, a - 2.0) : 0.0) * sg;
        m[5] = mits * c5 * (ax > 0.0 ? std::pow(ax, a - 3.0) : 0.0);

        cplx bell[6];
        bell[0] = 1.0;
        for (int nn = 0; nn < k; ++nn) {
            cplx acc(0.0);
            for (int j = 0; j <= nn; ++j) acc += binom[nn][j] * bell[nn - j] * m[j + 1];
            bell[nn + 1] = acc;
        }

        cplx acc(0.0);
        for (int j = 0; j <= k; ++j) acc += binom[k][j] * bell[k - j] * deriv[j][i];
        rhs[i] = psi[i] * acc;
    }

    // Clean band: keep the stencil footprint clear of the kink at xi=0 and of
    // the decaying band edge.
    const double lo = (4.0 * k + 2.0) * dxi;
    const double hi = 0.99 * (2.0 / 3.0) * g.xi_max();
    double dev = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ax = std::abs(xi[i]);
        if (ax < lo || ax > hi) continue;
        dev = std::max(dev, std::abs(lhs[i] - rhs[i]));
        scale = std::max(scale, std::abs(rhs[i]));
    }
    if (scale == 0.0) throw config_error("expansion band is empty or identically zero");
    return dev / scale;
}

namespace {

// Dyadically refined midpoint quadrature of |v(eta)-v(y)|^2 / |eta-y|^{1+2b}
// over [eta-rq, eta+rq], with an analytic Taylor core on |y-eta| <= eps and a
// local-value tail beyond rq. Breakpoints mark kinks of v; each inter-break
// segment is split at its midpoint and each half resolved by 42 dyadic pieces
// toward its endpoint, 12 midpoint samples per piece.
double point_quadrature(const std::function<cplx(double)>& v, double eta, double b, double eps,
                        double rq, cplx v_eta, cplx dv_eta, std::vector<double> breaks) {
    double acc = std::norm(dv_eta) * std::pow(eps, 2.0 - 2.0 * b) / (1.0 - b);
    acc += 2.0 * std::norm(v_eta) * std::pow(rq, -2.0 * b) / (2.0 * b);

    breaks.push_back(eta - rq);
    breaks.push_back(eta - eps);
    breaks.push_back(eta + eps);
    breaks.push_back(eta + rq);
    std::sort(breaks.begin(), breaks.end());

    auto sample_piece = [&](double lo, double hi) {
        const double w = (hi - lo) / 12.0;
        double s = 0.0;
        for (int i = 0; i < 12; ++i) {
            const double y = lo + (i + 0.5) * w;
            const double d = std::abs(y - eta);
            if (d <= eps) continue;
            s += std::norm(v_eta - v(y)) / std::pow(d, 1.0 + 2.0 * b);
        }
        return s * w;
    };

    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        double lo = std::max(breaks[s], eta - rq);
        double hi = std::min(breaks[s + 1], eta + rq);
        if (!(hi > lo)) continue;
        if (hi <= eta + eps && lo >= eta - eps) continue;
        const double mid = 0.5 * (lo + hi);
        // Left half, pieces accumulating toward lo.
        double edge = mid;
        for (int piece = 0; piece < 42; ++piece) {
            const double inner = lo + (edge - lo) * 0.5;
            acc += sample_piece(inner, edge);
            edge = inner;
        }
        // Right half, pieces accumulating toward hi.
        edge = mid;
        for (int piece = 0; piece < 42; ++piece) {
            const double inner = hi - (hi - edge) * 0.5;
            acc += sample_piece(edge, inner);
            edge = inner;
        }
    }
    return std::sqrt(acc);
}

// C2 smoothstep cutoff: 1 on [-1,1], 0 outside [-2,2].
double chi(double y) {
    const double u = std::abs(y) - 1.0;
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    // Least squares on log-log pairs.
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

DsteinReport dstein_asymptotics(double alpha, double theta, bool signed_variant) {
    validate_order(theta);
    if (!(alpha > -0.5))
        throw config_error("alpha must exceed -1/2 for local square integrability");

    auto profile = [alpha, signed_variant](double y) -> cplx {
        if (y == 0.0) return 0.0;
        double v = std::pow(std::abs(y), alpha) * chi(y);
        if (signed_variant && y < 0.0) v = -v;
        return v;
    };

    const double rq = 1e4;
    auto eval = [&](double eta) {
        const double scl =
            std::max(std::min({std::abs(eta), std::abs(std::abs(eta) - 1.0),
                               std::abs(std::abs(eta) - 2.0)}),
                     1e-12);
        const double eps = std::min(1e-4, 1e-3 * scl);
        const double h = 1e-7 * std::max(scl, 1e-9);
        const cplx v_eta = profile(eta);
        const cplx dv = (profile(eta + h) - profile(eta - h)) / (2.0 * h);
        return point_quadrature(profile, eta, theta, eps, rq, v_eta, dv,
                                {-2.0, -1.0, 0.0, 1.0, 2.0});
    };

    DsteinReport rep{};
    rep.small_eta_slope = std::numeric_limits<double>::quiet_NaN();
    auto geomspace = [](double lo, double hi, int m) {
        std::vector<double> v(m);
        for (int i = 0; i < m; ++i) v[i] = lo * std::pow(hi / lo, double(i) / (m - 1));
        return v;
    };

    if (alpha < theta) {
        auto xs = geomspace(1e-3, 1e-2, 7);
        std::vector<double> ys(xs.size());
        parallel_for(xs.size(), [&](std::size_t i) { ys[i] = eval(xs[i]); });
        rep.small_eta_slope = fit_slope(xs, ys);
    }
    {
        auto xs = geomspace(1e2, 1e3, 7);
        std::vector<double> ys(xs.size());
        parallel_for(xs.size(), [&](std::size_t i) { ys[i] = eval(xs[i]); });
        rep.tail_slope = fit_slope(xs, ys);
    }

    // Two-rung refinement ladder for the L2 indicator: dyadic shells from
    // eta_lo to 8, eight midpoint samples per shell, both signs by symmetry.
    auto ladder_norm = [&](double eta_lo) {
        std::vector<double> pts;
        std::vector<double> wts;
        for (double s = eta_lo; s < 8.0; s *= 2.0) {
            const double hi = std::min(2.0 * s, 8.0);
            const double w = (hi - s) / 8.0;
            for (int i = 0; i < 8; ++i) {
                pts.push_back(s + (i + 0.5) * w);
                wts.push_back(w);
            }
        }
        std::vector<double> vals(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) { vals[i] = eval(pts[i]); });
        double acc = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) acc += vals[i] * vals[i] * wts[i];
        return std::sqrt(2.0 * acc);
    };
    rep.l2_coarse = ladder_norm(1e-6);
    rep.l2_fine = ladder_norm(1.25e-7);
    rep.l2_change = std::abs(rep.l2_fine - rep.l2_coarse) / rep.l2_coarse;
    rep.l2_converged = rep.l2_change < 0.05;
    return rep;
}

PhaseBoundReport pointwise_phase_bound(double t, double a, double b) {
    validate_order(b);
    if (!(t > 0.0)) throw config_error("phase bound requires t > 0");
    DispersionParams dp(a);

    auto phase = [&](double y) { return std::exp(cplx(0.0, -t * dp.omega(y))); };
    const double rq = 200.0;

    PhaseBoundReport rep;
    rep.x = {-20.0, -10.0, -5.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
    rep.value.resize(rep.x.size());
    rep.envelope.resize(rep.x.size());

    parallel_for(rep.x.size(), [&](std::size_t i) {
        const double x = rep.x[i];
        // Exact derivative of the phase, giving the Taylor core directly.
        const cplx v = phase(x);
        const cplx dv = cplx(0.0, -t * (2.0 + a) * std::pow(std::abs(x), 1.0 + a)) * v;
        const double freq = 1.0 + t * (2.0 + a) * std::pow(std::max(std::abs(x), 1.0), 1.0 + a);
        const double eps = std::min(1e-6, 1e-3 / freq);
        rep.value[i] = point_quadrature(phase, x, b, eps, rq, v, dv, {0.0});
        rep.envelope[i] =
            std::pow(t, b / (2.0 + a)) + std::pow(t, b) * std::pow(std::abs(x), (1.0 + a) * b);
    });

    rep.max_ratio = 0.0;
    for (std::size_t i = 0; i < rep.x.size(); ++i)
        rep.max_ratio = std::max(rep.max_ratio, rep.value[i] / rep.envelope[i]);
    return rep;
}

} // namespace dgbo
