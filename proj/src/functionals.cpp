#include "dgbo/functionals.hpp"

#include "dgbo/errors.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace dgbo {
namespace {

// Quintic smoothstep on [0,1] and its running integral.
double smoothstep(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_complement_integral(double v) {
    // integral from 0 to v of (1 - smoothstep), for v in [0,1]; equals 1/2 at v=1.
    const double v4 = v * v * v * v;
    return v - v4 * (2.5 - 3.0 * v + v * v);
}

double squared_weight(double x, const WeightSpec& w) {
    if (w.truncation_n) {
        const double t = truncated_angle_weight(x, *w.truncation_n);
        return std::pow(t * t, w.r);
    }
    if (w.angle_bracket) return std::pow(1.0 + x * x, w.r);
    return 1.0 + std::pow(x * x, w.r);
}

void check_boundary(const Field& u, std::string* warning) {
    if (!warning) return;
    const double bm = boundary_mass(u);
    const double mass = functional_I(u, Conserved::I2);
    if (bm > 1e-8 * mass)
        *warning = "weighted functional: boundary mass " + std::to_string(bm) +
                   " exceeds 1e-8 of the squared norm; window readings are suspect";
}

} // namespace

double functional_I(const Field& u, Conserved which) {
    const Grid& g = u.grid();
    const double dx = g.spacing();
    switch (which) {
        case Conserved::I1: {
            double s = 0.0;
            for (double v : u.samples()) s += v;
            return s * dx;
        }
        case Conserved::I2: {
            double s = 0.0;
            for (double v : u.samples()) s += v * v;
            return s * dx;
        }
        case Conserved::I3: {
            double quad = 0.0;
            const auto& spec = u.spectrum();
            for (std::size_t k = 0; k < g.n_points; ++k)
                quad += std::abs(g.wavenumbers[k]) * std::norm(spec[k]);
            quad /= g.box_length;
            double cubic = 0.0;
            for (double v : u.samples()) cubic += v * v * v;
            cubic *= dx / 3.0;
            return quad + cubic;
        }
    }
    throw config_error("unknown conserved functional selector");
}

double resolve_window(const WeightSpec& w, const Grid& g) {
    const double W = w.window_half_width ? *w.window_half_width : 0.4 * g.box_length;
    if (!(W > 0.0) || W > 0.5 * g.box_length)
        throw config_error("window half width must lie in (0, L/2]");
    return W;
}

double moment(const Field& u, int k, bool of_square, const WeightSpec& w, std::string* warning) {
    if (k < 0 || k > 2)
        throw config_error("moment order must be in 0..2, got " + std::to_string(k));
    const Grid& g = u.grid();
    const double W = resolve_window(w, g);
    check_boundary(u, warning);
    double s = 0.0;
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double x = g.nodes[j];
        if (std::abs(x) > W) continue;
        double v = u.samples()[j];
        if (of_square) v *= v;
        s += std::pow(x, k) * v;
    }
    return s * g.spacing();
}

double weighted_norm(const Field& u, const WeightSpec& w, std::string* warning) {
    const Grid& g = u.grid();
    const double W = resolve_window(w, g);
    check_boundary(u, warning);
    double s = 0.0;
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double x = g.nodes[j];
        if (std::abs(x) > W) continue;
        const double v = u.samples()[j];
        s += squared_weight(x, w) * v * v;
    }
    return std::sqrt(s * g.spacing());
}

double boundary_mass(const Field& u) {
    const Grid& g = u.grid();
    const double edge = 0.9 * 0.5 * g.box_length;
    double s = 0.0;
    for (std::size_t j = 0; j < g.n_points; ++j) {
        if (std::abs(g.nodes[j]) <= edge) continue;
        s += u.samples()[j] * u.samples()[j];
    }
    return s * g.spacing();
}

double truncated_angle_weight(double x, int n_trunc) {
    if (n_trunc <= 0) throw config_error("truncation index must be a positive integer");
    const double N = static_cast<double>(n_trunc);
    const double ax = std::abs(x);
    if (ax <= N) return std::hypot(1.0, ax);
    const double angN = std::hypot(1.0, N);
    if (ax >= 3.0 * N) return 2.0 * N;
    // Ramp with initial slope d0 = N/<N>, closing at tau = s with total rise
    // 2N - <N>; s = 2*Ibar/d0 <= 1 always since <N>(2N - <N>) <= N^2 + ... its
    // own square completes to (N - <N>)^2 >= 0.
    const double d0 = N / angN;
    const double ibar = (2.0 * N - angN) / (2.0 * N);
    const double s = 2.0 * ibar / d0;
    const double tau = (ax - N) / (2.0 * N);
    if (tau >= s) return 2.0 * N;
    return angN + 2.0 * N * d0 * s * smoothstep_complement_integral(tau / s);
}

Probe make_probe(const std::string& name) {
    if (name == "I1") return [](const Field& u) { return functional_I(u, Conserved::I1); };
    if (name == "I2") return [](const Field& u) { return functional_I(u, Conserved::I2); };
    if (name == "I3") return [](const Field& u) { return functional_I(u, Conserved::I3); };
    if (name == "M1") return [](const Field& u) { return moment(u, 1, false); };
    if (name == "M2") return [](const Field& u) { return moment(u, 2, false); };
    if (name == "xM_sq") return [](const Field& u) { return moment(u, 1, true); };
    if (name == "boundary_mass") return [](const Field& u) { return boundary_mass(u); };
    if (name.rfind("Zr:", 0) == 0) {
        WeightSpec w;
        try {
            w.r = std::stod(name.substr(3));
        } catch (const std::exception&) {
            throw config_error("bad weighted-norm probe '" + name + "'");
        }
        return [w](const Field& u) { return weighted_norm(u, w); };
    }
    if (name.rfind("ZrN:", 0) == 0) {
        WeightSpec w;
        const std::string body = name.substr(4);
        const auto comma = body.find(',');
        if (comma == std::string::npos)
            throw config_error("bad truncated-norm probe '" + name + "', want ZrN:<r>,<N>");
        try {
            w.r = std::stod(body.substr(0, comma));
            w.truncation_n = std::stoi(body.substr(comma + 1));
        } catch (const std::exception&) {
            throw config_error("bad truncated-norm probe '" + name + "'");
        }
        return [w](const Field& u) { return weighted_norm(u, w); };
    }
    throw config_error("unknown probe '" + name + "'");
}

} // namespace dgbo
