#include "dgbo/pairs.hpp"

#include "dgbo/errors.hpp"
#include "dgbo/functionals.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace dgbo {

namespace {

double constraint_value(const Field& u, Constraint c) {
    switch (c) {
    case Constraint::equal_L2:
        return functional_I(u, Conserved::I2);
    case Constraint::equal_mass:
        return moment(u, 0, false);
    case Constraint::equal_first_moment:
        return moment(u, 1, false);
    case Constraint::equal_second_moment:
        return moment(u, 2, false);
    case Constraint::equal_x_square_moment:
        return moment(u, 1, true);
    case Constraint::equal_I3:
        return functional_I(u, Conserved::I3);
    }
    throw config_error("unknown constraint tag");
}

void validate_tags(const MomentConstraints& cons) {
    std::set<Constraint> seen;
    for (Constraint c : cons.tags)
        if (!seen.insert(c).second)
            throw config_error("duplicate constraint tag: " + constraint_name(c));
}

std::vector<double> raw_samples_sum(const PerturbationFamily& fam) {
    const auto& b = fam.base.samples();
    std::vector<double> s(b.begin(), b.end());
    for (std::size_t i = 0; i < fam.basis.size(); ++i) {
        const double c = fam.coefficients[i];
        const auto& g = fam.basis[i].samples();
        for (std::size_t j = 0; j < s.size(); ++j) s[j] += c * g[j];
    }
    return s;
}

} // namespace

std::string constraint_name(Constraint c) {
    switch (c) {
    case Constraint::equal_L2: return "equal_L2";
    case Constraint::equal_mass: return "equal_mass";
    case Constraint::equal_first_moment: return "equal_first_moment";
    case Constraint::equal_second_moment: return "equal_second_moment";
    case Constraint::equal_x_square_moment: return "equal_x_square_moment";
    case Constraint::equal_I3: return "equal_I3";
    }
    return "unknown";
}

MomentConstraints MomentConstraints::dgbo_preset() {
    MomentConstraints m;
    m.tags = {Constraint::equal_L2, Constraint::equal_mass, Constraint::equal_first_moment};
    return m;
}

MomentConstraints MomentConstraints::bo_preset() {
    MomentConstraints m;
    m.tags = {Constraint::equal_L2,            Constraint::equal_mass,
              Constraint::equal_first_moment,  Constraint::equal_second_moment,
              Constraint::equal_x_square_moment, Constraint::equal_I3};
    return m;
}

Field PerturbationFamily::perturbation() const {
    if (coefficients.size() != basis.size())
        throw config_error("coefficient count does not match basis size");
    std::vector<double> s(base.samples().size(), 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& g = basis[i].samples();
        if (g.size() != s.size())
            throw config_error("basis profile lives on a different grid than the base");
        for (std::size_t j = 0; j < s.size(); ++j) s[j] += coefficients[i] * g[j];
    }
    return Field(base.grid_ptr(), std::move(s));
}

Field PerturbationFamily::perturbed() const {
    if (coefficients.size() != basis.size())
        throw config_error("coefficient count does not match basis size");
    return Field(base.grid_ptr(), raw_samples_sum(*this));
}

PerturbationFamily hermite_family(const Field& base, std::size_t m, double width) {
    if (m == 0) throw config_error("hermite_family needs at least one basis function");
    if (!(width > 0.0)) throw config_error("hermite_family width must be positive");
    const Grid& g = base.grid();
    PerturbationFamily fam{base, {}, std::vector<double>(m, 0.0)};
    fam.basis.reserve(m);
    std::vector<double> hkm1(g.n_points, 1.0), hk(g.n_points), s(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) hk[j] = 2.0 * g.nodes[j] / width;
    for (std::size_t deg = 0; deg < m; ++deg) {
        const std::vector<double>& h = (deg == 0) ? hkm1 : hk;
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double y = g.nodes[j] / width;
            s[j] = h[j] * std::exp(-y * y);
        }
        double nrm = 0.0;
        for (double v : s) nrm += v * v;
        nrm = std::sqrt(nrm * g.spacing());
        for (double& v : s) v /= nrm;
        fam.basis.emplace_back(base.grid_ptr(), s);
        if (deg + 1 < m && deg >= 1) {
            // Hermite recurrence H_{k+1} = 2y H_k - 2k H_{k-1}.
            for (std::size_t j = 0; j < g.n_points; ++j) {
                const double y = g.nodes[j] / width;
                const double next = 2.0 * y * hk[j] - 2.0 * static_cast<double>(deg) * hkm1[j];
                hkm1[j] = hk[j];
                hk[j] = next;
            }
        }
    }
    return fam;
}

std::vector<double> constraint_residual(const PerturbationFamily& fam,
                                        const MomentConstraints& cons) {
    validate_tags(cons);
    Field phi = fam.perturbed();
    std::vector<double> r;
    r.reserve(cons.tags.size());
    for (Constraint c : cons.tags)
        r.push_back(constraint_value(phi, c) - constraint_value(fam.base, c));
    return r;
}

std::string PairCertificate::to_text() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& [name, value] : residuals) os << name << " " << value << "\n";
    os << "separation " << separation << "\n";
    os << "requested_separation " << requested_separation << "\n";
    if (!coefficients.empty()) {
        os << "coefficients";
        for (double c : coefficients) os << " " << c;
        os << "\n";
    }
    os << "iterations " << iterations << "\n";
    os << "quadratic_constant " << quadratic_constant << "\n";
    return os.str();
}

MatchedPair match_pair(PerturbationFamily fam, const MomentConstraints& cons, double separation,
                       double tol) {
    validate_tags(cons);
    if (!(separation > 0.0)) throw config_error("separation must be positive");
    if (!(tol > 0.0)) throw config_error("tolerance must be positive");
    if (fam.basis.empty()) throw config_error("perturbation family has no basis");
    if (fam.coefficients.size() != fam.basis.size())
        throw config_error("coefficient count does not match basis size");

    if (cons.zero_mean) fam.base = make_zero_mean(fam.base, cons.zero_first_moment);

    const std::size_t m = fam.basis.size();
    const std::size_t p = cons.tags.size();

    // Residual of the full system: one row per moment equality plus the
    // sphere equation that pins the perturbation size.
    auto full_residual = [&](const std::vector<double>& c) {
        PerturbationFamily trial = fam;
        trial.coefficients = c;
        std::vector<double> r = constraint_residual(trial, cons);
        r.push_back(trial.perturbation().l2_norm() - separation);
        return r;
    };
    auto sup = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    };

    std::vector<double> c(m, 0.0);
    std::vector<double> r = full_residual(c);
    PairCertificate cert;
    cert.requested_separation = separation;
    cert.residual_history.push_back(sup(r));

    const int max_iter = 100;
    const double fd_step = 1e-7;
    bool converged = sup(r) <= tol;

    for (int iter = 0; iter < max_iter && !converged; ++iter) {
        // Forward-difference Jacobian, one column per coefficient.
        Eigen::MatrixXd J(p + 1, m);
        for (std::size_t j = 0; j < m; ++j) {
            std::vector<double> cs = c;
            cs[j] += fd_step;
            std::vector<double> rs = full_residual(cs);
            for (std::size_t i = 0; i <= p; ++i) J(i, j) = (rs[i] - r[i]) / fd_step;
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
        if (static_cast<std::size_t>(cod.rank()) < p)
            throw config_error("constraint Jacobian is rank-deficient for this family; choose a "
                               "different (richer or less symmetric) basis");

        Eigen::VectorXd rhs(p + 1);
        for (std::size_t i = 0; i <= p; ++i) rhs(i) = -r[i];
        Eigen::VectorXd dc = cod.solve(rhs);

        // Halve the step until the residual norm decreases.
        const double r0 = sup(r);
        double lambda = 1.0;
        std::vector<double> c_next, r_next;
        for (int back = 0; back < 30; ++back) {
            c_next = c;
            for (std::size_t j = 0; j < m; ++j) c_next[j] += lambda * dc(j);
            r_next = full_residual(c_next);
            if (sup(r_next) < r0 || sup(r_next) <= tol) break;
            lambda *= 0.5;
        }
        c = c_next;
        r = r_next;
        cert.residual_history.push_back(sup(r));
        cert.iterations = iter + 1;
        converged = sup(r) <= tol;
    }

    if (!converged) {
        std::ostringstream os;
        os.precision(6);
        os << "pair matching did not converge in " << max_iter
           << " iterations; final residual " << sup(r);
        throw solver_abort(os.str());
    }

    // Fit the quadratic-convergence constant from the final contraction steps.
    const auto& h = cert.residual_history;
    double C = 0.0;
    for (std::size_t i = h.size() >= 4 ? h.size() - 4 : 0; i + 1 < h.size(); ++i) {
        if (h[i] > 1e-15 && h[i + 1] > 0.0) C = std::max(C, h[i + 1] / (h[i] * h[i]));
    }
    cert.quadratic_constant = C;

    fam.coefficients = c;
    cert.coefficients = c;
    MatchedPair out{fam.perturbed(), fam.base, std::move(cert)};
    for (std::size_t i = 0; i < p; ++i)
        out.certificate.residuals.emplace_back(constraint_name(cons.tags[i]), r[i]);
    out.certificate.separation = fam.perturbation().l2_norm();
    return out;
}

Field make_zero_mean(const Field& f, bool also_first_moment) {
    const Grid& g = f.grid();
    const double dx = g.spacing();
    auto mass = [&](const std::vector<double>& s) {
        double m = 0.0;
        for (double v : s) m += v;
        return m * dx;
    };
    auto first = [&](const std::vector<double>& s) {
        double m = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) m += g.nodes[j] * s[j];
        return m * dx;
    };

    std::vector<double> even(g.n_points), odd(g.n_points);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double x = g.nodes[j];
        even[j] = std::exp(-x * x);
        odd[j] = x * even[j];
    }

    std::vector<double> out(f.samples().begin(), f.samples().end());
    const double alpha = mass(out) / mass(even);
    for (std::size_t j = 0; j < g.n_points; ++j) out[j] -= alpha * even[j];
    if (also_first_moment) {
        const double beta = first(out) / first(odd);
        for (std::size_t j = 0; j < g.n_points; ++j) out[j] -= beta * odd[j];
    }
    return Field(f.grid_ptr(), std::move(out));
}

} // namespace dgbo
