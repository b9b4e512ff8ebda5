#pragma once

#include "dgbo/field.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

inline dgbo::Field sample(const dgbo::GridPtr& g, const std::function<double(double)>& fn) {
    std::vector<double> v(g->n_points);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = fn(g->nodes[j]);
    return dgbo::Field(g, v);
}

inline double linf_diff(const dgbo::Field& a, const dgbo::Field& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.samples().size(); ++j)
        m = std::max(m, std::abs(a.samples()[j] - b.samples()[j]));
    return m;
}

inline double rel_l2_diff(const dgbo::Field& a, const dgbo::Field& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < a.samples().size(); ++j) {
        const double d = a.samples()[j] - b.samples()[j];
        num += d * d;
        den += b.samples()[j] * b.samples()[j];
    }
    return std::sqrt(num / (den > 0.0 ? den : 1.0));
}

} // namespace testutil
