#pragma once

#include <stdexcept>
#include <string>

namespace dgbo {

// Invalid configuration or contract violation detected before any time stepping.
struct config_error : std::invalid_argument {
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// Runtime abort of an integrator: CFL violation, blow-up guard, non-contracting iteration.
struct solver_abort : std::runtime_error {
    explicit solver_abort(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dgbo
