#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "edm/rng.hpp"

namespace edm {

/// Classic cart-pole physics constants, overridable for tests.
struct CartpoleParams {
    double gravity = 9.8;
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double half_length = 0.5;
    double force_mag = 10.0;
    double dt = 0.02;  // explicit Euler step
    double theta_limit = 12.0 * 3.14159265358979323846 / 180.0;
    double x_limit = 2.4;
    std::size_t horizon = 500;
};

/// Pole balancing on a frictionless track. 4-dim state (cart position and
/// velocity, pole angle and angular velocity), 2 actions (push left/right),
/// reward +1 per step, done when a bound is crossed or the horizon is hit.
struct Cartpole {
    CartpoleParams params;
    static constexpr std::size_t state_dim = 4;
    static constexpr std::size_t n_actions = 2;
    std::string name = "cartpole";

    std::vector<double> reset(Rng& rng) const {
        std::vector<double> s(4);
        for (double& v : s) v = rng.uniform(-0.05, 0.05);
        return s;
    }

    bool out_of_bounds(const std::vector<double>& s) const {
        return std::fabs(s[0]) > params.x_limit || std::fabs(s[2]) > params.theta_limit;
    }

    struct Step {
        std::vector<double> next;
        double reward;
        bool done;
    };

    /// Euler-integrated cart-pole ODE; derivatives evaluated at the current
    /// state (position updated before velocity, the classic formulation).
    Step step(const std::vector<double>& s, std::size_t action) const {
        if (s.size() != 4) throw std::invalid_argument("cartpole: state must be 4-dim");
        if (action >= 2) throw std::invalid_argument("cartpole: action out of range");
        if (out_of_bounds(s))
            throw std::invalid_argument("cartpole: step on a finished episode");
        const double force = action == 1 ? params.force_mag : -params.force_mag;
        const double x = s[0], x_dot = s[1], theta = s[2], theta_dot = s[3];
        const double cos_t = std::cos(theta), sin_t = std::sin(theta);
        const double total_mass = params.cart_mass + params.pole_mass;
        const double polemass_length = params.pole_mass * params.half_length;
        const double temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
        const double theta_acc =
            (params.gravity * sin_t - cos_t * temp) /
            (params.half_length * (4.0 / 3.0 - params.pole_mass * cos_t * cos_t / total_mass));
        const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

        std::vector<double> next(4);
        next[0] = x + params.dt * x_dot;
        next[1] = x_dot + params.dt * x_acc;
        next[2] = theta + params.dt * theta_dot;
        next[3] = theta_dot + params.dt * theta_acc;
        const bool done = out_of_bounds(next);
        return Step{std::move(next), 1.0, done};
    }

    /// Deterministic pole-angle controller used as the in-repo demonstrator:
    /// push toward the side the pole is falling to.
    std::size_t expert_action(const std::vector<double>& s) const {
        return (s[2] + 0.5 * s[3]) > 0.0 ? 1 : 0;
    }
};

}  // namespace edm
