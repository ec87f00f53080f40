#include "pvdrem/plant.hpp"

#include "pvdrem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pvdrem {

namespace {

constexpr double kExpClamp = 700.0;

} // namespace

void PlantParams::validate() const {
    if (!(inductance > 0.0) || !(capacitance > 0.0) || !(battery_resistance > 0.0) ||
        !(battery_voltage > 0.0)) {
        throw domain_error("plant constants must be strictly positive");
    }
}

ControlLaw ControlLaw::paper_sec8() {
    ControlLaw law;
    law.bias = 0.8;
    law.sines = {{0.1, 3.0}, {0.1, 4.0}};
    return law;
}

double control(const ControlLaw& law, double t) {
    double u = law.bias;
    for (const auto& s : law.sines) u += s.amplitude * std::sin(s.omega * t);
    if (!(u > 0.0) || u > 1.0) {
        throw domain_error("control law leaves (0, 1] at t = " + std::to_string(t));
    }
    return u;
}

double algebraic_voltage(const IVParams& a, double current, double v_hint) {
    if (!(current < a.a1 + a.a2)) {
        throw algebraic_constraint_error(
            "array current " + std::to_string(current) +
            " outside solvable range (a1 + a2 = " + std::to_string(a.a1 + a.a2) + ")");
    }

    // Solve s(w) = (a1 + a2 - I) - a2 e^{a3 w} - a5 w = 0 for w = V + a4 I;
    // s is strictly decreasing.
    const double c = a.a1 + a.a2 - current;
    const auto s_of = [&](double w) {
        return c - a.a2 * std::exp(std::min(a.a3 * w, kExpClamp)) - a.a5 * w;
    };

    double w = v_hint + a.a4 * current;
    for (int iter = 0; iter < 64; ++iter) {
        const double z = a.a3 * w;
        if (z > kExpClamp) break;
        const double e = std::exp(z);
        const double s = c - a.a2 * e - a.a5 * w;
        const double ds = -a.a2 * a.a3 * e - a.a5;
        if (ds == 0.0) break;
        const double next = w - s / ds;
        if (!std::isfinite(next)) break;
        if (std::abs(next - w) <= 1e-12 * std::max(1.0, std::abs(next))) {
            w = next;
            const double res = std::abs(s_of(w));
            if (res <= 1e-10 * std::max(1.0, std::abs(w))) {
                return w - a.a4 * current;
            }
            break;
        }
        w = next;
    }

    // Bisection fallback with geometric bracket expansion.
    double lo = w;
    double hi = w;
    double span = std::max(1.0, std::abs(w));
    for (int expand = 0; expand < 200 && s_of(lo) < 0.0; ++expand) {
        lo -= span;
        span *= 2.0;
    }
    span = std::max(1.0, std::abs(w));
    for (int expand = 0; expand < 200 && s_of(hi) > 0.0; ++expand) {
        hi += span;
        span *= 2.0;
    }
    if (s_of(lo) < 0.0 || s_of(hi) > 0.0) {
        throw algebraic_constraint_error("algebraic_voltage: failed to bracket root");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double s = s_of(mid);
        if (std::abs(s) <= 1e-10 * std::max(1.0, std::abs(mid)) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(mid))) {
            return mid - a.a4 * current;
        }
        (s > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) - a.a4 * current;
}

double time_derivative_current(const PlantParams& params, const PlantState& state,
                               double u) {
    return (-u * state.v_c + state.voltage) / params.inductance;
}

PlantState initial_state(const PlantParams& params, const IVParams& a,
                         const ControlLaw& law) {
    params.validate();
    const double u0 = control(law, 0.0);
    PlantState state;
    state.v_c = params.battery_voltage;
    state.current = solve_current(a, params.battery_voltage * u0, a.a1 / 2.0);
    state.voltage = algebraic_voltage(a, state.current, params.battery_voltage * u0);
    state.time = 0.0;
    return state;
}

namespace {

struct Derivatives {
    double d_vc;
    double d_current;
};

Derivatives plant_rhs(const PlantParams& p, const IVParams& a, double v_c,
                      double current, double u, double* v_hint) {
    const double v = algebraic_voltage(a, current, *v_hint);
    *v_hint = v;
    Derivatives d;
    d.d_vc = (u * current - (v_c - p.battery_voltage) / p.battery_resistance) /
             p.capacitance;
    d.d_current = (-u * v_c + v) / p.inductance;
    return d;
}

template <typename ControlFn>
PlantState rk4_step(const PlantParams& params, const IVParams& a,
                    const PlantState& state, ControlFn&& u_at, double dt) {
    if (!(dt > 0.0)) throw domain_error("dt must be positive");

    double v_hint = state.voltage;
    const double t = state.time;
    const double u0 = u_at(t);
    const double um = u_at(t + 0.5 * dt);
    const double u1 = u_at(t + dt);

    const Derivatives k1 = plant_rhs(params, a, state.v_c, state.current, u0, &v_hint);
    const Derivatives k2 = plant_rhs(params, a, state.v_c + 0.5 * dt * k1.d_vc,
                                     state.current + 0.5 * dt * k1.d_current, um,
                                     &v_hint);
    const Derivatives k3 = plant_rhs(params, a, state.v_c + 0.5 * dt * k2.d_vc,
                                     state.current + 0.5 * dt * k2.d_current, um,
                                     &v_hint);
    const Derivatives k4 = plant_rhs(params, a, state.v_c + dt * k3.d_vc,
                                     state.current + dt * k3.d_current, u1, &v_hint);

    PlantState next;
    next.v_c = state.v_c +
               dt / 6.0 * (k1.d_vc + 2.0 * k2.d_vc + 2.0 * k3.d_vc + k4.d_vc);
    next.current = state.current + dt / 6.0 *
                                       (k1.d_current + 2.0 * k2.d_current +
                                        2.0 * k3.d_current + k4.d_current);
    next.voltage = algebraic_voltage(a, next.current, v_hint);
    next.time = t + dt;
    return next;
}

} // namespace

PlantState step(const PlantParams& params, const IVParams& a, const PlantState& state,
                const ControlLaw& law, double dt) {
    return rk4_step(params, a, state, [&](double t) { return control(law, t); }, dt);
}

PlantState step(const PlantParams& params, const IVParams& a, const PlantState& state,
                double u, double dt) {
    return rk4_step(params, a, state, [u](double) { return u; }, dt);
}

} // namespace pvdrem
