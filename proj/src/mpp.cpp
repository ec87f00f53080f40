#include "pvdrem/mpp.hpp"

#include "pvdrem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pvdrem {

namespace {

constexpr double kExpClamp = 700.0;

} // namespace

MppParams MppParams::from_iv(const IVParams& a) {
    const double shunt = 1.0 + a.a5 * a.a4;
    MppParams p;
    p.b1 = (a.a1 + a.a2) / shunt;
    p.b2 = a.a2 / shunt;
    p.b3 = a.a5 / shunt;
    p.a3 = a.a3;
    p.a4 = a.a4;
    return p;
}

GradientValue power_derivative(const MppParams& p, double voltage, double current) {
    GradientValue out;
    const double z = p.a3 * (voltage + p.a4 * current);
    if (std::abs(z) > kExpClamp) {
        out.overflow = true;
        out.value = z > 0.0 ? -std::numeric_limits<double>::max()
                            : std::numeric_limits<double>::max();
        return out;
    }
    out.value = p.b1 - (p.b2 + p.b2 * p.a3 * voltage) * std::exp(z) -
                2.0 * p.b3 * voltage;
    return out;
}

double mpp_current(const MppParams& p, double voltage) {
    return (2.0 * p.b3 * voltage - p.b1) / (1.0 + p.a3 * voltage) + p.b1 -
           p.b3 * voltage;
}

GradientValue mpp_gradient(const MppParams& p, double voltage) {
    return power_derivative(p, voltage, mpp_current(p, voltage));
}

void observer_step(MppObserver& observer, const MppParams& p, double dt) {
    if (!(dt > 0.0)) throw domain_error("dt must be positive");
    const GradientValue grad = mpp_gradient(p, observer.v_hat);
    if (grad.overflow) return;
    observer.v_hat = std::max(0.0, observer.v_hat + observer.gain * grad.value * dt);
}

MppPoint locate_mpp(const IVParams& a, double v_max, int n_grid) {
    if (n_grid < 3) throw domain_error("n_grid must be at least 3");
    a.validate();
    if (v_max <= 0.0) v_max = open_circuit_voltage(a);

    const MppParams p = MppParams::from_iv(a);
    const auto derivative_at = [&](double v, double hint) {
        const double i = solve_current(a, v, hint);
        return std::pair{power_derivative(p, v, i).value, i};
    };

    // Grid sweep for a + -> - sign change of the on-curve power derivative.
    double hint = a.a1;
    double v_lo = 0.0;
    auto [d_lo, i_lo] = derivative_at(0.0, hint);
    hint = i_lo;
    double v_hi = -1.0;
    double d_hi = 0.0;
    for (int k = 1; k < n_grid; ++k) {
        const double v = v_max * static_cast<double>(k) / (n_grid - 1);
        auto [d, i] = derivative_at(v, hint);
        hint = i;
        if (d_lo > 0.0 && d <= 0.0) {
            v_hi = v;
            d_hi = d;
            break;
        }
        v_lo = v;
        d_lo = d;
    }
    if (v_hi < 0.0 || d_lo <= 0.0) {
        throw domain_error("locate_mpp: no maximum inside the range; widen v_max");
    }

    // Bisection on the sign; tightened well below the 1e-4 V contract so the
    // residual of the gradient is negligible at the returned point.
    while (v_hi - v_lo > 1e-9 * std::max(1.0, v_hi)) {
        const double mid = 0.5 * (v_lo + v_hi);
        auto [d, i] = derivative_at(mid, hint);
        hint = i;
        (d > 0.0 ? v_lo : v_hi) = mid;
    }

    MppPoint out;
    out.voltage = 0.5 * (v_lo + v_hi);
    out.current = solve_current(a, out.voltage, hint);
    out.power = out.voltage * out.current;
    return out;
}

MppPoint argmax_power(const IVParams& a, double v_max) {
    a.validate();
    if (v_max <= 0.0) v_max = open_circuit_voltage(a);

    double hint = a.a1;
    const auto power_at = [&](double v) {
        hint = solve_current(a, v, hint);
        return v * hint;
    };

    // Coarse grid then golden-section refinement.
    const int n = 256;
    int best = 0;
    double best_p = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = v_max * static_cast<double>(k) / (n - 1);
        const double p = power_at(v);
        if (p > best_p) {
            best_p = p;
            best = k;
        }
    }
    double lo = v_max * static_cast<double>(std::max(0, best - 1)) / (n - 1);
    double hi = v_max * static_cast<double>(std::min(n - 1, best + 1)) / (n - 1);

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo);
    double d = lo + gr * (hi - lo);
    double fc = power_at(c);
    double fd = power_at(d);
    while (hi - lo > 1e-7 * std::max(1.0, hi)) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = power_at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = power_at(d);
        }
    }

    MppPoint out;
    out.voltage = 0.5 * (lo + hi);
    out.current = solve_current(a, out.voltage, a.a1 / 2.0);
    out.power = out.voltage * out.current;
    return out;
}

} // namespace pvdrem
