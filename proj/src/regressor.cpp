#include "pvdrem/regressor.hpp"

#include "pvdrem/errors.hpp"

namespace pvdrem {

std::array<double, 6> filter_derivatives(const FilterBank& bank, double voltage,
                                         double current, double current_dot) {
    const double lam = bank.lambda;
    const double xi2_dot = lam * (-voltage - bank.xi2);
    return {
        lam * (current - bank.xi1),
        xi2_dot,
        lam * (0.5 * voltage * voltage - bank.xi3),
        lam * (0.5 * current * current - bank.xi4),
        lam * (-voltage * current_dot - bank.xi5),
        -lam * bank.chi + current_dot * xi2_dot,
    };
}

namespace {

FilterBank apply(const FilterBank& bank, const std::array<double, 6>& d, double h) {
    FilterBank out = bank;
    out.xi1 += h * d[0];
    out.xi2 += h * d[1];
    out.xi3 += h * d[2];
    out.xi4 += h * d[3];
    out.xi5 += h * d[4];
    out.chi += h * d[5];
    return out;
}

} // namespace

FilterBank filter_step(const FilterBank& bank, double voltage, double current,
                       double current_dot, double dt) {
    if (!(dt > 0.0)) throw domain_error("dt must be positive");
    const auto k1 = filter_derivatives(bank, voltage, current, current_dot);
    const auto k2 = filter_derivatives(apply(bank, k1, 0.5 * dt), voltage, current,
                                       current_dot);
    const auto k3 = filter_derivatives(apply(bank, k2, 0.5 * dt), voltage, current,
                                       current_dot);
    const auto k4 = filter_derivatives(apply(bank, k3, dt), voltage, current,
                                       current_dot);
    FilterBank out = bank;
    out.xi1 += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    out.xi2 += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    out.xi3 += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
    out.xi4 += dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
    out.xi5 += dt / 6.0 * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]);
    out.chi += dt / 6.0 * (k1[5] + 2.0 * k2[5] + 2.0 * k3[5] + k4[5]);
    return out;
}

RegressionSample emit_sample(const FilterBank& bank, double t, double voltage,
                             double current, double current_dot) {
    const double lam = bank.lambda;
    const double xi2_dot = lam * (-voltage - bank.xi2);

    RegressionSample s;
    s.t = t;
    s.y = lam * (current - bank.xi1);
    s.omega[0] = bank.chi - current * xi2_dot;
    s.omega[1] = xi2_dot;
    s.omega[2] = lam * (0.5 * voltage * voltage - bank.xi3);
    s.omega[3] = lam * (0.5 * current * current - bank.xi4);
    s.omega[4] = -bank.xi5;
    s.valid = t >= bank.warmup_time();
    return s;
}

ThetaParams map_a_to_theta(const IVParams& a) {
    const double shunt = 1.0 + a.a5 * a.a4;

    ThetaParams th;
    th.b1 = (a.a1 + a.a2) / shunt;
    th.b2 = a.a2 / shunt;
    th.b3 = a.a5 / shunt;

    const double den = 1.0 + a.a3 * a.a4 * th.b1;
    th.theta1 = a.a3 / den;
    th.theta2 = (a.a3 * th.b1 + th.b3) / den;
    th.theta3 = a.a3 * th.b3 / den;
    th.theta4 = a.a3 * a.a4 / den;
    th.theta5 = a.a3 * a.a4 * th.b3 / den;
    return th;
}

} // namespace pvdrem
