#pragma once

#include "pvdrem/pv_model.hpp"

namespace pvdrem {

/// Parameters entering the maximum-power machinery.
struct MppParams {
    double b1 = 0.0;
    double b2 = 0.0;
    double b3 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;

    static MppParams from_iv(const IVParams& a);
    bool positive() const { return b1 > 0 && b2 > 0 && b3 > 0 && a3 > 0 && a4 > 0; }
};

/// A formula evaluation that may have saturated its exponent.
struct GradientValue {
    double value = 0.0;
    bool overflow = false;
};

/// dP/dV with the current held fixed:
///   h(V, I) = b1 - (b2 + b2 a3 V) exp(a3 (V + a4 I)) - 2 b3 V.
GradientValue power_derivative(const MppParams& p, double voltage, double current);

/// Candidate maximum-power current as a function of voltage:
///   g(V) = (2 b3 V - b1) / (1 + a3 V) + b1 - b3 V.
double mpp_current(const MppParams& p, double voltage);

/// The scalar equation whose root is the maximum-power voltage:
///   H(V) = h(V, g(V)); strictly decreasing on the positive half line.
GradientValue mpp_gradient(const MppParams& p, double voltage);

/// Gradient-ascent observer dV/dt = gain * H(V), clamped at zero from below.
struct MppObserver {
    double v_hat = 0.0;
    double gain = 0.5;
};

/// One explicit Euler step; holds when the gradient evaluation overflows.
void observer_step(MppObserver& observer, const MppParams& p, double dt);

struct MppPoint {
    double voltage = 0.0;
    double current = 0.0;
    double power = 0.0;
};

/// Independent maximum-power search: sweeps the solved IV curve on a grid,
/// locates the sign change of the power derivative h(V, I(V)) and refines it
/// by bisection. v_max <= 0 selects the open-circuit voltage. Throws
/// domain_error when no sign change lies inside the range.
MppPoint locate_mpp(const IVParams& a, double v_max = 0.0, int n_grid = 512);

/// Plain argmax of V * I(V) by golden-section search. The power derivative
/// above treats the current as fixed, so its zero sits slightly below this
/// argmax; both are reported by the harness.
MppPoint argmax_power(const IVParams& a, double v_max = 0.0);

} // namespace pvdrem
