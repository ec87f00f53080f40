#pragma once

#include "pvdrem/pv_model.hpp"

#include <array>

namespace pvdrem {

/// First-order filter states feeding the measurable regression. chi carries
/// the swapping-lemma auxiliary [1/(p+lambda)](dI/dt * dxi2/dt).
struct FilterBank {
    double lambda = 100.0;   // filter pole [1/s]
    double xi1 = 0.0;        // filtered I [A]
    double xi2 = 0.0;        // filtered -V [V]
    double xi3 = 0.0;        // filtered V^2/2 [V^2]
    double xi4 = 0.0;        // filtered I^2/2 [A^2]
    double xi5 = 0.0;        // filtered -V dI/dt [V A/s]
    double chi = 0.0;        // swapping auxiliary [V A/s^2 / (1/s)]

    /// Samples before this time carry filter-transient error and are flagged
    /// invalid (5 time constants).
    double warmup_time() const { return 5.0 / lambda; }
};

/// One measurable regression sample y = omega . theta.
struct RegressionSample {
    double t = 0.0;
    double y = 0.0;                        // [A/s]
    std::array<double, 5> omega{};         // regressor vector
    bool valid = false;
};

/// Positive regression parameters theta and the dummy parameters b.
struct ThetaParams {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta3 = 0.0;
    double theta4 = 0.0;
    double theta5 = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double b3 = 0.0;

    std::array<double, 5> as_array() const {
        return {theta1, theta2, theta3, theta4, theta5};
    }
};

/// Time derivatives of the filter states for the given instantaneous signals.
std::array<double, 6> filter_derivatives(const FilterBank& bank, double voltage,
                                         double current, double current_dot);

/// Advances the bank one RK4 step with the inputs held over the step. For
/// coherent sampling against a simulated plant use harness::CoupledStepper,
/// which integrates plant and filters as one system.
FilterBank filter_step(const FilterBank& bank, double voltage, double current,
                       double current_dot, double dt);

/// Builds the regression sample from the current bank and signals:
///   y      = lambda (I - xi1)
///   omega1 = chi - I * dxi2/dt      (swapping-lemma form of the filtered V' I)
///   omega2 = dxi2/dt
///   omega3 = dxi3/dt
///   omega4 = dxi4/dt
///   omega5 = -xi5
RegressionSample emit_sample(const FilterBank& bank, double t, double voltage,
                             double current, double current_dot);

/// The reparameterisation theta = F(a); also fills the b parameters.
/// Satisfies theta1 * theta5 == theta3 * theta4.
ThetaParams map_a_to_theta(const IVParams& a);

} // namespace pvdrem
