#pragma once

#include "pvdrem/pv_model.hpp"

#include <vector>

namespace pvdrem {

/// Averaged boost-converter constants.
struct PlantParams {
    double inductance = 5e-3;          // [H]
    double capacitance = 1e-3;         // [F]
    double battery_resistance = 0.5;   // [ohm]
    double battery_voltage = 760.0;    // [V]

    void validate() const;
};

/// Converter state. `voltage` is the algebraic array voltage consistent with
/// `current`, refreshed whenever the state advances.
struct PlantState {
    double v_c = 0.0;       // capacitor voltage [V]
    double current = 0.0;   // inductor / array current [A]
    double voltage = 0.0;   // array voltage [V]
    double time = 0.0;      // [s]
};

struct SineComponent {
    double amplitude = 0.0;
    double omega = 0.0;   // [rad/s]
};

/// u(t) = bias + sum_i A_i sin(w_i t); must stay in (0, 1].
struct ControlLaw {
    double bias = 0.8;
    std::vector<SineComponent> sines;

    static ControlLaw paper_sec8();
};

/// Evaluates the control law; throws domain_error when the value leaves (0, 1].
double control(const ControlLaw& law, double t);

/// Solves the IV relation for V given I (unique root, right side strictly
/// decreasing in V). Throws algebraic_constraint_error when I >= a1 + a2.
double algebraic_voltage(const IVParams& a, double current, double v_hint = 0.0);

/// dI/dt from the inductor equation: (-u v_C + V) / L.
double time_derivative_current(const PlantParams& params, const PlantState& state,
                               double u);

/// Starting point near a feasible operating condition: v_C = v_b and the
/// array solved at V = v_b u(0).
PlantState initial_state(const PlantParams& params, const IVParams& a,
                         const ControlLaw& law);

/// One classical RK4 step; the algebraic voltage is re-solved at every stage
/// and the control law evaluated at stage times.
PlantState step(const PlantParams& params, const IVParams& a, const PlantState& state,
                const ControlLaw& law, double dt);

/// Same with the control input frozen over the step.
PlantState step(const PlantParams& params, const IVParams& a, const PlantState& state,
                double u, double dt);

} // namespace pvdrem
