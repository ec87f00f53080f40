#pragma once

#include <array>
#include <span>
#include <vector>

namespace pvdrem {

/// Electron charge [C] and Boltzmann constant [J/K].
struct PhysicalConstants {
    static constexpr double q = 1.602e-19;
    static constexpr double k = 1.3806503e-23;
};

/// Datasheet parameters of the array at standard reference conditions.
struct ReferenceParams {
    double i_irr_ref = 2.4207;     // photo current per cell [A]
    double i_0_ref = 1.996e-8;     // diode saturation current per cell [A]
    double r_s_ref = 1.526e-2;     // series resistance per cell [ohm]
    double r_p_ref = 6.4616;       // shunt resistance per cell [ohm]
    double n_ref = 1.1287;         // diode ideality factor
    int n_series = 1440;           // cells in series
    int n_parallel = 400;          // strings in parallel
    double alpha_t = 0.01;         // current temperature coefficient [1/K]
    double g_ref = 1000.0;         // reference irradiance [W/m^2]
    double t_ref = 298.15;         // reference temperature [K]

    void validate() const;
};

/// Operating environment of the array.
struct EnvironmentState {
    double temperature = 298.15;   // cell temperature [K]
    double irradiance = 1000.0;    // solar irradiance [W/m^2]

    void validate() const;
};

/// Lumped parameters of the implicit IV characteristic
///   I = a1 - a2 (exp(a3 (V + a4 I)) - 1) - a5 (V + a4 I).
struct IVParams {
    double a1 = 0.0;   // [A]
    double a2 = 0.0;   // [A]
    double a3 = 0.0;   // [1/V]
    double a4 = 0.0;   // [ohm]
    double a5 = 0.0;   // [1/ohm]

    void validate() const;
    std::array<double, 5> as_array() const { return {a1, a2, a3, a4, a5}; }
    static IVParams from_array(const std::array<double, 5>& v) {
        return {v[0], v[1], v[2], v[3], v[4]};
    }
};

/// Physical single-diode parameters of one cell.
struct PhysicalParams {
    double i_irr = 0.0;   // photo current [A]
    double i_0 = 0.0;     // diode saturation current [A]
    double n = 0.0;       // ideality factor
    double r_s = 0.0;     // series resistance [ohm]
    double r_p = 0.0;     // shunt resistance [ohm]

    void validate() const;
};

/// Bandgap temperature model. `Linear` uses the T/(T+636) factor, `Quadratic`
/// the conventional T^2/(T+636) form.
enum class BandgapModel { Linear, Quadratic };

/// Bandgap energy [eV] at temperature T [K].
double bandgap_ev(double temperature, BandgapModel model = BandgapModel::Linear);

/// Lumped IV parameters for the array under the given environment.
/// Throws domain_error when T or G is non-positive.
IVParams env_params(const ReferenceParams& ref, const EnvironmentState& env,
                    BandgapModel model = BandgapModel::Linear);

/// Recovers per-cell physical parameters from lumped ones at temperature T [K].
/// Throws domain_error when a3 or a5 vanishes.
PhysicalParams a_to_physical(const IVParams& a, double temperature, int n_series,
                             int n_parallel);

/// Exact inverse of a_to_physical.
IVParams physical_to_a(const PhysicalParams& p, double temperature, int n_series,
                       int n_parallel);

/// Right-hand side F(V, I) of the implicit IV equation. The exponent is
/// clamped at 700 before exponentiation; *clamped reports whether that
/// happened.
double iv_rhs(const IVParams& a, double voltage, double current, bool* clamped = nullptr);

/// Unique root of I = F(V, I) for fixed V >= 0, to relative residual 1e-10.
/// Newton from `hint` with a guaranteed bisection fallback; throws
/// numerical_error when the iteration budget is exhausted.
double solve_current(const IVParams& a, double voltage, double hint = 0.0);

struct IVPoint {
    double voltage = 0.0;
    double current = 0.0;
    double power = 0.0;
};

/// Pointwise curve evaluation over an ascending non-negative grid.
std::vector<IVPoint> iv_curve(const IVParams& a, std::span<const double> v_grid);

/// Voltage at which the array current crosses zero, found by bisection.
double open_circuit_voltage(const IVParams& a);

/// The reference lumped-parameter vector of the simulated array. The printed
/// three-digit rounding of a3 shifts the maximum-power voltage by about half
/// a volt, so a3 is evaluated from its defining expression q/(Ns n k T) at
/// T = 308.82 K.
IVParams paper_sec8_a();

} // namespace pvdrem
