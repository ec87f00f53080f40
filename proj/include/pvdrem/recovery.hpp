#pragma once

#include "pvdrem/pv_model.hpp"

#include <array>
#include <optional>

namespace pvdrem {

/// Singularity guards for the theta -> a mapping. Denominator checks are
/// relative to theta1^2 (resp. |theta1|); a triggered guard makes the mapping
/// return nothing so the caller holds its previous estimate.
struct RecoveryGuards {
    double eps_denominator = 1e-12;
    double exp_clamp = 700.0;
};

/// Proof-order intermediate quantities of the theta -> a mapping, shared with
/// the maximum-power machinery.
struct RecoveryIntermediates {
    double b1 = 0.0;
    double b3 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;
    double a5 = 0.0;
};

/// Computes (b1, b3, a3, a4, a5) from (theta1..theta4):
///   a4 = theta4 / theta1
///   b3 = theta3 / theta1
///   a3 = theta1 (1 - a4 b3) / (1 - theta2 a4)
///   b1 = (theta2 - b3) / (theta1 (1 - a4 b3))
///   a5 = b3 / (1 - a4 b3)
/// Returns nothing when a guard trips.
std::optional<RecoveryIntermediates> intermediate_quantities(
    const std::array<double, 4>& theta, const RecoveryGuards& guards = {});

/// The closed-form mapping a = G(theta1..theta4, V, I). The exponential
/// components a1, a2 are evaluated at the supplied measurement pair, which
/// should lie on (or near) the current IV curve. Returns nothing (HOLD) when
/// a denominator guard or the exponent clamp trips.
std::optional<IVParams> map_theta_to_a(const std::array<double, 4>& theta,
                                       double voltage, double current,
                                       const RecoveryGuards& guards = {});

/// Optional first-order smoother for the (V, I) pair fed to the exponential
/// components. A non-positive pole disables smoothing and passes the
/// instantaneous pair through; in a noise-free simulation the instantaneous
/// pair lies on the curve while any lag pushes it off and biases the a2
/// recovery, so smoothing is reserved for noisy measurements.
class MeasurementSmoother {
public:
    explicit MeasurementSmoother(double pole = 0.0) : pole_(pole) {}

    void update(double voltage, double current, double dt);
    double voltage() const { return v_; }
    double current() const { return i_; }
    bool ready() const { return ready_; }

private:
    double pole_;
    double v_ = 0.0;
    double i_ = 0.0;
    bool ready_ = false;
};

/// Exponentially-windowed least squares for the current-balance amplitudes:
/// given the exponent shape (a3, a4) it fits
///   I = b1 - b2 exp(a3 (V + a4 I)) - b3 V
/// over the measurement stream. The amplitudes enter the model linearly, so
/// the fit reduces to 3x3 normal equations with regressors (1, e^z, V); the
/// exponential regressor is rescaled by a running reference to keep the
/// moments inside double range. A fit that matches the measured curve across
/// the sweep keeps the maximum-power root accurate even when the individual
/// parameter estimates carry correlated bias.
class AmplitudeFit {
public:
    explicit AmplitudeFit(double pole = 0.5) : pole_(pole) {}

    void update(const RecoveryIntermediates& q, double voltage, double current,
                double dt);
    bool solve(double b1);   // fits (b2, b3); false while degenerate
    bool solve_b2(double b1, double b3);   // fits b2 alone

    bool ready() const { return has_solution_; }
    double b1() const { return b1_; }
    double b2() const { return b2_; }
    double b3() const { return b3_; }

private:
    double pole_;
    double z_ref_ = 0.0;     // e^z is accumulated as u = e^{z - z_ref}
    bool primed_ = false;
    double m_ = 0.0;         // total window weight
    double s_u_ = 0.0, s_v_ = 0.0, s_i_ = 0.0;
    double s_uu_ = 0.0, s_uv_ = 0.0, s_vv_ = 0.0;
    double s_ui_ = 0.0, s_vi_ = 0.0;
    bool has_solution_ = false;
    double b1_ = 0.0, b2_ = 0.0, b3_ = 0.0;
};

} // namespace pvdrem
