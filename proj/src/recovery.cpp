#include "pvdrem/recovery.hpp"

#include <cmath>

namespace pvdrem {

namespace {

bool guards_ok(const std::array<double, 4>& th, const RecoveryGuards& g) {
    const double th1 = th[0];
    if (!(th1 > 0.0)) return false;
    const double scale_sq = th1 * th1;
    if (std::abs(th1 * th1 - th[2] * th[3]) <= g.eps_denominator * scale_sq) {
        return false;
    }
    if (std::abs(th1 - th[1] * th[3]) <= g.eps_denominator * th1) return false;
    return true;
}

} // namespace

std::optional<RecoveryIntermediates> intermediate_quantities(
    const std::array<double, 4>& theta, const RecoveryGuards& guards) {
    if (!guards_ok(theta, guards)) return std::nullopt;
    const double th1 = theta[0];
    const double th2 = theta[1];
    const double th3 = theta[2];
    const double th4 = theta[3];

    RecoveryIntermediates q;
    q.a4 = th4 / th1;
    q.b3 = th3 / th1;
    const double one_minus_a4b3 = 1.0 - q.a4 * q.b3;       // (th1^2 - th3 th4)/th1^2
    const double one_minus_th2a4 = 1.0 - th2 * q.a4;       // (th1 - th2 th4)/th1
    q.a3 = th1 * one_minus_a4b3 / one_minus_th2a4;
    q.b1 = (th2 - q.b3) / (th1 * one_minus_a4b3);
    q.a5 = q.b3 / one_minus_a4b3;
    return q;
}

std::optional<IVParams> map_theta_to_a(const std::array<double, 4>& theta,
                                       double voltage, double current,
                                       const RecoveryGuards& guards) {
    if (!guards_ok(theta, guards)) return std::nullopt;
    const double th1 = theta[0];
    const double th2 = theta[1];
    const double th3 = theta[2];
    const double th4 = theta[3];

    const double den_sq = th3 * th4 - th1 * th1;   // of a3, a5 and the exponent
    const double den_lin = th1 - th2 * th4;        // of the exponent coefficient

    IVParams a;
    a.a3 = den_sq / (th2 * th4 - th1);
    a.a4 = th4 / th1;
    a.a5 = th1 * th3 / (th1 * th1 - th3 * th4);

    const double exponent = den_sq / den_lin * (voltage + a.a4 * current);
    if (std::abs(exponent) > guards.exp_clamp) return std::nullopt;

    const double bracket = th1 * th1 * current + th1 * th3 * voltage +
                           th1 * th1 * (th1 * th2 - th3) / den_sq;
    a.a2 = bracket * std::exp(exponent) / den_sq;
    a.a1 = -a.a2 + th1 * th1 * (th1 * th2 - th3) / (den_sq * den_sq);
    return a;
}

void MeasurementSmoother::update(double voltage, double current, double dt) {
    if (pole_ <= 0.0 || !ready_) {
        v_ = voltage;
        i_ = current;
        ready_ = true;
        return;
    }
    const double k = pole_ * dt;
    v_ += k * (voltage - v_);
    i_ += k * (current - i_);
}

void AmplitudeFit::update(const RecoveryIntermediates& q, double voltage,
                          double current, double dt) {
    const double z = q.a3 * (voltage + q.a4 * current);
    if (std::abs(z) > 600.0) return;

    if (!primed_) {
        z_ref_ = z;
        primed_ = true;
    } else if (z - z_ref_ > 4.0) {
        // keep u = e^{z - z_ref} bounded; rescale the accumulated u-moments
        const double s = std::exp(z_ref_ - z);
        s_u_ *= s;
        s_uu_ *= s * s;
        s_uv_ *= s;
        s_ui_ *= s;
        z_ref_ = z;
    }

    const double u = std::exp(z - z_ref_);
    const double k = std::min(1.0, pole_ * dt);
    m_ += k * (1.0 - m_);
    s_u_ += k * (u - s_u_);
    s_v_ += k * (voltage - s_v_);
    s_i_ += k * (current - s_i_);
    s_uu_ += k * (u * u - s_uu_);
    s_uv_ += k * (u * voltage - s_uv_);
    s_vv_ += k * (voltage * voltage - s_vv_);
    s_ui_ += k * (u * current - s_ui_);
    s_vi_ += k * (voltage * current - s_vi_);
}

bool AmplitudeFit::solve(double b1) {
    if (!primed_ || m_ <= 0.0) return has_solution_;

    // With b1 fixed, fit b1 - I = c1 u + c2 V over the window: 2x2 normal
    // equations in the genuinely separable regressors (u, V).
    const double r1 = b1 * s_u_ - s_ui_;
    const double r2 = b1 * s_v_ - s_vi_;

    const double det = s_uu_ * s_vv_ - s_uv_ * s_uv_;
    if (std::abs(det) < 1e-12 * std::max(std::abs(s_uu_ * s_vv_), 1e-300)) {
        return has_solution_;
    }
    const double c1 = (r1 * s_vv_ - s_uv_ * r2) / det;
    const double c2 = (s_uu_ * r2 - s_uv_ * r1) / det;

    b1_ = b1;
    b2_ = c1 * std::exp(-z_ref_);
    b3_ = c2;
    has_solution_ = true;
    return true;
}

bool AmplitudeFit::solve_b2(double b1, double b3) {
    if (!primed_ || s_uu_ <= 0.0) return has_solution_;
    const double c1 = (b1 * s_u_ - s_ui_ - b3 * s_uv_) / s_uu_;
    b1_ = b1;
    b2_ = c1 * std::exp(-z_ref_);
    b3_ = b3;
    has_solution_ = true;
    return true;
}

} // namespace pvdrem
