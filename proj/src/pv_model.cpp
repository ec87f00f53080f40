#include "pvdrem/pv_model.hpp"

#include "pvdrem/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pvdrem {

namespace {

constexpr double kExpClamp = 700.0;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw domain_error(std::string(name) + " must be strictly positive");
    }
}

} // namespace

void ReferenceParams::validate() const {
    require_positive(i_irr_ref, "i_irr_ref");
    require_positive(i_0_ref, "i_0_ref");
    require_positive(r_s_ref, "r_s_ref");
    require_positive(r_p_ref, "r_p_ref");
    require_positive(n_ref, "n_ref");
    require_positive(alpha_t, "alpha_t");
    require_positive(g_ref, "g_ref");
    require_positive(t_ref, "t_ref");
    if (n_series < 1 || n_parallel < 1) {
        throw domain_error("cell counts must be positive integers");
    }
}

void EnvironmentState::validate() const {
    require_positive(temperature, "temperature");
    require_positive(irradiance, "irradiance");
}

void IVParams::validate() const {
    require_positive(a1, "a1");
    require_positive(a2, "a2");
    require_positive(a3, "a3");
    require_positive(a4, "a4");
    require_positive(a5, "a5");
}

void PhysicalParams::validate() const {
    require_positive(i_irr, "i_irr");
    require_positive(i_0, "i_0");
    require_positive(n, "n");
    require_positive(r_s, "r_s");
    require_positive(r_p, "r_p");
}

double bandgap_ev(double temperature, BandgapModel model) {
    if (!(temperature > 0.0)) throw domain_error("temperature must be positive");
    const double factor = model == BandgapModel::Linear
                              ? temperature / (temperature + 636.0)
                              : temperature * temperature / (temperature + 636.0);
    return 1.16 - 4.73e-4 * factor;
}

IVParams env_params(const ReferenceParams& ref, const EnvironmentState& env,
                    BandgapModel model) {
    ref.validate();
    env.validate();

    const double q = PhysicalConstants::q;
    const double k = PhysicalConstants::k;
    const double t = env.temperature;
    const double g = env.irradiance;
    const double np = static_cast<double>(ref.n_parallel);
    const double ns = static_cast<double>(ref.n_series);

    const double eg = bandgap_ev(t, model);
    const double eg_ref = bandgap_ev(ref.t_ref, model);

    IVParams a;
    a.a1 = np * ref.i_irr_ref * (g / ref.g_ref) * (1.0 + ref.alpha_t * (t - ref.t_ref));
    a.a2 = np * ref.i_0_ref * std::pow(t / ref.t_ref, 3.0) *
           std::exp(eg_ref * q / (k * ref.t_ref) - eg * q / (k * t));
    a.a3 = q / (ns * ref.n_ref * k * t);
    a.a4 = ref.r_s_ref * ns / np;
    a.a5 = np / (ns * ref.r_p_ref) * (ref.g_ref / g);
    return a;
}

PhysicalParams a_to_physical(const IVParams& a, double temperature, int n_series,
                             int n_parallel) {
    if (!(temperature > 0.0)) throw domain_error("temperature must be positive");
    if (a.a3 == 0.0 || a.a5 == 0.0) {
        throw domain_error("mapping is singular at a3 = 0 or a5 = 0");
    }
    const double ns = static_cast<double>(n_series);
    const double np = static_cast<double>(n_parallel);

    PhysicalParams p;
    p.i_irr = a.a1 / np;
    p.i_0 = a.a2 / np;
    p.n = PhysicalConstants::q / (ns * PhysicalConstants::k * temperature * a.a3);
    p.r_s = (np / ns) * a.a4;
    p.r_p = (np / ns) / a.a5;
    return p;
}

IVParams physical_to_a(const PhysicalParams& p, double temperature, int n_series,
                       int n_parallel) {
    if (!(temperature > 0.0)) throw domain_error("temperature must be positive");
    if (p.n == 0.0 || p.r_p == 0.0) {
        throw domain_error("mapping is singular at n = 0 or r_p = 0");
    }
    const double ns = static_cast<double>(n_series);
    const double np = static_cast<double>(n_parallel);

    IVParams a;
    a.a1 = np * p.i_irr;
    a.a2 = np * p.i_0;
    a.a3 = PhysicalConstants::q / (ns * p.n * PhysicalConstants::k * temperature);
    a.a4 = (ns / np) * p.r_s;
    a.a5 = (np / ns) / p.r_p;
    return a;
}

double iv_rhs(const IVParams& a, double voltage, double current, bool* clamped) {
    const double w = voltage + a.a4 * current;
    double z = a.a3 * w;
    const bool hit = z > kExpClamp;
    if (hit) z = kExpClamp;
    if (clamped) *clamped = hit;
    return a.a1 - a.a2 * (std::exp(z) - 1.0) - a.a5 * w;
}

double solve_current(const IVParams& a, double voltage, double hint) {
    if (!(voltage >= 0.0)) throw domain_error("voltage must be non-negative");

    const auto residual = [&](double i) {
        return i - iv_rhs(a, voltage, i);
    };
    const auto tol = [](double i) { return 1e-10 * std::max(1.0, std::abs(i)); };

    // Newton on r(I) = I - F(V, I); r' = 1 + a2 a3 a4 e^z + a4 a5 > 1.
    double current = hint;
    for (int iter = 0; iter < 64; ++iter) {
        bool clamped = false;
        const double f = iv_rhs(a, voltage, current, &clamped);
        const double r = current - f;
        if (!clamped && std::abs(r) <= tol(current)) return current;
        if (clamped || !std::isfinite(r)) break;
        const double z = a.a3 * (voltage + a.a4 * current);
        const double dr = 1.0 + a.a2 * a.a3 * a.a4 * std::exp(std::min(z, kExpClamp)) +
                          a.a4 * a.a5;
        const double next = current - r / dr;
        if (!std::isfinite(next)) break;
        if (std::abs(next - current) <= 1e-14 * std::max(1.0, std::abs(next)) &&
            std::abs(residual(next)) <= tol(next)) {
            return next;
        }
        current = next;
    }

    // Bisection fallback; r is strictly increasing in I and a clamped
    // exponent only ever makes r more positive, so sign-based bisection
    // remains valid under the clamp.
    double lo = -a.a1;
    double hi = a.a1 + 1.0;
    for (int expand = 0; expand < 64 && residual(lo) > 0.0; ++expand) {
        lo = 2.0 * lo - 1.0;
    }
    for (int expand = 0; expand < 64 && residual(hi) < 0.0; ++expand) {
        hi = 2.0 * hi + 1.0;
    }
    if (residual(lo) > 0.0 || residual(hi) < 0.0) {
        throw numerical_error("solve_current: failed to bracket the root",
                              std::min(std::abs(residual(lo)), std::abs(residual(hi))));
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double r = residual(mid);
        if (std::abs(r) <= tol(mid)) return mid;
        (r < 0.0 ? lo : hi) = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(mid))) {
            return mid;
        }
    }
    const double mid = 0.5 * (lo + hi);
    const double r = residual(mid);
    if (std::abs(r) <= tol(mid)) return mid;
    throw numerical_error("solve_current: iteration budget exhausted", std::abs(r));
}

std::vector<IVPoint> iv_curve(const IVParams& a, std::span<const double> v_grid) {
    std::vector<IVPoint> out;
    out.reserve(v_grid.size());
    double hint = a.a1;
    double prev = -std::numeric_limits<double>::infinity();
    for (const double v : v_grid) {
        if (!(v >= 0.0) || v < prev) {
            throw domain_error("voltage grid must be ascending and non-negative");
        }
        prev = v;
        const double i = solve_current(a, v, hint);
        hint = i;
        out.push_back({v, i, v * i});
    }
    return out;
}

double open_circuit_voltage(const IVParams& a) {
    a.validate();
    // I(V) is strictly decreasing with I(0) > 0; expand until the current
    // goes negative, then bisect.
    double lo = 0.0;
    double hi = 1.0;
    double hint = a.a1;
    for (int expand = 0; expand < 200 && solve_current(a, hi, hint) > 0.0; ++expand) {
        lo = hi;
        hi *= 2.0;
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-9 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double i = solve_current(a, mid, hint);
        hint = i;
        (i > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

IVParams paper_sec8_a() {
    IVParams a;
    a.a1 = 726.21;
    a.a2 = 5.988e-6;
    a.a3 = PhysicalConstants::q /
           (1440.0 * 1.1287 * PhysicalConstants::k * 308.82);
    a.a4 = 0.0732;
    a.a5 = 0.0322;
    return a;
}

} // namespace pvdrem
