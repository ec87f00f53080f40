#pragma once

#include "pvdrem/regressor.hpp"

#include <array>
#include <deque>
#include <optional>
#include <utility>

namespace pvdrem {

/// Delays, scaling and adaptation gains of the DREM estimator.
struct DremConfig {
    std::array<double, 4> delays = {0.1, 0.2, 0.3, 0.4};   // [s], ascending
    double beta = 1.25e-3;                                  // delayed-row scaling
    std::array<double, 5> gains = {20.0, 20.0, 20.0, 20.0, 20.0};
    double excitation_floor = 1e-9;   // trailing-window growth threshold

    // Conditioning scale applied to every regression sample entering the
    // extended system, so Delta = sample_scale^5 beta^4 det(raw). The scalar
    // identities Y_i = Delta theta_i hold for any row scaling; what the scale
    // controls is the magnitude of gamma Delta^2 dt. Keeping that below ~0.5
    // leaves the gradient laws in their Delta^2-weighted averaging regime,
    // where ill-conditioned instants (whose Y_i/Delta is noise-amplified,
    // error ~ 1/|Delta|) contribute proportionally less. On the reference
    // plant the raw determinant peaks near 2e8, so without this scale a
    // single such instant would dominate the estimate.
    double sample_scale = 0.05;

    // Pole of the first-order averaging of (Delta^2, Delta Y_i) feeding the
    // scalar laws; 0 disables it. Averaging across sweep phases is what
    // suppresses the inconsistency the mixed system acquires when the true
    // parameters drift: each instant contributes its own corrupted Y/Delta,
    // and the Delta^2-weighted mean over a control period is much closer to
    // the drifting truth than any single instant.
    double mixing_pole = 0.0;

    void validate() const;
};

/// Ring buffer of regression samples supporting interpolated lookups at
/// t - d_j. Lookups touching invalid (warm-up) samples return nothing.
class DelayLine {
public:
    DelayLine(double max_delay, double dt);

    void push(const RegressionSample& sample);
    std::optional<RegressionSample> at(double t_query) const;
    std::size_t size() const { return buffer_.size(); }

private:
    std::deque<RegressionSample> buffer_;
    std::size_t capacity_;
};

/// The extended square system Y_e = M_e theta.
struct ExtendedRegression {
    std::array<double, 5> y_e{};
    std::array<std::array<double, 5>, 5> m_e{};
};

/// Mixed scalar regressions Y_i = Delta theta_i.
struct MixedRegression {
    double delta = 0.0;
    std::array<double, 5> y{};
};

/// Scalar estimator states plus the excitation bookkeeping used by the
/// verdict. History snapshots are decimated to keep memory bounded.
struct EstimatorState {
    std::array<double, 5> theta_hat{};
    double excitation_integral = 0.0;
    double last_delta = 0.0;
    double time = 0.0;

    /// theta_hat with theta5 completed from the theta-constraint
    /// theta5 = theta3 theta4 / theta1.
    static EstimatorState from_initial(const std::array<double, 4>& theta0);

    // (time, excitation_integral) snapshots for the trailing-window verdict
    std::deque<std::pair<double, double>> history;
};

/// Row 0 is the current sample, rows 1..4 the beta-scaled delayed copies.
/// Returns nothing while any delayed sample is missing or still warming up.
std::optional<ExtendedRegression> build_extended(const RegressionSample& current,
                                                 const DelayLine& line,
                                                 const DremConfig& config);

/// Delta = det(M_e) (LU with partial pivoting) and Y = adj(M_e) Y_e computed
/// from cofactors, valid for singular M_e as well.
MixedRegression mix(const ExtendedRegression& ext);

/// First-order averaging of the mixed quantities. Tracks <Delta^2> and
/// <Delta Y_i> and re-expresses them as an equivalent scalar regression
/// (delta_bar, y_bar) with delta_bar = sqrt(<Delta^2>), so the gradient law
/// consumes averaged information without changing form.
class MixingAverager {
public:
    explicit MixingAverager(double pole) : pole_(pole) {}

    MixedRegression update(const MixedRegression& mixed, double dt);
    bool enabled() const { return pole_ > 0.0; }

private:
    double pole_;
    double delta_sq_ = 0.0;
    std::array<double, 5> delta_y_{};
};

/// Determinant of a 5x5 matrix by LU with partial pivoting.
double det5(const std::array<std::array<double, 5>, 5>& m);

/// Adjugate of a 5x5 matrix from 4x4 cofactors.
std::array<std::array<double, 5>, 5> adjugate5(
    const std::array<std::array<double, 5>, 5>& m);

/// Advances the five decoupled gradient laws
///   d theta_hat_i/dt = -gamma_i Delta (Delta theta_hat_i - Y_i)
/// by explicit Euler, internally halving the step while
/// gamma_i Delta^2 h >= 0.5. Accumulates the excitation integral.
void estimator_step(EstimatorState& state, double delta,
                    const std::array<double, 5>& y, const DremConfig& config,
                    double dt);

enum class ExcitationVerdict { Excited, Marginal, Unexcited };

/// Classifies the trailing-window growth of the excitation integral against
/// the configured floor.
ExcitationVerdict excitation_verdict(const EstimatorState& state, double window,
                                     const DremConfig& config);

const char* to_string(ExcitationVerdict verdict);

} // namespace pvdrem
