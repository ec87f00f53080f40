#include "pvdrem/drem.hpp"

#include "pvdrem/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pvdrem {

void DremConfig::validate() const {
    if (!(delays[0] > 0.0) || !(delays[0] < delays[1]) || !(delays[1] < delays[2]) ||
        !(delays[2] < delays[3])) {
        throw domain_error("delays must satisfy 0 < d1 < d2 < d3 < d4");
    }
    if (!(beta > 0.0)) throw domain_error("beta must be positive");
    if (!(sample_scale > 0.0)) throw domain_error("sample_scale must be positive");
    if (mixing_pole < 0.0) throw domain_error("mixing_pole must be non-negative");
    for (const double g : gains) {
        if (!(g > 0.0)) throw domain_error("adaptation gains must be positive");
    }
}

DelayLine::DelayLine(double max_delay, double dt) {
    if (!(max_delay > 0.0) || !(dt > 0.0)) {
        throw domain_error("delay line needs positive max_delay and dt");
    }
    capacity_ = static_cast<std::size_t>(std::ceil(max_delay / dt)) + 4;
}

void DelayLine::push(const RegressionSample& sample) {
    buffer_.push_back(sample);
    while (buffer_.size() > capacity_) buffer_.pop_front();
}

std::optional<RegressionSample> DelayLine::at(double t_query) const {
    if (buffer_.size() < 2 || t_query < buffer_.front().t ||
        t_query > buffer_.back().t) {
        return std::nullopt;
    }
    // Samples are pushed in time order; binary search for the bracketing pair.
    const auto it = std::lower_bound(
        buffer_.begin(), buffer_.end(), t_query,
        [](const RegressionSample& s, double t) { return s.t < t; });
    const RegressionSample& hi = *it;
    if (hi.t == t_query) return hi.valid ? std::optional(hi) : std::nullopt;
    const RegressionSample& lo = *std::prev(it);
    if (!lo.valid || !hi.valid) return std::nullopt;

    const double w = (t_query - lo.t) / (hi.t - lo.t);
    RegressionSample out;
    out.t = t_query;
    out.y = lo.y + w * (hi.y - lo.y);
    for (int i = 0; i < 5; ++i) {
        out.omega[i] = lo.omega[i] + w * (hi.omega[i] - lo.omega[i]);
    }
    out.valid = true;
    return out;
}

EstimatorState EstimatorState::from_initial(const std::array<double, 4>& theta0) {
    if (!(theta0[0] > 0.0)) {
        throw domain_error("theta1(0) must be positive to complete theta5(0)");
    }
    EstimatorState s;
    s.theta_hat = {theta0[0], theta0[1], theta0[2], theta0[3],
                   theta0[2] * theta0[3] / theta0[0]};
    return s;
}

std::optional<ExtendedRegression> build_extended(const RegressionSample& current,
                                                 const DelayLine& line,
                                                 const DremConfig& config) {
    if (!current.valid) return std::nullopt;

    const double kappa = config.sample_scale;
    ExtendedRegression ext;
    ext.y_e[0] = kappa * current.y;
    for (int i = 0; i < 5; ++i) ext.m_e[0][i] = kappa * current.omega[i];
    for (int j = 0; j < 4; ++j) {
        const auto delayed = line.at(current.t - config.delays[j]);
        if (!delayed) return std::nullopt;
        ext.y_e[j + 1] = config.beta * kappa * delayed->y;
        for (int i = 0; i < 5; ++i) {
            ext.m_e[j + 1][i] = config.beta * kappa * delayed->omega[i];
        }
    }
    return ext;
}

double det5(const std::array<std::array<double, 5>, 5>& m) {
    std::array<std::array<double, 5>, 5> lu = m;
    double det = 1.0;
    for (int col = 0; col < 5; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 5; ++row) {
            if (std::abs(lu[row][col]) > std::abs(lu[pivot][col])) pivot = row;
        }
        if (lu[pivot][col] == 0.0) return 0.0;
        if (pivot != col) {
            std::swap(lu[pivot], lu[col]);
            det = -det;
        }
        det *= lu[col][col];
        for (int row = col + 1; row < 5; ++row) {
            const double f = lu[row][col] / lu[col][col];
            for (int k = col; k < 5; ++k) lu[row][k] -= f * lu[col][k];
        }
    }
    return det;
}

namespace {

double det3(double a00, double a01, double a02, double a10, double a11, double a12,
            double a20, double a21, double a22) {
    return a00 * (a11 * a22 - a12 * a21) - a01 * (a10 * a22 - a12 * a20) +
           a02 * (a10 * a21 - a11 * a20);
}

double det4(const std::array<std::array<double, 4>, 4>& m) {
    double det = 0.0;
    double sign = 1.0;
    for (int col = 0; col < 4; ++col) {
        int c[3];
        int idx = 0;
        for (int k = 0; k < 4; ++k) {
            if (k != col) c[idx++] = k;
        }
        det += sign * m[0][col] *
               det3(m[1][c[0]], m[1][c[1]], m[1][c[2]],
                    m[2][c[0]], m[2][c[1]], m[2][c[2]],
                    m[3][c[0]], m[3][c[1]], m[3][c[2]]);
        sign = -sign;
    }
    return det;
}

} // namespace

std::array<std::array<double, 5>, 5> adjugate5(
    const std::array<std::array<double, 5>, 5>& m) {
    std::array<std::array<double, 5>, 5> adj{};
    for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 5; ++col) {
            std::array<std::array<double, 4>, 4> minor{};
            int mr = 0;
            for (int r = 0; r < 5; ++r) {
                if (r == row) continue;
                int mc = 0;
                for (int c = 0; c < 5; ++c) {
                    if (c == col) continue;
                    minor[mr][mc++] = m[r][c];
                }
                ++mr;
            }
            const double cof = (((row + col) % 2) ? -1.0 : 1.0) * det4(minor);
            adj[col][row] = cof;   // adjugate is the transposed cofactor matrix
        }
    }
    return adj;
}

MixedRegression mix(const ExtendedRegression& ext) {
    MixedRegression out;
    out.delta = det5(ext.m_e);
    const auto adj = adjugate5(ext.m_e);
    for (int i = 0; i < 5; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 5; ++j) acc += adj[i][j] * ext.y_e[j];
        out.y[i] = acc;
    }
    return out;
}

MixedRegression MixingAverager::update(const MixedRegression& mixed, double dt) {
    if (pole_ <= 0.0) return mixed;
    const double k = std::min(1.0, pole_ * dt);
    delta_sq_ += k * (mixed.delta * mixed.delta - delta_sq_);
    for (int i = 0; i < 5; ++i) {
        delta_y_[i] += k * (mixed.delta * mixed.y[i] - delta_y_[i]);
    }
    MixedRegression out;
    out.delta = std::sqrt(std::max(0.0, delta_sq_));
    if (out.delta > 0.0) {
        for (int i = 0; i < 5; ++i) out.y[i] = delta_y_[i] / out.delta;
    }
    return out;
}

void estimator_step(EstimatorState& state, double delta,
                    const std::array<double, 5>& y, const DremConfig& config,
                    double dt) {
    if (!(dt > 0.0)) throw domain_error("dt must be positive");

    // Explicit Euler while gamma Delta^2 dt < 0.5; beyond that the scalar law
    // is integrated in closed form over the step (Delta, Y held), which the
    // halved-step Euler cascade converges to anyway and which stays stable
    // for arbitrarily large Delta.
    const double dsq = delta * delta;
    for (int i = 0; i < 5; ++i) {
        const double rate = config.gains[i] * dsq * dt;
        if (rate < 0.5) {
            state.theta_hat[i] -=
                dt * config.gains[i] * delta * (delta * state.theta_hat[i] - y[i]);
        } else {
            const double target = y[i] / delta;
            state.theta_hat[i] =
                target + (state.theta_hat[i] - target) * std::exp(-rate);
        }
    }

    state.excitation_integral += delta * delta * dt;
    state.last_delta = delta;
    state.time += dt;

    // Snapshot at ~1 ms granularity for the trailing-window verdict.
    if (state.history.empty() || state.time - state.history.back().first >= 1e-3) {
        state.history.emplace_back(state.time, state.excitation_integral);
    }
}

ExcitationVerdict excitation_verdict(const EstimatorState& state, double window,
                                     const DremConfig& config) {
    if (!(window > 0.0)) throw domain_error("window must be positive");

    const double t_back = state.time - window;
    double integral_back = 0.0;
    for (auto it = state.history.rbegin(); it != state.history.rend(); ++it) {
        if (it->first <= t_back) {
            integral_back = it->second;
            break;
        }
    }
    const double growth = state.excitation_integral - integral_back;
    if (growth > config.excitation_floor) return ExcitationVerdict::Excited;
    if (growth < 1e-3 * config.excitation_floor) return ExcitationVerdict::Unexcited;
    return ExcitationVerdict::Marginal;
}

const char* to_string(ExcitationVerdict verdict) {
    switch (verdict) {
        case ExcitationVerdict::Excited: return "EXCITED";
        case ExcitationVerdict::Marginal: return "MARGINAL";
        case ExcitationVerdict::Unexcited: return "UNEXCITED";
    }
    return "UNKNOWN";
}

} // namespace pvdrem
