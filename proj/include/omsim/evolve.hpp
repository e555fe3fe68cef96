#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "omsim/model.hpp"
#include "omsim/types.hpp"

namespace omsim {

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-11;
    double max_step = 0.0;                       // 0 = unlimited
    long max_steps = 50'000'000;
    std::size_t memory_budget_entries = 24'000'000;  // cap on vectorized density size
};

struct OdeStats {
    long steps = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double dp_e[7] = {71.0 / 57600, 0.0,           -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

inline double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double atol, double rtol) {
    double acc = 0.0;
    const Eigen::Index n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = std::abs(err[i]) / sc;
        acc += q * q;
    }
    return std::sqrt(acc / double(n));
}

}  // namespace detail

/// Adaptive explicit Runge-Kutta (Dormand-Prince 5(4), FSAL) for
/// dy/dt = rhs(t, y). Advances y in place from t0 to t1. Throws
/// ToleranceError if step control stalls.
template <class Rhs>
void integrate_adaptive(Rhs&& rhs, double t0, double t1, Vec& y, const IntegratorOptions& opt,
                        OdeStats* stats = nullptr) {
    using namespace detail;
    if (t1 <= t0) {
        if (t1 == t0) return;
        throw std::invalid_argument("integrate_adaptive: t1 < t0");
    }
    const Eigen::Index n = y.size();
    std::array<Vec, 7> k;
    for (auto& v : k) v.resize(n);
    Vec ytmp(n), ynew(n), err(n);

    rhs(t0, y, k[0]);
    if (stats) ++stats->rhs_evals;

    // Hairer-style first step guess
    double h;
    {
        const double d0 = error_norm(y, y, y, opt.atol, opt.rtol);
        const double d1 = error_norm(k[0], y, y, opt.atol, opt.rtol);
        double h0 = (d0 > 1e-10 && d1 > 1e-10) ? 0.01 * d0 / d1 : 1e-6 * (t1 - t0);
        h0 = std::min(h0, t1 - t0);
        ytmp = y + h0 * k[0];
        rhs(t0 + h0, ytmp, k[1]);
        if (stats) ++stats->rhs_evals;
        const double d2 = error_norm(Vec(k[1] - k[0]), y, y, opt.atol, opt.rtol) / h0;
        double h1;
        if (std::max(d1, d2) <= 1e-15)
            h1 = std::max(1e-6 * (t1 - t0), h0 * 1e-3);
        else
            h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
        h = std::min({100.0 * h0, h1, t1 - t0});
        rhs(t0, y, k[0]);  // restore FSAL slot
        if (stats) ++stats->rhs_evals;
    }
    if (opt.max_step > 0) h = std::min(h, opt.max_step);

    double t = t0;
    long steps = 0;
    const double hmin = 1e-14 * (t1 - t0);
    while (t < t1) {
        if (steps++ > opt.max_steps)
            throw ToleranceError("integrate_adaptive: step budget exhausted");
        bool last = false;
        if (t + h >= t1) {
            h = t1 - t;
            last = true;
        }
        for (int s = 1; s < 7; ++s) {
            ytmp = y;
            for (int j = 0; j < s; ++j)
                if (dp_a[s][j] != 0.0) ytmp.noalias() += (h * dp_a[s][j]) * k[j];
            rhs(t + dp_c[s] * h, ytmp, k[s]);
        }
        if (stats) stats->rhs_evals += 6;
        ynew = ytmp;  // stage 7 state is the 5th-order solution (FSAL)
        err.setZero();
        for (int s = 0; s < 7; ++s)
            if (dp_e[s] != 0.0) err.noalias() += (h * dp_e[s]) * k[s];
        const double e = error_norm(err, y, ynew, opt.atol, opt.rtol);
        if (e <= 1.0) {
            t += h;
            y.swap(ynew);
            k[0].swap(k[6]);
            if (stats) ++stats->steps;
        } else {
            if (stats) ++stats->rejected;
            last = false;
        }
        double fac = 0.9 * std::pow(std::max(e, 1e-10), -0.2);
        fac = std::clamp(fac, 0.2, 10.0);
        h *= fac;
        if (opt.max_step > 0) h = std::min(h, opt.max_step);
        if (!last && h < hmin)
            throw ToleranceError("integrate_adaptive: step size underflow");
    }
}

struct DiagnosticsSample {
    double norm_or_trace = 0.0;
    double comm_cavity = 0.0;
    double comm_mech = 0.0;
};

struct StateTrajectory {
    HilbertConfig config;
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<DiagnosticsSample> diagnostics;
};

struct DensityTrajectory {
    HilbertConfig config;
    std::vector<double> times;
    std::vector<Mat> states;
    std::vector<DiagnosticsSample> diagnostics;
};

/// Schroedinger propagation psi(t_i) = exp(-i H t_i) psi0 at the sample
/// times (strictly increasing, first = 0).
StateTrajectory evolve_state(const SpMat& h, const Vec& psi0, const HilbertConfig& config,
                             std::span<const double> times, const IntegratorOptions& opt = {},
                             OdeStats* stats = nullptr);

/// Lindblad propagation of the vectorized density matrix. Hermiticity is
/// restored by symmetrization at sample points only.
DensityTrajectory evolve_density(const Liouvillian& l, const Mat& rho0,
                                 std::span<const double> times, const IntegratorOptions& opt = {},
                                 OdeStats* stats = nullptr);

struct DriveSegment {
    double duration;
    double epsilon;
};

/// Piecewise-constant drive. The state-preparation protocol is a
/// half-period pulse then free evolution: [(pi/Omega_m, eps), (t_free, 0)].
struct DriveSchedule {
    std::vector<DriveSegment> segments;

    static DriveSchedule pulse_then_free(double t_pulse, double epsilon, double t_free) {
        return {{{t_pulse, epsilon}, {t_free, 0.0}}};
    }
    double total_duration() const {
        double t = 0;
        for (const auto& s : segments) t += s.duration;
        return t;
    }
    void validate() const {
        if (segments.empty()) throw std::invalid_argument("DriveSchedule: empty");
        for (const auto& s : segments)
            if (!(s.duration > 0)) throw std::invalid_argument("DriveSchedule: durations must be > 0");
    }
};

StateTrajectory evolve_schedule(const SystemParams& params, const HilbertConfig& config,
                                const DriveSchedule& schedule, const Vec& psi0,
                                int samples_per_segment, const IntegratorOptions& opt = {});

DensityTrajectory evolve_schedule_density(const SystemParams& params, const HilbertConfig& config,
                                          const DriveSchedule& schedule, const Mat& rho0,
                                          int samples_per_segment, const IntegratorOptions& opt = {});

struct TruncationReport {
    double threshold = 0.01;
    double max_cavity_dev = 0.0;
    double max_mech_dev = 0.0;
    std::vector<std::size_t> flagged;  // sample indices over threshold

    bool clean() const { return flagged.empty(); }
};

TruncationReport truncation_check(const StateTrajectory& traj, double threshold = 0.01);
TruncationReport truncation_check(const DensityTrajectory& traj, double threshold = 0.01);

/// <psi|H|psi> for Hermitian H (real part).
double energy_expectation(const SpMat& h, const Vec& psi);

}  // namespace omsim
