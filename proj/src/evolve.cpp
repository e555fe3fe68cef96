#include "omsim/evolve.hpp"

#include "omsim/fock.hpp"

namespace omsim {

namespace {

void check_times(std::span<const double> times) {
    if (times.empty()) throw std::invalid_argument("evolve: empty time list");
    if (times[0] != 0.0) throw std::invalid_argument("evolve: first sample time must be 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("evolve: sample times must be strictly increasing");
}

DiagnosticsSample diag_of(const Vec& psi, const HilbertConfig& config) {
    return {psi.norm(), commutator_expectation(psi, Mode::cavity, config),
            commutator_expectation(psi, Mode::mech, config)};
}

DiagnosticsSample diag_of(const Mat& rho, const HilbertConfig& config) {
    return {rho.trace().real(), commutator_expectation(rho, Mode::cavity, config),
            commutator_expectation(rho, Mode::mech, config)};
}

}  // namespace

StateTrajectory evolve_state(const SpMat& h, const Vec& psi0, const HilbertConfig& config,
                             std::span<const double> times, const IntegratorOptions& opt,
                             OdeStats* stats) {
    config.validate();
    check_times(times);
    if (psi0.size() != config.dim() || h.rows() != config.dim())
        throw std::invalid_argument("evolve_state: dimension mismatch");

    StateTrajectory traj;
    traj.config = config;
    auto rhs = [&h](double, const Vec& y, Vec& dy) { dy.noalias() = -I * (h * y); };

    Vec y = psi0;
    traj.times.assign(times.begin(), times.end());
    traj.states.push_back(y);
    traj.diagnostics.push_back(diag_of(y, config));
    for (std::size_t i = 1; i < times.size(); ++i) {
        integrate_adaptive(rhs, times[i - 1], times[i], y, opt, stats);
        traj.states.push_back(y);
        traj.diagnostics.push_back(diag_of(y, config));
    }
    return traj;
}

DensityTrajectory evolve_density(const Liouvillian& l, const Mat& rho0,
                                 std::span<const double> times, const IntegratorOptions& opt,
                                 OdeStats* stats) {
    l.config.validate();
    check_times(times);
    const int dim = l.config.dim();
    if (rho0.rows() != dim || rho0.cols() != dim)
        throw std::invalid_argument("evolve_density: dimension mismatch");
    const std::size_t entries = std::size_t(dim) * std::size_t(dim);
    if (entries > opt.memory_budget_entries)
        throw MemoryBudgetError("evolve_density: vectorized density exceeds memory budget");

    DensityTrajectory traj;
    traj.config = l.config;
    traj.times.assign(times.begin(), times.end());

    auto rhs = [&l](double, const Vec& y, Vec& dy) { l.apply_vec(y, dy); };

    Vec y = Eigen::Map<const Vec>(rho0.data(), rho0.size());
    auto record = [&](const Vec& v) {
        Mat rho = Eigen::Map<const Mat>(v.data(), dim, dim);
        rho = 0.5 * (rho + rho.adjoint()).eval();  // symmetrize at samples only
        traj.diagnostics.push_back(diag_of(rho, l.config));
        traj.states.push_back(std::move(rho));
    };
    record(y);
    for (std::size_t i = 1; i < times.size(); ++i) {
        integrate_adaptive(rhs, times[i - 1], times[i], y, opt, stats);
        record(y);
    }
    return traj;
}

namespace {

std::vector<double> segment_times(const DriveSchedule& schedule, int samples_per_segment) {
    if (samples_per_segment < 1)
        throw std::invalid_argument("evolve_schedule: samples_per_segment must be >= 1");
    std::vector<double> times{0.0};
    double t0 = 0.0;
    for (const auto& seg : schedule.segments) {
        for (int i = 1; i <= samples_per_segment; ++i)
            times.push_back(t0 + seg.duration * double(i) / samples_per_segment);
        t0 += seg.duration;
    }
    return times;
}

}  // namespace

StateTrajectory evolve_schedule(const SystemParams& params, const HilbertConfig& config,
                                const DriveSchedule& schedule, const Vec& psi0,
                                int samples_per_segment, const IntegratorOptions& opt) {
    schedule.validate();
    StateTrajectory traj;
    traj.config = config;
    traj.times = segment_times(schedule, samples_per_segment);
    traj.states.push_back(psi0);
    traj.diagnostics.push_back(diag_of(psi0, config));

    Vec y = psi0;
    std::size_t idx = 1;
    for (const auto& seg : schedule.segments) {
        SystemParams p = params;
        p.epsilon = seg.epsilon;
        const SpMat h = build_lab_hamiltonian(p, config);
        auto rhs = [&h](double, const Vec& v, Vec& dv) { dv.noalias() = -I * (h * v); };
        for (int i = 1; i <= samples_per_segment; ++i, ++idx) {
            integrate_adaptive(rhs, traj.times[idx - 1], traj.times[idx], y, opt);
            traj.states.push_back(y);
            traj.diagnostics.push_back(diag_of(y, config));
        }
    }
    return traj;
}

DensityTrajectory evolve_schedule_density(const SystemParams& params, const HilbertConfig& config,
                                          const DriveSchedule& schedule, const Mat& rho0,
                                          int samples_per_segment, const IntegratorOptions& opt) {
    schedule.validate();
    const int dim = config.dim();
    const std::size_t entries = std::size_t(dim) * std::size_t(dim);
    if (entries > opt.memory_budget_entries)
        throw MemoryBudgetError("evolve_schedule_density: vectorized density exceeds memory budget");

    DensityTrajectory traj;
    traj.config = config;
    traj.times = segment_times(schedule, samples_per_segment);

    Vec y = Eigen::Map<const Vec>(rho0.data(), rho0.size());
    auto record = [&](const Vec& v) {
        Mat rho = Eigen::Map<const Mat>(v.data(), dim, dim);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        traj.diagnostics.push_back(diag_of(rho, config));
        traj.states.push_back(std::move(rho));
    };
    record(y);

    std::size_t idx = 1;
    for (const auto& seg : schedule.segments) {
        SystemParams p = params;
        p.epsilon = seg.epsilon;
        const Liouvillian l = build_liouvillian(p, config);
        auto rhs = [&l](double, const Vec& v, Vec& dv) { l.apply_vec(v, dv); };
        for (int i = 1; i <= samples_per_segment; ++i, ++idx) {
            integrate_adaptive(rhs, traj.times[idx - 1], traj.times[idx], y, opt);
            record(y);
        }
    }
    return traj;
}

TruncationReport truncation_check(const StateTrajectory& traj, double threshold) {
    TruncationReport r;
    r.threshold = threshold;
    for (std::size_t i = 0; i < traj.diagnostics.size(); ++i) {
        const double da = std::abs(traj.diagnostics[i].comm_cavity - 1.0);
        const double db = std::abs(traj.diagnostics[i].comm_mech - 1.0);
        r.max_cavity_dev = std::max(r.max_cavity_dev, da);
        r.max_mech_dev = std::max(r.max_mech_dev, db);
        if (da > threshold || db > threshold) r.flagged.push_back(i);
    }
    return r;
}

TruncationReport truncation_check(const DensityTrajectory& traj, double threshold) {
    TruncationReport r;
    r.threshold = threshold;
    for (std::size_t i = 0; i < traj.diagnostics.size(); ++i) {
        const double da = std::abs(traj.diagnostics[i].comm_cavity - 1.0);
        const double db = std::abs(traj.diagnostics[i].comm_mech - 1.0);
        r.max_cavity_dev = std::max(r.max_cavity_dev, da);
        r.max_mech_dev = std::max(r.max_mech_dev, db);
        if (da > threshold || db > threshold) r.flagged.push_back(i);
    }
    return r;
}

double energy_expectation(const SpMat& h, const Vec& psi) {
    return std::real(psi.dot(h * psi));
}

}  // namespace omsim
