#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omsim/evolve.hpp"
#include "omsim/phasespace.hpp"
#include "omsim/types.hpp"

namespace omsim {

struct SweepAxis {
    std::string param;  // delta | g0 | epsilon | kappa | gamma_m | n_th
    double min = 0.0, max = 0.0;
    int count = 1;

    double value(int i) const {
        return count < 2 ? min : min + (max - min) * double(i) / double(count - 1);
    }
};

/// Fully resolved description of one experiment run. Parsed from a flat
/// key = value config file; every physical rate is a ratio to omega_m.
struct ExperimentConfig {
    std::string experiment;
    SystemParams params;
    Cplx alpha{0.0, 0.0};
    Cplx beta{0.0, 0.0};
    HilbertConfig hilbert{8, 300};

    double t_final = M_PI;   // drive pulse length (units of 1/omega_m)
    double t_free = 2 * M_PI;  // free segment after switch-off
    int time_samples = 8;

    PhaseGrid grid{0, 0, 0, 0, 0, 0};
    bool grid_set = false;

    std::vector<SweepAxis> sweeps;

    std::string out_prefix = "out/run";
    double tolerance = 0.0;  // integrator rtol; 0 = backend default
    double trunc_threshold = 0.01;
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = all hardware threads
    std::string backend = "numeric-schrodinger";
    int quadrature_steps = 256;
    int k_max = 64, m_max = 64;  // vacuum-analysis cutoffs
    int eps_scan_count = 11;
    double eps_scan_max = 0.5;

    PhaseGrid resolved_grid() const {
        if (grid_set) return grid;
        return PhaseGrid::default_for(params.g_tilde(), hilbert.n_cavity);
    }
    IntegratorOptions integrator(bool open_system) const {
        IntegratorOptions o;
        o.rtol = tolerance > 0 ? tolerance : (open_system ? 1e-7 : 1e-9);
        o.atol = o.rtol * 1e-2;
        return o;
    }
    std::vector<std::pair<std::string, std::string>> resolved_entries() const;
};

ExperimentConfig load_config(const std::string& path);

/// Runs the named experiment, writing CSV tables plus a metadata sidecar
/// under out_prefix. Returns the list of files written.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

// helpers shared with the acceptance suite
Vec initial_product_state(const ExperimentConfig& config);
double eta_of_state(const Vec& psi, const HilbertConfig& cfg, const PhaseGrid& grid,
                    int num_threads = 0);
double eta_of_density(const Mat& rho, const HilbertConfig& cfg, const PhaseGrid& grid,
                      int num_threads = 0);
void set_sweep_param(SystemParams& p, const std::string& name, double value);

namespace io {
std::string fmt(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_meta(const std::string& path,
                const std::vector<std::pair<std::string, std::string>>& entries);
}  // namespace io

}  // namespace omsim
