#pragma once

#include <utility>

#include "omsim/types.hpp"

namespace omsim {

/// Physical parameters. All frequencies and rates share one unit system;
/// the CLI works with Omega_m = 1 so the remaining entries are the usual
/// adimensional ratios.
struct SystemParams {
    double delta = 0.0;    // laser detuning omega_L - omega_c
    double omega_m = 1.0;  // mechanical frequency, > 0
    double g0 = 0.0;       // single-photon optomechanical coupling
    double epsilon = 0.0;  // drive strength, >= 0
    double kappa = 0.0;    // cavity loss rate, >= 0
    double gamma_m = 0.0;  // mechanical loss rate, >= 0
    double n_th = 0.0;     // thermal occupation of the mechanical bath, >= 0

    double kerr() const { return g0 * g0 / omega_m; }
    double g_tilde() const { return g0 / omega_m; }
    double eps_tilde() const { return epsilon / omega_m; }

    void validate() const {
        if (!(omega_m > 0.0)) throw std::invalid_argument("SystemParams: omega_m must be > 0");
        if (epsilon < 0 || kappa < 0 || gamma_m < 0 || n_th < 0)
            throw std::invalid_argument("SystemParams: rates must be >= 0");
    }
};

/// H = -Delta a^dag a + Omega_m b^dag b + g0 a^dag a (b + b^dag) + eps (a + a^dag)
SpMat build_lab_hamiltonian(const SystemParams& params, const HilbertConfig& config);

/// Lang-Firsov frame split H_LF = H0 + V with
///   H0 = -Delta a^dag a - K (a^dag a)^2 + Omega_m b^dag b   (diagonal)
///   V  = eps [D(g~) a^dag + D(-g~) a]
std::pair<SpMat, SpMat> build_lf_hamiltonian(const SystemParams& params, const HilbertConfig& config);

/// U_LF = exp(g~ a^dag a (b^dag - b)): block-diagonal in cavity number,
/// block n is the mechanical displacement D(n g~). Warns when the largest
/// block displacement is too big for the mechanical cutoff.
SpMat lang_firsov_unitary(const SystemParams& params, const HilbertConfig& config);

/// Lindblad generator of the master equation
///   drho/dt = -i[H,rho] + kappa D[a] + gamma_m (n_th+1) D[b] + gamma_m n_th D[b^dag].
/// The superoperator acting on column-vectorized rho is assembled as one
/// sparse matrix when dim <= assemble_threshold; above that the generator
/// is applied matrix-free from its factors.
struct Liouvillian {
    HilbertConfig config;
    SystemParams params;
    bool assembled = false;
    SpMatRM superop;                 // dim^2 x dim^2 when assembled
    SpMat h, a_op, b_op;             // factors for matrix-free application
    SpMat adag_a, bdag_b, b_bdag;    // cached products

    /// drho = L[rho], matrix form.
    void apply(const Mat& rho, Mat& drho) const;
    /// Column-vectorized application (uses the assembled superoperator if present).
    void apply_vec(const Vec& rho_vec, Vec& out) const;
};

Liouvillian build_liouvillian(const SystemParams& params, const HilbertConfig& config,
                              int assemble_threshold = 2000);

/// Dense Bose-Einstein thermal state with mean occupation n_th (single mode).
Mat thermal_state(int dim, double n_th);

}  // namespace omsim
