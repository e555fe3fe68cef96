#pragma once

#include <optional>

#include "omsim/types.hpp"
#include "omsim/model.hpp"

namespace omsim {

/// Exact undriven (eps = 0) solution: each cavity Fock state |n> carries a
/// mechanical coherent state beta_n(t) = e^{-i w t}(beta + n g~) - n g~ and
/// a phase phi_n(t).
struct UndrivenState {
    SystemParams params;
    Cplx alpha, beta;
    double t = 0.0;

    Cplx beta_bar(int n) const { return beta + double(n) * params.g_tilde(); }
    Cplx beta_n(int n) const;
    double phi_n(int n) const;

    /// Normalized lab-frame composite state. Warns when any |beta_n(t)|^2
    /// exceeds n_mech/4.
    Vec materialize(const HilbertConfig& config) const;

    /// rho_b(t) = sum_n |a_n|^2 |beta_n(t)><beta_n(t)| on n_mech levels,
    /// with the cavity sum truncated at n_cavity.
    Mat mech_density(const HilbertConfig& config) const;
};

Vec undriven_state(const SystemParams& params, const HilbertConfig& config, Cplx alpha, Cplx beta,
                   double t);
Mat undriven_density_mech(const SystemParams& params, const HilbertConfig& config, Cplx alpha,
                          Cplx beta, double t);

/// First-order (in eps~) solution. The tau-integral over the interaction-
/// picture drive is evaluated by composite midpoint quadrature of
/// coherent-state-valued integrands; the fully explicit power-series form
/// is available as a cross-check at small cutoffs.
struct PerturbativeState {
    SystemParams params;
    Cplx alpha, beta;
    double t = 0.0;
    int quadrature_steps = 256;  // nodes per mechanical period

    double phi_pm(int n, double tau, int sign) const;
    Cplx beta_bar_pm(int n, double tau, int sign) const;
    /// exponent xi_n^pm(t) of the lab-frame static prefactor (series form)
    Cplx xi_exponent(int n, int sign) const;

    Vec materialize_lab(const HilbertConfig& config, double* norm_factor = nullptr) const;
    Vec materialize_lf_interaction(const HilbertConfig& config, double* norm_factor = nullptr) const;
    /// Power-series evaluation of the tau-integrals (coefficients C_nk, Q_n,
    /// P_n and integrals I_nk); intended for small cutoffs.
    Vec materialize_lab_explicit(const HilbertConfig& config, int m_max) const;

    double coeff_c(int n, int k, int sign) const;
    Cplx coeff_q(int n, int sign) const;
    Cplx coeff_p(int n, int sign) const;
    Cplx integral_ink(int n, int k, int sign) const;
};

/// Checked wrapper: throws ConvergenceError if doubling quadrature_steps
/// changes the state by more than quad_tol in norm.
Vec perturbative_state(const SystemParams& params, const HilbertConfig& config, Cplx alpha,
                       Cplx beta, double t, int quadrature_steps, double quad_tol = 1e-6);

/// Short-time (Omega_m t << 1) cat expansion in the Lang-Firsov
/// interaction picture: per n a three-component superposition
/// B0|bbar_n> + B+|bbar_{n+1}> + B-|bbar_{n-1}> with B- = B+.
struct ShortTimeState {
    SystemParams params;
    Cplx alpha, beta;
    double t = 0.0;

    Cplx a_tilde(int n, const Vec& a_amps) const;
    Cplx b_tilde(int n, const Vec& a_amps) const;
    double chi(int n, int sign) const;  // exp(-g~^2/2 -+ g~ Re bbar_n)
    Vec materialize_lf_interaction(const HilbertConfig& config) const;
};

Vec short_time_state(const SystemParams& params, const HilbertConfig& config, Cplx alpha, Cplx beta,
                     double t);

/// Vacuum-initial-state Wigner correction W = N^2 [W0 + eps~^2 W1] with
/// W0 = (2/pi) e^{-2|xi|^2} and W1 the displaced-Fock parity sum built on
/// f_m(t) = (g~^m/sqrt(m!)) e^{-g~^2/2} [1-e^{-i E_1m t}]/E~_1m.
struct VacuumWignerModel {
    SystemParams params;
    double t = 0.0;

    double e_tilde(int n, int m) const {
        return (-params.delta * n - params.kerr() * n * n + params.omega_m * m) / params.omega_m;
    }
    Cplx f_m(int m) const;
    double w1(Cplx xi, int k_max, int m_max) const;
    double norm_sq(int m_max) const;  // N^2 = 1 / (1 + eps~^2 sum |f_m|^2)
    double total(Cplx xi, int k_max, int m_max) const;
};

/// Checked W1: doubling both cutoffs must move the value by < cutoff_tol.
double vacuum_wigner_correction(const SystemParams& params, double t, Cplx xi, int k_max, int m_max,
                                double cutoff_tol = 1e-8);
double vacuum_wigner_total(const SystemParams& params, double t, Cplx xi, int k_max, int m_max,
                           double cutoff_tol = 1e-8);

/// Critical drive for W(-g~) = 0 at Delta = 0, t = pi/Omega_m in the
/// single-resonance approximation; requires integer g~^2. Returns nullopt
/// for even g~^2 (no negativity at xi = -g~).
std::optional<double> negativity_threshold_at_minus_g0(const SystemParams& params);

/// <a|b>; throws on dimension mismatch.
Cplx overlap(const Vec& a, const Vec& b);

}  // namespace omsim
