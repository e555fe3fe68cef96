#include "omsim/analytic.hpp"

#include <cmath>

#include "omsim/fock.hpp"

namespace omsim {

namespace {

// a_n amplitudes of the truncated initial cavity coherent state; the same
// construction the propagators start from, so analytic and numeric states
// share their cavity truncation exactly.
Vec cavity_amps(int n_cavity, Cplx alpha) { return coherent_vector(n_cavity, alpha); }

Cplx a_phase(Cplx a_n, double g_tilde, int n, Cplx beta) {
    return a_n * std::exp(-I * (g_tilde * n * beta.imag()));
}

void warn_if_coherent_too_big(double max_sq, int n_mech, const char* who) {
    if (max_sq > 0.25 * n_mech) warn(std::string(who) + ": coherent parameter exceeds n_mech/4");
}

}  // namespace

Cplx UndrivenState::beta_n(int n) const {
    const double w = params.omega_m;
    return std::exp(-I * (w * t)) * beta_bar(n) - double(n) * params.g_tilde();
}

double UndrivenState::phi_n(int n) const {
    const double w = params.omega_m;
    const double k = params.kerr();
    const Cplx rot = beta * (std::exp(-I * (w * t)) - 1.0);
    return params.delta * n * t + k * n * n * (t - std::sin(w * t) / w) +
           params.g_tilde() * n * rot.imag();
}

Vec UndrivenState::materialize(const HilbertConfig& config) const {
    config.validate();
    params.validate();
    const Vec a = cavity_amps(config.n_cavity, alpha);
    Vec psi = Vec::Zero(config.dim());
    double max_sq = 0.0;
    for (int n = 0; n < config.n_cavity; ++n) {
        const Cplx bn = beta_n(n);
        max_sq = std::max(max_sq, std::norm(bn));
        psi.segment(n * config.n_mech, config.n_mech) =
            a[n] * std::exp(I * phi_n(n)) * coherent_vector(config.n_mech, bn);
    }
    warn_if_coherent_too_big(max_sq, config.n_mech, "undriven_state");
    return psi / psi.norm();
}

Mat UndrivenState::mech_density(const HilbertConfig& config) const {
    config.validate();
    params.validate();
    const Vec a = cavity_amps(config.n_cavity, alpha);
    Mat rho = Mat::Zero(config.n_mech, config.n_mech);
    double max_sq = 0.0;
    for (int n = 0; n < config.n_cavity; ++n) {
        const Cplx bn = beta_n(n);
        max_sq = std::max(max_sq, std::norm(bn));
        const Vec v = coherent_vector(config.n_mech, bn);
        rho.noalias() += std::norm(a[n]) * (v * v.adjoint());
    }
    warn_if_coherent_too_big(max_sq, config.n_mech, "undriven_density_mech");
    return rho / rho.trace().real();
}

Vec undriven_state(const SystemParams& params, const HilbertConfig& config, Cplx alpha, Cplx beta,
                   double t) {
    return UndrivenState{params, alpha, beta, t}.materialize(config);
}

Mat undriven_density_mech(const SystemParams& params, const HilbertConfig& config, Cplx alpha,
                          Cplx beta, double t) {
    return UndrivenState{params, alpha, beta, t}.mech_density(config);
}

double PerturbativeState::phi_pm(int n, double tau, int sign) const {
    const double s = sign;
    const double w = params.omega_m;
    const Cplx bb = beta + double(n) * params.g_tilde();
    return -s * params.delta * tau - s * params.kerr() * (2.0 * n + s) * tau +
           s * params.g_tilde() * std::imag(std::conj(bb) * std::exp(I * (w * tau)));
}

Cplx PerturbativeState::beta_bar_pm(int n, double tau, int sign) const {
    const Cplx bb = beta + double(n) * params.g_tilde();
    return bb + double(sign) * params.g_tilde() * std::exp(I * (params.omega_m * tau));
}

Cplx PerturbativeState::xi_exponent(int n, int sign) const {
    const double gt = params.g_tilde();
    const double w = params.omega_m;
    const Cplx bb = beta + double(n - sign) * gt;  // bbar_{n -+ 1}
    return -I * (gt * n * std::imag(std::conj(bb) * std::exp(I * (w * t)))) -
           0.5 * (std::norm(bb) + gt * gt * (double(n) * n + 1.0) -
                  2.0 * gt * n * std::real(bb * std::exp(-I * (w * t))));
}

namespace {

struct PertPieces {
    // shared assembly of the quadrature materializations; frame == lab adds
    // the H0 phases, the -g~ n shift and the extra lab phase factor.
    static Vec build(const PerturbativeState& ps, const HilbertConfig& config, bool lab,
                     double* norm_factor) {
        config.validate();
        ps.params.validate();
        const auto& p = ps.params;
        if (p.eps_tilde() > 0.5) warn("perturbative_state: eps~ > 0.5, outside weak-drive domain");
        const double w = p.omega_m;
        const double gt = p.g_tilde();
        const double T = w * ps.t;
        // composite 4-point Gauss-Legendre on uniform subintervals; node
        // count per period is quadrature_steps
        const int nodes = std::max(4, int(std::ceil(ps.quadrature_steps * T / (2.0 * M_PI))));
        const int nsub = (nodes + 3) / 4;
        if (ps.quadrature_steps < 64) warn("perturbative_state: fewer than 64 quadrature nodes per period");
        const double hsub = T / nsub;
        static constexpr double gl_x[4] = {0.06943184420297371, 0.33000947820757187,
                                           0.66999052179242813, 0.93056815579702629};
        static constexpr double gl_w[4] = {0.17392742256872693, 0.32607257743127307,
                                           0.32607257743127307, 0.17392742256872693};
        const Vec a = cavity_amps(config.n_cavity, ps.alpha);
        const int nm = config.n_mech;

        Vec psi = Vec::Zero(config.dim());
        double max_sq = 0.0;
        for (int n = 0; n < config.n_cavity; ++n) {
            const Cplx pref = lab ? std::exp(I * ((p.delta * n + p.kerr() * n * n) * ps.t)) : Cplx{1.0, 0.0};
            const Cplx bb_n = ps.beta + double(n) * gt;
            Vec block;
            {
                const Cplx par = lab ? Cplx(std::exp(-I * (w * ps.t)) * bb_n - gt * double(n)) : bb_n;
                max_sq = std::max(max_sq, std::norm(par));
                const Cplx zph =
                    lab ? std::exp(-I * (gt * n * std::imag(std::conj(bb_n) * std::exp(I * (w * ps.t)))))
                        : Cplx{1.0, 0.0};
                block = a_phase(a[n], gt, n, ps.beta) * zph * coherent_vector(nm, par);
            }
            if (p.epsilon != 0.0 && ps.t > 0.0) {
                Vec acc = Vec::Zero(nm);
                for (int j = 0; j < nsub; ++j)
                    for (int q = 0; q < 4; ++q) {
                        const double tau = (j + gl_x[q]) * hsub / w;
                        const double wq = gl_w[q] * hsub;
                        if (n - 1 >= 0) {
                            const Cplx bp = ps.beta_bar_pm(n - 1, tau, +1);
                            const Cplx par =
                                lab ? Cplx(bp * std::exp(-I * (w * ps.t)) - gt * double(n)) : bp;
                            max_sq = std::max(max_sq, std::norm(par));
                            Cplx ph = std::exp(I * ps.phi_pm(n - 1, tau, +1));
                            if (lab)
                                ph *= std::exp(
                                    -I * (gt * n * std::imag(std::conj(bp) * std::exp(I * (w * ps.t)))));
                            acc += (wq * std::sqrt(double(n))) * a_phase(a[n - 1], gt, n - 1, ps.beta) *
                                   ph * coherent_vector(nm, par);
                        }
                        if (n + 1 < config.n_cavity) {
                            const Cplx bm = ps.beta_bar_pm(n + 1, tau, -1);
                            const Cplx par =
                                lab ? Cplx(bm * std::exp(-I * (w * ps.t)) - gt * double(n)) : bm;
                            max_sq = std::max(max_sq, std::norm(par));
                            Cplx ph = std::exp(I * ps.phi_pm(n + 1, tau, -1));
                            if (lab)
                                ph *= std::exp(
                                    -I * (gt * n * std::imag(std::conj(bm) * std::exp(I * (w * ps.t)))));
                            acc += (wq * std::sqrt(double(n + 1))) *
                                   a_phase(a[n + 1], gt, n + 1, ps.beta) * ph * coherent_vector(nm, par);
                        }
                    }
                block -= I * p.eps_tilde() * acc;
            }
            psi.segment(n * nm, nm) = pref * block;
        }
        warn_if_coherent_too_big(max_sq, nm, "perturbative_state");
        const double nrm = psi.norm();
        if (norm_factor) *norm_factor = 1.0 / nrm;
        return psi / nrm;
    }
};

}  // namespace

Vec PerturbativeState::materialize_lab(const HilbertConfig& config, double* norm_factor) const {
    return PertPieces::build(*this, config, true, norm_factor);
}

Vec PerturbativeState::materialize_lf_interaction(const HilbertConfig& config,
                                                  double* norm_factor) const {
    return PertPieces::build(*this, config, false, norm_factor);
}

double PerturbativeState::coeff_c(int n, int k, int sign) const {
    const double s = sign;
    const double dt_ = params.delta / params.omega_m;
    const double kt = params.kerr() / params.omega_m;
    return -s * dt_ - s * kt * (2.0 * n - s) + double(k);
}

Cplx PerturbativeState::coeff_q(int n, int sign) const {
    const double gt = params.g_tilde();
    return double(sign) * gt * gt * double(n) * std::exp(-I * (params.omega_m * t));
}

Cplx PerturbativeState::coeff_p(int n, int sign) const {
    const double gt = params.g_tilde();
    const Cplx bb = beta + double(n - sign) * gt;
    return -double(sign) * gt * bb;
}

namespace {

// int_0^T exp(i c x) dx with a series for small c
Cplx phase_integral(double c, double T) {
    const double x = c * T;
    if (std::abs(x) < 1e-8) return T * Cplx{1.0 - x * x / 6.0, x / 2.0};
    return (std::exp(I * x) - 1.0) / (I * c);
}

}  // namespace

Cplx PerturbativeState::integral_ink(int n, int k, int sign) const {
    const double T = params.omega_m * t;
    const double c = coeff_c(n, k, sign);
    const Cplx q = coeff_q(n, sign);
    const Cplx pp = coeff_p(n, sign);
    Cplx acc{0.0, 0.0};
    Cplx qu{1.0, 0.0};
    const int nmax = 72;
    for (int u = 0; u < nmax; ++u) {
        if (u > 0) qu *= q / double(u);
        if (std::abs(qu) < 1e-22 && u > std::abs(q) + 4) break;
        Cplx pv{1.0, 0.0};
        for (int v = 0; v < nmax; ++v) {
            if (v > 0) pv *= pp / double(v);
            acc += qu * pv * phase_integral(c + u - v, T);
            if (std::abs(pv) < 1e-22 && v > std::abs(pp) + 4) break;
        }
    }
    return acc;
}

Vec PerturbativeState::materialize_lab_explicit(const HilbertConfig& config, int m_max) const {
    config.validate();
    params.validate();
    const auto& p = params;
    const double w = p.omega_m;
    const double gt = p.g_tilde();
    const Vec a = cavity_amps(config.n_cavity, alpha);
    const int nm = config.n_mech;
    m_max = std::min(m_max, nm);

    std::vector<double> lg(m_max + 1);
    for (int m = 0; m <= m_max; ++m) lg[m] = std::lgamma(m + 1.0);

    Vec psi = Vec::Zero(config.dim());
    for (int n = 0; n < config.n_cavity; ++n) {
        const Cplx pref = std::exp(I * ((p.delta * n + p.kerr() * n * n) * t));
        const Cplx bb_n = beta + double(n) * gt;
        Vec block = a_phase(a[n], gt, n, beta) *
                    std::exp(-I * (gt * n * std::imag(std::conj(bb_n) * std::exp(I * (w * t))))) *
                    coherent_vector(nm, std::exp(-I * (w * t)) * bb_n - gt * double(n));
        if (p.epsilon != 0.0 && t > 0.0) {
            Vec acc = Vec::Zero(nm);
            // cache the integrals; they do not depend on m
            std::vector<Cplx> ip(m_max + 1), im_(m_max + 1);
            for (int k = 0; k <= m_max; ++k) {
                ip[k] = (n - 1 >= 0) ? integral_ink(n, k, +1) : Cplx{0, 0};
                im_[k] = (n + 1 < config.n_cavity) ? integral_ink(n, k, -1) : Cplx{0, 0};
            }
            const Cplx base_p = (n - 1 >= 0) ? Cplx((beta + double(n - 1) * gt) * std::exp(-I * (w * t)) -
                                                    gt * double(n))
                                             : Cplx{0, 0};
            const Cplx base_m = (n + 1 < config.n_cavity)
                                    ? Cplx((beta + double(n + 1) * gt) * std::exp(-I * (w * t)) -
                                           gt * double(n))
                                    : Cplx{0, 0};
            const Cplx wp = (n - 1 >= 0) ? std::sqrt(double(n)) * a_phase(a[n - 1], gt, n - 1, beta) *
                                               std::exp(xi_exponent(n, +1))
                                         : Cplx{0, 0};
            const Cplx wm = (n + 1 < config.n_cavity)
                                ? std::sqrt(double(n + 1)) * a_phase(a[n + 1], gt, n + 1, beta) *
                                      std::exp(xi_exponent(n, -1))
                                : Cplx{0, 0};
            for (int m = 0; m < m_max; ++m) {
                Cplx s{0.0, 0.0};
                for (int k = 0; k <= m; ++k) {
                    const double binom = std::exp(lg[m] - lg[k] - lg[m - k]);
                    const Cplx com = binom * std::exp(-I * (w * double(k) * t));
                    if (n - 1 >= 0)
                        s += com * wp * std::pow(base_p, m - k) * std::pow(Cplx(gt), k) * ip[k];
                    if (n + 1 < config.n_cavity)
                        s += com * wm * std::pow(base_m, m - k) * std::pow(Cplx(-gt), k) * im_[k];
                }
                acc[m] = s / std::sqrt(std::exp(lg[m]));
            }
            block -= I * p.eps_tilde() * acc;
        }
        psi.segment(n * nm, nm) = pref * block;
    }
    return psi / psi.norm();
}

Vec perturbative_state(const SystemParams& params, const HilbertConfig& config, Cplx alpha,
                       Cplx beta, double t, int quadrature_steps, double quad_tol) {
    PerturbativeState ps{params, alpha, beta, t, quadrature_steps};
    const Vec x1 = ps.materialize_lab(config);
    ps.quadrature_steps = 2 * quadrature_steps;
    const Vec x2 = ps.materialize_lab(config);
    const double delta = (x1 - x2).norm();
    if (delta > quad_tol)
        throw ConvergenceError("perturbative_state: quadrature not converged, step-doubling moved state by " +
                               std::to_string(delta));
    return x2;
}

Cplx ShortTimeState::a_tilde(int n, const Vec& a_amps) const {
    const auto& p = params;
    const double T = p.omega_m * t;
    const double dt_ = p.delta / p.omega_m, kt = p.kerr() / p.omega_m;
    const Cplx am1 = (n - 1 >= 0) ? a_amps[n - 1] : Cplx{0, 0};
    const Cplx ap1 = (n + 1 < a_amps.size()) ? a_amps[n + 1] : Cplx{0, 0};
    const Cplx ph = std::exp(-I * (p.g_tilde() * n * beta.imag()));
    const Cplx an = a_phase(a_amps[n], p.g_tilde(), n, beta);
    const Cplx br = std::sqrt(double(n)) * am1 * (1.0 - I * ((dt_ + 2.0 * n * kt) * T / 2.0)) +
                    std::sqrt(double(n + 1)) * ap1 * (1.0 + I * ((dt_ + 2.0 * n * kt) * T / 2.0));
    return an - I * (p.eps_tilde() * T) * ph * br;
}

Cplx ShortTimeState::b_tilde(int n, const Vec& a_amps) const {
    const auto& p = params;
    const double T = p.omega_m * t;
    const Cplx am1 = (n - 1 >= 0) ? a_amps[n - 1] : Cplx{0, 0};
    const Cplx ap1 = (n + 1 < a_amps.size()) ? a_amps[n + 1] : Cplx{0, 0};
    const Cplx ph = std::exp(-I * (p.g_tilde() * n * beta.imag()));
    return p.eps_tilde() * p.g_tilde() * ph * (T * T / 2.0) *
           (std::sqrt(double(n)) * am1 - std::sqrt(double(n + 1)) * ap1);
}

double ShortTimeState::chi(int n, int sign) const {
    const double gt = params.g_tilde();
    const Cplx bb = beta + double(n) * gt;
    return std::exp(-gt * gt / 2.0 - double(sign) * gt * bb.real());
}

Vec ShortTimeState::materialize_lf_interaction(const HilbertConfig& config) const {
    config.validate();
    params.validate();
    const auto& p = params;
    const double gt = p.g_tilde();
    if (p.omega_m * t > 0.5) warn("short_time_state: Omega_m t > 0.5, outside short-time domain");
    const Vec a = cavity_amps(config.n_cavity, alpha);
    const int nm = config.n_mech;
    Vec psi = Vec::Zero(config.dim());
    for (int n = 0; n < config.n_cavity; ++n) {
        const Cplx bb = beta + double(n) * gt;
        if (std::norm(a[n]) > 1e-4 && std::abs(gt) >= std::abs(bb))
            warn("short_time_state: |g~/bbar_n| >= 1 for populated n, expansion unreliable");
        const Cplx at = a_tilde(n, a), bt = b_tilde(n, a);
        const double cp = chi(n, +1), cm = chi(n, -1);
        Cplx b0, bpm;
        if (std::abs(cp - cm) < 1e-12) {
            // Re bbar_n = 0: the b^dag reshuffle is singular there; keep the
            // pre-reshuffle coefficients (exact when b_tilde vanishes).
            warn("short_time_state: chi+ = chi-, dropping the sideband split at n=" + std::to_string(n));
            b0 = at + bt * bb;
            bpm = 0.0;
        } else {
            bpm = bt / (gt * (cp - cm));
            b0 = at + bt * (bb - (cp + cm) / (gt * (cp - cm)));
        }
        Vec block = b0 * coherent_vector(nm, bb);
        if (bpm != Cplx{0, 0}) {
            block += bpm * coherent_vector(nm, bb + gt);
            block += bpm * coherent_vector(nm, bb - gt);
        }
        psi.segment(n * nm, nm) = block;
    }
    return psi / psi.norm();
}

Vec short_time_state(const SystemParams& params, const HilbertConfig& config, Cplx alpha, Cplx beta,
                     double t) {
    return ShortTimeState{params, alpha, beta, t}.materialize_lf_interaction(config);
}

Cplx VacuumWignerModel::f_m(int m) const {
    const double gt = params.g_tilde();
    const double et = e_tilde(1, m);
    const double mag = std::exp(-gt * gt / 2.0 + (m > 0 ? m * std::log(gt) : 0.0) -
                                0.5 * std::lgamma(m + 1.0));
    const double x = et * params.omega_m * t;
    Cplx fac;
    if (std::abs(et) < 1e-6) {
        // removable singularity: (1 - e^{-ix})/E~ -> i w t as E~ -> 0
        fac = params.omega_m * t * Cplx{x / 2.0, 1.0 - x * x / 6.0};
    } else {
        fac = (1.0 - std::exp(-I * x)) / et;
    }
    return mag * fac;
}

double VacuumWignerModel::w1(Cplx xi, int k_max, int m_max) const {
    double s = 0.0;
    std::vector<Cplx> f(m_max);
    for (int m = 0; m < m_max; ++m) f[m] = f_m(m);
    const Cplx zeta{-params.g_tilde(), 0.0};
    for (int k = 0; k < k_max; ++k) {
        Cplx amp{0.0, 0.0};
        for (int m = 0; m < m_max; ++m) amp += f[m] * displaced_fock_overlap(xi, k, zeta, m);
        s += ((k % 2 == 0) ? 1.0 : -1.0) * std::norm(amp);
    }
    return (2.0 / M_PI) * s;
}

double VacuumWignerModel::norm_sq(int m_max) const {
    double s = 0.0;
    for (int m = 0; m < m_max; ++m) s += std::norm(f_m(m));
    const double e = params.eps_tilde();
    return 1.0 / (1.0 + e * e * s);
}

double VacuumWignerModel::total(Cplx xi, int k_max, int m_max) const {
    const double w0 = (2.0 / M_PI) * std::exp(-2.0 * std::norm(xi));
    const double e = params.eps_tilde();
    return norm_sq(m_max) * (w0 + e * e * w1(xi, k_max, m_max));
}

double vacuum_wigner_correction(const SystemParams& params, double t, Cplx xi, int k_max, int m_max,
                                double cutoff_tol) {
    VacuumWignerModel m{params, t};
    const double v1 = m.w1(xi, k_max, m_max);
    const double v2 = m.w1(xi, 2 * k_max, 2 * m_max);
    if (std::abs(v1 - v2) > cutoff_tol)
        throw ConvergenceError("vacuum_wigner_correction: cutoffs not converged");
    return v2;
}

double vacuum_wigner_total(const SystemParams& params, double t, Cplx xi, int k_max, int m_max,
                           double cutoff_tol) {
    VacuumWignerModel m{params, t};
    const double v1 = m.total(xi, k_max, m_max);
    const double v2 = m.total(xi, 2 * k_max, 2 * m_max);
    if (std::abs(v1 - v2) > cutoff_tol)
        throw ConvergenceError("vacuum_wigner_total: cutoffs not converged");
    return v2;
}

std::optional<double> negativity_threshold_at_minus_g0(const SystemParams& params) {
    params.validate();
    if (params.delta != 0.0)
        throw std::invalid_argument("negativity_threshold_at_minus_g0: approximation requires Delta = 0");
    const double lam = params.g_tilde() * params.g_tilde();
    const double lr = std::round(lam);
    if (lr < 1.0 || std::abs(lam - lr) > 1e-9)
        throw std::invalid_argument("negativity_threshold_at_minus_g0: g~^2 must be a positive integer");
    const long k = long(lr);
    if (k % 2 == 0) return std::nullopt;  // (-1)^{g~^2} > 0: no zero crossing at -g~
    // eps_c = sqrt( e^{-2 g~^2} / (pi^2 P_k(g~^2)) ), P_k(l) = l^k e^{-l} / k!
    const double logp = k * std::log(lam) - lam - std::lgamma(double(k) + 1.0);
    const double log_eps2 = -2.0 * lam - 2.0 * std::log(M_PI) - logp;
    return std::exp(0.5 * log_eps2);
}

Cplx overlap(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("overlap: dimension mismatch");
    return a.dot(b);
}

}  // namespace omsim
