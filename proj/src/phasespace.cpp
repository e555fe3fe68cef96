#include "omsim/phasespace.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace omsim {

double WignerGrid::integral() const {
    const int nx = grid.nx, np = grid.np;
    double s = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double wi = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
        for (int j = 0; j < np; ++j) {
            const double wj = (j == 0 || j == np - 1) ? 0.5 : 1.0;
            s += wi * wj * values(i, j);
        }
    }
    return s * grid.dx() * grid.dp();
}

namespace {

// W(xi) = (2/pi) sum_{m,n} (-1)^m rho(m,n) <n|D(2 xi)|m>. The displacement
// matrix elements along diagonal n-m = a are
//   <m+a|D|m> = sqrt(m!/(m+a)!) gam^a e^{-x/2} L_m^a(x),  x = |gam|^2,
//   <m|D|m+a> = (-conj(gam))^a / |gam|^a * same magnitude,
// evaluated with the degree recurrence on L_m^a carried in scaled form
// (mantissa + power-of-two exponent) so deep-forbidden regions underflow
// gracefully instead of corrupting the sum.
double wigner_point_impl(const Mat& rho, Cplx xi, const std::vector<double>& sq) {
    const int n_dim = int(rho.rows());
    const Cplx gam = 2.0 * xi;
    const double x = std::norm(gam);
    if (x == 0.0) {
        // rho arrives parity-scaled, so this is sum_m (-1)^m rho_mm
        double s = 0.0;
        for (int m = 0; m < n_dim; ++m) s += rho(m, m).real();
        return (2.0 / M_PI) * s;
    }
    const double ag = std::abs(gam);
    // beyond the reach of any state in this truncated space
    if (ag > 2.0 * std::sqrt(double(n_dim)) + 14.0) return 0.0;

    constexpr double kLn2 = 0.6931471805599453;
    const Cplx unit = gam / ag;
    const Cplx unit_c = -std::conj(unit);
    Cplx pha{1.0, 0.0}, phan{1.0, 0.0};  // unit^a, (-conj(unit))^a

    Cplx acc{0.0, 0.0};
    const double lga = std::log(ag);
    for (int a = 0; a < n_dim; ++a) {
        if (a > 0) {
            pha *= unit;
            phan *= unit_c;
        }
        // whole diagonal deep in the forbidden region: |D_{nm}| <~
        // exp(-(|gam| - sqrt(n) - sqrt(m))^2 / 2) and sqrt(m)+sqrt(m+a)
        // grows with m, so checking the top entry suffices
        const int mtop = n_dim - 1 - a;
        if (std::sqrt(double(mtop)) + std::sqrt(double(mtop + a)) < ag - 14.0) continue;

        // log of the m = 0 prefactor sqrt(0!/a!) |gam|^a e^{-x/2}
        const double lpref = -0.5 * x + a * lga - 0.5 * std::lgamma(double(a) + 1.0);
        int pex = int(std::floor(lpref / kLn2));
        double pmant = std::exp(lpref - pex * kLn2);

        double lm1 = 0.0, lm = 1.0;  // L_{-1}, L_0 in current scaling
        int lex = 0, lex1 = 0;
        for (int m = 0; m + a < n_dim; ++m) {
            const int n = m + a;
            if (lm != 0.0) {
                const double mag = std::ldexp(pmant * lm, pex + lex);
                if (mag != 0.0) {
                    acc += (mag * pha) * rho(m, n);
                    if (a > 0) acc += (mag * phan) * rho(n, m);
                }
            }
            // advance L and the prefactor to m+1
            const double lnext = ((2.0 * m + a + 1.0 - x) * lm - (m + a) * lm1 * std::ldexp(1.0, lex1 - lex)) /
                                 double(m + 1);
            lm1 = lm;
            lex1 = lex;
            lm = lnext;
            const double al = std::abs(lm);
            if (al > 1e150) {
                lm = std::ldexp(lm, -512);
                lex += 512;
            } else if (al != 0.0 && al < 1e-150) {
                lm = std::ldexp(lm, 512);
                lex -= 512;
            }
            pmant *= sq[m + 1] / sq[n + 1];
            if (pmant < 1e-150) {
                pmant = std::ldexp(pmant, 512);
                pex -= 512;
            }
        }
    }
    return (2.0 / M_PI) * acc.real();
}

std::vector<double> sqrt_table(int n) {
    std::vector<double> sq(n + 2);
    for (int k = 0; k < n + 2; ++k) sq[k] = std::sqrt(double(k));
    return sq;
}

// fold (-1)^m into the density matrix rows once
Mat parity_scaled(const Mat& rho) {
    Mat out = rho;
    for (Eigen::Index m = 1; m < out.rows(); m += 2) out.row(m) = -out.row(m);
    return out;
}

}  // namespace

double wigner_point(const Mat& rho_b, Cplx xi) {
    if (rho_b.rows() != rho_b.cols()) throw std::invalid_argument("wigner_point: matrix not square");
    const Mat scaled = parity_scaled(rho_b);
    return wigner_point_impl(scaled, xi, sqrt_table(int(rho_b.rows())));
}

WignerGrid wigner(const Mat& rho_b, const PhaseGrid& grid, int num_threads) {
    grid.validate();
    if (rho_b.rows() != rho_b.cols()) throw std::invalid_argument("wigner: matrix not square");
    const Mat sym = 0.5 * (rho_b + rho_b.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<Vec> comps;
    std::vector<double> weights;
    for (int r = 0; r < sym.rows(); ++r) {
        const double lam = es.eigenvalues()[r];
        if (std::abs(lam) > 1e-13 * scale) {
            comps.push_back(es.eigenvectors().col(r));
            weights.push_back(lam);
        }
    }
    WignerGrid out = wigner_components_weighted(comps, weights, grid, num_threads, false);
    const double integ = out.integral();
    if (std::abs(integ - 1.0) > 0.01)
        warn("wigner: grid integral " + std::to_string(integ) + " misses 1 by more than 0.01");
    return out;
}

namespace {

// psi_r(q) for all components at one point, Hermite-function recurrence in
// scaled arithmetic (h_0 = pi^{-1/4} e^{-q^2/2} may underflow at large |q|
// long before high-k terms become negligible).
void eval_components(const std::vector<Vec>& comps, double q, Cplx* out) {
    const int nr = int(comps.size());
    const int n_dim = int(comps[0].size());
    for (int r = 0; r < nr; ++r) out[r] = Cplx{0.0, 0.0};

    constexpr double kLn2 = 0.6931471805599453;
    const double lh0 = -0.5 * q * q - 0.25 * std::log(M_PI);
    int ex = int(std::floor(lh0 / kLn2));
    double hprev = 0.0;                       // h_{k-1}
    double hcur = std::exp(lh0 - ex * kLn2);  // h_k, scaled by 2^ex
    for (int k = 0; k < n_dim; ++k) {
        if (ex > -600 && hcur != 0.0) {
            const double v = std::ldexp(hcur, ex);
            if (v != 0.0)
                for (int r = 0; r < nr; ++r) out[r] += comps[r][k] * v;
        }
        const double hnext =
            std::sqrt(2.0 / double(k + 1)) * q * hcur - std::sqrt(double(k) / double(k + 1)) * hprev;
        hprev = hcur;
        hcur = hnext;
        const double m = std::max(std::abs(hprev), std::abs(hcur));
        if (m > 1e150) {
            hprev = std::ldexp(hprev, -512);
            hcur = std::ldexp(hcur, -512);
            ex += 512;
        } else if (m != 0.0 && m < 1e-150) {
            hprev = std::ldexp(hprev, 512);
            hcur = std::ldexp(hcur, 512);
            ex -= 512;
        }
    }
}

}  // namespace

WignerGrid wigner_pure_components(const std::vector<Vec>& components, const PhaseGrid& grid,
                                  int num_threads) {
    return wigner_components_weighted(components, std::vector<double>(components.size(), 1.0), grid,
                                      num_threads);
}

WignerGrid wigner_components_weighted(const std::vector<Vec>& components,
                                      const std::vector<double>& weights, const PhaseGrid& grid,
                                      int num_threads, bool warn_norm) {
    grid.validate();
    if (components.empty()) throw std::invalid_argument("wigner_components: no components");
    if (weights.size() != components.size())
        throw std::invalid_argument("wigner_components: weight count mismatch");
    const int n_dim = int(components[0].size());
    for (const auto& c : components)
        if (c.size() != n_dim) throw std::invalid_argument("wigner_components: size mismatch");
    const int nr = int(components.size());

    // standard-units coordinates: q = sqrt(2) Re xi, p_s = sqrt(2) Im xi;
    // W_ours(xi) = 2 W_std(q, p_s)
    const double q_supp = std::sqrt(2.0 * n_dim) + 8.0;
    const double p_abs = std::sqrt(2.0) * std::max(std::abs(grid.p_min), std::abs(grid.p_max));
    const double freq = 2.0 * (std::sqrt(2.0 * n_dim) + p_abs) + 4.0;
    const double hy = std::min(0.05, M_PI / (1.35 * freq));

    WignerGrid out;
    out.grid = grid;
    out.values.setZero(grid.nx, grid.np);

#ifdef _OPENMP
    const int nt = num_threads > 0 ? num_threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
    for (int i = 0; i < grid.nx; ++i) {
        const double q0 = std::sqrt(2.0) * grid.x(i);
        const double ylim = q_supp - std::abs(q0);
        if (ylim <= 0) {
            for (int j = 0; j < grid.np; ++j) out.values(i, j) = 0.0;
            continue;
        }
        const int jmax = int(std::ceil(ylim / hy));
        // f(y) = sum_r w_r conj(psi_r(q0+y)) psi_r(q0-y); f(-y) = conj(f(y))
        std::vector<Cplx> f(jmax + 1);
        std::vector<Cplx> vp(nr), vm(nr);
        for (int jy = 0; jy <= jmax; ++jy) {
            const double y = jy * hy;
            eval_components(components, q0 + y, vp.data());
            eval_components(components, q0 - y, vm.data());
            Cplx s{0.0, 0.0};
            for (int r = 0; r < nr; ++r) s += weights[r] * (std::conj(vp[r]) * vm[r]);
            f[jy] = s;
        }
        for (int j = 0; j < grid.np; ++j) {
            const double ps = std::sqrt(2.0) * grid.p(j);
            const Cplx step = std::exp(I * (2.0 * ps * hy));
            Cplx ph = step;
            double s = f[0].real();
            for (int jy = 1; jy <= jmax; ++jy, ph *= step) s += 2.0 * std::real(f[jy] * ph);
            out.values(i, j) = 2.0 * (hy / M_PI) * s;
        }
    }

    if (warn_norm) {
        const double integ = out.integral();
        if (std::abs(integ - 1.0) > 0.01)
            warn("wigner_components: grid integral " + std::to_string(integ) +
                 " misses 1 by more than 0.01");
    }
    return out;
}

double nonclassical_ratio(const WignerGrid& w) {
    const double integ = w.integral();
    if (std::abs(integ - 1.0) > 0.02)
        throw GridError("nonclassical_ratio: grid integral " + std::to_string(integ) +
                        " is not within 0.02 of 1; grid too small or too coarse");
    const int nx = w.grid.nx, np = w.grid.np;
    double neg = 0.0, pos = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double wi = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
        for (int j = 0; j < np; ++j) {
            const double wj = (j == 0 || j == np - 1) ? 0.5 : 1.0;
            const double v = w.values(i, j);
            if (v < 0.0)
                neg -= wi * wj * v;
            else
                pos += wi * wj * v;
        }
    }
    if (pos <= 0.0) throw GridError("nonclassical_ratio: no positive weight on grid");
    return neg / pos;
}

}  // namespace omsim
