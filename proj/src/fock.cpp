#include "omsim/fock.hpp"

#include <cmath>
#include <mutex>

#include <unsupported/Eigen/MatrixFunctions>

namespace omsim {

namespace {
std::function<void(const std::string&)> g_warn_handler;
std::mutex g_warn_mutex;
}  // namespace

void warn(const std::string& msg) {
    std::lock_guard lock(g_warn_mutex);
    if (g_warn_handler)
        g_warn_handler(msg);
    else
        std::fprintf(stderr, "[omsim] warning: %s\n", msg.c_str());
}

void set_warning_handler(std::function<void(const std::string&)> handler) {
    std::lock_guard lock(g_warn_mutex);
    g_warn_handler = std::move(handler);
}

SpMat destroy(int dim) {
    if (dim < 1) throw std::invalid_argument("destroy: dim must be >= 1");
    SpMat m(dim, dim);
    m.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (int k = 1; k < dim; ++k) m.insert(k - 1, k) = std::sqrt(double(k));
    m.makeCompressed();
    return m;
}

SpMat create(int dim) { return SpMat(destroy(dim).adjoint()); }

SpMat number_op(int dim) {
    if (dim < 1) throw std::invalid_argument("number_op: dim must be >= 1");
    SpMat m(dim, dim);
    m.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (int k = 1; k < dim; ++k) m.insert(k, k) = double(k);
    m.makeCompressed();
    return m;
}

SpMat identity_sp(int dim) {
    SpMat m(dim, dim);
    m.setIdentity();
    return m;
}

Vec coherent_vector(int dim, Cplx alpha, double* truncation_loss) {
    if (dim < 1) throw std::invalid_argument("coherent_vector: dim must be >= 1");
    Vec v(dim);
    v[0] = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) v[n] = v[n - 1] * alpha / std::sqrt(double(n));
    const double n2 = v.squaredNorm();
    if (!(n2 > 0.0))
        throw std::invalid_argument("coherent_vector: amplitude underflow, dim far too small for |alpha|");
    if (truncation_loss) *truncation_loss = 1.0 - n2;
    return v / std::sqrt(n2);
}

namespace {

// <n|D(gam)|m> for all n,m < dim by the degree recurrence on generalized
// Laguerre polynomials, one matrix diagonal n-m = a at a time:
//   <m+a|D|m> = sqrt(m!/(m+a)!) gam^a e^{-x/2} L_m^a(x),  x = |gam|^2.
// The recurrence runs in scaled arithmetic (mantissa + power-of-two
// exponent); a plain ladder recurrence on the rows amplifies roundoff
// catastrophically once dim >> |gam|^2.
Mat displacement_laguerre(int dim, Cplx gam) {
    const double x = std::norm(gam);
    if (x == 0.0) return Mat::Identity(dim, dim);
    constexpr double kLn2 = 0.6931471805599453;
    const double ag = std::abs(gam), lga = std::log(ag);
    const Cplx unit = gam / ag, unit_c = -std::conj(unit);
    std::vector<double> sq(dim + 1);
    for (int k = 0; k <= dim; ++k) sq[k] = std::sqrt(double(k));

    Mat d(dim, dim);
    Cplx pha{1.0, 0.0}, phan{1.0, 0.0};  // unit^a, (-conj(unit))^a
    for (int a = 0; a < dim; ++a) {
        if (a > 0) {
            pha *= unit;
            phan *= unit_c;
        }
        const double lpref = -0.5 * x + a * lga - 0.5 * std::lgamma(double(a) + 1.0);
        int pex = int(std::floor(lpref / kLn2));
        double pmant = std::exp(lpref - pex * kLn2);
        double lm1 = 0.0, lm = 1.0;
        int lex = 0, lex1 = 0;
        for (int m = 0; m + a < dim; ++m) {
            const int n = m + a;
            const double mag = (lm == 0.0) ? 0.0 : std::ldexp(pmant * lm, pex + lex);
            d(n, m) = mag * pha;
            if (a > 0) d(m, n) = mag * phan;
            const double lnext =
                ((2.0 * m + a + 1.0 - x) * lm - (m + a) * lm1 * std::ldexp(1.0, lex1 - lex)) /
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
            if (pmant != 0.0 && pmant < 1e-150) {
                pmant = std::ldexp(pmant, 512);
                pex -= 512;
            }
        }
    }
    return d;
}

}  // namespace

Mat displacement_op(int dim, Cplx beta) {
    if (dim < 1) throw std::invalid_argument("displacement_op: dim must be >= 1");
    if (std::norm(beta) > 0.25 * dim)
        warn("displacement_op: |beta|^2 > dim/4, truncated result unreliable");
    if (dim <= 512) {
        Mat gen = Mat::Zero(dim, dim);
        for (int k = 1; k < dim; ++k) {
            gen(k, k - 1) = beta * std::sqrt(double(k));
            gen(k - 1, k) = -std::conj(beta) * std::sqrt(double(k));
        }
        return gen.exp();
    }
    return displacement_laguerre(dim, beta);
}

Cplx displaced_fock_overlap(Cplx xi, int k, Cplx zeta, int m) {
    if (k < 0 || m < 0) throw std::invalid_argument("displaced_fock_overlap: k,m must be >= 0");
    const Cplx gam = zeta - xi;
    const double x = std::norm(gam);
    const int lo = std::min(k, m), hi = std::max(k, m), d = hi - lo;
    if (x == 0.0) return k == m ? Cplx{1.0, 0.0} : Cplx{0.0, 0.0};

    // generalized Laguerre L_lo^d(x), upward in degree
    double lprev = 0.0, lcur = 1.0;
    for (int n = 0; n < lo; ++n) {
        const double lnext = ((2.0 * n + d + 1.0 - x) * lcur - (n + d) * lprev) / (n + 1.0);
        lprev = lcur;
        lcur = lnext;
    }

    // coherent overlap <xi|zeta> = exp(-x/2) * exp(i Im(conj(xi) zeta)),
    // magnitude folded together with sqrt(lo!/hi!) |gam|^d in log space
    const double logmag = -0.5 * x + 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0)) +
                          d * 0.5 * std::log(x);
    const Cplx unit = gam / std::abs(gam);
    const Cplx dir = (k >= m) ? unit : -std::conj(unit);  // (zeta-xi) or (conj(xi)-conj(zeta))
    const Cplx phase = std::exp(I * std::imag(std::conj(xi) * zeta)) * std::pow(dir, d);
    return phase * (std::exp(logmag) * lcur);
}

Mat tensor(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

SpMat tensor(const SpMat& a, const SpMat& b) {
    SpMat out(a.rows() * b.rows(), a.cols() * b.cols());
    std::vector<Eigen::Triplet<Cplx>> trips;
    trips.reserve(size_t(a.nonZeros()) * size_t(b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka)
        for (SpMat::InnerIterator ia(a, ka); ia; ++ia)
            for (int kb = 0; kb < b.outerSize(); ++kb)
                for (SpMat::InnerIterator ib(b, kb); ib; ++ib)
                    trips.emplace_back(ia.row() * b.rows() + ib.row(),
                                       ia.col() * b.cols() + ib.col(),
                                       ia.value() * ib.value());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

Mat partial_trace_cavity(const Mat& rho, const HilbertConfig& config) {
    config.validate();
    if (rho.rows() != config.dim() || rho.cols() != config.dim())
        throw std::invalid_argument("partial_trace_cavity: dimension mismatch");
    const int nm = config.n_mech;
    Mat out = Mat::Zero(nm, nm);
    for (int n = 0; n < config.n_cavity; ++n)
        out += rho.block(n * nm, n * nm, nm, nm);
    return out;
}

double commutator_expectation(const Vec& psi, Mode mode, const HilbertConfig& config) {
    config.validate();
    if (psi.size() != config.dim())
        throw std::invalid_argument("commutator_expectation: dimension mismatch");
    const int nc = config.n_cavity, nm = config.n_mech;
    double ptop = 0.0;
    if (mode == Mode::cavity) {
        for (int m = 0; m < nm; ++m) ptop += std::norm(psi[config.index(nc - 1, m)]);
        return 1.0 - nc * ptop;
    }
    for (int n = 0; n < nc; ++n) ptop += std::norm(psi[config.index(n, nm - 1)]);
    return 1.0 - nm * ptop;
}

double commutator_expectation(const Mat& rho, Mode mode, const HilbertConfig& config) {
    config.validate();
    if (rho.rows() != config.dim())
        throw std::invalid_argument("commutator_expectation: dimension mismatch");
    const int nc = config.n_cavity, nm = config.n_mech;
    double ptop = 0.0;
    if (mode == Mode::cavity) {
        for (int m = 0; m < nm; ++m) ptop += rho(config.index(nc - 1, m), config.index(nc - 1, m)).real();
        return 1.0 - nc * ptop;
    }
    for (int n = 0; n < nc; ++n) ptop += rho(config.index(n, nm - 1), config.index(n, nm - 1)).real();
    return 1.0 - nm * ptop;
}

std::vector<Vec> mech_components(const Vec& psi, const HilbertConfig& config) {
    config.validate();
    if (psi.size() != config.dim())
        throw std::invalid_argument("mech_components: dimension mismatch");
    std::vector<Vec> out;
    out.reserve(config.n_cavity);
    for (int n = 0; n < config.n_cavity; ++n)
        out.push_back(psi.segment(n * config.n_mech, config.n_mech));
    return out;
}

}  // namespace omsim
