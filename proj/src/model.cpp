#include "omsim/model.hpp"

#include <cmath>

#include "omsim/fock.hpp"

namespace omsim {

SpMat build_lab_hamiltonian(const SystemParams& params, const HilbertConfig& config) {
    params.validate();
    config.validate();
    const int nc = config.n_cavity, nm = config.n_mech;
    const SpMat na = number_op(nc), nb = number_op(nm);
    const SpMat ic = identity_sp(nc), im = identity_sp(nm);
    const SpMat b = destroy(nm);
    const SpMat a = destroy(nc);
    const SpMat x_b = SpMat(b + SpMat(b.adjoint()));
    const SpMat x_a = SpMat(a + SpMat(a.adjoint()));

    SpMat h = SpMat(tensor(SpMat(-params.delta * na), im)) + tensor(ic, SpMat(params.omega_m * nb)) +
              tensor(SpMat(params.g0 * na), x_b);
    if (params.epsilon != 0.0) h = h + tensor(SpMat(params.epsilon * x_a), im);
    h.makeCompressed();
    return h;
}

std::pair<SpMat, SpMat> build_lf_hamiltonian(const SystemParams& params, const HilbertConfig& config) {
    params.validate();
    config.validate();
    const int nc = config.n_cavity, nm = config.n_mech;
    const double kerr = params.kerr();

    SpMat h0(config.dim(), config.dim());
    h0.reserve(Eigen::VectorXi::Constant(config.dim(), 1));
    for (int n = 0; n < nc; ++n)
        for (int m = 0; m < nm; ++m) {
            const double e = -params.delta * n - kerr * n * n + params.omega_m * m;
            if (e != 0.0) h0.insert(config.index(n, m), config.index(n, m)) = e;
        }
    h0.makeCompressed();

    SpMat v(config.dim(), config.dim());
    if (params.epsilon != 0.0) {
        const Mat d = displacement_op(nm, params.g_tilde());
        const SpMat ds = d.sparseView(1.0, 1e-300);
        const SpMat a = destroy(nc);
        // eps [a^dag (x) D(g~) + a (x) D(g~)^dag]; D(-g~) = D(g~)^dag keeps V
        // Hermitian to machine precision.
        const SpMat up = tensor(SpMat(params.epsilon * SpMat(a.adjoint())), ds);
        v = up + SpMat(up.adjoint());
        v.makeCompressed();
    }
    return {h0, v};
}

SpMat lang_firsov_unitary(const SystemParams& params, const HilbertConfig& config) {
    params.validate();
    config.validate();
    const int nc = config.n_cavity, nm = config.n_mech;
    const double gt = params.g_tilde();
    const double need = 4.0 * (nc * gt) * (nc * gt);
    if (nm < need)
        warn("lang_firsov_unitary: n_mech below 4 (N_c g~)^2, outer blocks unreliable");
    SpMat u(config.dim(), config.dim());
    std::vector<Eigen::Triplet<Cplx>> trips;
    for (int n = 0; n < nc; ++n) {
        if (n == 0) {
            for (int m = 0; m < nm; ++m) trips.emplace_back(m, m, Cplx{1.0, 0.0});
            continue;
        }
        const Mat d = displacement_op(nm, n * gt);
        for (int r = 0; r < nm; ++r)
            for (int c = 0; c < nm; ++c)
                if (std::abs(d(r, c)) > 1e-300)
                    trips.emplace_back(config.index(n, r), config.index(n, c), d(r, c));
    }
    u.setFromTriplets(trips.begin(), trips.end());
    return u;
}

namespace {

SpMat dissipator_super(const SpMat& o) {
    const int dim = int(o.rows());
    const SpMat odag = SpMat(o.adjoint());
    const SpMat odag_o = SpMat(odag * o);
    const SpMat id = identity_sp(dim);
    SpMat s = tensor(SpMat(o.conjugate()), o);
    s = s - SpMat(0.5 * tensor(id, odag_o));
    s = s - SpMat(0.5 * tensor(SpMat(odag_o.transpose()), id));
    return s;
}

}  // namespace

Liouvillian build_liouvillian(const SystemParams& params, const HilbertConfig& config,
                              int assemble_threshold) {
    params.validate();
    config.validate();
    Liouvillian l;
    l.config = config;
    l.params = params;
    l.h = build_lab_hamiltonian(params, config);
    l.a_op = tensor(destroy(config.n_cavity), identity_sp(config.n_mech));
    l.b_op = tensor(identity_sp(config.n_cavity), destroy(config.n_mech));
    l.adag_a = SpMat(SpMat(l.a_op.adjoint()) * l.a_op);
    l.bdag_b = SpMat(SpMat(l.b_op.adjoint()) * l.b_op);
    l.b_bdag = SpMat(l.b_op * SpMat(l.b_op.adjoint()));

    if (config.dim() <= assemble_threshold) {
        const int dim = config.dim();
        const SpMat id = identity_sp(dim);
        SpMat s = SpMat(-I * (tensor(id, l.h) - tensor(SpMat(l.h.transpose()), id)));
        if (params.kappa > 0) s = s + SpMat(params.kappa * dissipator_super(l.a_op));
        if (params.gamma_m > 0) {
            s = s + SpMat(params.gamma_m * (params.n_th + 1.0) * dissipator_super(l.b_op));
            if (params.n_th > 0)
                s = s + SpMat(params.gamma_m * params.n_th * dissipator_super(SpMat(l.b_op.adjoint())));
        }
        s.makeCompressed();
        l.superop = SpMatRM(s);
        l.assembled = true;
    }
    return l;
}

void Liouvillian::apply(const Mat& rho, Mat& drho) const {
    drho.noalias() = -I * (h * rho);
    drho.noalias() += I * (rho * h);
    if (params.kappa > 0) {
        const Mat tmp = a_op * rho;
        drho.noalias() += params.kappa * (tmp * SpMat(a_op.adjoint()));
        drho.noalias() -= (0.5 * params.kappa) * (adag_a * rho);
        drho.noalias() -= (0.5 * params.kappa) * (rho * adag_a);
    }
    if (params.gamma_m > 0) {
        const double gdown = params.gamma_m * (params.n_th + 1.0);
        Mat tmp = b_op * rho;
        drho.noalias() += gdown * (tmp * SpMat(b_op.adjoint()));
        drho.noalias() -= (0.5 * gdown) * (bdag_b * rho);
        drho.noalias() -= (0.5 * gdown) * (rho * bdag_b);
        if (params.n_th > 0) {
            const double gup = params.gamma_m * params.n_th;
            tmp.noalias() = SpMat(b_op.adjoint()) * rho;
            drho.noalias() += gup * (tmp * b_op);
            drho.noalias() -= (0.5 * gup) * (b_bdag * rho);
            drho.noalias() -= (0.5 * gup) * (rho * b_bdag);
        }
    }
}

void Liouvillian::apply_vec(const Vec& rho_vec, Vec& out) const {
    const int dim = config.dim();
    out.resize(rho_vec.size());
    if (assembled) {
        const auto* sp = &superop;
#pragma omp parallel for schedule(static)
        for (int r = 0; r < sp->rows(); ++r) {
            Cplx acc{0.0, 0.0};
            for (SpMatRM::InnerIterator it(*sp, r); it; ++it) acc += it.value() * rho_vec[it.col()];
            out[r] = acc;
        }
        return;
    }
    const Eigen::Map<const Mat> rho(rho_vec.data(), dim, dim);
    Eigen::Map<Mat> drho(out.data(), dim, dim);
    Mat tmp;
    apply(rho, tmp);
    drho = tmp;
}

Mat thermal_state(int dim, double n_th) {
    if (dim < 1) throw std::invalid_argument("thermal_state: dim must be >= 1");
    Mat rho = Mat::Zero(dim, dim);
    if (n_th <= 0.0) {
        rho(0, 0) = 1.0;
        return rho;
    }
    const double q = n_th / (n_th + 1.0);
    double p = 1.0, z = 0.0;
    for (int m = 0; m < dim; ++m, p *= q) z += p;
    p = 1.0 / z;
    for (int m = 0; m < dim; ++m, p *= q) rho(m, m) = p;
    return rho;
}

}  // namespace omsim
