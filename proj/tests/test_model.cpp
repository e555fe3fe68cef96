#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "omsim/fock.hpp"
#include "omsim/model.hpp"
#include "oracle_helpers.hpp"

using namespace omsim;

TEST_CASE("lab Hamiltonian: decoupled limit and coupling matrix element") {
    HilbertConfig cfg{3, 4};
    SystemParams p;
    p.omega_m = 1.0;

    const Mat h0 = Mat(build_lab_hamiltonian(p, cfg));
    for (int n = 0; n < 3; ++n)
        for (int m = 0; m < 4; ++m)
            CHECK(std::abs(h0(cfg.index(n, m), cfg.index(n, m)) - Cplx(double(m), 0)) < 1e-14);
    CHECK((h0 - Mat(h0.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

    p.g0 = 0.7;
    p.epsilon = 0.2;
    p.delta = -0.3;
    const Mat h = Mat(build_lab_hamiltonian(p, cfg));
    CHECK(std::abs(h(cfg.index(1, 0), cfg.index(1, 1)) - Cplx(p.g0, 0)) < 1e-14);
    CHECK(is_hermitian(h, 1e-12));
}

TEST_CASE("lab Hamiltonian spectrum matches the Lang-Firsov ladder (eps = 0)") {
    HilbertConfig cfg{2, 40};
    SystemParams p;
    p.omega_m = 1.0;
    p.g0 = 1.8;

    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(build_lab_hamiltonian(p, cfg)));
    std::vector<double> expected;
    for (int n = 0; n < cfg.n_cavity; ++n)
        for (int m = 0; m < cfg.n_mech; ++m)
            expected.push_back(-p.delta * n - p.kerr() * n * n + p.omega_m * m);
    std::sort(expected.begin(), expected.end());
    for (int i = 0; i < 20; ++i) CHECK(std::abs(es.eigenvalues()[i] - expected[i]) < 1e-6);
}

TEST_CASE("Lang-Firsov Hamiltonian: diagonal read-off and zero drive") {
    HilbertConfig cfg{3, 30};
    SystemParams p;
    p.omega_m = 1.0;
    p.g0 = 1.2;
    p.delta = 0.4;

    auto [h0, v] = build_lf_hamiltonian(p, cfg);
    CHECK(v.nonZeros() == 0);
    const Mat h0d = Mat(h0);
    for (int n = 0; n < 3; ++n)
        for (int m = 0; m < 30; m += 7) {
            const double want = -p.delta * n - p.kerr() * n * n + p.omega_m * m;
            CHECK(std::abs(h0d(cfg.index(n, m), cfg.index(n, m)) - Cplx(want, 0)) < 1e-12);
        }

    p.epsilon = 0.3;
    auto [h0b, vb] = build_lf_hamiltonian(p, cfg);
    CHECK(is_hermitian(Mat(vb), 1e-12));
    CHECK(is_hermitian(Mat(h0b), 1e-12));
}

TEST_CASE("Lang-Firsov conjugation: U H U^dag = H0 + V on the interior") {
    // The truncated U contaminates conjugated matrix elements out to
    // m ~ 2 n g~ sqrt(m) past a state's own support, so the interior must
    // exclude roughly half of a generously sized mechanical space before
    // the identity is clean (a 3 g~ N_c margin at N_m = 60 leaves O(10)
    // residuals; measured directly).
    HilbertConfig cfg{4, 200};
    SystemParams p;
    p.omega_m = 1.0;
    p.g0 = 1.0;
    p.delta = 0.2;
    p.epsilon = 0.25;

    const Mat h = Mat(build_lab_hamiltonian(p, cfg));
    const Mat u = Mat(lang_firsov_unitary(p, cfg));
    auto [h0, v] = build_lf_hamiltonian(p, cfg);
    const Mat lhs = u * h * u.adjoint();
    const Mat rhs = Mat(h0) + Mat(v);

    const int keep = cfg.n_mech / 2;
    double worst = 0.0;
    for (int n1 = 0; n1 < cfg.n_cavity; ++n1)
        for (int m1 = 0; m1 < keep; ++m1)
            for (int n2 = 0; n2 < cfg.n_cavity; ++n2)
                for (int m2 = 0; m2 < keep; ++m2)
                    worst = std::max(worst, std::abs(lhs(cfg.index(n1, m1), cfg.index(n2, m2)) -
                                                     rhs(cfg.index(n1, m1), cfg.index(n2, m2))));
    CHECK(worst < 1e-8);
}

TEST_CASE("lang_firsov_unitary: block structure") {
    HilbertConfig cfg{3, 200};
    SystemParams p;
    p.omega_m = 1.0;
    p.g0 = 1.0;

    const Mat u = Mat(lang_firsov_unitary(p, cfg));
    CHECK((u.block(0, 0, 200, 200) - Mat::Identity(200, 200)).cwiseAbs().maxCoeff() < 1e-14);

    // n=1 block on mechanical vacuum -> |g~>
    Vec vac = Vec::Zero(200);
    vac[0] = 1.0;
    const Vec out = u.block(200, 200, 200, 200) * vac;
    CHECK((out - coherent_vector(200, p.g_tilde())).norm() < 1e-8);

    // U |2> (x) |0.5> = |2> (x) |0.5 + 2 g~>
    Vec psi = Vec::Zero(cfg.dim());
    psi.segment(2 * 200, 200) = coherent_vector(200, 0.5);
    const Vec mapped = u * psi;
    Vec want = Vec::Zero(cfg.dim());
    want.segment(2 * 200, 200) = coherent_vector(200, 0.5 + 2.0 * p.g_tilde());
    // global phase of D(2g~)|0.5>: e^{i Im(2 g~ * conj(0.5))} = 1 for real arguments
    CHECK((mapped - want).norm() < 1e-8);
}

TEST_CASE("Liouvillian: pure Hamiltonian flow when kappa = gamma = 0") {
    HilbertConfig cfg{3, 4};
    SystemParams p;
    p.omega_m = 1.0;
    p.g0 = 0.8;
    p.epsilon = 0.1;

    const Liouvillian l = build_liouvillian(p, cfg);
    REQUIRE(l.assembled);
    std::mt19937_64 rng(3);
    const Mat rho = oracle::random_density(cfg.dim(), rng);
    const Mat h = Mat(l.h);

    Mat drho;
    l.apply(rho, drho);
    const Mat want = -I * (h * rho - rho * h);
    CHECK((drho - want).cwiseAbs().maxCoeff() < 1e-12);

    // assembled superoperator agrees with the matrix form
    Vec rv = Eigen::Map<const Vec>(rho.data(), rho.size());
    Vec out;
    l.apply_vec(rv, out);
    const Mat out_m = Eigen::Map<const Mat>(out.data(), cfg.dim(), cfg.dim());
    CHECK((out_m - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Liouvillian: photon decay rate at t = 0") {
    HilbertConfig cfg{6, 2};
    SystemParams p;
    p.omega_m = 1.0;
    p.kappa = 0.37;

    const Liouvillian l = build_liouvillian(p, cfg);
    const Vec ca = coherent_vector(6, Cplx{1.1, -0.3});
    Vec vac = Vec::Zero(2);
    vac[0] = 1.0;
    const Vec psi = [&] {
        Vec out(cfg.dim());
        for (int n = 0; n < 6; ++n) out.segment(n * 2, 2) = ca[n] * vac;
        return out;
    }();
    const Mat rho = psi * psi.adjoint();
    Mat drho;
    l.apply(rho, drho);
    const Mat num = tensor(Mat(number_op(6)), Mat::Identity(2, 2));
    const double lhs = (num * drho).trace().real();
    const double photons = (num * rho).trace().real();
    CHECK(lhs == doctest::Approx(-p.kappa * photons).epsilon(1e-10));
}

TEST_CASE("Liouvillian: truncated thermal state is an exact fixed point") {
    HilbertConfig cfg{1, 60};
    SystemParams p;
    p.omega_m = 1.0;
    p.gamma_m = 0.21;
    p.n_th = 2.0;

    const Liouvillian l = build_liouvillian(p, cfg);
    const Mat rho = thermal_state(60, 2.0);
    Mat drho;
    l.apply(rho, drho);
    CHECK(drho.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("Liouvillian: trace and Hermiticity preservation on random inputs") {
    HilbertConfig cfg{3, 4};
    SystemParams p;
    p.omega_m = 1.0;
    p.g0 = 1.1;
    p.epsilon = 0.2;
    p.delta = -0.4;
    p.kappa = 0.15;
    p.gamma_m = 0.02;
    p.n_th = 1.3;

    const Liouvillian l = build_liouvillian(p, cfg);
    REQUIRE(l.assembled);
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        const Mat rho = oracle::random_hermitian(cfg.dim(), rng);
        Mat drho;
        l.apply(rho, drho);
        CHECK(std::abs(drho.trace()) < 1e-10);
        CHECK((drho - drho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

        Vec rv = Eigen::Map<const Vec>(rho.data(), rho.size());
        Vec out;
        l.apply_vec(rv, out);
        const Mat om = Eigen::Map<const Mat>(out.data(), cfg.dim(), cfg.dim());
        CHECK((om - drho).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("Liouvillian: matrix-free path equals assembled path") {
    HilbertConfig cfg{2, 5};
    SystemParams p;
    p.omega_m = 1.0;
    p.g0 = 0.9;
    p.kappa = 0.3;
    p.gamma_m = 0.05;
    p.n_th = 0.7;

    const Liouvillian assembled = build_liouvillian(p, cfg);
    const Liouvillian free_form = build_liouvillian(p, cfg, /*assemble_threshold=*/1);
    REQUIRE(assembled.assembled);
    REQUIRE(!free_form.assembled);

    std::mt19937_64 rng(21);
    const Mat rho = oracle::random_density(cfg.dim(), rng);
    Vec rv = Eigen::Map<const Vec>(rho.data(), rho.size());
    Vec o1, o2;
    assembled.apply_vec(rv, o1);
    free_form.apply_vec(rv, o2);
    CHECK((o1 - o2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("SystemParams validation and derived quantities") {
    SystemParams p;
    p.omega_m = 2.0;
    p.g0 = 3.0;
    CHECK(p.kerr() == doctest::Approx(4.5));
    CHECK(p.g_tilde() == doctest::Approx(1.5));
    p.omega_m = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.omega_m = 1.0;
    p.kappa = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
