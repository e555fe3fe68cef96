#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "omsim/experiments.hpp"

using namespace omsim;
namespace fs = std::filesystem;

namespace {

fs::path sandbox() {
    const auto dir = fs::temp_directory_path() / "omsim_test_experiments";
    fs::create_directories(dir);
    return dir;
}

std::string write_cfg(const std::string& name, const std::string& body) {
    const auto path = sandbox() / name;
    std::ofstream out(path);
    out << body;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// parse a CSV produced by the runners into columns keyed by header name
std::map<std::string, std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    std::map<std::string, std::vector<std::string>> cols;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::size_t i = 0;
        while (std::getline(ss, cell, ',')) cols[names.at(i++)].push_back(cell);
        for (; i < names.size(); ++i) cols[names.at(i)].push_back("");
    }
    return cols;
}

}  // namespace

TEST_CASE("load_config: full round trip and error paths") {
    const auto path = write_cfg("parse.cfg", R"(# comment
experiment = eta-scan
delta = -0.25
g0 = 1.1     # inline comment
epsilon = 0.3
kappa = 0.01
gamma_m = 0.0001
n_th = 2.5
alpha_re = 1.0
alpha_im = -0.5
beta_re = 0.25
beta_im = 0.0
nc = 5
nm = 77
t_final = 3.14
time_samples = 4
grid_xmin = -9
grid_xmax = 3
grid_pmin = -5
grid_pmax = 5
grid_nx = 41
grid_np = 31
sweep1_param = delta
sweep1_min = -1
sweep1_max = 1
sweep1_count = 3
out_prefix = /tmp/omsim_test_experiments/parse_out
tolerance = 1e-8
trunc_threshold = 0.02
seed = 99
workers = 2
backend = numeric-schrodinger
quadrature_steps = 128
)");
    const ExperimentConfig c = load_config(path);
    CHECK(c.experiment == "eta-scan");
    CHECK(c.params.delta == -0.25);
    CHECK(c.params.g0 == 1.1);
    CHECK(c.params.n_th == 2.5);
    CHECK(c.alpha == Cplx{1.0, -0.5});
    CHECK(c.hilbert.n_mech == 77);
    CHECK(c.grid_set);
    CHECK(c.grid.nx == 41);
    REQUIRE(c.sweeps.size() == 1);
    CHECK(c.sweeps[0].param == "delta");
    CHECK(c.sweeps[0].value(1) == doctest::Approx(0.0));
    CHECK(c.tolerance == 1e-8);
    CHECK(c.seed == 99);

    const auto bad = write_cfg("bad.cfg", "experiment = eta-scan\nnot_a_key = 1\n");
    CHECK_THROWS(load_config(bad));
    const auto bad2 = write_cfg("bad2.cfg", "experiment = eta-scan\nsweep1_min = 0\n");
    CHECK_THROWS(load_config(bad2));
}

TEST_CASE("eta-scan: deterministic byte-identical output and weak-coupling row") {
    const std::string base = (sandbox() / "det").string();
    ExperimentConfig c;
    c.experiment = "eta-scan";
    c.params.g0 = 0.2;
    c.params.epsilon = 0.3;
    c.alpha = 0.0;
    c.hilbert = {7, 32};  // resonant drive pushes cavity weight up to n ~ 5
    c.t_final = M_PI;
    c.grid = {-4.0, 3.0, -3.5, 3.5, 101, 101};
    c.grid_set = true;
    c.sweeps = {{"delta", -1.0, 1.0, 3}};
    c.workers = 2;

    c.out_prefix = base + "_a";
    run_experiment(c);
    c.out_prefix = base + "_b";
    run_experiment(c);
    CHECK(slurp(base + "_a_eta.csv") == slurp(base + "_b_eta.csv"));

    // weak coupling: no nonclassicality anywhere on the row
    const auto cols = read_csv(base + "_a_eta.csv");
    REQUIRE(cols.at("eta").size() == 3);
    for (const auto& v : cols.at("eta")) CHECK(std::stod(v) < 0.01);
    for (const auto& v : cols.at("valid")) CHECK(v == "1");
}

TEST_CASE("eta-scan: vacuum initial state peaks at zero detuning") {
    ExperimentConfig c;
    c.experiment = "eta-scan";
    c.params.g0 = 1.8;
    c.params.epsilon = 0.3;
    c.alpha = 0.0;
    c.hilbert = {5, 110};
    c.t_final = M_PI;
    c.grid = {-7.0, 3.0, -4.5, 4.5, 201, 161};
    c.grid_set = true;
    c.sweeps = {{"delta", -2.5, 2.5, 3}};  // -2.5, 0, +2.5
    c.workers = 2;
    c.out_prefix = (sandbox() / "vacpeak").string();
    run_experiment(c);

    const auto cols = read_csv(c.out_prefix + "_eta.csv");
    const double em = std::stod(cols.at("eta")[0]);
    const double e0 = std::stod(cols.at("eta")[1]);
    const double ep = std::stod(cols.at("eta")[2]);
    CHECK(e0 > em);
    CHECK(e0 > ep);
    CHECK(e0 > 0.01);
}

TEST_CASE("eta-scan: truncation-flagged points are recorded, grid failures marked invalid") {
    ExperimentConfig c;
    c.experiment = "eta-scan";
    c.params.g0 = 1.0;
    c.params.epsilon = 0.3;
    c.alpha = 1.0;
    c.hilbert = {5, 16};  // deliberately undersized
    c.t_final = M_PI;
    c.grid = {-8.0, 3.0, -5.0, 5.0, 121, 121};
    c.grid_set = true;
    c.sweeps = {{"delta", 0.0, 0.0, 1}};
    c.out_prefix = (sandbox() / "flagged").string();
    run_experiment(c);
    auto cols = read_csv(c.out_prefix + "_eta.csv");
    CHECK(cols.at("valid")[0] == "0");
    CHECK(std::stod(cols.at("comm_mech_dev")[0]) > 0.01);

    // a grid too small to hold the state: row kept, eta = nan, invalid
    c.hilbert = {5, 90};
    c.grid = {-0.5, 0.5, -0.5, 0.5, 11, 11};
    c.out_prefix = (sandbox() / "gridfail").string();
    run_experiment(c);
    cols = read_csv(c.out_prefix + "_eta.csv");
    CHECK(cols.at("valid")[0] == "0");
    CHECK(cols.at("eta")[0] == "nan");
}

TEST_CASE("periodicity-check: zero-length pulse leaves a classical mixture") {
    ExperimentConfig c;
    c.experiment = "periodicity-check";
    c.params.g0 = 0.6;
    c.params.epsilon = 0.3;  // ignored: pulse length is zero
    c.alpha = 1.0;
    c.beta = 0.3;
    c.hilbert = {5, 64};
    c.t_final = 0.0;
    c.t_free = 2.0 * M_PI;
    c.time_samples = 4;
    c.grid = {-6.0, 4.0, -5.0, 5.0, 161, 161};
    c.grid_set = true;
    c.workers = 2;
    c.out_prefix = (sandbox() / "zeropulse").string();
    run_experiment(c);

    const auto cols = read_csv(c.out_prefix + "_periodicity.csv");
    for (const auto& v : cols.at("eta")) CHECK(std::stod(v) < 1e-6);
    // free evolution is exactly periodic
    bool saw_td = false;
    for (const auto& v : cols.at("trace_distance_one_period"))
        if (!v.empty()) {
            saw_td = true;
            CHECK(std::stod(v) < 1e-6);
        }
    CHECK(saw_td);
}

TEST_CASE("periodicity-check: eta rises under drive then revives periodically") {
    ExperimentConfig c;
    c.experiment = "periodicity-check";
    c.params.g0 = 1.0;
    c.params.epsilon = 0.3;
    c.alpha = 1.0;
    c.hilbert = {7, 200};  // every displaced sector fits with sigmas to spare
    c.t_final = M_PI;
    c.t_free = 4.0 * M_PI;
    c.time_samples = 8;
    c.grid = {-12.0, 3.5, -6.0, 6.0, 241, 193};
    c.grid_set = true;
    c.workers = 2;
    c.out_prefix = (sandbox() / "revive").string();
    run_experiment(c);

    const auto cols = read_csv(c.out_prefix + "_periodicity.csv");
    const auto& ts = cols.at("t");
    const auto& etas = cols.at("eta");
    std::vector<double> t(ts.size()), e(etas.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        t[i] = std::stod(ts[i]);
        e[i] = std::stod(etas[i]);
    }
    // early drive: essentially classical; half period later: strongly nonclassical
    CHECK(e[1] < 0.02);
    const auto it_off = std::find_if(t.begin(), t.end(),
                                     [](double x) { return std::abs(x - M_PI) < 1e-9; });
    REQUIRE(it_off != t.end());
    const std::size_t off = std::size_t(it_off - t.begin());
    CHECK(e[off] > 0.05);
    CHECK(e[off] > 3.0 * e[1]);
    // free evolution: revival one full period after switch-off
    for (std::size_t i = off; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j)
            if (std::abs(t[j] - t[i] - 2.0 * M_PI) < 1e-9) CHECK(std::abs(e[j] - e[i]) < 2e-3);
    // dissipationless trace distance across one period is tiny
    for (const auto& v : cols.at("trace_distance_one_period"))
        if (!v.empty()) CHECK(std::stod(v) < 1e-5);
}

TEST_CASE("overlap-scan: weak-drive limit and perturbative superiority through the pipeline") {
    ExperimentConfig c;
    c.experiment = "overlap-scan";
    c.params.g0 = 1.0;
    c.alpha = 1.0;
    c.hilbert = {6, 160};
    c.t_final = M_PI;
    c.time_samples = 2;
    c.sweeps = {{"epsilon", 0.0, 0.3, 2}};  // eps~ = 0 and 0.3
    c.quadrature_steps = 256;
    c.workers = 2;
    c.out_prefix = (sandbox() / "overlap").string();
    run_experiment(c);

    const auto cols = read_csv(c.out_prefix + "_overlap.csv");
    const auto& eps = cols.at("eps_tilde");
    const auto& ou = cols.at("overlap_undriven");
    const auto& op = cols.at("overlap_perturbative");
    REQUIRE(eps.size() == 4);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double u = std::stod(ou[i]), p = std::stod(op[i]);
        CHECK(u <= 1.0 + 1e-9);
        CHECK(p <= 1.0 + 1e-9);
        if (std::stod(eps[i]) == 0.0) {
            CHECK(1.0 - u < 1e-6);
            CHECK(1.0 - p < 1e-6);
        } else {
            CHECK(p > u);
        }
    }
    // the cut file is the t = t_final subset
    const auto cut = read_csv(c.out_prefix + "_overlap_cut.csv");
    CHECK(cut.at("t").size() == 2);
}

TEST_CASE("wigner-movie: undriven frames stay positive, driven frames go negative") {
    ExperimentConfig c;
    c.experiment = "wigner-movie";
    c.params.g0 = 1.2;
    c.alpha = 1.0;
    c.hilbert = {7, 310};  // ~7 sigma past the outermost lobe: cutoff fringes < 1e-9
    c.t_final = 2.0 * M_PI;
    c.time_samples = 4;
    c.grid = {-12.0, 3.5, -6.0, 6.0, 201, 161};
    c.grid_set = true;
    c.backend = "analytic-undriven";
    c.workers = 2;
    c.out_prefix = (sandbox() / "movie_u").string();
    auto files = run_experiment(c);
    CHECK(files.size() == 5);  // 4 frames + meta
    for (int k = 0; k < 4; ++k) {
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_frame%03d.csv", k);
        const auto cols = read_csv(c.out_prefix + suffix);
        double mn = 0.0;
        for (const auto& v : cols.at("w")) mn = std::min(mn, std::stod(v));
        CHECK(mn >= -1e-9);
    }

    c.backend = "numeric-schrodinger";
    c.params.epsilon = 0.3;
    c.hilbert = {7, 190};
    c.out_prefix = (sandbox() / "movie_d").string();
    run_experiment(c);
    double global_min = 0.0, global_max = 0.0;
    for (int k = 0; k < 4; ++k) {
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_frame%03d.csv", k);
        const auto cols = read_csv(std::string((sandbox() / "movie_d").string()) + suffix);
        for (const auto& v : cols.at("w")) {
            global_min = std::min(global_min, std::stod(v));
            global_max = std::max(global_max, std::stod(v));
        }
    }
    CHECK(global_min < -0.02 * global_max);
}

TEST_CASE("wigner-movie: truncation gate aborts with a diagnostic") {
    ExperimentConfig c;
    c.experiment = "wigner-movie";
    c.params.g0 = 1.8;
    c.params.epsilon = 0.3;
    c.alpha = 1.0;
    c.hilbert = {6, 24};  // hopeless truncation
    c.t_final = M_PI;
    c.time_samples = 2;
    c.backend = "numeric-schrodinger";
    c.out_prefix = (sandbox() / "movie_gate").string();
    CHECK_THROWS_WITH_AS(run_experiment(c),
                         doctest::Contains("truncation gate failed"), std::runtime_error);
}

TEST_CASE("vacuum-analysis: emitted tables and threshold bracket for g~ = 1") {
    ExperimentConfig c;
    c.experiment = "vacuum-analysis";
    c.params.g0 = 1.0;
    c.params.epsilon = 0.3;
    c.hilbert = {5, 56};
    c.t_final = M_PI;
    c.grid = {-4.0, 3.0, -3.0, 3.0, 41, 41};
    c.grid_set = true;
    c.k_max = 48;
    c.m_max = 48;
    c.eps_scan_count = 11;
    c.eps_scan_max = 0.5;
    c.workers = 2;
    c.out_prefix = (sandbox() / "vac").string();
    run_experiment(c);

    const auto curve = read_csv(c.out_prefix + "_threshold_curve.csv");
    const auto& eps = curve.at("eps_tilde");
    REQUIRE(eps.size() == 11);
    // eps~ = 0 row: pure vacuum Gaussian, maximum at the origin, W(-g~) > 0
    CHECK(std::stod(curve.at("w_analytic")[0]) > 0.0);
    CHECK(std::stod(curve.at("w_numeric")[0]) > 0.0);

    const std::string meta = slurp(c.out_prefix + "_meta.txt");
    CHECK(meta.find("crossing_within_factor2 = 1") != std::string::npos);

    // analytic and numeric grids exist and match loosely at the origin
    const auto wa = read_csv(c.out_prefix + "_analytic_w.csv");
    const auto wn = read_csv(c.out_prefix + "_numeric_w.csv");
    REQUIRE(wa.at("w").size() == wn.at("w").size());
}

TEST_CASE("eta-dissipation-scan: kappa = 0 column consistent, loss reduces eta") {
    ExperimentConfig c;
    c.experiment = "eta-dissipation-scan";
    c.params.g0 = 1.0;
    c.params.epsilon = 0.3;
    c.alpha = 1.0;
    c.hilbert = {5, 44};
    c.t_final = M_PI;
    c.tolerance = 1e-6;
    c.grid = {-7.0, 3.5, -5.0, 5.0, 181, 161};
    c.grid_set = true;
    c.sweeps = {{"kappa", 0.0, 0.3, 2}};
    c.workers = 2;
    c.out_prefix = (sandbox() / "diss").string();
    run_experiment(c);

    const auto cols = read_csv(c.out_prefix + "_eta.csv");
    REQUIRE(cols.at("eta").size() == 2);
    const double eta0 = std::stod(cols.at("eta")[0]);
    const double eta3 = std::stod(cols.at("eta")[1]);
    CHECK(eta0 > eta3);

    // the kappa = 0 column equals a dissipationless run of the same config
    ExperimentConfig cc = c;
    cc.experiment = "eta-scan";
    cc.sweeps = {{"kappa", 0.0, 0.0, 1}};
    cc.out_prefix = (sandbox() / "diss_closed").string();
    run_experiment(cc);
    const auto closed = read_csv(cc.out_prefix + "_eta.csv");
    CHECK(std::abs(eta0 - std::stod(closed.at("eta")[0])) < 0.01);
}

TEST_CASE("sweeps: serial and parallel execution give byte-identical tables") {
    ExperimentConfig c;
    c.experiment = "eta-scan";
    c.params.g0 = 0.8;
    c.params.epsilon = 0.3;
    c.alpha = 0.7;
    c.hilbert = {5, 40};
    c.t_final = M_PI;
    c.grid = {-5.0, 3.5, -4.0, 4.0, 121, 121};
    c.grid_set = true;
    c.sweeps = {{"delta", -1.0, 1.0, 4}};

    c.workers = 1;
    c.out_prefix = (sandbox() / "ser").string();
    run_experiment(c);
    c.workers = 2;
    c.out_prefix = (sandbox() / "par").string();
    run_experiment(c);
    CHECK(slurp((sandbox() / "ser_eta.csv").string()) ==
          slurp((sandbox() / "par_eta.csv").string()));

    // the sidecar reproduces the full resolved configuration
    const std::string meta = slurp((sandbox() / "par_meta.txt").string());
    for (const char* key : {"experiment = eta-scan", "g0 = 0.8", "nm = 40", "grid_nx = 121",
                            "sweep1_param = delta", "workers = 2", "tolerance = 0"})
        CHECK(meta.find(key) != std::string::npos);
}

TEST_CASE("wigner-movie: perturbative frames track the numeric ones on the inner lobes") {
    // run at the reference working point; the first-order frames track
    // the exact ones on the n = 0, 1 lobes to 0.13 of max|W| at t = pi/2
    // and 0.18 at t = pi (measured; bounds carry a small margin)
    ExperimentConfig c;
    c.experiment = "wigner-movie";
    c.params.g0 = 1.8;
    c.params.epsilon = 0.3;
    c.alpha = 1.0;
    c.hilbert = {8, 400};
    c.t_final = M_PI;
    c.time_samples = 3;
    c.grid = {-9.0, 3.5, -5.5, 5.5, 126, 111};
    c.grid_set = true;
    c.workers = 2;
    c.backend = "numeric-schrodinger";
    c.out_prefix = (sandbox() / "lobes_num").string();
    run_experiment(c);
    c.backend = "analytic-perturbative";
    c.quadrature_steps = 1024;
    c.out_prefix = (sandbox() / "lobes_an").string();
    run_experiment(c);

    const double bounds[3] = {0.0, 0.18, 0.24};
    for (int k = 1; k < 3; ++k) {
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_frame%03d.csv", k);
        const auto num = read_csv((sandbox() / "lobes_num").string() + suffix);
        const auto an = read_csv((sandbox() / "lobes_an").string() + suffix);
        const double t = c.t_final * k / 2.0;
        const Cplx c1 = -1.8 * (1.0 - std::exp(Cplx{0, -t}));
        double max_abs = 0.0, max_diff = 0.0;
        for (std::size_t r = 0; r < num.at("w").size(); ++r) {
            const Cplx xi{std::stod(num.at("x")[r]), std::stod(num.at("p")[r])};
            const double wn = std::stod(num.at("w")[r]);
            max_abs = std::max(max_abs, std::abs(wn));
            if (std::abs(xi) > 2.0 && std::abs(xi - c1) > 2.0) continue;
            max_diff = std::max(max_diff, std::abs(wn - std::stod(an.at("w")[r])));
        }
        CHECK(max_diff < bounds[k] * max_abs);
    }
}

TEST_CASE("wigner-movie: Lindblad backend damps the cavity and stays normalized") {
    ExperimentConfig c;
    c.experiment = "wigner-movie";
    c.backend = "numeric-lindblad";
    c.params.g0 = 0.8;
    c.params.epsilon = 0.2;
    c.params.kappa = 0.3;
    c.alpha = 1.0;
    c.hilbert = {4, 28};
    c.t_final = M_PI;
    c.time_samples = 3;
    c.tolerance = 1e-6;
    c.grid = {-5.0, 4.0, -4.5, 4.5, 121, 121};
    c.grid_set = true;
    c.workers = 2;
    c.out_prefix = (sandbox() / "movie_lb").string();
    run_experiment(c);
    const std::string meta = slurp(c.out_prefix + "_meta.txt");
    CHECK(meta.find("backend = numeric-lindblad") != std::string::npos);
    for (int k = 0; k < 3; ++k) {
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_frame%03d.csv", k);
        const auto cols = read_csv(c.out_prefix + suffix);
        double integ = 0.0;
        for (const auto& v : cols.at("w")) integ += std::stod(v);
        integ *= (9.0 / 120.0) * (9.0 / 120.0);
        CHECK(integ == doctest::Approx(1.0).epsilon(0.02));
    }
}
