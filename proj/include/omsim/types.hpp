#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace omsim {

using Cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RealMat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<Cplx>;
using SpMatRM = Eigen::SparseMatrix<Cplx, Eigen::RowMajor>;

inline constexpr Cplx I{0.0, 1.0};

/// Truncated two-mode Hilbert space: cavity Fock levels 0..n_cavity-1,
/// mechanical levels 0..n_mech-1. Composite index is cavity-major,
/// i = n*n_mech + m, so a cavity block is a contiguous slice.
struct HilbertConfig {
    int n_cavity = 1;
    int n_mech = 1;

    int dim() const { return n_cavity * n_mech; }
    int index(int n, int m) const { return n * n_mech + m; }

    void validate() const {
        if (n_cavity < 1 || n_mech < 1)
            throw std::invalid_argument("HilbertConfig: dimensions must be >= 1");
    }
    bool operator==(const HilbertConfig&) const = default;
};

/// Complex amplitudes over the composite (or single-mode) basis.
struct StateVector {
    HilbertConfig config;
    Vec amplitudes;

    double norm() const { return amplitudes.norm(); }
    void check_dim() const {
        if (amplitudes.size() != config.dim())
            throw std::invalid_argument("StateVector: amplitude size does not match config");
    }
};

struct DensityMatrix {
    HilbertConfig config;
    Mat rho;

    double trace_real() const { return rho.trace().real(); }
    double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    void check_dim() const {
        if (rho.rows() != config.dim() || rho.cols() != config.dim())
            throw std::invalid_argument("DensityMatrix: size does not match config");
    }
};

// Error categories used by the propagators and quadrature routines.
struct ToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MemoryBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-fatal diagnostics (truncation warnings etc). Default handler writes
/// to stderr; tests may install their own to observe warnings.
void warn(const std::string& msg);
void set_warning_handler(std::function<void(const std::string&)> handler);

inline bool is_hermitian(const Mat& m, double tol) {
    return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace omsim
