#pragma once

#include <vector>

#include "omsim/types.hpp"

namespace omsim {

/// Truncated annihilation operator: M[k-1,k] = sqrt(k).
SpMat destroy(int dim);
SpMat create(int dim);
SpMat number_op(int dim);
SpMat identity_sp(int dim);

/// Coherent-state amplitudes a_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!),
/// renormalized after truncation. If truncation_loss is non-null it
/// receives 1 - sum |a_n|^2 (the weight lost to the cutoff).
Vec coherent_vector(int dim, Cplx alpha, double* truncation_loss = nullptr);

/// Unitary displacement exp(beta b^dag - conj(beta) b) on the truncated
/// space. Dense matrix exponential up to dim 512, analytic matrix
/// elements (ladder recurrence on <k|D|m>) above. Warns when
/// |beta|^2 > dim/4, where truncation makes the result unreliable.
Mat displacement_op(int dim, Cplx beta);

/// <xi,k|zeta,m> for displaced Fock states |xi,k> = D(xi)|k>, via the
/// generalized-Laguerre closed form. Exact for any k,m >= 0.
Cplx displaced_fock_overlap(Cplx xi, int k, Cplx zeta, int m);

/// Kronecker product, cavity factor leftmost (composite index n*N_m + m).
Mat tensor(const Mat& a, const Mat& b);
SpMat tensor(const SpMat& a, const SpMat& b);

/// Trace out the cavity: (rho_b)[p,p'] = sum_n rho[(n,p),(n,p')].
Mat partial_trace_cavity(const Mat& rho, const HilbertConfig& config);

enum class Mode { cavity, mech };

/// <[a,a^dag]> or <[b,b^dag]> on the truncated space. Equals
/// 1 - dim * P(top level); deviation from 1 measures truncation error.
double commutator_expectation(const Vec& psi, Mode mode, const HilbertConfig& config);
double commutator_expectation(const Mat& rho, Mode mode, const HilbertConfig& config);

/// Mechanical components psi_n (unnormalized) of a composite state:
/// psi = sum_n |n>_a (x) psi_n.
std::vector<Vec> mech_components(const Vec& psi, const HilbertConfig& config);

}  // namespace omsim
