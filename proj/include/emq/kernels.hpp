// kernels.hpp - dense hot loops of the open-system engine
//
// Each kernel has a serial reference that follows the textbook definition
// term by term, and an OpenMP version that the engine calls. The reference
// is kept for tests and the benchmark; both must agree to round-off.

#pragma once

#include "emq/fockspace.hpp"

#include <span>
#include <vector>

namespace emq::kernels {

/// Precomputed generator for drho/dt = K rho + rho K^dag + sum_k J_k rho J_k^dag,
/// with K = -iH - sum rate x^dag x and J = sqrt(2 rate) x.
struct RhsPlan {
    Matrix effective;
    Matrix effective_adjoint;
    std::vector<Matrix> jumps;
    std::vector<Matrix> jumps_adjoint;
};

RhsPlan make_plan(const Matrix& hamiltonian, std::span<const Matrix> ops, std::span<const double> rates);

/// -i[H, rho] + sum rate (2 x rho x^dag - x^dag x rho - rho x^dag x), evaluated literally.
Matrix lindblad_rhs_serial(const Matrix& hamiltonian, std::span<const Matrix> ops, std::span<const double> rates,
                           const Matrix& rho);

/// Same generator from a plan; column blocks are distributed over OpenMP threads.
void lindblad_rhs_parallel(const RhsPlan& plan, const Matrix& rho, Matrix& out);

/// Column-major vectorized superoperator, vec(A X B) = (B^T kron A) vec(X).
Matrix liouvillian_serial(const Matrix& hamiltonian, std::span<const Matrix> ops, std::span<const double> rates);

/// Same superoperator assembled block column by block column in parallel.
Matrix liouvillian_parallel(const Matrix& hamiltonian, std::span<const Matrix> ops, std::span<const double> rates);

/// Number of OpenMP threads the kernels will use.
int max_threads();
void set_threads(int n);

}  // namespace emq::kernels
