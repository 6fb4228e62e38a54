#include "emq/kernels.hpp"

#include "emq/error.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <omp.h>

namespace emq::kernels {

namespace {

void check_inputs(const Matrix& h, std::span<const Matrix> ops, std::span<const double> rates)
{
    if (ops.size() != rates.size()) throw InvalidArgument("kernels: operator/rate count mismatch");
    for (const auto& x : ops) {
        if (x.rows() != h.rows() || x.cols() != h.cols()) {
            throw InvalidArgument("kernels: jump operator dimension mismatch");
        }
    }
}

}  // namespace

int max_threads()
{
    return omp_get_max_threads();
}

void set_threads(int n)
{
    omp_set_num_threads(std::max(1, n));
}

RhsPlan make_plan(const Matrix& hamiltonian, std::span<const Matrix> ops, std::span<const double> rates)
{
    check_inputs(hamiltonian, ops, rates);
    const Complex i(0.0, 1.0);
    RhsPlan plan;
    plan.effective = -i * hamiltonian;
    for (std::size_t k = 0; k < ops.size(); ++k) {
        if (rates[k] == 0.0) continue;
        plan.effective -= rates[k] * (ops[k].adjoint() * ops[k]);
        plan.jumps.push_back(std::sqrt(2.0 * rates[k]) * ops[k]);
        plan.jumps_adjoint.push_back(plan.jumps.back().adjoint());
    }
    plan.effective_adjoint = plan.effective.adjoint();
    return plan;
}

Matrix lindblad_rhs_serial(const Matrix& hamiltonian, std::span<const Matrix> ops, std::span<const double> rates,
                           const Matrix& rho)
{
    check_inputs(hamiltonian, ops, rates);
    const Complex i(0.0, 1.0);
    Matrix out = -i * (hamiltonian * rho - rho * hamiltonian);
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const Matrix& x = ops[k];
        const Matrix xdx = x.adjoint() * x;
        out += rates[k] * (2.0 * x * rho * x.adjoint() - xdx * rho - rho * xdx);
    }
    return out;
}

void lindblad_rhs_parallel(const RhsPlan& plan, const Matrix& rho, Matrix& out)
{
    const Index n = rho.rows();
    out.resize(n, n);
    const int threads = std::max(1, std::min<int>(omp_get_max_threads(), static_cast<int>(n / 8)));
    const Index width = (n + threads - 1) / threads;

#pragma omp parallel for num_threads(threads) schedule(static)
    for (int b = 0; b < threads; ++b) {
        const Index c0 = b * width;
        const Index w = std::min(width, n - c0);
        if (w <= 0) continue;
        auto block = out.middleCols(c0, w);
        block.noalias() = plan.effective * rho.middleCols(c0, w);
        block.noalias() += rho * plan.effective_adjoint.middleCols(c0, w);
        for (std::size_t k = 0; k < plan.jumps.size(); ++k) {
            const Matrix tmp = rho * plan.jumps_adjoint[k].middleCols(c0, w);
            block.noalias() += plan.jumps[k] * tmp;
        }
    }
}

Matrix liouvillian_serial(const Matrix& hamiltonian, std::span<const Matrix> ops, std::span<const double> rates)
{
    check_inputs(hamiltonian, ops, rates);
    const Index n = hamiltonian.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Complex i(0.0, 1.0);
    Matrix l = -i * (Matrix(Eigen::kroneckerProduct(id, hamiltonian)) -
                     Matrix(Eigen::kroneckerProduct(hamiltonian.transpose(), id)));
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const Matrix& x = ops[k];
        const Matrix xdx = x.adjoint() * x;
        l += rates[k] * (2.0 * Matrix(Eigen::kroneckerProduct(x.conjugate(), x)) -
                         Matrix(Eigen::kroneckerProduct(id, xdx)) -
                         Matrix(Eigen::kroneckerProduct(xdx.transpose(), id)));
    }
    return l;
}

Matrix liouvillian_parallel(const Matrix& hamiltonian, std::span<const Matrix> ops, std::span<const double> rates)
{
    const RhsPlan plan = make_plan(hamiltonian, ops, rates);
    const Index n = hamiltonian.rows();
    Matrix l = Matrix::Zero(n * n, n * n);
    const Matrix& k_eff = plan.effective;
    const Matrix k_eff_t = plan.effective_adjoint.transpose();  // conj(K)
    std::vector<Matrix> jumps_conj;
    for (const auto& j : plan.jumps) jumps_conj.push_back(j.conjugate());

    // Block (p, q) of size n x n multiplies column block q of vec(rho):
    // I kron K contributes K on the diagonal, conj(K) kron I contributes
    // conj(K)(p, q) I, and conj(J) kron J contributes conj(J)(p, q) J.
#pragma omp parallel for schedule(dynamic)
    for (Index q = 0; q < n; ++q) {
        for (Index p = 0; p < n; ++p) {
            auto block = l.block(p * n, q * n, n, n);
            if (p == q) block += k_eff;
            block.diagonal().array() += k_eff_t(p, q);
            for (std::size_t j = 0; j < plan.jumps.size(); ++j) {
                const Complex c = jumps_conj[j](p, q);
                if (c != Complex(0.0, 0.0)) block += c * plan.jumps[j];
            }
        }
    }
    return l;
}

}  // namespace emq::kernels
