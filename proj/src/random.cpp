#include "emq/random.hpp"

namespace emq {

namespace {

Matrix gaussian(Index rows, Index cols, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            m(i, j) = Complex(re, im);
        }
    }
    return m;
}

}  // namespace

StateVector haar_state(const SpaceLayout& layout, Rng& rng)
{
    Vector v = gaussian(layout.total_dim(), 1, rng).col(0);
    return StateVector::normalized(layout, std::move(v));
}

DensityMatrix random_density(const SpaceLayout& layout, Rng& rng)
{
    const Index n = layout.total_dim();
    const Matrix g = gaussian(n, n, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(layout, std::move(rho));
}

FockOperator random_hermitian(const SpaceLayout& layout, Rng& rng, double scale)
{
    const Index n = layout.total_dim();
    const Matrix g = gaussian(n, n, rng);
    Matrix h = 0.5 * scale * (g + g.adjoint());
    return FockOperator::hermitian(layout, std::move(h));
}

FockOperator random_operator(const SpaceLayout& layout, Rng& rng, double scale)
{
    const Index n = layout.total_dim();
    return FockOperator(layout, scale * gaussian(n, n, rng));
}

}  // namespace emq
