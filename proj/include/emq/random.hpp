// random.hpp - seeded random states and operators for sweeps and property checks

#pragma once

#include "emq/fockspace.hpp"

#include <random>

namespace emq {

using Rng = std::mt19937_64;

/// Haar-distributed pure state (normalized complex Gaussian vector).
StateVector haar_state(const SpaceLayout& layout, Rng& rng);

/// Random full-rank density matrix G G^dag / tr(G G^dag) with Gaussian G.
DensityMatrix random_density(const SpaceLayout& layout, Rng& rng);

/// Hermitian matrix with Gaussian entries scaled by `scale`.
FockOperator random_hermitian(const SpaceLayout& layout, Rng& rng, double scale = 1.0);

/// Complex Gaussian matrix (no symmetry).
FockOperator random_operator(const SpaceLayout& layout, Rng& rng, double scale = 1.0);

}  // namespace emq
