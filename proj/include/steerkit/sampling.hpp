#pragma once

#include "steerkit/numcore.hpp"
#include "steerkit/random.hpp"

namespace steerkit {

// Haar-random pure state (normalized complex Gaussian vector).
ComplexVector random_pure_vector(Index d, CounterRng& rng);
// Hermitian with i.i.d. complex Gaussian entries (GUE-like scale 1).
HermitianOperator random_hermitian(Index d, CounterRng& rng);
// Random mixed state of the given rank, G G^dagger / tr, G Gaussian d x rank.
DensityMatrix random_density(Index d, Index rank, CounterRng& rng);
// Uniform point of the probability simplex.
RealVector random_simplex(Index d, CounterRng& rng);
// Haar-random unitary.
ComplexMatrix random_unitary(Index d, CounterRng& rng);
// Uniform unit vector in R^n.
RealVector random_direction(Index n, CounterRng& rng);

}  // namespace steerkit
