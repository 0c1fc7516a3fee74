#include "steerkit/sampling.hpp"

#include <cmath>
#include <random>

#include <Eigen/QR>

namespace steerkit {

namespace {

ComplexMatrix gaussian(Index r, Index c, CounterRng& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix m(r, c);
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < r; ++i) {
            double re = g(rng);
            double im = g(rng);
            m(i, j) = cplx(re, im);
        }
    return m;
}

}  // namespace

ComplexVector random_pure_vector(Index d, CounterRng& rng) {
    ComplexVector v = gaussian(d, 1, rng).col(0);
    return v / v.norm();
}

HermitianOperator random_hermitian(Index d, CounterRng& rng) {
    ComplexMatrix g = gaussian(d, d, rng);
    return HermitianOperator((g + g.adjoint()) / 2.0);
}

DensityMatrix random_density(Index d, Index rank, CounterRng& rng) {
    ComplexMatrix g = gaussian(d, rank, rng);
    ComplexMatrix m = g * g.adjoint();
    m = (m + m.adjoint()) / 2.0;
    return DensityMatrix(m / m.trace().real());
}

RealVector random_simplex(Index d, CounterRng& rng) {
    std::exponential_distribution<double> e(1.0);
    RealVector p(d);
    for (Index i = 0; i < d; ++i) p(i) = e(rng);
    return p / p.sum();
}

ComplexMatrix random_unitary(Index d, CounterRng& rng) {
    Eigen::HouseholderQR<ComplexMatrix> qr(gaussian(d, d, rng));
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR();
    // Fix column phases so the distribution is Haar.
    for (Index j = 0; j < d; ++j) {
        double a = std::abs(r(j, j));
        if (a > 0.0) q.col(j) *= r(j, j) / a;
    }
    return q;
}

RealVector random_direction(Index n, CounterRng& rng) {
    std::normal_distribution<double> g;
    RealVector v(n);
    do {
        for (Index i = 0; i < n; ++i) v(i) = g(rng);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

}  // namespace steerkit
