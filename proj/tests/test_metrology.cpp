#include <gtest/gtest.h>

#include <cmath>

#include "steerkit/errors.hpp"
#include "steerkit/metrology.hpp"
#include "steerkit/sampling.hpp"
#include "steerkit/states.hpp"

#include "test_support.hpp"

using namespace steerkit;
using steerkit::testing::rel_err;

namespace {

PureState plus_state() { return PureState::normalized(ComplexVector::Ones(2)); }

// Eigenbasis of the symmetric logarithmic derivative of a pure state,
// 2(|d><psi| + |psi><d|) with |d> = -i (H - <H>)|psi>.
POVM sld_basis(const PureState& psi, const HermitianOperator& h) {
    const ComplexVector& v = psi.amplitudes();
    double mean = v.dot(h.matrix() * v).real();
    ComplexVector d = cplx(0.0, -1.0) * (h.matrix() * v - mean * v);
    ComplexMatrix l = 2.0 * (d * v.adjoint() + v * d.adjoint());
    return POVM::eigenbasis(HermitianOperator(l));
}

POVM random_povm(Index d, int n_effects, CounterRng& rng) {
    std::vector<ComplexMatrix> raw;
    ComplexMatrix s = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < n_effects; ++i) {
        raw.push_back(random_density(d, i == 0 ? d : 1 + i % d, rng).matrix());  // S stays invertible
        s += raw.back();
    }
    // E_i = S^{-1/2} A_i S^{-1/2}
    Spectrum sp = hermitian_eig(HermitianOperator(s));
    ComplexVector inv_sqrt = sp.eigenvalues.cwiseSqrt().cwiseInverse().cast<cplx>();
    ComplexMatrix w = sp.eigenvectors * inv_sqrt.asDiagonal() * sp.eigenvectors.adjoint();
    std::vector<HermitianOperator> effects;
    for (const auto& a : raw) effects.emplace_back(w * a * w);
    return POVM(effects, {});
}

}  // namespace

TEST(Povm, Validation) {
    ComplexMatrix half = identity(2) / 2.0;
    EXPECT_NO_THROW(POVM({HermitianOperator(half), HermitianOperator(half)}, {"a", "b"}));
    EXPECT_THROW(POVM({HermitianOperator(half)}, {}), ValidationError);
    ComplexMatrix neg = identity(2) * 1.5;
    EXPECT_THROW(POVM({HermitianOperator(neg), HermitianOperator(identity(2) - neg)}, {}), ValidationError);
    EXPECT_THROW(POVM({HermitianOperator(half), HermitianOperator(half)}, {"only"}), ValidationError);

    ComplexMatrix u = identity(2);
    u(0, 1) = 0.1;
    EXPECT_THROW(POVM::from_basis(u), ValidationError);
}

TEST(Povm, BasisEffectsAreProjectors) {
    CounterRng rng(4);
    ComplexMatrix u = random_unitary(4, rng);
    POVM p = POVM::from_basis(u, {"a", "b", "c", "d"});
    ASSERT_EQ(p.size(), 4u);
    ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const ComplexMatrix& e = p.effects()[i].matrix();
        EXPECT_LT(max_abs(e * e - e), 1e-12);
        sum += e;
    }
    EXPECT_LT(max_abs(sum - identity(4)), 1e-12);
}

TEST(Variance, Examples) {
    HermitianOperator z(pauli_z());
    EXPECT_NEAR(variance(PureState::basis(2, 0), z), 0.0, 1e-15);
    EXPECT_NEAR(variance(plus_state(), z), 1.0, 1e-15);
    EXPECT_NEAR(variance(DensityMatrix::from_pure(plus_state()), z), 1.0, 1e-15);
    for (int n : {4, 8, 30}) {
        DensityMatrix rb = split_dicke_fixed(n / 2, n / 2, n / 2).reduced_b();
        EXPECT_LT(rel_err(variance(rb, spin_ops(n / 2).Jz), n * (4.0 + n) / 48.0), 1e-12);
    }
    EXPECT_THROW(variance(DensityMatrix::maximally_mixed(3), z), ValidationError);
}

TEST(Qfi, PureStateIsFourVariance) {
    CounterRng rng(2);
    for (Index d : {2, 3, 6}) {
        PureState psi(random_pure_vector(d, rng));
        HermitianOperator h = random_hermitian(d, rng);
        EXPECT_LT(rel_err(qfi(DensityMatrix::from_pure(psi), h), 4.0 * variance(psi, h)), 1e-10);
    }
}

TEST(Qfi, CommutingStateGivesZero) {
    RealVector p(3), e(3);
    p << 0.5, 0.3, 0.2;
    e << 1.0, -2.0, 0.5;
    DensityMatrix rho(ComplexMatrix(p.cast<cplx>().asDiagonal()));
    EXPECT_NEAR(qfi(rho, HermitianOperator::diagonal(e)), 0.0, 1e-15);
}

TEST(Qfi, WhiteNoiseQubit) {
    DensityMatrix rho = mix(DensityMatrix::from_pure(plus_state()), DensityMatrix::maximally_mixed(2), 0.5);
    EXPECT_NEAR(qfi(rho, HermitianOperator(pauli_z())), 1.0, 1e-12);
    EXPECT_NEAR(qfi_white_noise(plus_state(), HermitianOperator(pauli_z()), 0.5), 1.0, 1e-12);
}

TEST(Qfi, WhiteNoiseClosedFormMatchesDense) {
    CounterRng rng(17);
    for (Index d = 2; d <= 8; ++d) {
        for (int t = 0; t < 5; ++t) {
            PureState psi(random_pure_vector(d, rng));
            HermitianOperator h = random_hermitian(d, rng);
            const double p = rng.uniform();
            DensityMatrix rho = mix(DensityMatrix::from_pure(psi), DensityMatrix::maximally_mixed(d), p);
            EXPECT_LT(rel_err(qfi_white_noise(psi, h, p), qfi(rho, h)), 1e-8) << d << " " << p;
        }
        PureState psi(random_pure_vector(d, rng));
        HermitianOperator h = random_hermitian(d, rng);
        EXPECT_NEAR(qfi_white_noise(psi, h, 0.0), 0.0, 1e-15);
        EXPECT_LT(rel_err(qfi_white_noise(psi, h, 1.0), 4.0 * variance(psi, h)), 1e-14);
    }
}

TEST(Qfi, ConvexAndVarianceConcave) {
    CounterRng rng(31);
    for (int t = 0; t < 40; ++t) {
        const Index d = 2 + t % 5;
        DensityMatrix r1 = random_density(d, 1 + t % d, rng), r2 = random_density(d, d, rng);
        HermitianOperator h = random_hermitian(d, rng);
        const double f1 = qfi(r1, h), f2 = qfi(r2, h), v1 = variance(r1, h), v2 = variance(r2, h);
        for (double s = 0.0; s <= 1.0; s += 0.125) {
            DensityMatrix m = mix(r1, r2, s);
            EXPECT_LE(qfi(m, h), s * f1 + (1 - s) * f2 + 1e-9);
            EXPECT_GE(variance(m, h), s * v1 + (1 - s) * v2 - 1e-9);
        }
    }
}

TEST(Qfi, BoundedByFourVarianceAndUnitarilyInvariant) {
    CounterRng rng(5);
    for (int t = 0; t < 60; ++t) {
        const Index d = 2 + t % 6;
        DensityMatrix rho = random_density(d, 1 + t % d, rng);
        HermitianOperator h = random_hermitian(d, rng);
        const double f = qfi(rho, h);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 4.0 * variance(rho, h) + 1e-9);

        ComplexMatrix u = random_unitary(d, rng);
        DensityMatrix rr(u * rho.matrix() * u.adjoint());
        HermitianOperator hh(u * h.matrix() * u.adjoint());
        EXPECT_LT(rel_err(qfi(rr, hh), f), 1e-9);
    }
}

TEST(Cfi, EigenbasisOfCommutingStateGivesZero) {
    RealVector p(2);
    p << 0.7, 0.3;
    DensityMatrix rho(ComplexMatrix(p.cast<cplx>().asDiagonal()));
    POVM z = POVM::from_basis(identity(2));
    EXPECT_NEAR(cfi(z, rho, HermitianOperator(pauli_z())), 0.0, 1e-15);
}

TEST(Cfi, OptimalBasisReachesQfiForPureQubits) {
    CounterRng rng(9);
    for (int t = 0; t < 50; ++t) {
        PureState psi(random_pure_vector(2, rng));
        HermitianOperator h = random_hermitian(2, rng);
        DensityMatrix rho = DensityMatrix::from_pure(psi);
        POVM best = sld_basis(psi, h);
        const double f = qfi(rho, h);
        EXPECT_LT(rel_err(cfi(best, rho, h), f), 1e-6);
        EXPECT_LT(rel_err(cfi(best, LocalState(psi), h), f), 1e-6);
        // A sweep over projective bases never exceeds the QFI.
        for (double th = 0.05; th < M_PI; th += 0.3)
            for (double ph = 0.0; ph < 2 * M_PI; ph += 0.4) {
                ComplexMatrix u(2, 2);
                u << std::cos(th / 2), -std::polar(std::sin(th / 2), -ph), std::polar(std::sin(th / 2), ph), std::cos(th / 2);
                POVM b = POVM::from_basis(u);
                try {
                    EXPECT_LE(cfi(b, rho, h), f + 1e-9);
                } catch (const NumericError&) {
                    // A basis vector orthogonal to psi with nonzero slope; skipped.
                }
            }
    }
}

TEST(Cfi, NeverExceedsQfi) {
    CounterRng rng(12);
    for (Index d : {2, 3, 4}) {
        for (int t = 0; t < 100; ++t) {
            DensityMatrix rho = random_density(d, d, rng);
            HermitianOperator h = random_hermitian(d, rng);
            POVM povm = random_povm(d, 2 + t % 5, rng);
            EXPECT_LE(cfi(povm, rho, h), qfi(rho, h) + 1e-9);
        }
    }
}

TEST(Cfi, SingularOutcomeIsNumericError) {
    DensityMatrix rho = DensityMatrix::from_pure(PureState::basis(2, 0));
    POVM z = POVM::from_basis(identity(2));
    EXPECT_NEAR(cfi(z, rho, HermitianOperator(pauli_x())), 0.0, 1e-15);

    // Outcome |1> has probability 1e-16, below the cutoff, while its slope 2e-8 is not.
    const double eps = 1e-8;
    ComplexVector v(2);
    v << std::cos(eps), std::sin(eps);
    EXPECT_THROW(cfi(z, LocalState(PureState(v)), HermitianOperator(pauli_y())), NumericError);
    EXPECT_THROW(cfi(z, DensityMatrix::from_pure(PureState(v)), HermitianOperator(pauli_y())), NumericError);
}

TEST(CommutatorBound, Examples) {
    DensityMatrix zero = DensityMatrix::from_pure(PureState::basis(2, 0));
    HermitianOperator x(pauli_x()), y(pauli_y());
    EXPECT_NEAR(qfi_commutator_bound(zero, x, x), 0.0, 1e-15);
    EXPECT_NEAR(qfi_commutator_bound(zero, x, y), 4.0, 1e-12);
    EXPECT_NEAR(qfi(zero, x), 4.0, 1e-12);

    for (double alpha : {0.5, 1.0, 1.5}) {
        const int c = default_fock_cutoff(alpha);
        FockSpace f = fock_space(c);
        DensityMatrix rho = DensityMatrix::from_pure(coherent_state(alpha, c));
        const double bound = qfi_commutator_bound(rho, f.x, f.p);
        EXPECT_LT(rel_err(bound, qfi(rho, f.x)), 1e-2) << alpha;
    }

    EXPECT_THROW(qfi_commutator_bound(zero, x, HermitianOperator(pauli_z())), ValidationError);
}

TEST(CommutatorBound, NeverExceedsQfi) {
    CounterRng rng(44);
    for (int t = 0; t < 100; ++t) {
        const Index d = 2 + t % 4;
        DensityMatrix rho = random_density(d, 1 + t % d, rng);
        HermitianOperator h = random_hermitian(d, rng), m = random_hermitian(d, rng);
        EXPECT_LE(qfi_commutator_bound(rho, h, m), qfi(rho, h) + 1e-9);
    }
}

TEST(VarQfiGap, Examples) {
    GapResult pure = var_qfi_gap(DensityMatrix::from_pure(plus_state()), HermitianOperator(pauli_z()));
    EXPECT_NEAR(pure.gap, 0.0, 1e-14);
    EXPECT_TRUE(pure.saturated);

    GapResult mixed = var_qfi_gap(DensityMatrix::maximally_mixed(2), HermitianOperator(pauli_z()));
    EXPECT_NEAR(mixed.gap, 1.0, 1e-14);
    EXPECT_FALSE(mixed.saturated);

    RealVector p(3);
    p << 0.5, 0.5, 0.0;
    DensityMatrix rho(ComplexMatrix(p.cast<cplx>().asDiagonal()));
    ComplexMatrix h = ComplexMatrix::Zero(3, 3);
    h(0, 0) = h(1, 1) = 0.7;
    h(2, 2) = -3.0;
    h(0, 2) = cplx(0.4, 0.2);
    h(2, 0) = std::conj(h(0, 2));
    GapResult g = var_qfi_gap(rho, HermitianOperator(h));
    EXPECT_TRUE(g.saturated);
    EXPECT_NEAR(g.gap, 0.0, 1e-14);
    EXPECT_NEAR(variance(rho, HermitianOperator(h)), qfi(rho, HermitianOperator(h)) / 4.0, 1e-14);
}

TEST(VarQfiGap, MatchesDifferenceAndSaturationCondition) {
    CounterRng rng(6);
    for (int t = 0; t < 60; ++t) {
        const Index d = 2 + t % 5;
        DensityMatrix rho = random_density(d, 1 + t % d, rng);
        HermitianOperator h = random_hermitian(d, rng);
        GapResult g = var_qfi_gap(rho, h);
        EXPECT_GE(g.gap, -1e-12);
        EXPECT_NEAR(g.gap, variance(rho, h) - qfi(rho, h) / 4.0, 1e-9);
        EXPECT_EQ(g.saturated, g.gap < 1e-9) << "rank " << 1 + t % d;
    }
}

TEST(DirectSum, MatchesDenseBlockDiagonal) {
    CounterRng rng(13);
    std::vector<WeightedBlock> blocks;
    std::vector<HermitianOperator> hs;
    RealVector w = random_simplex(3, rng);
    const Index dims[] = {1, 3, 2};
    Index total = 0;
    for (int b = 0; b < 3; ++b) {
        blocks.push_back({w(b), random_density(dims[b], dims[b], rng)});
        hs.push_back(random_hermitian(dims[b], rng));
        total += dims[b];
    }
    ComplexMatrix rho = ComplexMatrix::Zero(total, total), h = rho;
    Index off = 0;
    for (int b = 0; b < 3; ++b) {
        rho.block(off, off, dims[b], dims[b]) = w(b) * blocks[b].state.matrix();
        h.block(off, off, dims[b], dims[b]) = hs[b].matrix();
        off += dims[b];
    }
    DensityMatrix dense(rho);
    EXPECT_NEAR(variance_direct_sum(blocks, hs), variance(dense, HermitianOperator(h)), 1e-12);
    EXPECT_NEAR(qfi_direct_sum(blocks, hs), qfi(dense, HermitianOperator(h)), 1e-10);
}
