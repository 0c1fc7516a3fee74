#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "steerkit/errors.hpp"
#include "steerkit/puresteer.hpp"
#include "steerkit/sampling.hpp"
#include "steerkit/states.hpp"

#include "test_support.hpp"

using namespace steerkit;
using steerkit::testing::random_bipartite;
using steerkit::testing::rel_err;

namespace {

double delta_of(const DensityMatrix& rb, const HermitianOperator& h) { return variance(rb, h) - qfi(rb, h) / 4.0; }

BipartitePureState with_schmidt(const RealVector& p, CounterRng& rng) {
    const Index d = p.size();
    ComplexMatrix ua = random_unitary(d, rng), ub = random_unitary(d, rng);
    ComplexVector v = ComplexVector::Zero(d * d);
    for (Index i = 0; i < d; ++i) v += std::sqrt(p(i)) * tensor(ComplexVector(ua.col(i)), ComplexVector(ub.col(i)));
    return BipartitePureState(d, d, PureState::normalized(v));
}

RealVector vec(std::initializer_list<double> xs) {
    RealVector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace

TEST(Schmidt, Examples) {
    CounterRng rng(1);
    SchmidtDecomposition prod = schmidt(product_state(PureState(random_pure_vector(3, rng)), PureState(random_pure_vector(2, rng))));
    EXPECT_NEAR(prod.coefficients(0), 1.0, 1e-12);
    EXPECT_EQ(prod.rank(1e-12), 1);

    SchmidtDecomposition bell = schmidt(bell_state());
    EXPECT_NEAR(bell.coefficients(0), 0.5, 1e-12);
    EXPECT_NEAR(bell.coefficients(1), 0.5, 1e-12);
}

TEST(Schmidt, ReconstructionAndSpectrum) {
    CounterRng rng(2);
    for (int t = 0; t < 30; ++t) {
        const Index da = 1 + t % 4, db = 1 + (t / 4) % 4;
        BipartitePureState psi = random_bipartite(da, db, rng);
        SchmidtDecomposition s = schmidt(psi);
        EXPECT_NEAR(s.coefficients.sum(), 1.0, 1e-12);
        for (Index i = 1; i < s.coefficients.size(); ++i) EXPECT_GE(s.coefficients(i - 1), s.coefficients(i));
        ComplexVector v = ComplexVector::Zero(da * db);
        for (Index i = 0; i < s.coefficients.size(); ++i)
            v += std::sqrt(s.coefficients(i)) * tensor(ComplexVector(s.basis_a.col(i)), ComplexVector(s.basis_b.col(i)));
        EXPECT_LT((v - psi.state.amplitudes()).cwiseAbs().maxCoeff(), 1e-10);
        RealVector ev = hermitian_eig(psi.reduced_b()).eigenvalues.reverse();
        for (Index i = 0; i < s.coefficients.size(); ++i) EXPECT_NEAR(s.coefficients(i), ev(i), 1e-12);
    }
}

TEST(OptimalPovm, RandomStatesSaturateBothRoofs) {
    CounterRng rng(3);
    for (Index d : {2, 3, 4}) {
        for (int t = 0; t < 100; ++t) {
            BipartitePureState psi = random_bipartite(d, d, rng);
            HermitianOperator h = random_hermitian(d, rng);
            DensityMatrix rb = psi.reduced_b();
            Assemblage a = assemblage_from_pure(psi, {{"q", optimal_povm_qfi(psi, h)}, {"v", optimal_povm_var(psi, h)}});
            EXPECT_LT(rel_err(a.average_qfi(h)[0], 4.0 * variance(rb, h)), 1e-8);
            EXPECT_LT(rel_err(a.average_variance(h)[1], qfi(rb, h) / 4.0), 1e-8);
        }
    }
}

TEST(OptimalPovm, ConditionalMeansEqualReducedMean) {
    CounterRng rng(4);
    for (int t = 0; t < 40; ++t) {
        BipartitePureState psi = random_bipartite(3, 3, rng);
        HermitianOperator h = random_hermitian(3, rng);
        DensityMatrix rb = psi.reduced_b();
        const double mean = expectation(LocalState(rb), h.matrix()).real();
        Assemblage a = assemblage_from_pure(psi, {{"q", optimal_povm_qfi(psi, h)}});
        for (const auto& o : a.settings()[0].outcomes)
            if (o.probability > 1e-12) EXPECT_NEAR(expectation(o.state, h.matrix()).real(), mean, 1e-8);
    }
}

TEST(OptimalPovm, ZeroDiagonalOfX) {
    CounterRng rng(5);
    for (int t = 0; t < 20; ++t) {
        BipartitePureState psi = random_bipartite(3, 3, rng);
        HermitianOperator h = random_hermitian(3, rng);
        SchmidtDecomposition s = schmidt(psi);
        // X in Bob's Schmidt basis; Alice's vector b_k maps onto conj(A^dagger b_k).
        RealVector sq = s.coefficients.cwiseSqrt();
        ComplexMatrix hs = s.basis_b.adjoint() * h.matrix() * s.basis_b;
        double mean = 0.0;
        for (Index i = 0; i < 3; ++i) mean += s.coefficients(i) * hs(i, i).real();
        ComplexMatrix x = sq.asDiagonal() * hs * sq.asDiagonal();
        x -= mean * ComplexMatrix(s.coefficients.cast<cplx>().asDiagonal());
        ComplexMatrix u = *optimal_povm_qfi(psi, h).basis();
        for (Index k = 0; k < 3; ++k) {
            ComplexVector w = (s.basis_a.adjoint() * u.col(k)).conjugate();
            EXPECT_NEAR(std::abs(w.dot(x * w)), 0.0, 1e-10);
        }
    }
}

TEST(OptimalPovm, ProductAndBellExamples) {
    CounterRng rng(6);
    PureState b(random_pure_vector(3, rng));
    BipartitePureState prod = product_state(PureState(random_pure_vector(2, rng)), b);
    HermitianOperator h = random_hermitian(3, rng);
    Assemblage a = assemblage_from_pure(prod, {{"q", optimal_povm_qfi(prod, h)}, {"v", optimal_povm_var(prod, h)}});
    EXPECT_LT(rel_err(a.average_qfi(h)[0], 4.0 * variance(b, h)), 1e-10);
    EXPECT_LT(rel_err(a.average_variance(h)[1], variance(b, h)), 1e-10);

    HermitianOperator z(pauli_z());
    Assemblage bell = assemblage_from_pure(bell_state(), {{"v", optimal_povm_var(bell_state(), z)}});
    EXPECT_NEAR(bell.average_variance(z)[0], 0.0, 1e-12);

    // GHZ with one Bob qubit: the QFI-optimal basis reaches 4 Var = 1 as the sigma_x setting does.
    BipartitePureState g = ghz_state(2, 0.0);
    HermitianOperator jz(pauli_z() / 2.0);
    Assemblage ag = assemblage_from_pure(g, {{"q", optimal_povm_qfi(g, jz)}});
    EXPECT_NEAR(ag.average_qfi(jz)[0], 1.0, 1e-10);
}

TEST(OptimalPovm, RankDeficientReducedState) {
    CounterRng rng(7);
    // Schmidt rank 2 inside 4 x 4: the kernel outcomes carry no weight.
    BipartitePureState psi = with_schmidt(vec({0.7, 0.3, 0.0, 0.0}), rng);
    HermitianOperator h = random_hermitian(4, rng);
    DensityMatrix rb = psi.reduced_b();
    POVM q = optimal_povm_qfi(psi, h), v = optimal_povm_var(psi, h);
    EXPECT_EQ(q.size(), 4u);
    Assemblage a = assemblage_from_pure(psi, {{"q", q}, {"v", v}});
    EXPECT_LE(a.setting("q").outcomes.size(), 2u);
    EXPECT_LT(rel_err(a.average_qfi(h)[0], 4.0 * variance(rb, h)), 1e-8);
    EXPECT_LT(rel_err(a.average_variance(h)[1], qfi(rb, h) / 4.0), 1e-8);
}

TEST(GellMann, Orthonormality) {
    GeneratorBasis g2 = gellmann_basis(2);
    ASSERT_EQ(g2.generators.size(), 3u);
    // Paulis over sqrt 2, in the order x, y, z.
    EXPECT_LT(max_abs(g2.generators[0].matrix() - pauli_x() / std::sqrt(2.0)), 1e-15);
    EXPECT_LT(max_abs(g2.generators[1].matrix() - pauli_y() / std::sqrt(2.0)), 1e-15);
    EXPECT_LT(max_abs(g2.generators[2].matrix() - pauli_z() / std::sqrt(2.0)), 1e-15);

    for (Index d = 2; d <= 6; ++d) {
        GeneratorBasis g = gellmann_basis(d);
        ASSERT_EQ(static_cast<Index>(g.generators.size()), d * d - 1);
        for (std::size_t i = 0; i < g.generators.size(); ++i) {
            EXPECT_NEAR(std::abs(g.generators[i].matrix().trace()), 0.0, 1e-12);
            for (std::size_t j = 0; j < g.generators.size(); ++j) {
                cplx ip = (g.generators[i].matrix() * g.generators[j].matrix()).trace();
                EXPECT_NEAR(std::abs(ip - cplx(i == j ? 1.0 : 0.0)), 0.0, 1e-10);
            }
        }
    }
    EXPECT_THROW(gellmann_basis(1), ValidationError);
}

TEST(GellMann, VarianceSumOnPureStates) {
    CounterRng rng(8);
    for (Index d = 2; d <= 6; ++d) {
        GeneratorBasis g = gellmann_basis(d);
        PureState phi(random_pure_vector(d, rng));
        double s = 0.0;
        for (const auto& h : g.generators) s += 4.0 * variance(phi, h);
        EXPECT_NEAR(s, 4.0 * (d - 1), 1e-10);
    }
}

TEST(Quantifiers, ClosedFormExamples) {
    EXPECT_NEAR(s_max_pure(vec({1.0, 0.0, 0.0})), 0.0, 1e-15);
    EXPECT_NEAR(s_max_pure(vec({0.5, 0.5})), 0.5, 1e-15);
    EXPECT_NEAR(s_avg_pure(vec({1.0, 0.0})), 0.0, 1e-15);
    EXPECT_NEAR(s_avg_pure(vec({0.5, 0.5})), 1.5, 1e-15);
    EXPECT_THROW(s_max_pure(vec({0.5, 0.4})), ValidationError);
    EXPECT_THROW(s_avg_pure(vec({1.2, -0.2})), ValidationError);
}

TEST(Quantifiers, PermutationAndPadding) {
    CounterRng rng(9);
    for (int t = 0; t < 20; ++t) {
        RealVector p = random_simplex(4, rng);
        RealVector q = p.reverse();
        RealVector padded = RealVector::Zero(7);
        padded.head(4) = p;
        EXPECT_NEAR(s_max_pure(p), s_max_pure(q), 1e-12);
        EXPECT_NEAR(s_max_pure(p), s_max_pure(padded), 1e-12);
        EXPECT_NEAR(s_avg_pure(p), s_avg_pure(q), 1e-12);
        EXPECT_NEAR(s_avg_pure(p), s_avg_pure(padded), 1e-12);
    }
}

TEST(Quantifiers, SmaxDominatesSampledGenerators) {
    CounterRng rng(10);
    for (int t = 0; t < 10; ++t) {
        const Index d = 2 + t % 3;
        RealVector p = random_simplex(d, rng);
        BipartitePureState psi = with_schmidt(p, rng);
        DensityMatrix rb = psi.reduced_b();
        GeneratorBasis g = gellmann_basis(d);
        const double closed = s_max_pure(p);
        for (int s = 0; s < 2000; ++s) EXPECT_LE(delta_of(rb, g.combine(random_direction(d * d - 1, rng))), closed + 1e-12);
    }
}

TEST(Quantifiers, SavgMatchesSphereAverage) {
    CounterRng rng(11);
    for (int t = 0; t < 3; ++t) {
        RealVector p = random_simplex(3, rng);
        DensityMatrix rb = with_schmidt(p, rng).reduced_b();
        SphereAverage avg =
            sphere_average(gellmann_basis(3), [&](const HermitianOperator& h) { return delta_of(rb, h); }, 20000, 100 + t);
        EXPECT_LE(std::abs(avg.mean - s_avg_pure(p)), 3.0 * avg.std_error) << avg.mean << " " << s_avg_pure(p);
    }
}

TEST(Quantifiers, LowerBoundOnGeneralAssemblage) {
    CounterRng rng(12);
    RealVector p = vec({0.6, 0.4});
    BipartitePureState psi = with_schmidt(p, rng);
    GeneratorBasis g = gellmann_basis(2);
    // Enough settings that each sampled generator finds its own optimal basis is not
    // possible; with the two Pauli-optimal settings for the best direction the bound is tight.
    SearchOptions opt;
    opt.samples = 200;
    opt.max_iterations = 100;
    auto objective = [&](const HermitianOperator& h) { return delta_of(psi.reduced_b(), h); };
    GeneratorSearch best = maximize_over_generators(g, objective, opt);
    EXPECT_LE(best.value, s_max_pure(p) + 1e-12);
    EXPECT_GE(best.value, s_max_pure(p) - 1e-6);
    EXPECT_GE(best.value, best.sampled);

    Assemblage a = assemblage_from_pure(psi, {{"q", optimal_povm_qfi(psi, g.combine(best.direction))},
                                              {"v", optimal_povm_var(psi, g.combine(best.direction))}});
    GeneratorSearch lb = s_max_lower_bound(a, opt);
    EXPECT_GE(lb.value, 0.0);
    EXPECT_LE(lb.value, s_max_pure(p) + 1e-9);
    EXPECT_GE(lb.value, s_max_pure(p) - 1e-6);
}

TEST(MultiGenerator, Examples) {
    GeneratorBasis g = gellmann_basis(2);
    std::vector<Setting> st;
    for (std::size_t i = 0; i < g.generators.size(); ++i)
        st.push_back({"g" + std::to_string(i), optimal_povm_qfi(bell_state(), g.generators[i])});
    MultiGeneratorResult r = multi_generator_sum(assemblage_from_pure(bell_state(), st), g);
    EXPECT_LT(rel_err(r.value, 6.0), 1e-9);
    EXPECT_DOUBLE_EQ(r.lhs_bound, 4.0);
    EXPECT_TRUE(r.violated);

    CounterRng rng(13);
    for (Index d = 2; d <= 4; ++d) {
        GeneratorBasis gd = gellmann_basis(d);
        BipartitePureState prod = product_state(PureState(random_pure_vector(d, rng)), PureState(random_pure_vector(d, rng)));
        std::vector<Setting> ps = {{"z", POVM::from_basis(identity(d))}};
        MultiGeneratorResult pr = multi_generator_sum(assemblage_from_pure(prod, ps), gd);
        EXPECT_NEAR(pr.value, 4.0 * (d - 1), 1e-9);
        EXPECT_FALSE(pr.violated);

        BipartitePureState psi = random_bipartite(d, d, rng);
        std::vector<Setting> os;
        for (std::size_t i = 0; i < gd.generators.size(); ++i)
            os.push_back({"g" + std::to_string(i), optimal_povm_qfi(psi, gd.generators[i])});
        RealVector p = schmidt(psi).coefficients;
        MultiGeneratorResult mr = multi_generator_sum(assemblage_from_pure(psi, os), gd);
        EXPECT_LT(rel_err(mr.value, 4.0 * (d - 1) + 4.0 * (1.0 - p.squaredNorm())), 1e-8);
    }
}

TEST(QubitGap, Examples) {
    RealVector n = vec({0.0, 0.0, 1.0});
    GapIdentity prod = qubit_gap_identity(product_state(PureState::basis(2, 0), PureState::basis(2, 1)), n);
    EXPECT_NEAR(prod.lhs, 0.0, 1e-12);
    EXPECT_NEAR(prod.rhs, 0.0, 1e-12);

    GapIdentity bell = qubit_gap_identity(bell_state(), n);
    EXPECT_NEAR(bell.lhs, 4.0, 1e-10);
    EXPECT_NEAR(bell.rhs, 4.0, 1e-12);

    BipartitePureState cat = hybrid_cat(0.6);
    // Bob's factor is the qubit here: swap parties.
    ComplexMatrix c = cat.coefficients().transpose();
    ComplexVector v(c.size());
    for (Index a = 0; a < c.rows(); ++a)
        for (Index b = 0; b < c.cols(); ++b) v(a * c.cols() + b) = c(a, b);
    BipartitePureState swapped(cat.d_b, cat.d_a, PureState(v));
    for (RealVector dir : {vec({1, 0, 0}), vec({0, 1, 0}), vec({0.6, 0.0, 0.8})}) {
        GapIdentity gi = qubit_gap_identity(swapped, dir);
        EXPECT_NEAR(gi.lhs, 4.0 * (1.0 - std::exp(-4.0 * 0.36)), 1e-8);
        EXPECT_NEAR(gi.lhs, gi.rhs, 1e-8);
    }
    EXPECT_THROW(qubit_gap_identity(ghz_state(3, 0.0), n), ValidationError);
    EXPECT_THROW(qubit_gap_identity(bell_state(), vec({1, 1, 0})), ValidationError);
}

TEST(AncillaInvariance, Examples) {
    CounterRng rng(14);
    EXPECT_TRUE(ancilla_invariance_check(bell_state(), 2));
    EXPECT_TRUE(ancilla_invariance_check(random_bipartite(3, 3, rng), 4));
    EXPECT_TRUE(ancilla_invariance_check(product_state(PureState::basis(2, 1), PureState::basis(3, 2)), 3));
    EXPECT_THROW(ancilla_invariance_check(bell_state(), 0), ValidationError);
}
