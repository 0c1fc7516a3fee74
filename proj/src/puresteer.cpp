#include "steerkit/puresteer.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "steerkit/errors.hpp"
#include "steerkit/policy.hpp"
#include "steerkit/random.hpp"
#include "steerkit/sampling.hpp"

namespace steerkit {

Index SchmidtDecomposition::rank(double threshold) const {
    Index r = 0;
    while (r < coefficients.size() && coefficients(r) > threshold) ++r;
    return r;
}

SchmidtDecomposition schmidt(const BipartitePureState& psi) {
    Eigen::JacobiSVD<ComplexMatrix> svd(psi.coefficients(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw NumericError("schmidt: singular value decomposition failed");
    const Index r = svd.singularValues().size();
    SchmidtDecomposition s;
    s.coefficients = svd.singularValues().array().square().matrix();
    s.coefficients /= s.coefficients.sum();
    s.basis_a = svd.matrixU();
    s.basis_b = svd.matrixV().leftCols(r).conjugate();
    return s;
}

namespace {

struct SupportFrame {
    SchmidtDecomposition sd;
    Index r = 0;
    RealVector p;       // support Schmidt coefficients
    ComplexMatrix hs;   // H in Bob's Schmidt basis, restricted to the support
};

SupportFrame support_frame(const BipartitePureState& psi, const HermitianOperator& h) {
    if (h.dim() != psi.d_b) throw ValidationError("generator does not act on Bob's space");
    SupportFrame f;
    f.sd = schmidt(psi);
    f.r = f.sd.rank(tol::zero_prob);
    f.p = f.sd.coefficients.head(f.r);
    ComplexMatrix b = f.sd.basis_b.leftCols(f.r);
    f.hs = b.adjoint() * h.matrix() * b;
    return f;
}

// Alice basis: A_r conj(v_k) for the columns v_k of the r x r unitary, then the
// orthogonal complement of the support as zero-probability outcomes.
POVM alice_basis(const SupportFrame& f, const ComplexMatrix& v) {
    const Index da = f.sd.basis_a.rows();
    ComplexMatrix u(da, da);
    u.leftCols(f.r) = f.sd.basis_a.leftCols(f.r) * v.conjugate();
    u.rightCols(da - f.r) = f.sd.basis_a.rightCols(da - f.r);
    return POVM::from_basis(u);
}

}  // namespace

POVM optimal_povm_qfi(const BipartitePureState& psi, const HermitianOperator& h) {
    SupportFrame f = support_frame(psi, h);
    RealVector sq = f.p.cwiseSqrt();
    double mean = 0.0;
    for (Index i = 0; i < f.r; ++i) mean += f.p(i) * f.hs(i, i).real();
    ComplexMatrix x = sq.asDiagonal() * f.hs * sq.asDiagonal();
    x -= mean * ComplexMatrix(f.p.cast<cplx>().asDiagonal());
    Spectrum s = hermitian_eig(HermitianOperator((x + x.adjoint()) / 2.0));
    ComplexMatrix dft(f.r, f.r);
    for (Index l = 0; l < f.r; ++l)
        for (Index k = 0; k < f.r; ++k)
            dft(l, k) = std::polar(1.0 / std::sqrt(double(f.r)), 2.0 * M_PI * double(k * l) / double(f.r));
    return alice_basis(f, s.eigenvectors * dft);
}

POVM optimal_povm_var(const BipartitePureState& psi, const HermitianOperator& h) {
    SupportFrame f = support_frame(psi, h);
    ComplexMatrix y(f.r, f.r);
    for (Index i = 0; i < f.r; ++i)
        for (Index j = 0; j < f.r; ++j)
            y(i, j) = 2.0 * std::sqrt(f.p(i) * f.p(j)) / (f.p(i) + f.p(j)) * f.hs(i, j);
    Spectrum s = hermitian_eig(HermitianOperator((y + y.adjoint()) / 2.0));
    return alice_basis(f, s.eigenvectors);
}

HermitianOperator GeneratorBasis::combine(const RealVector& n) const {
    if (n.size() != static_cast<Index>(generators.size())) throw ValidationError("generator coefficient length mismatch");
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (Index i = 0; i < n.size(); ++i) m += n(i) * generators[i].matrix();
    return HermitianOperator(m);
}

GeneratorBasis gellmann_basis(Index d) {
    if (d < 2) throw ValidationError("gellmann_basis: dimension must be at least 2");
    GeneratorBasis g;
    g.dim = d;
    const double s = 1.0 / std::sqrt(2.0);
    for (Index j = 0; j < d; ++j)
        for (Index k = j + 1; k < d; ++k) {
            ComplexMatrix m = ComplexMatrix::Zero(d, d);
            m(j, k) = m(k, j) = s;
            g.generators.emplace_back(m);
        }
    for (Index j = 0; j < d; ++j)
        for (Index k = j + 1; k < d; ++k) {
            ComplexMatrix m = ComplexMatrix::Zero(d, d);
            m(j, k) = cplx(0.0, -s);
            m(k, j) = cplx(0.0, s);
            g.generators.emplace_back(m);
        }
    for (Index l = 1; l < d; ++l) {
        ComplexMatrix m = ComplexMatrix::Zero(d, d);
        const double c = 1.0 / std::sqrt(double(l) * double(l + 1));
        for (Index j = 0; j < l; ++j) m(j, j) = c;
        m(l, l) = -double(l) * c;
        g.generators.emplace_back(m);
    }
    return g;
}

namespace {

void check_distribution(const RealVector& p, const char* where) {
    if (p.size() == 0 || (p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > tol::prob_sum) {
        std::ostringstream os;
        os << where << ": not a probability vector";
        throw ValidationError(os.str());
    }
}

}  // namespace

double s_max_pure(const RealVector& p) {
    check_distribution(p, "s_max_pure");
    RealMatrix m = RealMatrix(p.asDiagonal()) - p * p.transpose();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("s_max_pure: eigensolver failed");
    return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

double s_avg_pure(const RealVector& p) {
    check_distribution(p, "s_avg_pure");
    double s = 0.0;
    for (Index i = 0; i < p.size(); ++i)
        for (Index j = 0; j < p.size(); ++j) {
            if (i == j || p(i) + p(j) == 0.0) continue;
            s += p(i) * p(j) * (1.0 + 2.0 / (p(i) + p(j)));
        }
    return s;
}

MultiGeneratorResult multi_generator_sum(const Assemblage& a, const GeneratorBasis& basis) {
    if (basis.dim != a.d_b()) throw ValidationError("multi_generator_sum: basis dimension mismatch");
    MultiGeneratorResult r;
    for (const auto& h : basis.generators) r.value += conditional_qfi(a, h).value;
    r.lhs_bound = 4.0 * double(basis.dim - 1);
    r.violated = r.value > r.lhs_bound + tol::witness;
    return r;
}

GapIdentity qubit_gap_identity(const BipartitePureState& psi, const RealVector& n) {
    if (psi.d_b != 2) throw ValidationError("qubit_gap_identity: Bob must hold a qubit");
    if (n.size() != 3 || std::abs(n.norm() - 1.0) > 1e-12) throw ValidationError("qubit_gap_identity: n must be a unit 3-vector");
    HermitianOperator h(n(0) * pauli_x() + n(1) * pauli_y() + n(2) * pauli_z());
    Assemblage a = assemblage_from_pure(psi, {{"qfi-optimal", optimal_povm_qfi(psi, h)},
                                              {"var-optimal", optimal_povm_var(psi, h)}});
    GapIdentity g;
    g.lhs = conditional_qfi(a, h).value - 4.0 * conditional_variance(a, h).value;
    g.rhs = 8.0 * (1.0 - psi.reduced_b().purity());
    return g;
}

bool ancilla_invariance_check(const BipartitePureState& psi, Index ancilla_dim) {
    if (ancilla_dim < 1) throw ValidationError("ancilla_invariance_check: ancilla dimension must be positive");
    ComplexVector anc = ComplexVector::Zero(ancilla_dim);
    anc(0) = 1.0;
    BipartitePureState ext(psi.d_a, psi.d_b * ancilla_dim, PureState::normalized(tensor(psi.state.amplitudes(), anc)));
    RealVector p0 = schmidt(psi).coefficients;
    RealVector p1 = schmidt(ext).coefficients;
    return std::abs(s_max_pure(p0) - s_max_pure(p1)) <= 1e-10 && std::abs(s_avg_pure(p0) - s_avg_pure(p1)) <= 1e-10;
}

GeneratorSearch maximize_over_generators(const GeneratorBasis& basis,
                                         const std::function<double(const HermitianOperator&)>& objective,
                                         const SearchOptions& opt) {
    const Index n = static_cast<Index>(basis.generators.size());
    CounterRng rng(opt.seed);
    GeneratorSearch best;
    best.value = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(opt.samples, 1); ++s) {
        RealVector v = random_direction(n, rng);
        double f = objective(basis.combine(v));
        if (f > best.value) {
            best.value = f;
            best.direction = v;
        }
    }
    best.sampled = best.value;
    // Coordinate search on the sphere; the step halves after a sweep without gain.
    double step = 0.1;
    for (int it = 0; it < opt.max_iterations && step > opt.tolerance; ++it) {
        bool improved = false;
        for (Index i = 0; i < n; ++i)
            for (double sign : {1.0, -1.0}) {
                RealVector v = best.direction;
                v(i) += sign * step;
                v.normalize();
                double f = objective(basis.combine(v));
                if (f > best.value) {
                    best.value = f;
                    best.direction = v;
                    improved = true;
                }
            }
        if (!improved) step /= 2.0;
        best.iterations = it + 1;
    }
    return best;
}

GeneratorSearch s_max_lower_bound(const Assemblage& a, const SearchOptions& opt) {
    GeneratorBasis basis = gellmann_basis(a.d_b());
    auto delta = [&](const HermitianOperator& h) {
        return conditional_qfi(a, h).value / 4.0 - conditional_variance(a, h).value;
    };
    GeneratorSearch r = maximize_over_generators(basis, delta, opt);
    r.value = std::max(r.value, 0.0);
    r.sampled = std::max(r.sampled, 0.0);
    return r;
}

SphereAverage sphere_average(const GeneratorBasis& basis,
                             const std::function<double(const HermitianOperator&)>& objective, int samples,
                             std::uint64_t seed) {
    if (samples < 2) throw ValidationError("sphere_average: need at least 2 samples");
    const Index n = static_cast<Index>(basis.generators.size());
    CounterRng rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (int s = 0; s < samples; ++s) {
        double f = objective(basis.combine(random_direction(n, rng)));
        sum += f;
        sum2 += f * f;
    }
    const double scale = double(basis.dim * basis.dim - 1);
    double mean = sum / samples;
    double var = std::max(sum2 / samples - mean * mean, 0.0) * samples / (samples - 1.0);
    return {scale * mean, scale * std::sqrt(var / samples)};
}

}  // namespace steerkit
