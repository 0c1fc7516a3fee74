#include "steerkit/numcore.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "steerkit/errors.hpp"
#include "steerkit/policy.hpp"

namespace steerkit {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << what << ": expected non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw ValidationError(os.str());
    }
}

ComplexMatrix symmetrized(const ComplexMatrix& m) { return (m + m.adjoint()) / 2.0; }

Spectrum eig(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    if (es.info() != Eigen::Success) throw NumericError("hermitian eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_hermitian(const ComplexMatrix& m, double tol) {
    return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

ComplexMatrix identity(Index d) { return ComplexMatrix::Identity(d, d); }

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

HermitianOperator::HermitianOperator(const ComplexMatrix& m) {
    require_square(m, "HermitianOperator");
    double dev = max_abs(m - m.adjoint());
    if (dev > tol::herm) {
        std::ostringstream os;
        os << "operator is not Hermitian (max |M - M^dagger| = " << dev << ")";
        throw ValidationError(os.str());
    }
    m_ = symmetrized(m);
}

HermitianOperator HermitianOperator::diagonal(const RealVector& d) {
    return HermitianOperator(ComplexMatrix(d.cast<cplx>().asDiagonal()));
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& o) const {
    if (dim() != o.dim()) throw ValidationError("operator dimension mismatch");
    return HermitianOperator(m_ + o.m_);
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& o) const {
    if (dim() != o.dim()) throw ValidationError("operator dimension mismatch");
    return HermitianOperator(m_ - o.m_);
}

HermitianOperator HermitianOperator::operator*(double s) const { return HermitianOperator(m_ * s); }

PureState::PureState(const ComplexVector& amplitudes) : v_(amplitudes) {
    if (v_.size() == 0) throw ValidationError("pure state must have positive dimension");
    double n2 = v_.squaredNorm();
    if (!std::isfinite(n2) || std::abs(n2 - 1.0) > tol::norm) {
        std::ostringstream os;
        os << "pure state is not normalized (squared norm " << n2 << ")";
        throw ValidationError(os.str());
    }
}

PureState PureState::normalized(const ComplexVector& v) {
    double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("cannot normalize a zero vector");
    return PureState(v / n);
}

PureState PureState::basis(Index d, Index i) {
    if (i < 0 || i >= d) throw ValidationError("basis index out of range");
    ComplexVector v = ComplexVector::Zero(d);
    v(i) = 1.0;
    return PureState(v);
}

DensityMatrix::DensityMatrix(const ComplexMatrix& m) {
    require_square(m, "DensityMatrix");
    double dev = max_abs(m - m.adjoint());
    if (dev > tol::herm) {
        std::ostringstream os;
        os << "density matrix is not Hermitian (max |M - M^dagger| = " << dev << ")";
        throw ValidationError(os.str());
    }
    ComplexMatrix s = symmetrized(m);
    double tr = s.trace().real();
    if (std::abs(tr - 1.0) > tol::trace) {
        std::ostringstream os;
        os << "density matrix trace is " << tr << ", expected 1";
        throw ValidationError(os.str());
    }
    // Cholesky of the shifted matrix is a cheap sufficient positivity test.
    ComplexMatrix shifted = s - tol::psd * identity(s.rows());
    Eigen::LLT<ComplexMatrix> llt(shifted);
    if (llt.info() != Eigen::Success) {
        double lmin = eig(s).eigenvalues(0);
        if (lmin < tol::psd) {
            std::ostringstream os;
            os << "density matrix has negative eigenvalue " << lmin;
            throw ValidationError(os.str());
        }
    }
    m_ = std::move(s);
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) { return DensityMatrix(psi.projector(), Trusted{}); }

DensityMatrix DensityMatrix::maximally_mixed(Index d) {
    if (d <= 0) throw ValidationError("dimension must be positive");
    return DensityMatrix(identity(d) / static_cast<double>(d), Trusted{});
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

DensityMatrix mix(const DensityMatrix& a, const DensityMatrix& b, double t) {
    if (a.dim() != b.dim()) throw ValidationError("cannot mix states of different dimension");
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("mixing weight outside [0,1]");
    return DensityMatrix(t * a.matrix() + (1.0 - t) * b.matrix(), DensityMatrix::Trusted{});
}

Spectrum hermitian_eig(const HermitianOperator& op) { return eig(op.matrix()); }
Spectrum hermitian_eig(const DensityMatrix& rho) { return eig(rho.matrix()); }

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComplexVector tensor(const ComplexVector& a, const ComplexVector& b) {
    ComplexVector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, Index d_a, Index d_b, Subsystem keep) {
    if (d_a <= 0 || d_b <= 0 || rho.dim() != d_a * d_b) {
        std::ostringstream os;
        os << "partial_trace: state dimension " << rho.dim() << " does not factor as " << d_a << "x" << d_b;
        throw ValidationError(os.str());
    }
    const ComplexMatrix& m = rho.matrix();
    ComplexMatrix out;
    if (keep == Subsystem::B) {
        out = ComplexMatrix::Zero(d_b, d_b);
        for (Index a = 0; a < d_a; ++a) out += m.block(a * d_b, a * d_b, d_b, d_b);
    } else {
        out = ComplexMatrix::Zero(d_a, d_a);
        for (Index i = 0; i < d_a; ++i)
            for (Index j = 0; j < d_a; ++j) out(i, j) = m.block(i * d_b, j * d_b, d_b, d_b).trace();
    }
    return DensityMatrix(out);
}

ComplexMatrix unitary_from_generator(const HermitianOperator& h, double angle) {
    Spectrum s = hermitian_eig(h);
    ComplexVector phases(s.eigenvalues.size());
    for (Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(cplx(0.0, -angle * s.eigenvalues(i)));
    return s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
}

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0.0, cplx(0, -1), cplx(0, 1), 0.0;
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

}  // namespace steerkit
