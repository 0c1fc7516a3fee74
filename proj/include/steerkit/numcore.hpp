#pragma once

#include <complex>

#include <Eigen/Dense>

namespace steerkit {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

double max_abs(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol);
ComplexMatrix identity(Index d);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// Square matrix equal to its adjoint within tol::herm. Stored symmetrized.
class HermitianOperator {
public:
    HermitianOperator() = default;
    explicit HermitianOperator(const ComplexMatrix& m);

    static HermitianOperator diagonal(const RealVector& d);

    Index dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }

    HermitianOperator operator+(const HermitianOperator& o) const;
    HermitianOperator operator-(const HermitianOperator& o) const;
    HermitianOperator operator*(double s) const;

private:
    ComplexMatrix m_;
};

class PureState {
public:
    PureState() = default;
    explicit PureState(const ComplexVector& amplitudes);  // norm checked, not rescaled

    static PureState normalized(const ComplexVector& v);  // throws on zero vector
    static PureState basis(Index d, Index i);

    Index dim() const { return v_.size(); }
    const ComplexVector& amplitudes() const { return v_; }
    ComplexMatrix projector() const { return v_ * v_.adjoint(); }

private:
    ComplexVector v_;
};

// Hermitian, unit trace, eigenvalues >= tol::psd. Input is symmetrized before checks.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(const ComplexMatrix& m);

    static DensityMatrix from_pure(const PureState& psi);
    static DensityMatrix maximally_mixed(Index d);

    Index dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }
    double purity() const;

private:
    struct Trusted {};
    DensityMatrix(const ComplexMatrix& m, Trusted) : m_(m) {}
    ComplexMatrix m_;
    friend DensityMatrix mix(const DensityMatrix&, const DensityMatrix&, double);
};

// t*a + (1-t)*b for t in [0,1].
DensityMatrix mix(const DensityMatrix& a, const DensityMatrix& b, double t);

struct Spectrum {
    RealVector eigenvalues;     // ascending
    ComplexMatrix eigenvectors;  // columns
};

Spectrum hermitian_eig(const HermitianOperator& op);
Spectrum hermitian_eig(const DensityMatrix& rho);

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector tensor(const ComplexVector& a, const ComplexVector& b);

enum class Subsystem { A, B };

// Traces out the other factor of a (d_a * d_b) state; basis index is a * d_b + b.
DensityMatrix partial_trace(const DensityMatrix& rho, Index d_a, Index d_b, Subsystem keep);

// exp(-i angle H) through the eigendecomposition of H.
ComplexMatrix unitary_from_generator(const HermitianOperator& h, double angle);

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

}  // namespace steerkit
