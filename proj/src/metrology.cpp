#include "steerkit/metrology.hpp"

#include <cmath>
#include <sstream>

#include "steerkit/errors.hpp"
#include "steerkit/policy.hpp"

namespace steerkit {

namespace {

void check_dims(Index a, Index b, const char* where) {
    if (a != b) {
        std::ostringstream os;
        os << where << ": dimension mismatch (" << a << " vs " << b << ")";
        throw ValidationError(os.str());
    }
}

std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
    return out;
}

// Re tr(A B) without forming the product.
double re_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.cwiseProduct(b.transpose()).sum().real();
}

}  // namespace

POVM::POVM(std::vector<HermitianOperator> effects, std::vector<std::string> labels)
    : labels_(std::move(labels)), effects_(std::make_shared<Effects>()) {
    if (effects.empty()) throw ValidationError("POVM needs at least one effect");
    if (labels_.empty()) labels_ = default_labels(effects.size());
    if (labels_.size() != effects.size()) throw ValidationError("POVM label count differs from effect count");
    dim_ = effects.front().dim();
    ComplexMatrix sum = ComplexMatrix::Zero(dim_, dim_);
    for (std::size_t i = 0; i < effects.size(); ++i) {
        check_dims(effects[i].dim(), dim_, "POVM");
        double lmin = hermitian_eig(effects[i]).eigenvalues(0);
        if (lmin < tol::psd) {
            std::ostringstream os;
            os << "POVM effect '" << labels_[i] << "' has negative eigenvalue " << lmin;
            throw ValidationError(os.str());
        }
        sum += effects[i].matrix();
    }
    double dev = max_abs(sum - identity(dim_));
    if (dev > tol::povm_sum) {
        std::ostringstream os;
        os << "POVM effects do not sum to identity (max deviation " << dev << ")";
        throw ValidationError(os.str());
    }
    effects_->list = std::move(effects);
}

POVM POVM::from_basis(const ComplexMatrix& u, std::vector<std::string> labels) {
    if (u.rows() != u.cols() || u.rows() == 0) throw ValidationError("POVM basis must be a square matrix");
    double dev = max_abs(u.adjoint() * u - identity(u.cols()));
    if (dev > tol::unitary) {
        std::ostringstream os;
        os << "POVM basis columns are not orthonormal (max deviation " << dev << ")";
        throw ValidationError(os.str());
    }
    if (labels.empty()) labels = default_labels(u.cols());
    if (static_cast<Index>(labels.size()) != u.cols()) throw ValidationError("POVM label count differs from basis size");
    POVM p;
    p.dim_ = u.rows();
    p.labels_ = std::move(labels);
    p.basis_ = u;
    p.effects_ = std::make_shared<Effects>();
    return p;
}

const std::vector<HermitianOperator>& POVM::effects() const {
    static const std::vector<HermitianOperator> none;
    if (!effects_) return none;
    if (basis_) {
        std::call_once(effects_->once, [this] {
            const ComplexMatrix& u = *basis_;
            for (Index k = 0; k < u.cols(); ++k) effects_->list.emplace_back(u.col(k) * u.col(k).adjoint());
        });
    }
    return effects_->list;
}

POVM POVM::eigenbasis(const HermitianOperator& h, std::vector<std::string> labels) {
    return from_basis(hermitian_eig(h).eigenvectors, std::move(labels));
}

Index dim(const LocalState& s) {
    return std::visit([](const auto& x) { return x.dim(); }, s);
}

DensityMatrix to_density(const LocalState& s) {
    if (const auto* psi = std::get_if<PureState>(&s)) return DensityMatrix::from_pure(*psi);
    return std::get<DensityMatrix>(s);
}

cplx expectation(const LocalState& s, const ComplexMatrix& op) {
    if (const auto* psi = std::get_if<PureState>(&s)) {
        const ComplexVector& v = psi->amplitudes();
        return v.dot(op * v);
    }
    return std::get<DensityMatrix>(s).matrix().cwiseProduct(op.transpose()).sum();
}

double variance(const DensityMatrix& rho, const HermitianOperator& h) {
    check_dims(rho.dim(), h.dim(), "variance");
    double mean = re_trace_product(rho.matrix(), h.matrix());
    ComplexMatrix hc = h.matrix() - mean * identity(h.dim());
    double v = re_trace_product(rho.matrix() * hc, hc);
    return std::max(v, 0.0);
}

double variance(const PureState& psi, const HermitianOperator& h) {
    check_dims(psi.dim(), h.dim(), "variance");
    ComplexVector hv = h.matrix() * psi.amplitudes();
    cplx mean = psi.amplitudes().dot(hv);
    return (hv - mean.real() * psi.amplitudes()).squaredNorm();
}

double variance(const LocalState& s, const HermitianOperator& h) {
    return std::visit([&](const auto& x) { return variance(x, h); }, s);
}

double qfi(const DensityMatrix& rho, const HermitianOperator& h) {
    check_dims(rho.dim(), h.dim(), "qfi");
    Spectrum s = hermitian_eig(rho);
    ComplexMatrix ht = s.eigenvectors.adjoint() * h.matrix() * s.eigenvectors;
    const Index d = rho.dim();
    double f = 0.0;
    for (Index i = 0; i < d; ++i) {
        double li = std::max(s.eigenvalues(i), 0.0);
        for (Index j = i + 1; j < d; ++j) {
            double lj = std::max(s.eigenvalues(j), 0.0);
            double sum = li + lj;
            if (sum <= tol::qfi_pair) continue;
            double diff = li - lj;
            f += diff * diff / sum * std::norm(ht(i, j));
        }
    }
    return 4.0 * f;
}

double qfi(const PureState& psi, const HermitianOperator& h) { return 4.0 * variance(psi, h); }

double qfi(const LocalState& s, const HermitianOperator& h) {
    return std::visit([&](const auto& x) { return qfi(x, h); }, s);
}

double qfi_white_noise(const PureState& psi, const HermitianOperator& h, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("qfi_white_noise: p outside [0,1]");
    const double d = static_cast<double>(psi.dim());
    return 4.0 * p * p / (p + 2.0 * (1.0 - p) / d) * variance(psi, h);
}

namespace {

void singular_outcome(const std::string& label, double p, double dp) {
    std::ostringstream os;
    os << "cfi: outcome '" << label << "' has probability " << p << " but derivative " << dp
       << "; Fisher information is singular";
    throw NumericError(os.str());
}

template <class ProbDeriv>
double cfi_sum(const POVM& povm, ProbDeriv&& pd) {
    double f = 0.0;
    for (std::size_t x = 0; x < povm.size(); ++x) {
        auto [p, dp] = pd(povm.effects()[x].matrix());
        if (p < tol::zero_prob) {
            if (std::abs(dp) >= tol::zero_prob) singular_outcome(povm.labels()[x], p, dp);
            continue;
        }
        f += dp * dp / p;
    }
    return f;
}

}  // namespace

double cfi(const POVM& povm, const DensityMatrix& rho, const HermitianOperator& h) {
    check_dims(povm.dim(), rho.dim(), "cfi");
    check_dims(h.dim(), rho.dim(), "cfi");
    ComplexMatrix c = commutator(h.matrix(), rho.matrix());
    return cfi_sum(povm, [&](const ComplexMatrix& e) {
        double p = re_trace_product(e, rho.matrix());
        double dp = (cplx(0.0, -1.0) * e.cwiseProduct(c.transpose()).sum()).real();
        return std::pair<double, double>(p, dp);
    });
}

double cfi(const POVM& povm, const LocalState& s, const HermitianOperator& h) {
    const auto* psi = std::get_if<PureState>(&s);
    if (!psi) return cfi(povm, std::get<DensityMatrix>(s), h);
    check_dims(povm.dim(), psi->dim(), "cfi");
    check_dims(h.dim(), psi->dim(), "cfi");
    const ComplexVector& v = psi->amplitudes();
    ComplexVector hv = h.matrix() * v;
    return cfi_sum(povm, [&](const ComplexMatrix& e) {
        ComplexVector ev = e * v;
        double p = v.dot(ev).real();
        double dp = 2.0 * ev.dot(hv).imag();  // 2 Im <psi|E H|psi>
        return std::pair<double, double>(p, dp);
    });
}

double qfi_commutator_bound(const DensityMatrix& rho, const HermitianOperator& h, const HermitianOperator& m) {
    check_dims(rho.dim(), h.dim(), "qfi_commutator_bound");
    check_dims(rho.dim(), m.dim(), "qfi_commutator_bound");
    double vm = variance(rho, m);
    if (vm <= 1e-14) throw ValidationError("qfi_commutator_bound: Var[rho, M] vanishes, bound undefined");
    cplx c = rho.matrix().cwiseProduct(commutator(h.matrix(), m.matrix()).transpose()).sum();
    return std::norm(c) / vm;
}

GapResult var_qfi_gap(const DensityMatrix& rho, const HermitianOperator& h) {
    check_dims(rho.dim(), h.dim(), "var_qfi_gap");
    Spectrum s = hermitian_eig(rho);
    ComplexMatrix ht = s.eigenvectors.adjoint() * h.matrix() * s.eigenvectors;
    const Index d = rho.dim();
    RealVector p = s.eigenvalues.cwiseMax(0.0);

    double off = 0.0;
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            double sum = p(i) + p(j);
            if (sum <= tol::qfi_pair) continue;
            off += p(i) * p(j) / sum * std::norm(ht(i, j));
        }
    double mean = 0.0;
    for (Index i = 0; i < d; ++i) mean += p(i) * ht(i, i).real();
    double diag = 0.0;
    for (Index i = 0; i < d; ++i) {
        double c = ht(i, i).real() - mean;
        diag += p(i) * c * c;
    }

    std::vector<Index> support;
    for (Index i = 0; i < d; ++i)
        if (p(i) > tol::support) support.push_back(i);
    double level = 0.0;
    for (Index i : support) level += ht(i, i).real();
    level /= static_cast<double>(support.size());
    double dev = 0.0;
    for (Index i : support)
        for (Index j : support) dev = std::max(dev, std::abs(ht(i, j) - (i == j ? level : 0.0)));

    return {4.0 * off + diag, dev <= tol::saturation};
}

double variance_direct_sum(const std::vector<WeightedBlock>& blocks, const std::vector<HermitianOperator>& h) {
    if (blocks.size() != h.size()) throw ValidationError("variance_direct_sum: block count mismatch");
    std::vector<double> means(blocks.size());
    double mean = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        check_dims(blocks[b].state.dim(), h[b].dim(), "variance_direct_sum");
        means[b] = re_trace_product(blocks[b].state.matrix(), h[b].matrix());
        mean += blocks[b].weight * means[b];
    }
    double v = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        double c = means[b] - mean;
        v += blocks[b].weight * (variance(blocks[b].state, h[b]) + c * c);
    }
    return v;
}

double qfi_direct_sum(const std::vector<WeightedBlock>& blocks, const std::vector<HermitianOperator>& h) {
    if (blocks.size() != h.size()) throw ValidationError("qfi_direct_sum: block count mismatch");
    double f = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) f += blocks[b].weight * qfi(blocks[b].state, h[b]);
    return f;
}

}  // namespace steerkit
