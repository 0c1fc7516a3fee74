#include "steerkit/states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "steerkit/errors.hpp"
#include "steerkit/policy.hpp"

namespace steerkit {

namespace {

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

// The alternating sum cancels by many orders of magnitude for large N, so it is
// accumulated in 50-digit binary floating point with exact factorials.
using wide = boost::multiprecision::cpp_bin_float_50;

// Terms above this magnitude would leave fewer than ~18 of the 50 digits.
constexpr double kMaxWignerTerm = 1e32;

struct WignerTables {
    std::vector<wide> fact, cpow, spow;
    WignerTables(int N, double phi) : fact(N + 1), cpow(N + 1), spow(N + 1) {
        wide c = boost::multiprecision::cos(wide(phi) / 2);
        wide s = boost::multiprecision::sin(wide(phi) / 2);
        fact[0] = cpow[0] = spow[0] = 1;
        for (int i = 1; i <= N; ++i) {
            fact[i] = fact[i - 1] * i;
            cpow[i] = cpow[i - 1] * c;
            spow[i] = spow[i - 1] * s;
        }
    }
};

double wigner_element(int N, int k, int kp, const WignerTables& t) {
    const int lo = std::max(0, kp - k);
    const int hi = std::min(kp, N - k);
    if (lo > hi) return 0.0;
    wide pref = boost::multiprecision::sqrt(t.fact[k] * t.fact[N - k] * t.fact[kp] * t.fact[N - kp]);
    wide sum = 0;
    wide largest = 0;
    for (int q = lo; q <= hi; ++q) {
        wide term = pref / (t.fact[kp - q] * t.fact[q] * t.fact[k - kp + q] * t.fact[N - k - q]);
        term *= t.cpow[N + kp - k - 2 * q] * t.spow[k - kp + 2 * q];
        if ((k - kp + q) % 2 != 0) term = -term;
        largest = std::max(largest, boost::multiprecision::abs(term));
        sum += term;
    }
    if (largest > kMaxWignerTerm) {
        std::ostringstream os;
        os << "wigner_overlap: summation terms reach " << largest.convert_to<double>()
           << " for N=" << N << "; precision guard exceeded";
        throw NumericError(os.str());
    }
    return sum.convert_to<double>();
}

ComplexMatrix kron_chain(int n, int site, const ComplexMatrix& op) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int i = 0; i < n; ++i) out = tensor(out, i == site ? op : identity(2));
    return out;
}

}  // namespace

SpinOperators spin_ops(int n) {
    require(n >= 0, "spin_ops: particle number must be non-negative");
    const Index d = n + 1;
    const double j = n / 2.0;
    ComplexMatrix jp = ComplexMatrix::Zero(d, d);
    RealVector jz(d);
    for (int k = 0; k < d; ++k) {
        double m = k - j;
        jz(k) = m;
        if (k + 1 < d) jp(k + 1, k) = std::sqrt((j - m) * (j + m + 1));
    }
    ComplexMatrix jm = jp.adjoint();
    SpinOperators s;
    s.n_particles = n;
    s.Jx = HermitianOperator((jp + jm) / 2.0);
    s.Jy = HermitianOperator((jp - jm) / cplx(0.0, 2.0));
    s.Jz = HermitianOperator::diagonal(jz);
    return s;
}

BipartitePureState::BipartitePureState(Index da, Index db, PureState psi)
    : d_a(da), d_b(db), state(std::move(psi)) {
    if (da <= 0 || db <= 0 || state.dim() != da * db) {
        std::ostringstream os;
        os << "bipartite state of dimension " << state.dim() << " does not factor as " << da << "x" << db;
        throw ValidationError(os.str());
    }
}

ComplexMatrix BipartitePureState::coefficients() const {
    return Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        state.amplitudes().data(), d_a, d_b);
}

DensityMatrix BipartitePureState::reduced_b() const {
    ComplexMatrix c = coefficients();
    return DensityMatrix(c.transpose() * c.conjugate());
}

DensityMatrix BipartitePureState::reduced_a() const {
    ComplexMatrix c = coefficients();
    return DensityMatrix(c * c.adjoint());
}

BipartitePureState product_state(const PureState& a, const PureState& b) {
    return BipartitePureState(a.dim(), b.dim(), PureState::normalized(tensor(a.amplitudes(), b.amplitudes())));
}

BipartitePureState bell_state() {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    return BipartitePureState(2, 2, PureState::normalized(v));
}

double wigner_overlap(int N, int k, int k_prime, double phi) {
    require(N >= 0 && k >= 0 && k <= N && k_prime >= 0 && k_prime <= N, "wigner_overlap: index out of range");
    return wigner_element(N, k, k_prime, WignerTables(N, phi));
}

RealMatrix wigner_matrix(int N, double phi) {
    require(N >= 0, "wigner_matrix: N must be non-negative");
    WignerTables t(N, phi);
    RealMatrix w(N + 1, N + 1);
    for (int k = 0; k <= N; ++k)
        for (int kp = 0; kp <= N; ++kp) w(k, kp) = wigner_element(N, k, kp, t);
    return w;
}

ComplexMatrix jx_eigenbasis(int N) { return wigner_matrix(N, M_PI / 2).cast<cplx>(); }

PureState ghz_vector(int n, double phi) {
    require(n >= 1 && n <= 20, "ghz_vector: qubit number outside [1, 20]");
    ComplexVector v = ComplexVector::Zero(Index(1) << n);
    v(0) = 1.0 / std::sqrt(2.0);
    v(v.size() - 1) = std::exp(cplx(0.0, phi)) / std::sqrt(2.0);
    return PureState::normalized(v);
}

BipartitePureState ghz_state(int n_total, double phi) {
    require(n_total >= 2, "ghz_state: need at least 2 qubits");
    require(n_total <= 21, "ghz_state: dense dimension guard exceeded");
    PureState g = ghz_vector(n_total, phi);
    return BipartitePureState(2, Index(1) << (n_total - 1), g);
}

DensityMatrix ghz_white_noise(int n_total, double phi, double p) {
    require(n_total >= 2, "ghz_white_noise: need at least 2 qubits");
    require(n_total <= 12, "ghz_white_noise: dense dimension guard (n_total <= 12) exceeded");
    require(p >= 0.0 && p <= 1.0, "ghz_white_noise: p outside [0,1]");
    PureState g = ghz_vector(n_total, phi);
    const Index d = Index(1) << n_total;
    return DensityMatrix(p * g.projector() + (1.0 - p) * identity(d) / static_cast<double>(d));
}

HermitianOperator collective_qubit_operator(int n, const ComplexMatrix& pauli) {
    require(n >= 1 && n <= 14, "collective_qubit_operator: qubit number outside [1, 14]");
    const Index d = Index(1) << n;
    ComplexMatrix out = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < n; ++i) out += kron_chain(n, i, pauli);
    return HermitianOperator(out / 2.0);
}

BipartitePureState split_dicke_fixed(int k, int n_a, int n_b) {
    require(n_a >= 0 && n_b >= 0, "split_dicke_fixed: negative particle number");
    require(k >= 0 && k <= n_a + n_b, "split_dicke_fixed: k outside [0, N]");
    const int kmin = std::max(0, k - n_b);
    const int kmax = std::min(k, n_a);
    const double amp = 1.0 / std::sqrt(double(kmax - kmin + 1));
    ComplexVector v = ComplexVector::Zero(Index(n_a + 1) * (n_b + 1));
    for (int ka = kmin; ka <= kmax; ++ka) v(Index(ka) * (n_b + 1) + (k - ka)) = amp;
    return BipartitePureState(n_a + 1, n_b + 1, PureState::normalized(v));
}

Index labeled_sector_offset(int n) { return Index(n) * (n + 1) / 2; }

std::string sector_label(int n, int k) {
    std::ostringstream os;
    os << "(" << n << "," << k << ")";
    return os.str();
}

namespace {

// log of the squared amplitude for (N_A, k_A).
double log_weight(int k, int N, double p, int na, int ka) {
    double lw = log_binomial(k, ka) + log_binomial(N - k, na - ka);
    if (na > 0) lw += na * std::log(p);
    if (N - na > 0) lw += (N - na) * std::log1p(-p);
    return lw;
}

void check_split_args(int k, int N, double p) {
    require(N >= 0, "split_dicke_beamsplitter: N must be non-negative");
    require(k >= 0 && k <= N, "split_dicke_beamsplitter: k outside [0, N]");
    require(p >= 0.0 && p <= 1.0, "split_dicke_beamsplitter: p outside [0,1]");
}

std::pair<int, int> ka_range(int k, int N, int na) { return {std::max(0, na - (N - k)), std::min(k, na)}; }

}  // namespace

std::vector<SplitSector> split_dicke_beamsplitter_sectors(int k, int N, double p) {
    check_split_args(k, N, p);
    std::vector<SplitSector> out;
    double total = 0.0;
    for (int na = 0; na <= N; ++na) {
        if ((p == 0.0 && na > 0) || (p == 1.0 && na < N)) continue;
        auto [lo, hi] = ka_range(k, N, na);
        if (lo > hi) continue;
        const int nb = N - na;
        ComplexVector v = ComplexVector::Zero(Index(na + 1) * (nb + 1));
        double w = 0.0;
        for (int ka = lo; ka <= hi; ++ka) {
            double lw = log_weight(k, N, p, na, ka);
            w += std::exp(lw);
            v(Index(ka) * (nb + 1) + (k - ka)) = std::exp(0.5 * (log_binomial(k, ka) + log_binomial(N - k, na - ka)));
        }
        if (w < 1e-300) continue;
        SplitSector s;
        s.n_a = na;
        s.weight = w;
        s.state = BipartitePureState(na + 1, nb + 1, PureState::normalized(v));
        out.push_back(std::move(s));
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "split_dicke_beamsplitter: sector weights sum to " << total;
        throw NumericError(os.str());
    }
    for (auto& s : out) s.weight /= total;
    return out;
}

BipartitePureState split_dicke_beamsplitter(int k, int N, double p) {
    check_split_args(k, N, p);
    require(N <= 40, "split_dicke_beamsplitter: dense labeled form limited to N <= 40");
    const Index d = labeled_sector_offset(N + 1);
    ComplexVector v = ComplexVector::Zero(d * d);
    for (int na = 0; na <= N; ++na) {
        if ((p == 0.0 && na > 0) || (p == 1.0 && na < N)) continue;
        auto [lo, hi] = ka_range(k, N, na);
        for (int ka = lo; ka <= hi; ++ka) {
            Index ia = labeled_sector_offset(na) + ka;
            Index ib = labeled_sector_offset(N - na) + (k - ka);
            v(ia * d + ib) = std::exp(0.5 * log_weight(k, N, p, na, ka));
        }
    }
    double n2 = v.squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "split_dicke_beamsplitter: squared norm " << n2 << " before renormalization";
        throw NumericError(os.str());
    }
    BipartitePureState out(d, d, PureState::normalized(v));
    std::vector<std::string> labels;
    labels.reserve(d);
    for (int n = 0; n <= N; ++n)
        for (int j = 0; j <= n; ++j) labels.push_back(sector_label(n, j));
    out.labels_a = labels;
    out.labels_b = labels;
    return out;
}

FockSpace fock_space(int cutoff) {
    require(cutoff >= 1, "fock_space: cutoff must be at least 1");
    const Index d = cutoff + 1;
    ComplexMatrix ad = ComplexMatrix::Zero(d, d);
    for (int n = 0; n < cutoff; ++n) ad(n + 1, n) = std::sqrt(double(n + 1));
    ComplexMatrix a = ad.adjoint();
    FockSpace f;
    f.cutoff = cutoff;
    f.a_dagger = ad;
    f.x = HermitianOperator((a + ad) / std::sqrt(2.0));
    f.p = HermitianOperator(cplx(0.0, 1.0) * (ad - a) / std::sqrt(2.0));
    return f;
}

namespace {

// Poisson(mean) mass above n_max, summed directly from the upper tail.
double poisson_tail(double mean, int n_max) {
    if (mean == 0.0) return 0.0;
    double tail = 0.0;
    for (int n = n_max + 1; n < n_max + 2000; ++n) {
        double t = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
        tail += t;
        if (n > mean && t < 1e-30 * std::max(tail, 1e-300)) break;
    }
    return tail;
}

}  // namespace

int default_fock_cutoff(double alpha) {
    require(alpha >= 0.0 && std::isfinite(alpha), "default_fock_cutoff: alpha must be finite and non-negative");
    const double mean = alpha * alpha;
    int n = 0;
    while (poisson_tail(mean, n) >= 1e-12) ++n;
    return std::max(n, 20);
}

PureState coherent_state(double alpha, int cutoff) {
    require(cutoff >= 1, "coherent_state: cutoff must be at least 1");
    ComplexVector v(cutoff + 1);
    double c = 1.0;
    for (int n = 0; n <= cutoff; ++n) {
        if (n > 0) c *= alpha / std::sqrt(double(n));
        v(n) = std::exp(-alpha * alpha / 2.0) * c;
    }
    return PureState::normalized(v);
}

BipartitePureState hybrid_cat(double alpha, int cutoff) {
    require(alpha >= 0.0 && std::isfinite(alpha), "hybrid_cat: alpha must be finite and non-negative");
    if (cutoff < 0) cutoff = default_fock_cutoff(alpha);
    double tail = poisson_tail(alpha * alpha, cutoff);
    if (tail >= 1e-12) {
        std::ostringstream os;
        os << "hybrid_cat: cutoff " << cutoff << " leaves coherent tail mass " << tail << " for alpha " << alpha;
        throw ValidationError(os.str());
    }
    ComplexVector plus = coherent_state(alpha, cutoff).amplitudes();
    ComplexVector minus = coherent_state(-alpha, cutoff).amplitudes();
    ComplexVector v(2 * plus.size());
    v << plus, minus;
    return BipartitePureState(2, plus.size(), PureState::normalized(v));
}

}  // namespace steerkit
