#include "steerkit/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "steerkit/errors.hpp"
#include "steerkit/policy.hpp"

namespace steerkit {

std::vector<long long> sample_counts(const std::vector<double>& probs, long long n, CounterRng& rng) {
    if (n < 0) throw ValidationError("sample_counts: negative number of shots");
    std::vector<long long> counts(probs.size(), 0);
    long long left = n;
    double mass = 1.0;
    for (std::size_t i = 0; i < probs.size() && left > 0; ++i) {
        if (i + 1 == probs.size()) {
            counts[i] = left;
            break;
        }
        double q = mass > 0.0 ? std::clamp(probs[i] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<long long> bin(left, q);
        counts[i] = bin(rng);
        left -= counts[i];
        mass -= probs[i];
    }
    return counts;
}

std::vector<long long> sample_outcomes(const DensityMatrix& rho, const POVM& povm, long long n, std::uint64_t seed) {
    if (povm.dim() != rho.dim()) throw ValidationError("sample_outcomes: POVM and state dimensions differ");
    std::vector<double> p;
    double total = 0.0;
    for (const auto& e : povm.effects()) {
        double q = rho.matrix().cwiseProduct(e.matrix().transpose()).sum().real();
        p.push_back(std::max(q, 0.0));
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "sample_outcomes: outcome probabilities sum to " << total;
        throw ValidationError(os.str());
    }
    CounterRng rng(seed);
    return sample_counts(p, n, rng);
}

namespace {

struct Branch {
    double p = 0.0;
    ComplexMatrix rho;       // conditional state
    RealVector mu;           // eigenvalues of M_b
    ComplexMatrix w;         // eigenvectors of M_b
    double m_est = 0.0;      // <M_b> at theta = 0
};

class Model {
public:
    Model(const Assemblage& a, const HermitianOperator& h, const EstimatorStrategy& st) {
        const SettingRecord& rec = a.setting(st.setting);
        if (st.observables.size() != 1 && st.observables.size() != rec.outcomes.size())
            throw ValidationError("estimator: observable count must be 1 or match the outcomes of '" + st.setting + "'");
        if (h.dim() != a.d_b()) throw ValidationError("estimator: generator dimension mismatch");
        Spectrum hs = hermitian_eig(h);
        hv_ = hs.eigenvectors;
        hl_ = hs.eigenvalues;
        for (std::size_t b = 0; b < rec.outcomes.size(); ++b) {
            const HermitianOperator& m = st.observables.size() == 1 ? st.observables[0] : st.observables[b];
            if (m.dim() != a.d_b()) throw ValidationError("estimator: observable dimension mismatch");
            Branch br;
            br.p = rec.outcomes[b].probability;
            br.rho = to_density(rec.outcomes[b].state).matrix();
            Spectrum ms = hermitian_eig(m);
            br.mu = ms.eigenvalues;
            br.w = ms.eigenvectors;
            br.m_est = br.rho.cwiseProduct(m.matrix().transpose()).sum().real();
            var_m_est_ += br.p * variance(DensityMatrix(br.rho), m);
            derivative_ += br.p * (cplx(0.0, -1.0) * br.rho.cwiseProduct(commutator(m.matrix(), h.matrix()).transpose()).sum()).real();
            branches_.push_back(std::move(br));
        }
    }

    const std::vector<Branch>& branches() const { return branches_; }
    double var_m_est() const { return var_m_est_; }
    double derivative() const { return derivative_; }
    double width() const { return hl_(hl_.size() - 1) - hl_(0); }
    double radius() const { return std::max(std::abs(hl_(0)), std::abs(hl_(hl_.size() - 1))); }

    // Outcome distribution of M_b on the rotated conditional state.
    std::vector<double> probabilities(const Branch& br, double theta) const {
        ComplexMatrix basis = rotated_basis(br, theta);
        std::vector<double> out(br.mu.size());
        for (Index j = 0; j < br.mu.size(); ++j)
            out[j] = std::max((basis.col(j).adjoint() * br.rho * basis.col(j))(0, 0).real(), 0.0);
        return out;
    }

    // sum_b p(b) <M_b>_{b,theta}
    double mean_m(double theta) const {
        double s = 0.0;
        for (const auto& br : branches_) {
            auto q = probabilities(br, theta);
            double e = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) e += q[j] * br.mu(j);
            s += br.p * e;
        }
        return s;
    }

    double m_est_mean() const {
        double s = 0.0;
        for (const auto& br : branches_) s += br.p * br.m_est;
        return s;
    }

private:
    // U(theta)^dagger applied to the eigenvectors of M_b: <w|U rho U^dagger|w>.
    ComplexMatrix rotated_basis(const Branch& br, double theta) const {
        ComplexVector ph(hl_.size());
        for (Index i = 0; i < hl_.size(); ++i) ph(i) = std::exp(cplx(0.0, theta * hl_(i)));
        return hv_ * ph.asDiagonal() * (hv_.adjoint() * br.w);
    }

    ComplexMatrix hv_;
    RealVector hl_;
    std::vector<Branch> branches_;
    double var_m_est_ = 0.0;
    double derivative_ = 0.0;
};

// Largest interval around 0 on which g(theta) = <M_est - M>_theta is monotone, within a quarter period.
struct Bracket {
    double lo, hi, glo, ghi;
    bool increasing;
};

Bracket monotone_bracket(const Model& model) {
    const double base = model.m_est_mean();
    auto g = [&](double t) { return base - model.mean_m(t); };
    const bool increasing = model.derivative() < 0.0;
    const double span = 0.5 * M_PI / model.width();
    const int steps = 256;
    Bracket b{0.0, 0.0, g(0.0), g(0.0), increasing};
    for (int i = 1; i <= steps; ++i) {
        double t = span * i / steps, gt = g(t);
        if ((gt > b.ghi) != increasing) break;
        b.hi = t;
        b.ghi = gt;
    }
    for (int i = 1; i <= steps; ++i) {
        double t = -span * i / steps, gt = g(t);
        if ((gt < b.glo) != increasing) break;
        b.lo = t;
        b.glo = gt;
    }
    return b;
}

// Solves g(theta) = target inside the bracket; targets beyond it return the nearer end.
double invert(const Model& model, const Bracket& br, double target, bool& saturated) {
    const double base = model.m_est_mean();
    auto g = [&](double t) { return base - model.mean_m(t); };
    saturated = false;
    if (br.increasing ? target <= br.glo : target >= br.glo) return saturated = true, br.lo;
    if (br.increasing ? target >= br.ghi : target <= br.ghi) return saturated = true, br.hi;
    double lo = br.lo, hi = br.hi;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((g(mid) < target) == br.increasing) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SampleRun moment_estimator_validation(const Assemblage& a, const HermitianOperator& h, const EstimatorStrategy& strategy,
                                      double theta_true, long long n, int reps, std::uint64_t seed) {
    if (n < 1 || reps < 2) throw ValidationError("estimator: need n >= 1 and reps >= 2");
    Model model(a, h, strategy);
    if (std::abs(theta_true) * model.radius() > 0.05)
        throw ValidationError("estimator: theta_true outside the linear-response window");
    if (std::abs(model.derivative()) <= 1e-8)
        throw ValidationError("estimator: flat response, d<M>/dtheta vanishes at theta = 0");

    SampleRun run;
    run.seed = seed;
    run.n_shots = n;
    run.theta_true = theta_true;
    run.var_m_est = model.var_m_est();
    run.derivative = model.derivative();
    const double step = 1e-5;
    run.derivative_fd = (model.mean_m(step) - model.mean_m(-step)) / (2.0 * step);
    if (std::abs(run.derivative_fd - run.derivative) > 1e-6 * std::max(1.0, std::abs(run.derivative)))
        throw NumericError("estimator: analytic and finite-difference derivatives disagree");
    run.predicted_var = run.var_m_est / (double(n) * run.derivative * run.derivative);

    std::vector<double> pb;
    for (const auto& br : model.branches()) pb.push_back(br.p);
    std::vector<std::vector<double>> pm;
    for (const auto& br : model.branches()) pm.push_back(model.probabilities(br, theta_true));

    const Bracket bracket = monotone_bracket(model);
    run.estimates.resize(reps);
    for (int r = 0; r < reps; ++r) {
        CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        auto nb = sample_counts(pb, n, rng);
        double stat = 0.0;
        for (std::size_t b = 0; b < nb.size(); ++b) {
            if (nb[b] == 0) continue;
            const Branch& br = model.branches()[b];
            auto cm = sample_counts(pm[b], nb[b], rng);
            stat += double(nb[b]) * br.m_est;
            for (std::size_t j = 0; j < cm.size(); ++j) stat -= double(cm[j]) * br.mu(j);
        }
        bool sat = false;
        run.estimates[r] = invert(model, bracket, stat / double(n), sat);
        if (sat) ++run.saturated;
    }
    double mean = 0.0;
    for (double e : run.estimates) mean += e;
    mean /= reps;
    double ss = 0.0;
    for (double e : run.estimates) ss += (e - mean) * (e - mean);
    run.mean_estimate = mean;
    run.empirical_var = ss / (reps - 1);
    run.rel_std_error = std::sqrt(2.0 / (reps - 1));
    run.consistent = run.saturated == 0 && std::abs(run.empirical_var / run.predicted_var - 1.0) <= 5.0 * run.rel_std_error;
    return run;
}

SampleRun moment_estimator_validation(const Assemblage& a, const HermitianOperator& h, const HermitianOperator& m,
                                      double theta_true, long long n, int reps, std::uint64_t seed) {
    EstimatorStrategy st{conditional_variance(a, m).setting, {m}};
    return moment_estimator_validation(a, h, st, theta_true, n, reps, seed);
}

EprProductCheck epr_product_check(const SampleRun& run, double var_h_est) {
    EprProductCheck c;
    c.var_theta = run.empirical_var;
    c.var_h = var_h_est;
    c.product = c.var_theta * c.var_h;
    c.product_upper = c.var_theta * (1.0 + 5.0 * run.rel_std_error) * c.var_h;
    c.bound = 1.0 / (4.0 * double(run.n_shots));
    c.epr = run.saturated == 0 && c.product_upper < c.bound;
    return c;
}

}  // namespace steerkit
