#include "steerkit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/policy.hpp"
#include "steerkit/sampling.hpp"

namespace steerkit {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

std::vector<std::string> index_labels(Index n, const std::string& prefix = "") {
    std::vector<std::string> l;
    for (Index i = 0; i < n; ++i) l.push_back(prefix + std::to_string(i));
    return l;
}

// W(n, pi/2) is costly for large n and reused across k and sectors.
const ComplexMatrix& cached_jx_basis(int n) {
    static std::mutex mu;
    static std::map<int, ComplexMatrix> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, jx_eigenbasis(n)).first;
    return it->second;
}

ComplexMatrix qubit_basis(cplx phase) {
    ComplexMatrix u(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    u << s, s, s * phase, -s * phase;
    return u;
}

std::vector<Setting> qubit_settings() {
    return {{"sigma_z", POVM::from_basis(identity(2), {"0", "1"})},
            {"sigma_x", POVM::from_basis(qubit_basis(1.0), {"+", "-"})}};
}

double rel_dev(double x, double ref) { return ref == 0.0 ? std::abs(x) : std::abs(x - ref) / std::abs(ref); }

std::string fmt(double v) { return format_number(v); }

}  // namespace

Assemblage ghz_assemblage(int n_bob, double phi) {
    require(n_bob >= 1, "ghz: N must be at least 1");
    return assemblage_from_pure(ghz_state(n_bob + 1, phi), qubit_settings());
}

Assemblage ghz_noise_assemblage(int n_bob, double phi, double p) {
    require(n_bob >= 1, "ghz-noise: N must be at least 1");
    const Index db = Index(1) << n_bob;
    return assemblage_from_state(ghz_white_noise(n_bob + 1, phi, p), 2, db, qubit_settings());
}

Assemblage split_dicke_assemblage(int k, int n_a, int n_b) {
    BipartitePureState psi = split_dicke_fixed(k, n_a, n_b);
    return assemblage_from_pure(psi, {{"Jz", POVM::from_basis(identity(n_a + 1), index_labels(n_a + 1))},
                                      {"Jx", POVM::from_basis(cached_jx_basis(n_a), index_labels(n_a + 1))}});
}

DirectSumAssemblage beamsplitter_assemblage(int k, int N, double p, std::vector<HermitianOperator>* jz_blocks) {
    DirectSumAssemblage out;
    if (jz_blocks) jz_blocks->clear();
    for (const SplitSector& s : split_dicke_beamsplitter_sectors(k, N, p)) {
        std::vector<std::string> labels;
        for (int j = 0; j <= s.n_a; ++j) labels.push_back(sector_label(s.n_a, j));
        out.blocks.push_back(assemblage_from_pure(
            s.state, {{"Jz", POVM::from_basis(identity(s.n_a + 1), labels)},
                      {"Jx", POVM::from_basis(cached_jx_basis(s.n_a), labels)}}));
        out.weights.push_back(s.weight);
        if (jz_blocks) jz_blocks->push_back(spin_ops(N - s.n_a).Jz);
    }
    out.validate();
    return out;
}

HermitianOperator labeled_jz(int N) {
    require(N >= 0, "labeled_jz: N must be non-negative");
    RealVector d(labeled_sector_offset(N + 1));
    for (int n = 0; n <= N; ++n)
        for (int j = 0; j <= n; ++j) d(labeled_sector_offset(n) + j) = j - n / 2.0;
    return HermitianOperator::diagonal(d);
}

Assemblage beamsplitter_dense_assemblage(int k, int N, double p) {
    BipartitePureState psi = split_dicke_beamsplitter(k, N, p);
    const Index d = psi.d_a;
    ComplexMatrix ux = ComplexMatrix::Zero(d, d);
    for (int n = 0; n <= N; ++n) ux.block(labeled_sector_offset(n), labeled_sector_offset(n), n + 1, n + 1) = cached_jx_basis(n);
    const std::vector<std::string>& labels = *psi.labels_a;
    return assemblage_from_pure(psi, {{"Jz", POVM::from_basis(identity(d), labels)}, {"Jx", POVM::from_basis(ux, labels)}});
}

Assemblage cat_assemblage(double alpha, int cutoff) {
    BipartitePureState psi = hybrid_cat(alpha, cutoff);
    return assemblage_from_pure(psi, {{"Z", POVM::from_basis(identity(2), {"0", "1"})},
                                      {"X", POVM::from_basis(qubit_basis(1.0), {"+", "-"})},
                                      {"Y", POVM::from_basis(qubit_basis(cplx(0.0, 1.0)), {"+i", "-i"})}});
}

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (v == 0.0) return "0";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string to_csv(const Table& t) {
    std::ostringstream os;
    for (const auto& [k, v] : t.summary) os << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << "\n";
    }
    return os.str();
}

std::string to_json_text(const Table& t) {
    nlohmann::ordered_json j;
    j["columns"] = t.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (double v : row) {
            if (std::isfinite(v))
                r.push_back(v);
            else
                r.push_back(nullptr);
        }
        rows.push_back(r);
    }
    j["rows"] = rows;
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.summary) s[k] = v;
    j["summary"] = s;
    return j.dump(2) + "\n";
}

std::vector<std::vector<double>> parallel_rows(std::size_t n,
                                               const std::function<std::vector<double>(std::size_t)>& fn) {
    std::vector<std::vector<double>> out(n);
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("STEERKIT_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) threads = static_cast<unsigned>(v);
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                next = n;
                return;
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
    return out;
}

Table experiment_ghz(const std::vector<int>& ns, double phi) {
    for (int n : ns) require(n >= 1 && n <= 10, "ghz: N must lie in [1, 10]");
    Table t;
    t.columns = {"N", "cond_qfi", "cond_qfi_ref", "cond_var", "cond_var_ref", "delta", "qfi_reduced", "var_reduced",
                 "rel_dev"};
    t.rows = parallel_rows(ns.size(), [&](std::size_t i) {
        const int n = ns[i];
        Assemblage a = ghz_assemblage(n, phi);
        WitnessReport r = steering_witness(a, collective_qubit_operator(n, pauli_z()));
        const double ref = double(n) * n;
        return std::vector<double>{double(n), r.cond_qfi, ref, r.cond_var, 0.0, r.delta, r.qfi_reduced, r.var_reduced,
                                   rel_dev(r.cond_qfi, ref)};
    });
    t.summary = {{"generator", "J_z on Bob"}, {"settings", "sigma_z,sigma_x"}, {"phi", fmt(phi)}};
    return t;
}

Table experiment_ghz_noise(const std::vector<int>& ns, const std::vector<double>& ps, double phi) {
    for (int n : ns) require(n >= 1 && n <= 10, "ghz-noise: N must lie in [1, 10]");
    for (double p : ps) require(p >= 0.0 && p <= 1.0, "ghz-noise: p must lie in [0, 1]");
    Table t;
    t.columns = {"N",           "p",        "cond_qfi",   "cond_qfi_ref", "cond_var", "cond_var_ref",
                 "delta",       "delta_ref", "detected",  "threshold",    "asymptotic_detected"};
    std::vector<std::pair<int, double>> grid;
    for (int n : ns)
        for (double p : ps) grid.emplace_back(n, p);
    t.rows = parallel_rows(grid.size(), [&](std::size_t i) {
        const auto [n, p] = grid[i];
        Assemblage a = ghz_noise_assemblage(n, phi, p);
        WitnessReport r = steering_witness(a, collective_qubit_operator(n, pauli_z()));
        const double nn = n;
        const double fq_ref = p * p * nn * nn / (p + 2.0 * (1.0 - p) / std::pow(2.0, nn));
        const double var_ref = ((1.0 - p) * nn + p * (1.0 - p) * nn * nn) / 4.0;
        const double threshold = p > 0.0 ? (1.0 - p) / (p * p) : std::numeric_limits<double>::infinity();
        return std::vector<double>{nn,
                                   p,
                                   r.cond_qfi,
                                   fq_ref,
                                   r.cond_var,
                                   var_ref,
                                   r.delta,
                                   fq_ref / 4.0 - var_ref,
                                   r.detected() ? 1.0 : 0.0,
                                   threshold,
                                   nn > threshold ? 1.0 : 0.0};
    });
    t.summary = {{"generator", "J_z on Bob"}, {"phi", fmt(phi)}};
    return t;
}

Table experiment_split_dicke_fig(int N, int k) {
    require(N >= 2 && N % 2 == 0, "split-dicke: N must be even and at least 2");
    require(k >= 0 && k <= N, "split-dicke: k outside [0, N]");
    const int half = N / 2;
    Assemblage a = split_dicke_assemblage(k, half, half);
    HermitianOperator jz = spin_ops(half).Jz;
    const SettingRecord& jx = a.setting("Jx");
    Table t;
    t.columns = {"k_A", "p", "p_ref", "qfi_conditional", "var_conditional", "mean_Jz"};
    for (int ka = 0; ka <= half; ++ka) {
        const Outcome* o = nullptr;
        for (const auto& out : jx.outcomes)
            if (out.label == std::to_string(ka)) o = &out;
        double p_ref = 2 * k == N ? 2.0 / (N + 2.0) : nan_v;
        if (!o) {
            t.rows.push_back({double(ka), 0.0, p_ref, nan_v, nan_v, nan_v});
            continue;
        }
        t.rows.push_back({double(ka), o->probability, p_ref, qfi(o->state, jz), variance(o->state, jz),
                          expectation(o->state, jz.matrix()).real()});
    }
    WitnessReport r = steering_witness(a, jz);
    t.summary = {{"N", std::to_string(N)},
                 {"k", std::to_string(k)},
                 {"cond_qfi", fmt(r.cond_qfi)},
                 {"cond_qfi_ref", 2 * k == N ? fmt(N * (N + 4.0) / 12.0) : ""},
                 {"four_var_reduced", fmt(4.0 * r.var_reduced)},
                 {"cond_var", fmt(r.cond_var)},
                 {"argmax_setting", r.argmax_setting},
                 {"argmin_setting", r.argmin_setting}};
    return t;
}

Table experiment_split_dicke_sweep(int N, const std::vector<int>& ks) {
    require(N >= 2 && N % 2 == 0, "split-dicke: N must be even and at least 2");
    for (int k : ks) require(k >= 0 && k <= N, "split-dicke: k outside [0, N]");
    const int half = N / 2;
    HermitianOperator jz = spin_ops(half).Jz;
    Table t;
    t.columns = {"k",         "cond_qfi", "four_var_reduced", "var_reduced", "var_reduced_ref", "qfi_reduced",
                 "cond_var",  "delta",    "cond_qfi_twin_ref"};
    t.rows = parallel_rows(ks.size(), [&](std::size_t i) {
        const int k = ks[i];
        WitnessReport r = steering_witness(split_dicke_assemblage(k, half, half), jz);
        const double w = std::min(k, half) - std::max(0, k - half);
        return std::vector<double>{double(k),
                                   r.cond_qfi,
                                   4.0 * r.var_reduced,
                                   r.var_reduced,
                                   (w + 2.0) * w / 12.0,
                                   r.qfi_reduced,
                                   r.cond_var,
                                   r.delta,
                                   2 * k == N ? N * (N + 4.0) / 12.0 : nan_v};
    });
    t.summary = {{"N", std::to_string(N)}, {"split", std::to_string(half) + ":" + std::to_string(half)}};
    return t;
}

Table experiment_split_dicke_partition(int N, double p, const std::vector<int>& ks) {
    require(N >= 1, "split-dicke-partition: N must be positive");
    require(p > 0.0 && p < 1.0, "split-dicke-partition: p must lie in (0, 1)");
    for (int k : ks) require(k >= 0 && k <= N, "split-dicke-partition: k outside [0, N]");
    Table t;
    t.columns = {"k", "var_reduced", "var_reduced_ref", "qfi_reduced", "cond_var", "cond_qfi", "four_var_reduced",
                 "delta"};
    t.rows = parallel_rows(ks.size(), [&](std::size_t i) {
        std::vector<HermitianOperator> jz;
        DirectSumAssemblage a = beamsplitter_assemblage(ks[i], N, p, &jz);
        WitnessReport r = steering_witness(a, jz);
        return std::vector<double>{double(ks[i]), r.var_reduced, N * p * (1.0 - p) / 4.0, r.qfi_reduced, r.cond_var,
                                   r.cond_qfi,    4.0 * r.var_reduced, r.delta};
    });
    t.summary = {{"N", std::to_string(N)}, {"p", fmt(p)}, {"alice_readout", "N_A with Jz or Jx"}};
    return t;
}

Table experiment_cat(const std::vector<double>& alphas) {
    for (double a : alphas) require(a >= 0.0 && std::isfinite(a), "cat: alpha must be finite and non-negative");
    Table t;
    t.columns = {"alpha",        "cutoff",       "cond_var_x", "cond_var_x_ref", "cond_qfi_x", "cond_qfi_x_ref",
                 "cond_var_p",   "cond_var_p_ref", "inv_cond_var_p", "reid_lhs", "reid_rhs", "delta"};
    t.rows = parallel_rows(alphas.size(), [&](std::size_t i) {
        const double al = alphas[i];
        const int cutoff = default_fock_cutoff(al);
        Assemblage a = cat_assemblage(al, cutoff);
        FockSpace f = fock_space(cutoff);
        WitnessReport r = steering_witness(a, f.x);
        ReidResult reid = reid_witness(a, f.x, f.p);
        const double vp = conditional_variance(a, f.p).value;
        const double a2 = al * al;
        return std::vector<double>{al,
                                   double(cutoff),
                                   r.cond_var,
                                   0.5,
                                   r.cond_qfi,
                                   8.0 * a2 + 2.0,
                                   vp,
                                   0.5 - 2.0 * a2 * std::exp(-4.0 * a2),
                                   1.0 / vp,
                                   reid.lhs,
                                   reid.rhs,
                                   r.delta};
    });
    t.summary = {{"generator", "x = (a + a^dagger)/sqrt(2)"}, {"settings", "Z,X,Y"}};
    return t;
}

Table experiment_quantify(double step) {
    require(step > 0.0 && step <= 0.5, "quantify: step must lie in (0, 0.5]");
    const int m = static_cast<int>(std::lround(1.0 / step));
    require(std::abs(m * step - 1.0) < 1e-9, "quantify: 1/step must be an integer");
    Table t;
    t.columns = {"p1", "p2", "p3", "s_max", "s_avg", "s_avg_normalized"};
    double best = -1.0;
    std::string arg;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; i + j <= m; ++j) {
            RealVector p(3);
            p << double(i) / m, double(j) / m, double(m - i - j) / m;
            const double smax = s_max_pure(p);
            const double savg = s_avg_pure(p);
            t.rows.push_back({p(0), p(1), p(2), smax, savg, savg / 8.0});
            if (smax > best + 1e-12) {
                best = smax;
                // Report the permutation-invariant maximiser in descending order.
                RealVector q = p;
                std::sort(q.begin(), q.end(), std::greater<>());
                arg = "(" + fmt(q(0)) + "," + fmt(q(1)) + "," + fmt(q(2)) + ")";
            }
        }
    t.summary = {{"d", "3"}, {"step", fmt(step)}, {"s_max_max", fmt(best)}, {"s_max_argmax", arg}};
    return t;
}

Table experiment_multigen(const std::vector<int>& dims, std::uint64_t seed) {
    for (int d : dims) require(d >= 2 && d <= 8, "multigen: d must lie in [2, 8]");
    Table t;
    t.columns = {"d", "kind", "value", "value_ref", "lhs_bound", "violated"};
    t.rows = parallel_rows(2 * dims.size(), [&](std::size_t i) {
        const int d = dims[i / 2];
        const bool random = i % 2 == 1;
        ComplexVector v = ComplexVector::Zero(Index(d) * d);
        if (random) {
            CounterRng rng(derive_seed(seed, i));
            v = random_pure_vector(Index(d) * d, rng);
        } else {
            for (int j = 0; j < d; ++j) v(Index(j) * d + j) = 1.0 / std::sqrt(double(d));
        }
        BipartitePureState psi(d, d, PureState::normalized(v));
        GeneratorBasis basis = gellmann_basis(d);
        std::vector<Setting> settings;
        for (std::size_t g = 0; g < basis.generators.size(); ++g)
            settings.push_back({"opt" + std::to_string(g), optimal_povm_qfi(psi, basis.generators[g])});
        MultiGeneratorResult r = multi_generator_sum(assemblage_from_pure(psi, settings), basis);
        RealVector p = schmidt(psi).coefficients;
        const double ref = 4.0 * (d - 1) + 4.0 * (1.0 - p.squaredNorm());
        return std::vector<double>{double(d), random ? 1.0 : 0.0, r.value, ref, r.lhs_bound, r.violated ? 1.0 : 0.0};
    });
    t.summary = {{"seed", std::to_string(seed)}, {"kind", "0 maximally entangled, 1 random pure"}};
    return t;
}

Table experiment_estimate(long long shots, int reps, double theta, std::uint64_t seed) {
    require(shots >= 1, "estimate: shots must be positive");
    require(reps >= 2, "estimate: reps must be at least 2");
    // Bob holds |+>, H = sigma_z/2, M = sigma_y; Alice's qubit is uncorrelated.
    BipartitePureState psi = product_state(PureState::basis(2, 0), PureState::normalized(ComplexVector::Ones(2)));
    Assemblage a = assemblage_from_pure(psi, {{"Z", POVM::from_basis(identity(2), {"0", "1"})}});
    HermitianOperator h(pauli_z() / 2.0);
    SampleRun run = moment_estimator_validation(a, h, {"Z", {HermitianOperator(pauli_y())}}, theta, shots, reps, seed);
    Table t;
    t.columns = {"rep", "estimate"};
    for (std::size_t r = 0; r < run.estimates.size(); ++r) t.rows.push_back({double(r), run.estimates[r]});
    t.summary = {{"seed", std::to_string(seed)},
                 {"n_shots", std::to_string(shots)},
                 {"theta_true", fmt(theta)},
                 {"mean_estimate", fmt(run.mean_estimate)},
                 {"empirical_var", fmt(run.empirical_var)},
                 {"predicted_var", fmt(run.predicted_var)},
                 {"rel_std_error", fmt(run.rel_std_error)},
                 {"consistent", run.consistent ? "true" : "false"}};
    return t;
}

namespace {

long long parse_integer(const std::string& s, const std::string& whole) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != s.size()) throw ValidationError("invalid integer range '" + whole + "'");
    return v;
}

double parse_double(const std::string& s, const std::string& whole) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != s.size() || !std::isfinite(v)) throw ValidationError("invalid numeric range '" + whole + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

}  // namespace

std::vector<int> parse_int_range(const std::string& s) {
    std::vector<int> out;
    for (const std::string& part : split(s, ',')) {
        std::vector<long long> vals;
        if (auto dots = part.find(".."); dots != std::string::npos) {
            long long a = parse_integer(part.substr(0, dots), s), b = parse_integer(part.substr(dots + 2), s);
            if (b < a) throw ValidationError("empty integer range '" + s + "'");
            for (long long v = a; v <= b; ++v) vals.push_back(v);
        } else if (part.find(':') != std::string::npos) {
            auto f = split(part, ':');
            if (f.size() != 3) throw ValidationError("invalid integer range '" + s + "'");
            long long a = parse_integer(f[0], s), b = parse_integer(f[1], s), st = parse_integer(f[2], s);
            if (st <= 0 || b < a) throw ValidationError("empty integer range '" + s + "'");
            for (long long v = a; v <= b; v += st) vals.push_back(v);
        } else {
            vals.push_back(parse_integer(part, s));
        }
        for (long long v : vals) {
            if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
                throw ValidationError("integer out of range in '" + s + "'");
            out.push_back(static_cast<int>(v));
        }
        if (out.size() > 1000000) throw ValidationError("range '" + s + "' is too long");
    }
    if (out.empty()) throw ValidationError("empty range");
    return out;
}

std::vector<double> parse_real_range(const std::string& s) {
    std::vector<double> out;
    for (const std::string& part : split(s, ',')) {
        if (part.find(':') == std::string::npos) {
            out.push_back(parse_double(part, s));
            continue;
        }
        auto f = split(part, ':');
        if (f.size() != 3) throw ValidationError("invalid numeric range '" + s + "'");
        double a = parse_double(f[0], s), b = parse_double(f[1], s), st = parse_double(f[2], s);
        if (st <= 0.0 || b < a) throw ValidationError("empty numeric range '" + s + "'");
        const double count = std::floor((b - a) / st + 0.5);
        if (count > 1e6) throw ValidationError("range '" + s + "' is too long");
        for (long long i = 0; i <= static_cast<long long>(count); ++i) out.push_back(a + double(i) * st);
    }
    if (out.empty()) throw ValidationError("empty range");
    return out;
}

}  // namespace steerkit
