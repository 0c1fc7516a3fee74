#include "steerkit/assemblage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "steerkit/errors.hpp"
#include "steerkit/policy.hpp"

namespace steerkit {

namespace {

// p * rho for one outcome.
ComplexMatrix weighted(const Outcome& o) {
    if (const auto* psi = std::get_if<PureState>(&o.state)) return o.probability * psi->projector();
    return o.probability * std::get<DensityMatrix>(o.state).matrix();
}

ComplexMatrix marginal(const SettingRecord& s, Index d) {
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    for (const auto& o : s.outcomes) m += weighted(o);
    return m;
}

void require_nonempty(const Assemblage& a) {
    if (a.settings().empty()) throw ValidationError("empty assemblage: no measurement settings");
}

double scaled_tol(std::initializer_list<double> values) {
    double s = 1.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return tol::witness * s;
}

// Conditional state from the unnormalized operator r with probability p = tr r.
Outcome conditional(std::string label, const ComplexMatrix& r) {
    double p = r.trace().real();
    return {std::move(label), p, DensityMatrix(r / p)};
}

}  // namespace

Assemblage::Assemblage(Index d_b, std::vector<SettingRecord> settings) : d_b_(d_b), settings_(std::move(settings)) {
    if (d_b_ <= 0) throw ValidationError("assemblage: Bob dimension must be positive");
    for (auto& s : settings_) {
        if (s.outcomes.empty()) throw ValidationError("setting '" + s.label + "' has no outcomes");
        double total = 0.0;
        for (const auto& o : s.outcomes) {
            if (!(o.probability >= 0.0) || !std::isfinite(o.probability)) {
                std::ostringstream os;
                os << "setting '" << s.label << "': outcome '" << o.label << "' has invalid probability "
                   << o.probability;
                throw ValidationError(os.str());
            }
            if (dim(o.state) != d_b_) {
                std::ostringstream os;
                os << "setting '" << s.label << "': outcome '" << o.label << "' has state dimension "
                   << dim(o.state) << ", expected " << d_b_;
                throw ValidationError(os.str());
            }
            total += o.probability;
        }
        if (std::abs(total - 1.0) > tol::prob_sum) {
            std::ostringstream os;
            os << "setting '" << s.label << "': outcome probabilities sum to " << total;
            throw ValidationError(os.str());
        }
        std::erase_if(s.outcomes, [](const Outcome& o) { return o.probability < tol::zero_prob; });
    }
    for (std::size_t i = 0; i < settings_.size(); ++i)
        for (std::size_t j = i + 1; j < settings_.size(); ++j)
            if (settings_[i].label == settings_[j].label)
                throw ValidationError("duplicate setting label '" + settings_[i].label + "'");
    if (settings_.size() > 1) {
        ComplexMatrix ref = marginal(settings_.front(), d_b_);
        for (std::size_t i = 1; i < settings_.size(); ++i) {
            double dev = max_abs(marginal(settings_[i], d_b_) - ref);
            if (dev > tol::no_signal) {
                std::ostringstream os;
                os << "no-signalling violated: setting '" << settings_[i].label << "' differs from '"
                   << settings_.front().label << "' by max deviation " << dev;
                throw ValidationError(os.str());
            }
        }
    }
}

const SettingRecord& Assemblage::setting(const std::string& label) const {
    for (const auto& s : settings_)
        if (s.label == label) return s;
    throw ValidationError("assemblage has no setting '" + label + "'");
}

DensityMatrix Assemblage::reduced_state() const {
    require_nonempty(*this);
    ComplexMatrix m = marginal(settings_.front(), d_b_);
    return DensityMatrix(m / m.trace().real());
}

double Assemblage::signalling_deviation() const {
    if (settings_.size() < 2) return 0.0;
    ComplexMatrix ref = marginal(settings_.front(), d_b_);
    double dev = 0.0;
    for (std::size_t i = 1; i < settings_.size(); ++i) dev = std::max(dev, max_abs(marginal(settings_[i], d_b_) - ref));
    return dev;
}

std::vector<double> Assemblage::average_variance(const HermitianOperator& h) const {
    std::vector<double> out;
    for (const auto& s : settings_) {
        double v = 0.0;
        for (const auto& o : s.outcomes) v += o.probability * variance(o.state, h);
        out.push_back(v);
    }
    return out;
}

std::vector<double> Assemblage::average_qfi(const HermitianOperator& h) const {
    std::vector<double> out;
    for (const auto& s : settings_) {
        double f = 0.0;
        for (const auto& o : s.outcomes) f += o.probability * qfi(o.state, h);
        out.push_back(f);
    }
    return out;
}

Assemblage assemblage_from_state(const DensityMatrix& rho_ab, Index d_a, Index d_b, const std::vector<Setting>& settings) {
    if (d_a <= 0 || d_b <= 0 || rho_ab.dim() != d_a * d_b)
        throw ValidationError("assemblage_from_state: state dimension does not factor as d_A x d_B");
    const ComplexMatrix& rho = rho_ab.matrix();
    std::vector<SettingRecord> records;
    for (const auto& st : settings) {
        if (st.povm.dim() != d_a) throw ValidationError("setting '" + st.label + "': POVM does not act on Alice's space");
        SettingRecord rec{st.label, {}, st.povm};
        for (std::size_t x = 0; x < st.povm.size(); ++x) {
            const ComplexMatrix& e = st.povm.effects()[x].matrix();
            ComplexMatrix r = ComplexMatrix::Zero(d_b, d_b);
            for (Index a = 0; a < d_a; ++a)
                for (Index ap = 0; ap < d_a; ++ap)
                    if (e(a, ap) != cplx(0.0)) r += e(a, ap) * rho.block(ap * d_b, a * d_b, d_b, d_b);
            if (r.trace().real() < tol::zero_prob) continue;
            rec.outcomes.push_back(conditional(st.povm.labels()[x], r));
        }
        records.push_back(std::move(rec));
    }
    return Assemblage(d_b, std::move(records));
}

Assemblage assemblage_from_pure(const BipartitePureState& psi, const std::vector<Setting>& settings) {
    const ComplexMatrix c = psi.coefficients();
    std::vector<SettingRecord> records;
    for (const auto& st : settings) {
        if (st.povm.dim() != psi.d_a)
            throw ValidationError("setting '" + st.label + "': POVM does not act on Alice's space");
        SettingRecord rec{st.label, {}, st.povm};
        if (const auto& u = st.povm.basis()) {
            // Rank-1 effect |u><u| leaves Bob in C^T conj(u), unnormalized.
            ComplexMatrix vecs = c.transpose() * u->conjugate();
            for (Index k = 0; k < vecs.cols(); ++k) {
                double p = vecs.col(k).squaredNorm();
                if (p < tol::zero_prob) continue;
                rec.outcomes.push_back({st.povm.labels()[k], p, PureState::normalized(vecs.col(k))});
            }
        } else {
            for (std::size_t x = 0; x < st.povm.size(); ++x) {
                ComplexMatrix r = c.transpose() * st.povm.effects()[x].matrix().transpose() * c.conjugate();
                if (r.trace().real() < tol::zero_prob) continue;
                rec.outcomes.push_back(conditional(st.povm.labels()[x], r));
            }
        }
        records.push_back(std::move(rec));
    }
    return Assemblage(psi.d_b, std::move(records));
}

Assemblage mix_assemblages(const Assemblage& a1, const Assemblage& a2, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("mix_assemblages: weight outside [0,1]");
    if (a1.d_b() != a2.d_b() || a1.settings().size() != a2.settings().size())
        throw ValidationError("mix_assemblages: assemblages are not compatible");
    std::vector<SettingRecord> out;
    for (std::size_t s = 0; s < a1.settings().size(); ++s) {
        const auto& s1 = a1.settings()[s];
        const auto& s2 = a2.settings()[s];
        if (s1.label != s2.label) throw ValidationError("mix_assemblages: setting labels differ");
        std::vector<std::string> order;
        std::map<std::string, ComplexMatrix> acc;
        auto add = [&](const SettingRecord& rec, double w) {
            for (const auto& o : rec.outcomes) {
                auto [it, fresh] = acc.try_emplace(o.label, ComplexMatrix::Zero(a1.d_b(), a1.d_b()));
                if (fresh) order.push_back(o.label);
                it->second += w * weighted(o);
            }
        };
        add(s1, t);
        add(s2, 1.0 - t);
        SettingRecord rec{s1.label, {}, std::nullopt};
        for (const auto& label : order) {
            const ComplexMatrix& r = acc[label];
            if (r.trace().real() < tol::zero_prob) continue;
            rec.outcomes.push_back(conditional(label, r));
        }
        out.push_back(std::move(rec));
    }
    return Assemblage(a1.d_b(), std::move(out));
}

void LHSModel::validate() const {
    const Index n = weights.size();
    if (n == 0 || static_cast<Index>(local_states.size()) != n)
        throw ValidationError("LHS model: weights and local states must have equal, positive length");
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > tol::lhs_weights)
        throw ValidationError("LHS model: hidden-variable weights are not a probability vector");
    for (const auto& s : local_states)
        if (s.dim() != local_states.front().dim()) throw ValidationError("LHS model: local states differ in dimension");
    for (const auto& r : responses) {
        if (r.p.cols() != n || r.p.rows() == 0)
            throw ValidationError("LHS model: response table '" + r.label + "' has wrong shape");
        if ((r.p.array() < 0.0).any()) throw ValidationError("LHS model: response table '" + r.label + "' is negative");
        for (Index l = 0; l < n; ++l)
            if (std::abs(r.p.col(l).sum() - 1.0) > tol::lhs_weights)
                throw ValidationError("LHS model: response table '" + r.label + "' column is not a distribution");
        if (!r.outcome_labels.empty() && static_cast<Index>(r.outcome_labels.size()) != r.p.rows())
            throw ValidationError("LHS model: response table '" + r.label + "' label count mismatch");
    }
}

Assemblage assemblage_from_lhs(const LHSModel& model) {
    model.validate();
    const Index d = model.local_states.front().dim();
    std::vector<SettingRecord> records;
    for (const auto& r : model.responses) {
        SettingRecord rec{r.label, {}, std::nullopt};
        for (Index a = 0; a < r.p.rows(); ++a) {
            ComplexMatrix m = ComplexMatrix::Zero(d, d);
            for (Index l = 0; l < model.weights.size(); ++l)
                m += r.p(a, l) * model.weights(l) * model.local_states[l].matrix();
            if (m.trace().real() < tol::zero_prob) continue;
            std::string label = r.outcome_labels.empty() ? std::to_string(a) : r.outcome_labels[a];
            rec.outcomes.push_back(conditional(label, m));
        }
        records.push_back(std::move(rec));
    }
    return Assemblage(d, std::move(records));
}

namespace {

// Values within rounding of the current best count as ties; the earlier setting wins.
SettingOptimum pick(const std::vector<double>& values, const std::vector<std::string>& labels, bool maximize) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double margin = 1e-12 * std::max(1.0, std::abs(values[best]));
        if (maximize ? values[i] > values[best] + margin : values[i] < values[best] - margin) best = i;
    }
    return {values[best], labels[best]};
}

std::vector<std::string> labels_of(const Assemblage& a) {
    std::vector<std::string> out;
    for (const auto& s : a.settings()) out.push_back(s.label);
    return out;
}

}  // namespace

SettingOptimum conditional_variance(const Assemblage& a, const HermitianOperator& h) {
    require_nonempty(a);
    if (h.dim() != a.d_b()) throw ValidationError("conditional_variance: generator dimension mismatch");
    return pick(a.average_variance(h), labels_of(a), false);
}

SettingOptimum conditional_qfi(const Assemblage& a, const HermitianOperator& h) {
    require_nonempty(a);
    if (h.dim() != a.d_b()) throw ValidationError("conditional_qfi: generator dimension mismatch");
    return pick(a.average_qfi(h), labels_of(a), true);
}

bool WitnessReport::detected() const { return delta > tol::witness; }

WitnessReport steering_witness(const Assemblage& a, const HermitianOperator& h) {
    WitnessReport r;
    SettingOptimum f = conditional_qfi(a, h);
    SettingOptimum v = conditional_variance(a, h);
    r.cond_qfi = f.value;
    r.argmax_setting = f.setting;
    r.cond_var = v.value;
    r.argmin_setting = v.setting;
    r.delta = r.cond_qfi / 4.0 - r.cond_var;
    DensityMatrix rb = a.reduced_state();
    r.qfi_reduced = qfi(rb, h);
    r.var_reduced = variance(rb, h);
    return r;
}

ReidResult reid_witness(const Assemblage& a, const HermitianOperator& h, const HermitianOperator& m) {
    ReidResult out;
    double vh = conditional_variance(a, h).value;
    double vm = conditional_variance(a, m).value;
    DensityMatrix rb = a.reduced_state();
    double c2 = std::norm(rb.matrix().cwiseProduct(commutator(h.matrix(), m.matrix()).transpose()).sum());
    out.lhs = vh * vm;
    out.rhs = c2 / 4.0;
    out.violated = out.lhs + tol::witness < out.rhs;
    if (vm > 1e-14) {
        out.commutator_bound = c2 / vm;
        double fq = conditional_qfi(a, h).value;
        out.bound_holds = out.commutator_bound <= fq + scaled_tol({fq});
    } else {
        out.commutator_bound = std::numeric_limits<double>::quiet_NaN();
        out.bound_holds = c2 <= tol::witness;
    }
    return out;
}

double joint_cfi(const Assemblage& a, const std::string& setting_a, const POVM& povm_b, const HermitianOperator& h) {
    const SettingRecord& s = a.setting(setting_a);
    double f = 0.0;
    for (const auto& o : s.outcomes) f += o.probability * cfi(povm_b, o.state, h);
    return f;
}

bool bounds_check(const WitnessReport& r) {
    auto le = [](double x, double y) { return x <= y + scaled_tol({x, y}); };
    return le(r.qfi_reduced, r.cond_qfi) && le(r.cond_qfi, 4.0 * r.var_reduced) && le(r.qfi_reduced, 4.0 * r.cond_var) &&
           le(4.0 * r.cond_var, 4.0 * r.var_reduced);
}

void DirectSumAssemblage::validate() const {
    if (blocks.empty() || blocks.size() != weights.size())
        throw ValidationError("direct-sum assemblage: weights and blocks must have equal, positive length");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("direct-sum assemblage: negative block weight");
        total += w;
    }
    if (std::abs(total - 1.0) > tol::prob_sum) throw ValidationError("direct-sum assemblage: block weights do not sum to 1");
    auto ref = labels_of(blocks.front());
    for (const auto& b : blocks)
        if (labels_of(b) != ref) throw ValidationError("direct-sum assemblage: blocks have different settings");
}

std::vector<std::string> DirectSumAssemblage::setting_labels() const { return labels_of(blocks.front()); }

std::vector<WeightedBlock> DirectSumAssemblage::reduced_blocks() const {
    std::vector<WeightedBlock> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) out.push_back({weights[b], blocks[b].reduced_state()});
    return out;
}

namespace {

std::vector<double> block_averages(const DirectSumAssemblage& a, const std::vector<HermitianOperator>& h, bool use_qfi) {
    a.validate();
    if (h.size() != a.blocks.size()) throw ValidationError("direct-sum assemblage: generator block count mismatch");
    std::vector<double> total(a.setting_labels().size(), 0.0);
    for (std::size_t b = 0; b < a.blocks.size(); ++b) {
        auto v = use_qfi ? a.blocks[b].average_qfi(h[b]) : a.blocks[b].average_variance(h[b]);
        for (std::size_t s = 0; s < v.size(); ++s) total[s] += a.weights[b] * v[s];
    }
    return total;
}

}  // namespace

SettingOptimum conditional_variance(const DirectSumAssemblage& a, const std::vector<HermitianOperator>& h) {
    return pick(block_averages(a, h, false), a.setting_labels(), false);
}

SettingOptimum conditional_qfi(const DirectSumAssemblage& a, const std::vector<HermitianOperator>& h) {
    return pick(block_averages(a, h, true), a.setting_labels(), true);
}

WitnessReport steering_witness(const DirectSumAssemblage& a, const std::vector<HermitianOperator>& h) {
    WitnessReport r;
    SettingOptimum f = conditional_qfi(a, h);
    SettingOptimum v = conditional_variance(a, h);
    r.cond_qfi = f.value;
    r.argmax_setting = f.setting;
    r.cond_var = v.value;
    r.argmin_setting = v.setting;
    r.delta = r.cond_qfi / 4.0 - r.cond_var;
    auto blocks = a.reduced_blocks();
    r.qfi_reduced = qfi_direct_sum(blocks, h);
    r.var_reduced = variance_direct_sum(blocks, h);
    return r;
}

}  // namespace steerkit
