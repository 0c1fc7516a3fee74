#include "steerkit/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "steerkit/errors.hpp"

namespace steerkit::io {

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
    throw SchemaError("schema error at " + where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) schema(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) schema(where, std::string("missing field '") + key + "'");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) schema(where, "expected a number");
    return j.get<double>();
}

Index positive_int(const json& j, const std::string& where) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) schema(where, "expected an integer");
    long long v = j.get<long long>();
    if (v <= 0) schema(where, "expected a positive integer");
    return static_cast<Index>(v);
}

cplx complex_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) schema(where, "expected a complex number [re, im]");
    return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

// Runs a constructor and prefixes invariant failures with the field path.
template <class F>
auto validated(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const SchemaError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    }
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) schema(where, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) schema(at(where, i), "expected a string");
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

}  // namespace

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json to_json(const BipartitePureState& psi) {
    json j;
    j["type"] = "bipartite_pure";
    j["dims"] = {psi.d_a, psi.d_b};
    if (psi.labels_a || psi.labels_b) {
        j["basis_labels"] = json::object();
        if (psi.labels_a) j["basis_labels"]["A"] = *psi.labels_a;
        if (psi.labels_b) j["basis_labels"]["B"] = *psi.labels_b;
    }
    json amps = json::array();
    for (Index i = 0; i < psi.state.dim(); ++i) amps.push_back(to_json(psi.state.amplitudes()(i)));
    j["amplitudes"] = amps;
    return j;
}

json to_json(const DensityMatrix& rho) {
    json j;
    j["type"] = "density_matrix";
    j["dims"] = {rho.dim()};
    j["rho"] = to_json(rho.matrix());
    return j;
}

json to_json(const Assemblage& a) {
    json j;
    j["d_B"] = a.d_b();
    j["settings"] = json::array();
    for (const auto& s : a.settings()) {
        json js;
        js["label"] = s.label;
        js["outcomes"] = json::array();
        for (const auto& o : s.outcomes)
            js["outcomes"].push_back({{"label", o.label}, {"p", o.probability}, {"rho", to_json(to_density(o.state).matrix())}});
        j["settings"].push_back(js);
    }
    return j;
}

json to_json(const WitnessReport& r) {
    json j;
    j["cond_qfi"] = r.cond_qfi;
    j["cond_var"] = r.cond_var;
    j["delta"] = r.delta;
    j["steering_detected"] = r.detected();
    j["qfi_reduced"] = r.qfi_reduced;
    j["var_reduced"] = r.var_reduced;
    j["argmax_setting"] = r.argmax_setting;
    j["argmin_setting"] = r.argmin_setting;
    j["bounds_hold"] = bounds_check(r);
    if (r.reid) {
        json reid;
        reid["lhs"] = r.reid->lhs;
        reid["rhs"] = r.reid->rhs;
        reid["violated"] = r.reid->violated;
        if (std::isfinite(r.reid->commutator_bound)) reid["commutator_bound"] = r.reid->commutator_bound;
        else reid["commutator_bound"] = nullptr;
        reid["commutator_bound_holds"] = r.reid->bound_holds;
        j["reid_lhs_rhs"] = reid;
    }
    if (r.s_max_pure) j["s_max_pure"] = *r.s_max_pure;
    if (r.s_avg_pure) j["s_avg_pure"] = *r.s_avg_pure;
    if (r.s_lower_bound) {
        j["s_lower_bound"] = *r.s_lower_bound;
        j["s_lower_bound_meta"] = {{"kind", "lower_bound"}, {"traceless_generators", true}};
    }
    return j;
}

json to_json(const SampleRun& run) {
    json j;
    j["seed"] = run.seed;
    j["n_shots"] = run.n_shots;
    j["theta_true"] = run.theta_true;
    j["estimates"] = run.estimates;
    j["empirical_var"] = run.empirical_var;
    j["mean_estimate"] = run.mean_estimate;
    j["predicted_var"] = run.predicted_var;
    j["var_m_est"] = run.var_m_est;
    j["derivative"] = run.derivative;
    j["derivative_fd"] = run.derivative_fd;
    j["rel_std_error"] = run.rel_std_error;
    j["saturated"] = run.saturated;
    j["consistent"] = run.consistent;
    return j;
}

ComplexMatrix matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) schema(where, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) schema(at(where, 0), "expected a non-empty row");
    const std::size_t cols = j[0].size();
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) schema(at(where, r), "row length differs from first row");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = complex_from(j[r][c], at(at(where, r), c));
    }
    return m;
}

BipartitePureState bipartite_from_json(const json& j) {
    const json& dims = field(j, "dims", "state");
    if (!dims.is_array() || dims.size() != 2) schema("state.dims", "expected [d_A, d_B]");
    Index da = positive_int(dims[0], "state.dims[0]");
    Index db = positive_int(dims[1], "state.dims[1]");
    const json& amps = field(j, "amplitudes", "state");
    if (!amps.is_array()) schema("state.amplitudes", "expected an array");
    if (static_cast<Index>(amps.size()) != da * db)
        schema("state.amplitudes", "expected " + std::to_string(da * db) + " entries, got " + std::to_string(amps.size()));
    ComplexVector v(amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i) v(i) = complex_from(amps[i], at("state.amplitudes", i));
    BipartitePureState psi = validated("state", [&] { return BipartitePureState(da, db, PureState(v)); });
    if (auto it = j.find("basis_labels"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) schema("state.basis_labels", "expected an object with keys A and B");
        if (it->contains("A")) psi.labels_a = string_list((*it)["A"], "state.basis_labels.A");
        if (it->contains("B")) psi.labels_b = string_list((*it)["B"], "state.basis_labels.B");
        if (psi.labels_a && static_cast<Index>(psi.labels_a->size()) != da) schema("state.basis_labels.A", "length != d_A");
        if (psi.labels_b && static_cast<Index>(psi.labels_b->size()) != db) schema("state.basis_labels.B", "length != d_B");
    }
    return psi;
}

DensityMatrix density_from_json(const json& j) {
    ComplexMatrix m = matrix_from_json(field(j, "rho", "state"), "state.rho");
    return validated("state.rho", [&] { return DensityMatrix(m); });
}

Assemblage assemblage_from_json(const json& j) {
    Index db = positive_int(field(j, "d_B", "assemblage"), "assemblage.d_B");
    const json& settings = field(j, "settings", "assemblage");
    if (!settings.is_array()) schema("assemblage.settings", "expected an array");
    std::vector<SettingRecord> records;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        std::string ws = at("settings", s);
        const json& label = field(settings[s], "label", ws);
        if (!label.is_string()) schema(ws + ".label", "expected a string");
        SettingRecord rec{label.get<std::string>(), {}, std::nullopt};
        const json& outcomes = field(settings[s], "outcomes", ws);
        if (!outcomes.is_array()) schema(ws + ".outcomes", "expected an array");
        for (std::size_t o = 0; o < outcomes.size(); ++o) {
            std::string wo = at(ws + ".outcomes", o);
            double p = number(field(outcomes[o], "p", wo), wo + ".p");
            ComplexMatrix m = matrix_from_json(field(outcomes[o], "rho", wo), wo + ".rho");
            std::string olabel = std::to_string(o);
            if (auto it = outcomes[o].find("label"); it != outcomes[o].end()) {
                if (!it->is_string()) schema(wo + ".label", "expected a string");
                olabel = it->get<std::string>();
            }
            DensityMatrix rho = validated(wo + ".rho", [&] { return DensityMatrix(m); });
            rec.outcomes.push_back({olabel, p, rho});
        }
        records.push_back(std::move(rec));
    }
    return validated("assemblage", [&] { return Assemblage(db, std::move(records)); });
}

HermitianOperator operator_from_json(const json& j) {
    const json& m = j.is_object() ? field(j, "matrix", "operator") : j;
    ComplexMatrix mat = matrix_from_json(m, "operator.matrix");
    return validated("operator", [&] { return HermitianOperator(mat); });
}

std::vector<Setting> settings_from_json(const json& j, Index d_a) {
    const json& list = j.is_object() ? field(j, "settings", "povms") : j;
    if (!list.is_array() || list.empty()) schema("povms.settings", "expected a non-empty array");
    std::vector<Setting> out;
    for (std::size_t s = 0; s < list.size(); ++s) {
        std::string ws = at("povms.settings", s);
        const json& label = field(list[s], "label", ws);
        if (!label.is_string()) schema(ws + ".label", "expected a string");
        std::vector<std::string> labels;
        if (auto it = list[s].find("outcome_labels"); it != list[s].end()) labels = string_list(*it, ws + ".outcome_labels");
        POVM povm;
        if (auto it = list[s].find("basis"); it != list[s].end()) {
            ComplexMatrix u = matrix_from_json(*it, ws + ".basis");
            povm = validated(ws, [&] { return POVM::from_basis(u, labels); });
        } else {
            const json& effects = field(list[s], "effects", ws);
            if (!effects.is_array()) schema(ws + ".effects", "expected an array of matrices");
            std::vector<HermitianOperator> ops;
            for (std::size_t e = 0; e < effects.size(); ++e) {
                ComplexMatrix m = matrix_from_json(effects[e], at(ws + ".effects", e));
                ops.push_back(validated(at(ws + ".effects", e), [&] { return HermitianOperator(m); }));
            }
            povm = validated(ws, [&] { return POVM(ops, labels); });
        }
        if (povm.dim() != d_a) schema(ws, "POVM dimension " + std::to_string(povm.dim()) + " != d_A " + std::to_string(d_a));
        out.push_back({label.get<std::string>(), povm});
    }
    return out;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t pos = std::min<std::size_t>(e.byte, text.size());
        std::size_t line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos > 0 ? pos - 1 : 0), '\n');
        throw SchemaError(path + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw ValidationError("failed writing " + path);
}

StateInput load_state(const std::string& path) {
    json j = read_json(path);
    if (!j.is_object()) schema("state", "expected an object");
    std::string type = j.value("type", j.contains("amplitudes") ? "bipartite_pure" : "density_matrix");
    if (type == "bipartite_pure") return bipartite_from_json(j);
    if (type != "density_matrix") schema("state.type", "unknown state type '" + type + "'");
    DensityMatrix rho = density_from_json(j);
    MixedInput in{rho, 1, rho.dim()};
    if (auto it = j.find("dims"); it != j.end()) {
        if (!it->is_array() || (it->size() != 1 && it->size() != 2)) schema("state.dims", "expected [d] or [d_A, d_B]");
        if (it->size() == 2) {
            in.d_a = positive_int((*it)[0], "state.dims[0]");
            in.d_b = positive_int((*it)[1], "state.dims[1]");
            if (in.d_a * in.d_b != rho.dim()) schema("state.dims", "d_A * d_B does not match rho");
        }
    }
    return in;
}

Assemblage load_assemblage(const std::string& path) { return assemblage_from_json(read_json(path)); }

void save_state(const std::string& path, const BipartitePureState& psi) { write_json(path, to_json(psi)); }

void save_assemblage(const std::string& path, const Assemblage& a) { write_json(path, to_json(a)); }

}  // namespace steerkit::io
