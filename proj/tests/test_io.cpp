#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "steerkit/errors.hpp"
#include "steerkit/experiments.hpp"
#include "steerkit/io.hpp"
#include "steerkit/sampling.hpp"

#include "test_support.hpp"

using namespace steerkit;
using json = nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("steerkit_io_" + name)).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

json qubit_rho(double p0) {
    return json::array({json::array({json::array({p0, 0.0}), json::array({0.0, 0.0})}),
                        json::array({json::array({0.0, 0.0}), json::array({1.0 - p0, 0.0})})});
}

// Two settings on a qubit; the second setting's marginal is shifted by `shift`.
json two_setting_assemblage(double p_sum, double shift) {
    json a;
    a["d_B"] = 2;
    a["settings"] = json::array();
    a["settings"].push_back({{"label", "Z"},
                             {"outcomes", json::array({{{"label", "0"}, {"p", 0.5}, {"rho", qubit_rho(1.0)}},
                                                       {{"label", "1"}, {"p", 0.5}, {"rho", qubit_rho(0.0)}}})}});
    a["settings"].push_back({{"label", "W"},
                             {"outcomes", json::array({{{"label", "a"}, {"p", p_sum / 2.0}, {"rho", qubit_rho(0.5 + shift)}},
                                                       {{"label", "b"}, {"p", p_sum / 2.0}, {"rho", qubit_rho(0.5 - shift)}}})}});
    return a;
}

template <class E, class F>
std::string thrown_message(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    ADD_FAILURE() << "expected exception not thrown";
    return {};
}

}  // namespace

TEST(Io, BellRoundTrip) {
    const std::string path = temp_path("bell.json");
    BipartitePureState bell = bell_state();
    io::save_state(path, bell);
    io::StateInput in = io::load_state(path);
    ASSERT_TRUE(std::holds_alternative<BipartitePureState>(in));
    const auto& back = std::get<BipartitePureState>(in);
    EXPECT_EQ(back.d_a, 2);
    EXPECT_EQ(back.d_b, 2);
    EXPECT_EQ(back.state.amplitudes(), bell.state.amplitudes());
    std::remove(path.c_str());
}

TEST(Io, RandomStateRoundTripIsExact) {
    CounterRng rng(4);
    BipartitePureState psi = steerkit::testing::random_bipartite(3, 2, rng);
    psi.labels_a = std::vector<std::string>{"a", "b", "c"};
    BipartitePureState back = io::bipartite_from_json(json::parse(io::to_json(psi).dump()));
    EXPECT_EQ(back.state.amplitudes(), psi.state.amplitudes());
    ASSERT_TRUE(back.labels_a.has_value());
    EXPECT_EQ(*back.labels_a, *psi.labels_a);
    EXPECT_FALSE(back.labels_b.has_value());
}

TEST(Io, AssemblageRoundTrip) {
    Assemblage a = ghz_assemblage(2, 0.3);
    const std::string path = temp_path("ghz.json");
    io::save_assemblage(path, a);
    Assemblage b = io::load_assemblage(path);
    ASSERT_EQ(b.settings().size(), a.settings().size());
    HermitianOperator jz = collective_qubit_operator(2, pauli_z());
    for (std::size_t s = 0; s < a.settings().size(); ++s) {
        EXPECT_EQ(b.settings()[s].label, a.settings()[s].label);
        EXPECT_NEAR(b.average_qfi(jz)[s], a.average_qfi(jz)[s], 1e-12);
        EXPECT_NEAR(b.average_variance(jz)[s], a.average_variance(jz)[s], 1e-12);
    }
    std::remove(path.c_str());
}

TEST(Io, DensityMatrixWithDims) {
    const std::string path = temp_path("rho.json");
    DensityMatrix rho = DensityMatrix::maximally_mixed(4);
    json j = io::to_json(rho);
    j["dims"] = {2, 2};
    io::write_json(path, j);
    io::StateInput in = io::load_state(path);
    ASSERT_TRUE(std::holds_alternative<io::MixedInput>(in));
    const auto& m = std::get<io::MixedInput>(in);
    EXPECT_EQ(m.d_a, 2);
    EXPECT_EQ(m.d_b, 2);
    EXPECT_LT(max_abs(m.rho.matrix() - rho.matrix()), 1e-15);

    j["dims"] = {3, 2};
    io::write_json(path, j);
    EXPECT_THROW(io::load_state(path), SchemaError);
    std::remove(path.c_str());
}

TEST(Io, SchemaErrorsNameTheField) {
    json bell = io::to_json(bell_state());
    json missing = bell;
    missing.erase("amplitudes");
    EXPECT_NE(thrown_message<SchemaError>([&] { io::bipartite_from_json(missing); }).find("amplitudes"), std::string::npos);

    json wrong_len = bell;
    wrong_len["amplitudes"].erase(0);
    EXPECT_NE(thrown_message<SchemaError>([&] { io::bipartite_from_json(wrong_len); }).find("expected 4 entries"),
              std::string::npos);

    json bad_complex = bell;
    bad_complex["amplitudes"][2] = json::array({1.0});
    EXPECT_NE(thrown_message<SchemaError>([&] { io::bipartite_from_json(bad_complex); }).find("state.amplitudes[2]"),
              std::string::npos);

    json ragged = json::array({json::array({json::array({1.0, 0.0})}), json::array()});
    EXPECT_THROW(io::matrix_from_json(ragged, "m"), SchemaError);
    EXPECT_THROW(io::assemblage_from_json(json{{"settings", json::array()}}), SchemaError);
}

TEST(Io, InvariantFailuresAreValidationErrors) {
    json bell = io::to_json(bell_state());
    bell["amplitudes"][0] = json::array({1.0, 0.0});
    // Unnormalized amplitudes decode but violate the state invariant.
    EXPECT_THROW(io::bipartite_from_json(bell), ValidationError);
    try {
        io::bipartite_from_json(bell);
    } catch (const SchemaError&) {
        ADD_FAILURE() << "invariant failure reported as schema error";
    } catch (const ValidationError&) {
    }
}

TEST(Io, MalformedJsonReportsLine) {
    const std::string path = temp_path("bad.json");
    write_text(path, "{\n  \"d_B\": 2,\n  \"settings\": [\n}\n");
    std::string msg = thrown_message<SchemaError>([&] { io::load_assemblage(path); });
    EXPECT_NE(msg.find(path + ":4"), std::string::npos) << msg;
    std::remove(path.c_str());
    EXPECT_THROW(io::read_json(temp_path("does_not_exist.json")), ValidationError);
}

TEST(Io, ProbabilitySumNamesTheSetting) {
    std::string msg = thrown_message<ValidationError>([] { io::assemblage_from_json(two_setting_assemblage(0.9, 0.0)); });
    EXPECT_NE(msg.find("'W'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("0.9"), std::string::npos) << msg;
}

TEST(Io, NoSignallingViolationReportsDeviation) {
    EXPECT_NO_THROW(io::assemblage_from_json(two_setting_assemblage(1.0, 0.0)));
    // Marginal of W differs from that of Z by 1e-3 in two diagonal entries.
    json j = two_setting_assemblage(1.0, 0.0);
    j["settings"][1]["outcomes"][0]["rho"] = qubit_rho(0.501);
    j["settings"][1]["outcomes"][1]["rho"] = qubit_rho(0.501);
    std::string msg = thrown_message<ValidationError>([&] { io::assemblage_from_json(j); });
    EXPECT_NE(msg.find("no-signalling"), std::string::npos) << msg;
    EXPECT_NE(msg.find("max deviation 0.001"), std::string::npos) << msg;
}

TEST(Io, SettingsAndOperators) {
    json povms = {{"settings", json::array({{{"label", "Z"}, {"basis", io::to_json(identity(2))}},
                                            {{"label", "E"},
                                             {"outcome_labels", {"u", "v"}},
                                             {"effects", json::array({io::to_json(ComplexMatrix(identity(2) * 0.25)),
                                                                      io::to_json(ComplexMatrix(identity(2) * 0.75))})}}})}};
    std::vector<Setting> s = io::settings_from_json(povms, 2);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].label, "Z");
    EXPECT_EQ(s[1].povm.labels(), (std::vector<std::string>{"u", "v"}));
    EXPECT_THROW(io::settings_from_json(povms, 3), SchemaError);

    json bad = povms;
    bad["settings"][1]["effects"][1] = io::to_json(ComplexMatrix(identity(2) * 0.5));
    EXPECT_THROW(io::settings_from_json(bad, 2), ValidationError);

    HermitianOperator h = io::operator_from_json(json{{"matrix", io::to_json(pauli_y())}});
    EXPECT_LT(max_abs(h.matrix() - pauli_y()), 1e-15);
    EXPECT_LT(max_abs(io::operator_from_json(io::to_json(pauli_x())).matrix() - pauli_x()), 1e-15);
    ComplexMatrix nonherm = pauli_x();
    nonherm(0, 1) = 2.0;
    EXPECT_THROW(io::operator_from_json(io::to_json(nonherm)), ValidationError);
}

TEST(Io, WitnessReportJson) {
    Assemblage a = ghz_assemblage(3, 0.0);
    HermitianOperator jz = collective_qubit_operator(3, pauli_z());
    json j = io::to_json(steering_witness(a, jz));
    EXPECT_NEAR(j["cond_qfi"].get<double>(), 9.0, 1e-9);
    EXPECT_NEAR(j["cond_var"].get<double>(), 0.0, 1e-12);
    EXPECT_TRUE(j["steering_detected"].get<bool>());
    EXPECT_TRUE(j["bounds_hold"].get<bool>());
    EXPECT_EQ(j["argmax_setting"].get<std::string>(), "sigma_x");
}
