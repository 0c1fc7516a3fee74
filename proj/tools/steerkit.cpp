// steerkit command-line driver: worked-example tables and witness evaluation.
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "steerkit/errors.hpp"
#include "steerkit/experiments.hpp"
#include "steerkit/io.hpp"

namespace {

using namespace steerkit;

struct Common {
    std::string out;
    std::string format = "csv";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "Output file (default: stdout)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

void emit(const std::string& text, const Common& c) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw ValidationError("cannot write " + c.out);
    f << text;
    if (!f) throw ValidationError("failed writing " + c.out);
}

void emit(const Table& t, const Common& c) { emit(c.format == "json" ? to_json_text(t) : to_csv(t), c); }

struct WitnessArgs {
    std::string input, h, m, povms;
    bool quantify = false;
};

WitnessReport run_witness(const WitnessArgs& w) {
    HermitianOperator h = io::operator_from_json(io::read_json(w.h));
    std::optional<HermitianOperator> m;
    if (!w.m.empty()) m = io::operator_from_json(io::read_json(w.m));

    io::json doc = io::read_json(w.input);
    Assemblage a;
    std::optional<RealVector> schmidt_p;
    if (doc.is_object() && doc.contains("settings")) {
        a = io::assemblage_from_json(doc);
    } else {
        io::StateInput s = io::load_state(w.input);
        if (auto* psi = std::get_if<BipartitePureState>(&s)) {
            if (h.dim() != psi->d_b) throw ValidationError("H does not act on Bob's space");
            std::vector<Setting> settings;
            if (w.povms.empty())
                settings = {{"qfi-optimal", optimal_povm_qfi(*psi, h)}, {"var-optimal", optimal_povm_var(*psi, h)}};
            else
                settings = io::settings_from_json(io::read_json(w.povms), psi->d_a);
            a = assemblage_from_pure(*psi, settings);
            schmidt_p = schmidt(*psi).coefficients;
        } else {
            const auto& mixed = std::get<io::MixedInput>(s);
            if (w.povms.empty()) throw ValidationError("--povms is required for density-matrix input");
            a = assemblage_from_state(mixed.rho, mixed.d_a, mixed.d_b,
                                      io::settings_from_json(io::read_json(w.povms), mixed.d_a));
        }
    }
    WitnessReport r = steering_witness(a, h);
    if (m) r.reid = reid_witness(a, h, *m);
    if (schmidt_p) {
        r.s_max_pure = s_max_pure(*schmidt_p);
        r.s_avg_pure = s_avg_pure(*schmidt_p);
    }
    if (w.quantify) r.s_lower_bound = s_max_lower_bound(a).value;
    return r;
}

std::string csv_value(const io::json& v) {
    if (v.is_number_float()) return format_number(v.get<double>());
    return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string witness_csv(const io::json& j) {
    std::string s = "field,value\n";
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it->is_object()) {
            for (auto in = it->begin(); in != it->end(); ++in) s += it.key() + "." + in.key() + "," + csv_value(*in) + "\n";
        } else {
            s += it.key() + "," + csv_value(*it) + "\n";
        }
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steerkit: metrological EPR-steering toolkit"};
    app.require_subcommand(1);

    Common common;
    // Separate strings per subcommand: CLI11 applies default_val even for subcommands not invoked.
    std::string ghz_n = "1..8", noise_n = "2..8", noise_p = "0.1:0.9:0.1", sd_n = "200", sd_k, sdp_n = "100",
                sdp_p = "0.5", sdp_k, alpha_arg = "0:2:0.05", d_arg = "2..5";
    double phi = 0.0, step = 0.01, theta = 0.01;
    std::uint64_t seed = 1;
    long long shots = 10000;
    int reps = 200;
    WitnessArgs w;

    auto* ghz = app.add_subcommand("ghz", "GHZ state: conditional QFI and variance of J_z");
    ghz->add_option("--n", ghz_n, "Bob's qubit counts, e.g. 1..8")->capture_default_str();
    ghz->add_option("--phi", phi, "GHZ phase");
    add_common(ghz, common);

    auto* noise = app.add_subcommand("ghz-noise", "GHZ state with white noise");
    noise->add_option("--n", noise_n, "Bob's qubit counts")->capture_default_str();
    auto* p_opt = noise->add_option("--p", noise_p, "GHZ weight grid, e.g. 0.1:0.9:0.1")->capture_default_str();
    noise->add_option("--noise", noise_p, "Alias of --p")->excludes(p_opt);
    noise->add_option("--phi", phi, "GHZ phase");
    add_common(noise, common);

    auto* sd = app.add_subcommand("split-dicke", "Dicke state split N/2:N/2 (single --k gives the per-outcome table)");
    sd->add_option("--n", sd_n, "Total particle number (even)")->capture_default_str();
    sd->add_option("--k", sd_k, "Excitations: a single value or a range (default 0..N)");
    add_common(sd, common);

    auto* sdp = app.add_subcommand("split-dicke-partition", "Dicke state split by a beam splitter");
    sdp->add_option("--n", sdp_n, "Total particle number")->capture_default_str();
    sdp->add_option("--p", sdp_p, "Beam-splitter ratio")->capture_default_str();
    sdp->add_option("--k", sdp_k, "Excitations range (default 0..N)");
    add_common(sdp, common);

    auto* cat = app.add_subcommand("cat", "Hybrid qubit-coherent cat state");
    cat->add_option("--alpha", alpha_arg, "Amplitude grid")->capture_default_str();
    add_common(cat, common);

    auto* quant = app.add_subcommand("quantify", "S_max and S_avg on the d=3 Schmidt simplex");
    quant->add_option("--step", step, "Grid step")->default_val(0.01);
    add_common(quant, common);

    auto* mg = app.add_subcommand("multigen", "Multi-generator sum for pure states");
    mg->add_option("--d", d_arg, "Dimensions")->capture_default_str();
    mg->add_option("--seed", seed, "Random seed")->default_val(1);
    add_common(mg, common);

    auto* est = app.add_subcommand("estimate", "Monte Carlo validation of the moment estimator");
    est->add_option("--shots", shots, "Shots per repetition")->default_val(10000);
    est->add_option("--reps", reps, "Repetitions")->default_val(200);
    est->add_option("--theta", theta, "True phase")->default_val(0.01);
    est->add_option("--seed", seed, "Random seed")->default_val(1);
    add_common(est, common);

    auto* wit = app.add_subcommand("witness", "Evaluate the witness on a state or assemblage file");
    wit->add_option("--input", w.input, "State or assemblage JSON")->required();
    wit->add_option("--H", w.h, "Generator JSON")->required();
    wit->add_option("--M", w.m, "Second observable JSON for the Reid test");
    wit->add_option("--povms", w.povms, "Alice's settings JSON");
    wit->add_flag("--quantify", w.quantify, "Add the sampled S_max lower bound");
    add_common(wit, common);

    if (argc > 1 && argv[1][0] != '-') {
        bool known = false;
        for (const auto* s : app.get_subcommands({})) known = known || s->get_name() == argv[1];
        if (!known) {
            std::cerr << "invalid: unknown experiment '" << argv[1] << "'\n";
            return 2;
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (ghz->parsed()) {
            emit(experiment_ghz(parse_int_range(ghz_n), phi), common);
        } else if (noise->parsed()) {
            emit(experiment_ghz_noise(parse_int_range(noise_n), parse_real_range(noise_p), phi), common);
        } else if (sd->parsed()) {
            std::vector<int> ns = parse_int_range(sd_n);
            if (ns.size() != 1) throw ValidationError("split-dicke: --n takes a single value");
            const int N = ns.front();
            std::vector<int> ks = sd_k.empty() ? parse_int_range("0.." + std::to_string(N)) : parse_int_range(sd_k);
            bool single = !sd_k.empty() && ks.size() == 1;
            emit(single ? experiment_split_dicke_fig(N, ks.front()) : experiment_split_dicke_sweep(N, ks), common);
        } else if (sdp->parsed()) {
            std::vector<int> ns = parse_int_range(sdp_n);
            std::vector<double> ps = parse_real_range(sdp_p);
            if (ns.size() != 1 || ps.size() != 1)
                throw ValidationError("split-dicke-partition: --n and --p take single values");
            const int N = ns.front();
            std::vector<int> ks = sdp_k.empty() ? parse_int_range("0.." + std::to_string(N)) : parse_int_range(sdp_k);
            emit(experiment_split_dicke_partition(N, ps.front(), ks), common);
        } else if (cat->parsed()) {
            emit(experiment_cat(parse_real_range(alpha_arg)), common);
        } else if (quant->parsed()) {
            emit(experiment_quantify(step), common);
        } else if (mg->parsed()) {
            emit(experiment_multigen(parse_int_range(d_arg), seed), common);
        } else if (est->parsed()) {
            emit(experiment_estimate(shots, reps, theta, seed), common);
        } else if (wit->parsed()) {
            io::json j = io::to_json(run_witness(w));
            emit(common.format == "json" ? j.dump(2) + "\n" : witness_csv(j), common);
        }
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
