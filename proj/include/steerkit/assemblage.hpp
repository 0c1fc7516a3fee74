#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steerkit/metrology.hpp"
#include "steerkit/states.hpp"

namespace steerkit {

struct Outcome {
    std::string label;
    double probability = 0.0;
    LocalState state;
};

struct SettingRecord {
    std::string label;
    std::vector<Outcome> outcomes;
    std::optional<POVM> source_povm;
};

// Alice's measurement setting X with its POVM.
struct Setting {
    std::string label;
    POVM povm;
};

// Per-setting conditional ensembles on Bob's side. Construction validates
// normalization and no-signalling, and drops outcomes below tol::zero_prob.
class Assemblage {
public:
    Assemblage() = default;
    Assemblage(Index d_b, std::vector<SettingRecord> settings);

    Index d_b() const { return d_b_; }
    const std::vector<SettingRecord>& settings() const { return settings_; }
    const SettingRecord& setting(const std::string& label) const;

    // sum_a p(a|X) rho_{a|X}, taken from the first setting.
    DensityMatrix reduced_state() const;
    // Max-abs spread of the setting marginals.
    double signalling_deviation() const;

    std::vector<double> average_variance(const HermitianOperator& h) const;  // per setting
    std::vector<double> average_qfi(const HermitianOperator& h) const;       // per setting

private:
    Index d_b_ = 0;
    std::vector<SettingRecord> settings_;
};

Assemblage assemblage_from_state(const DensityMatrix& rho_ab, Index d_a, Index d_b,
                                 const std::vector<Setting>& settings);
Assemblage assemblage_from_pure(const BipartitePureState& psi, const std::vector<Setting>& settings);

// t A1 + (1-t) A2 with matching setting labels; outcome sets are united by label.
Assemblage mix_assemblages(const Assemblage& a1, const Assemblage& a2, double t);

struct ResponseTable {
    std::string label;
    RealMatrix p;  // p(a | X, lambda): rows outcomes a, columns hidden values lambda
    std::vector<std::string> outcome_labels;
};

struct LHSModel {
    RealVector weights;
    std::vector<DensityMatrix> local_states;
    std::vector<ResponseTable> responses;

    void validate() const;
};

Assemblage assemblage_from_lhs(const LHSModel& model);

struct SettingOptimum {
    double value = 0.0;
    std::string setting;
};

SettingOptimum conditional_variance(const Assemblage& a, const HermitianOperator& h);
SettingOptimum conditional_qfi(const Assemblage& a, const HermitianOperator& h);

struct ReidResult {
    double lhs = 0.0;             // Var^{B|A}[H] Var^{B|A}[M]
    double rhs = 0.0;             // |<[H,M]>|^2 / 4 on the reduced state
    bool violated = false;        // lhs < rhs
    double commutator_bound = 0.0;  // |<[H,M]>|^2 / Var^{B|A}[M]; NaN if Var^{B|A}[M] = 0
    bool bound_holds = true;      // commutator_bound <= cond_qfi(H) + tol::witness
};

struct WitnessReport {
    double cond_qfi = 0.0;
    double cond_var = 0.0;
    double delta = 0.0;  // cond_qfi/4 - cond_var
    double qfi_reduced = 0.0;
    double var_reduced = 0.0;
    std::optional<ReidResult> reid;
    std::string argmax_setting;
    std::string argmin_setting;
    std::optional<double> s_max_pure, s_avg_pure, s_lower_bound;

    bool detected() const;
};

WitnessReport steering_witness(const Assemblage& a, const HermitianOperator& h);
ReidResult reid_witness(const Assemblage& a, const HermitianOperator& h, const HermitianOperator& m);

double joint_cfi(const Assemblage& a, const std::string& setting_a, const POVM& povm_b, const HermitianOperator& h);

bool bounds_check(const WitnessReport& report);

// Assemblage that is block diagonal on Bob's side: sum_b w_b A_b with every block
// sharing the same setting labels. Generators are block diagonal as well.
struct DirectSumAssemblage {
    std::vector<double> weights;
    std::vector<Assemblage> blocks;

    void validate() const;
    std::vector<std::string> setting_labels() const;
    std::vector<WeightedBlock> reduced_blocks() const;
};

SettingOptimum conditional_variance(const DirectSumAssemblage& a, const std::vector<HermitianOperator>& h);
SettingOptimum conditional_qfi(const DirectSumAssemblage& a, const std::vector<HermitianOperator>& h);
WitnessReport steering_witness(const DirectSumAssemblage& a, const std::vector<HermitianOperator>& h);

}  // namespace steerkit
