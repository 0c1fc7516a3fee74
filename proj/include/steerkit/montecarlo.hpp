#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "steerkit/assemblage.hpp"
#include "steerkit/random.hpp"

namespace steerkit {

// Multinomial draw by sequential binomials.
std::vector<long long> sample_counts(const std::vector<double>& probs, long long n, CounterRng& rng);
std::vector<long long> sample_outcomes(const DensityMatrix& rho, const POVM& povm, long long n, std::uint64_t seed);

// Alice measures `setting`; after outcome b Bob measures observables[b]
// (a single entry applies to every outcome) and reports m_est(b) = <M_b>_b.
struct EstimatorStrategy {
    std::string setting;
    std::vector<HermitianOperator> observables;
};

struct SampleRun {
    std::uint64_t seed = 0;
    long long n_shots = 0;
    double theta_true = 0.0;
    std::vector<double> estimates;
    double empirical_var = 0.0;
    double mean_estimate = 0.0;
    double var_m_est = 0.0;        // sum_b p(b) Var[rho_b, M_b]
    double derivative = 0.0;       // d<M>_theta/dtheta at 0, analytic
    double derivative_fd = 0.0;    // central difference, step 1e-5
    double predicted_var = 0.0;    // var_m_est / (n derivative^2)
    double rel_std_error = 0.0;    // sqrt(2/(reps-1)), relative s.e. of a variance estimate
    int saturated = 0;             // estimates pinned to the edge of the monotone window
    bool consistent = false;       // no saturation and |empirical/predicted - 1| <= 5 rel_std_error
};

SampleRun moment_estimator_validation(const Assemblage& a, const HermitianOperator& h, const EstimatorStrategy& strategy,
                                      double theta_true, long long n, int reps, std::uint64_t seed);

// Convenience form: one observable M measured after the setting with the smallest
// conditional variance of M.
SampleRun moment_estimator_validation(const Assemblage& a, const HermitianOperator& h, const HermitianOperator& m,
                                      double theta_true, long long n, int reps, std::uint64_t seed);

struct EprProductCheck {
    double var_theta = 0.0;
    double var_h = 0.0;
    double product = 0.0;
    double product_upper = 0.0;  // with var_theta raised by 5 relative standard errors
    double bound = 0.0;          // 1/(4n)
    bool epr = false;            // product_upper < bound and no saturated estimates
};

// Var[theta_est] from the run times Var[H_est] of the conditional-mean estimator.
EprProductCheck epr_product_check(const SampleRun& run, double var_h_est);

}  // namespace steerkit
