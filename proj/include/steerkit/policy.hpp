#pragma once

namespace steerkit::tol {

inline constexpr double herm = 1e-12;         // max-abs deviation of M from M^dagger
inline constexpr double psd = -1e-10;         // smallest admissible eigenvalue
inline constexpr double recon = 1e-10;        // eigendecomposition reconstruction
inline constexpr double trace = 1e-12;        // |tr(rho) - 1|
inline constexpr double norm = 1e-12;         // |<psi|psi> - 1|
inline constexpr double povm_sum = 1e-10;     // sum of effects vs identity
inline constexpr double unitary = 1e-10;
inline constexpr double prob_sum = 1e-10;     // per-setting outcome probabilities
inline constexpr double no_signal = 1e-9;     // setting marginals of an assemblage
inline constexpr double lhs_weights = 1e-12;  // LHS weights and response columns
inline constexpr double qfi_pair = 1e-12;     // skip eigenvalue pairs with sum below
inline constexpr double zero_prob = 1e-14;    // drop outcomes below this probability
inline constexpr double witness = 1e-9;       // delta above this flags steering
inline constexpr double saturation = 1e-9;    // projected generator proportional to projector
inline constexpr double support = 1e-10;      // eigenvalues above this span the support

}  // namespace steerkit::tol
