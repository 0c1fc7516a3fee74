#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "steerkit/assemblage.hpp"

namespace steerkit {

// psi = sum_i sqrt(p_i) |a_i>|b_i>, p descending, phases carried by basis_a.
struct SchmidtDecomposition {
    RealVector coefficients;
    ComplexMatrix basis_a;  // d_a x d_a, first columns pair with coefficients
    ComplexMatrix basis_b;  // d_b x r
    Index rank(double threshold = 1e-14) const;
};

SchmidtDecomposition schmidt(const BipartitePureState& psi);

// Alice basis whose steered ensemble has average QFI 4 Var[rho_B, H].
POVM optimal_povm_qfi(const BipartitePureState& psi, const HermitianOperator& h);
// Alice basis whose steered ensemble has average variance F_Q[rho_B, H]/4.
POVM optimal_povm_var(const BipartitePureState& psi, const HermitianOperator& h);

struct GeneratorBasis {
    Index dim = 0;
    std::vector<HermitianOperator> generators;

    HermitianOperator combine(const RealVector& n) const;  // sum_i n_i H_i
};

GeneratorBasis gellmann_basis(Index d);

double s_max_pure(const RealVector& p);
double s_avg_pure(const RealVector& p);

struct MultiGeneratorResult {
    double value = 0.0;
    double lhs_bound = 0.0;
    bool violated = false;
};

MultiGeneratorResult multi_generator_sum(const Assemblage& a, const GeneratorBasis& basis);

struct GapIdentity {
    double lhs = 0.0;  // cond_qfi - 4 cond_var with the two optimal settings
    double rhs = 0.0;  // 8 (1 - tr rho_B^2)
};

// H = n . sigma with unit n; Bob must be a qubit.
GapIdentity qubit_gap_identity(const BipartitePureState& psi, const RealVector& n);

bool ancilla_invariance_check(const BipartitePureState& psi, Index ancilla_dim);

// Maximum of an objective over unit-norm traceless generators n . H.
struct GeneratorSearch {
    double value = 0.0;     // best objective found, a lower bound on the maximum
    RealVector direction;   // coefficients in the generator basis
    double sampled = 0.0;   // best value before refinement
    int iterations = 0;
};

struct SearchOptions {
    int samples = 2000;
    int max_iterations = 200;
    double tolerance = 1e-8;
    std::uint64_t seed = 1;
};

GeneratorSearch maximize_over_generators(const GeneratorBasis& basis,
                                         const std::function<double(const HermitianOperator&)>& objective,
                                         const SearchOptions& opt = {});

// Sampled lower bound on max_H [cond_qfi/4 - cond_var]_+ over traceless tr H^2 = 1.
GeneratorSearch s_max_lower_bound(const Assemblage& a, const SearchOptions& opt = {});

struct SphereAverage {
    double mean = 0.0;
    double std_error = 0.0;
};

// (d^2 - 1) E_n[objective(n . H)] over uniform unit vectors n.
SphereAverage sphere_average(const GeneratorBasis& basis,
                             const std::function<double(const HermitianOperator&)>& objective, int samples,
                             std::uint64_t seed);

}  // namespace steerkit
