#pragma once

#include <optional>
#include <string>
#include <vector>

#include "steerkit/numcore.hpp"

namespace steerkit {

// Collective spin on the symmetric sector of n spin-1/2 particles.
// Basis index k counts excitations; Jz |k> = (k - n/2) |k>.
struct SpinOperators {
    int n_particles = 0;
    HermitianOperator Jx, Jy, Jz;
};

SpinOperators spin_ops(int n_particles);

// Joint pure state on C^{d_a} (x) C^{d_b}; amplitude index a * d_b + b.
struct BipartitePureState {
    Index d_a = 0;
    Index d_b = 0;
    PureState state;
    std::optional<std::vector<std::string>> labels_a;
    std::optional<std::vector<std::string>> labels_b;

    BipartitePureState() = default;
    BipartitePureState(Index da, Index db, PureState psi);

    // d_a x d_b coefficient matrix C with psi = sum C(a,b) |a>|b>.
    ComplexMatrix coefficients() const;
    DensityMatrix reduced_b() const;
    DensityMatrix reduced_a() const;
    DensityMatrix density() const { return DensityMatrix::from_pure(state); }
};

BipartitePureState product_state(const PureState& a, const PureState& b);
BipartitePureState bell_state();  // (|00> + |11>)/sqrt(2)

// <k| exp(-i phi Jy) |k'> on the (N+1)-dimensional symmetric sector.
double wigner_overlap(int N, int k, int k_prime, double phi);
// Full rotation matrix W(k, k') = wigner_overlap(N, k, k', phi).
RealMatrix wigner_matrix(int N, double phi);

// Eigenbasis of Jx as columns, ordered by eigenvalue k - N/2, from exp(-i pi/2 Jy).
ComplexMatrix jx_eigenbasis(int N);

// 1 qubit for Alice, N = n_total - 1 qubits for Bob in the full 2^N space.
BipartitePureState ghz_state(int n_total, double phi);
// GHZ_phi^N = (|0..0> + e^{i phi}|1..1>)/sqrt(2) on N qubits.
PureState ghz_vector(int n_qubits, double phi);
DensityMatrix ghz_white_noise(int n_total, double phi, double p);

// Collective operator sum_i op^{(i)}/2 on n qubits (op a 2x2 Pauli), full 2^n space.
HermitianOperator collective_qubit_operator(int n_qubits, const ComplexMatrix& pauli);

BipartitePureState split_dicke_fixed(int k, int n_a, int n_b);

// One fixed-N_A block of the beam-splitter split state.
struct SplitSector {
    int n_a = 0;
    double weight = 0.0;        // probability of N_A particles on Alice's side
    BipartitePureState state;   // dims (n_a+1, N-n_a+1), k_A indexing both factors
};

// Blocks with weight above 1e-300 in ascending n_a; weights sum to 1.
std::vector<SplitSector> split_dicke_beamsplitter_sectors(int k, int N, double p);
// Dense labeled form over all (N_A, k_A) pairs; dims (N+1)(N+2)/2 per side, N <= 40.
BipartitePureState split_dicke_beamsplitter(int k, int N, double p);
// Offset of sector n within the labeled (N_A, k_A) basis, and the sector labels.
Index labeled_sector_offset(int n);
std::string sector_label(int n, int k);

struct FockSpace {
    int cutoff = 0;  // basis |0>..|cutoff>
    ComplexMatrix a_dagger;
    HermitianOperator x, p;
};

FockSpace fock_space(int cutoff);
int default_fock_cutoff(double alpha);
// Truncated coherent state of real amplitude alpha, renormalized.
PureState coherent_state(double alpha, int cutoff);
// (|0>|alpha> + |1>|-alpha>)/sqrt(2); cutoff < 0 selects default_fock_cutoff.
BipartitePureState hybrid_cat(double alpha, int cutoff = -1);

}  // namespace steerkit
