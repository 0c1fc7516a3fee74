#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "steerkit/numcore.hpp"

namespace steerkit {

// Positive effects summing to the identity. A POVM built from an orthonormal
// basis remembers the basis vectors so rank-1 conditioning stays pure.
class POVM {
public:
    POVM() = default;
    POVM(std::vector<HermitianOperator> effects, std::vector<std::string> labels);
    // Columns of u form an orthonormal basis; effect k is |u_k><u_k|.
    static POVM from_basis(const ComplexMatrix& u, std::vector<std::string> labels = {});
    static POVM eigenbasis(const HermitianOperator& h, std::vector<std::string> labels = {});

    Index dim() const { return dim_; }
    std::size_t size() const { return labels_.size(); }
    // Basis POVMs build their projectors on first use.
    const std::vector<HermitianOperator>& effects() const;
    const std::vector<std::string>& labels() const { return labels_; }
    const std::optional<ComplexMatrix>& basis() const { return basis_; }

private:
    struct Effects {
        std::once_flag once;
        std::vector<HermitianOperator> list;
    };

    Index dim_ = 0;
    std::vector<std::string> labels_;
    std::optional<ComplexMatrix> basis_;
    std::shared_ptr<Effects> effects_;
};

// A state of Bob's system, either pure or mixed.
using LocalState = std::variant<PureState, DensityMatrix>;

Index dim(const LocalState& s);
DensityMatrix to_density(const LocalState& s);
cplx expectation(const LocalState& s, const ComplexMatrix& op);

double variance(const DensityMatrix& rho, const HermitianOperator& h);
double variance(const PureState& psi, const HermitianOperator& h);
double variance(const LocalState& s, const HermitianOperator& h);

double qfi(const DensityMatrix& rho, const HermitianOperator& h);
double qfi(const PureState& psi, const HermitianOperator& h);  // 4 Var
double qfi(const LocalState& s, const HermitianOperator& h);

double qfi_white_noise(const PureState& psi, const HermitianOperator& h, double p);

// Classical Fisher information at theta = 0 of tr[E_x exp(-i theta H) rho exp(i theta H)].
double cfi(const POVM& povm, const DensityMatrix& rho, const HermitianOperator& h);
double cfi(const POVM& povm, const LocalState& s, const HermitianOperator& h);

// |<[H,M]>|^2 / Var[rho, M].
double qfi_commutator_bound(const DensityMatrix& rho, const HermitianOperator& h, const HermitianOperator& m);

struct GapResult {
    double gap = 0.0;         // Var - F_Q/4 from the spectral double sum
    bool saturated = false;   // projected generator proportional to the support projector
};
GapResult var_qfi_gap(const DensityMatrix& rho, const HermitianOperator& h);

// Block-diagonal state sum_b w_b rho_b with block-diagonal generator sum_b H_b.
struct WeightedBlock {
    double weight = 0.0;
    DensityMatrix state;
};
double variance_direct_sum(const std::vector<WeightedBlock>& blocks, const std::vector<HermitianOperator>& h);
double qfi_direct_sum(const std::vector<WeightedBlock>& blocks, const std::vector<HermitianOperator>& h);

}  // namespace steerkit
