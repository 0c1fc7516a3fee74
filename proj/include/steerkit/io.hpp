#pragma once

#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "steerkit/assemblage.hpp"
#include "steerkit/montecarlo.hpp"

namespace steerkit::io {

using json = nlohmann::json;

// Complex numbers are [re, im]; matrices are arrays of rows.
json to_json(cplx z);
json to_json(const ComplexMatrix& m);
json to_json(const BipartitePureState& psi);
json to_json(const DensityMatrix& rho);
json to_json(const Assemblage& a);
json to_json(const WitnessReport& r);
json to_json(const SampleRun& run);

// Parsers throw SchemaError naming the offending field; invariant failures of
// the decoded objects surface as ValidationError.
ComplexMatrix matrix_from_json(const json& j, const std::string& where);
BipartitePureState bipartite_from_json(const json& j);
DensityMatrix density_from_json(const json& j);
Assemblage assemblage_from_json(const json& j);
HermitianOperator operator_from_json(const json& j);
std::vector<Setting> settings_from_json(const json& j, Index d_a);

// A density matrix together with the bipartition it was declared with.
struct MixedInput {
    DensityMatrix rho;
    Index d_a = 0;
    Index d_b = 0;
};
using StateInput = std::variant<BipartitePureState, MixedInput>;

json read_json(const std::string& path);
void write_json(const std::string& path, const json& j);
StateInput load_state(const std::string& path);
Assemblage load_assemblage(const std::string& path);
void save_state(const std::string& path, const BipartitePureState& psi);
void save_assemblage(const std::string& path, const Assemblage& a);

}  // namespace steerkit::io
