#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "steerkit/assemblage.hpp"
#include "steerkit/random.hpp"
#include "steerkit/sampling.hpp"
#include "steerkit/states.hpp"

namespace steerkit::testing {

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline BipartitePureState random_bipartite(Index da, Index db, CounterRng& rng) {
    return BipartitePureState(da, db, PureState(random_pure_vector(da * db, rng)));
}

// Random LHS model: n_lambda hidden values, settings with n_out outcomes each.
inline LHSModel random_lhs(Index d_b, int n_lambda, int n_settings, int n_out, CounterRng& rng) {
    LHSModel m;
    m.weights = random_simplex(n_lambda, rng);
    for (int l = 0; l < n_lambda; ++l) {
        Index rank = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(d_b));
        m.local_states.push_back(random_density(d_b, rank, rng));
    }
    for (int x = 0; x < n_settings; ++x) {
        ResponseTable r;
        r.label = "X" + std::to_string(x);
        r.p.resize(n_out, n_lambda);
        for (int l = 0; l < n_lambda; ++l) {
            // Half of the columns deterministic, the rest random.
            if (rng() % 2 == 0) {
                r.p.col(l).setZero();
                r.p(static_cast<Index>(rng() % static_cast<std::uint64_t>(n_out)), l) = 1.0;
            } else {
                r.p.col(l) = random_simplex(n_out, rng);
            }
        }
        for (int a = 0; a < n_out; ++a) r.outcome_labels.push_back(std::to_string(a));
        m.responses.push_back(r);
    }
    return m;
}

}  // namespace steerkit::testing
