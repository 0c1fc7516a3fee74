#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "steerkit/assemblage.hpp"
#include "steerkit/montecarlo.hpp"
#include "steerkit/puresteer.hpp"

namespace steerkit {

// Worked-example assemblages.
Assemblage ghz_assemblage(int n_bob, double phi);                // settings sigma_z, sigma_x
Assemblage ghz_noise_assemblage(int n_bob, double phi, double p);  // dense, same settings
Assemblage split_dicke_assemblage(int k, int n_a, int n_b);      // settings Jz, Jx
// Beam-splitter split state; Alice reads N_A and then measures Jz or Jx in the sector.
DirectSumAssemblage beamsplitter_assemblage(int k, int N, double p, std::vector<HermitianOperator>* jz_blocks = nullptr);
// Dense labeled-basis form of the same measurements, N <= 40.
Assemblage beamsplitter_dense_assemblage(int k, int N, double p);
HermitianOperator labeled_jz(int N);  // direct sum of Jz over sectors 0..N
Assemblage cat_assemblage(double alpha, int cutoff = -1);         // settings Z, X, Y

// Numeric table with reference columns; NaN cells are written empty.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> summary;
};

std::string to_csv(const Table& t);
std::string to_json_text(const Table& t);
std::string format_number(double v);  // 15 significant digits

// Evaluates fn(i) for i in [0, n) on up to STEERKIT_THREADS threads; results keep index order.
std::vector<std::vector<double>> parallel_rows(std::size_t n, const std::function<std::vector<double>(std::size_t)>& fn);

Table experiment_ghz(const std::vector<int>& ns, double phi);
Table experiment_ghz_noise(const std::vector<int>& ns, const std::vector<double>& ps, double phi);
Table experiment_split_dicke_fig(int N, int k);                 // per Jx outcome of Alice
Table experiment_split_dicke_sweep(int N, const std::vector<int>& ks);
Table experiment_split_dicke_partition(int N, double p, const std::vector<int>& ks);
Table experiment_cat(const std::vector<double>& alphas);
Table experiment_quantify(double step);
Table experiment_multigen(const std::vector<int>& dims, std::uint64_t seed);
Table experiment_estimate(long long shots, int reps, double theta, std::uint64_t seed);

// Ranges "a", "a..b" (integers) and "start:stop:step" (inclusive within half a step).
std::vector<int> parse_int_range(const std::string& s);
std::vector<double> parse_real_range(const std::string& s);

}  // namespace steerkit
