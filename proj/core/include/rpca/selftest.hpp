#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rpca {

/// One verified property: `value` compared against `threshold` (value <= threshold passes).
struct CheckResult {
    std::string suite;
    std::string check;
    double value = 0;
    double threshold = 0;
    bool passed = false;
};

/// Closed-form reweighted prox vs. the brute-force oracle and the
/// subgradient certificate on seeded random draws.
std::vector<CheckResult> selftest_prox(std::uint64_t seed, std::size_t draws = 10000);
/// lambda3 = 0, q = 1 solver equivalence and the s_p = 0 soft-threshold reduction.
std::vector<CheckResult> selftest_reductions(std::uint64_t seed);
/// Finite-difference gradient checks for every parameter group of both variants.
std::vector<CheckResult> selftest_gradients(std::uint64_t seed);
/// One consistent step with a frozen reference never increases the objective.
std::vector<CheckResult> selftest_descent(std::uint64_t seed, std::size_t instances = 100);
/// Planted low-rank plus sparse recovery by the classical solver.
std::vector<CheckResult> selftest_recovery(std::uint64_t seed);
/// Generated-sample invariants and IDX round trip.
std::vector<CheckResult> selftest_data(std::uint64_t seed);

/// All suites above in a fixed order.
std::vector<CheckResult> run_selftest(std::uint64_t seed);

/// CSV with header suite,check,value,threshold,status. Contains no timings.
void write_selftest_csv(std::ostream& out, std::span<const CheckResult> rows);

}  // namespace rpca
