#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "fhlse/policy.hpp"

namespace fhlse {

inline constexpr std::size_t kDefaultMaxIterations = 10'000;

/// [lower, upper] must contain the change point given the labels seen so far.
struct FeasibleInterval {
    double lower = 0.0;
    double upper = 1.0;

    double length() const noexcept { return upper - lower; }
    double midpoint() const noexcept { return 0.5 * (lower + upper); }
};

/// One measurement of a search. For posterior-based searches `lower`/`upper`
/// hold the 2.5% and 97.5% posterior quantiles instead of a hard interval.
struct SearchStep {
    std::size_t index = 0;
    double x = 0.0;
    double raw = 0.0;
    bool label = false;
    double lower = 0.0;
    double upper = 1.0;
    double estimate = 0.5;
    double cumulative_distance = 0.0;
    /// Interval length, or exponentiated posterior entropy for posterior searches.
    double spread = 1.0;
    double error_probability = 0.0;
    bool clamped = false;
};

enum class SearchStatus {
    converged,          ///< stop criterion met
    budget_exhausted,   ///< requested number of samples taken
    timeout,            ///< iteration cap reached before convergence
};

std::string_view to_string(SearchStatus status) noexcept;

struct SearchTrace {
    std::vector<SearchStep> steps;
    double start = 0.0;
    double total_distance = 0.0;
    double estimate = 0.5;
    std::size_t sample_count = 0;
    SearchStatus status = SearchStatus::converged;

    /// Spread of the final state: interval length for interval searches,
    /// exponentiated posterior entropy for posterior searches.
    double final_spread = 1.0;
};

/// Noiseless step-function oracle; must return exactly 0.0 or 1.0.
using BinaryOracle = std::function<double(double)>;

struct SearchOptions {
    /// Stop once the feasible interval is no longer than this. 0 disables.
    double stop_error = 0.0;
    /// Stop after exactly this many samples when non-zero (fixed-budget runs).
    std::size_t sample_budget = 0;
    /// Give up (status timeout) after this many samples without meeting the stop rule.
    std::size_t max_iterations = kDefaultMaxIterations;
};

/**
 * Finite-horizon search over [0,1] for the change point of a step function
 * that is 1 left of the change point and 0 right of it.
 *
 * Starts at x = 0 as if a positive label had been observed there. Each step
 * moves z * (interval length) forward after a positive label and backward
 * after a negative one, with z taken from the policy and the greedy fraction
 * once the policy runs out. The estimate is the interval midpoint.
 *
 * When labels are noisy the interval endpoint on the side of each label is
 * simply overwritten by the new sample, so the search stays well defined
 * even though the change point may leave the interval.
 */
SearchTrace fhs_search(const BinaryOracle& oracle, const Policy& policy,
                       const SearchOptions& options);

SearchTrace fhs_search(const BinaryOracle& oracle, const Policy& policy, double stop_error);

/// Header: step,x,y,label,a,b,estimate,cumulative_distance
void write_trace_csv(std::ostream& out, const SearchTrace& trace);

}  // namespace fhlse
