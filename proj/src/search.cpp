#include "fhlse/search.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fhlse/errors.hpp"

namespace fhlse {

std::string_view to_string(SearchStatus status) noexcept {
    switch (status) {
        case SearchStatus::converged: return "converged";
        case SearchStatus::budget_exhausted: return "budget_exhausted";
        case SearchStatus::timeout: return "timeout";
    }
    return "unknown";
}

SearchTrace fhs_search(const BinaryOracle& oracle, const Policy& policy,
                       const SearchOptions& options) {
    if (!(options.stop_error > 0.0) && options.sample_budget == 0) {
        throw DomainError("search needs a positive stop error or a sample budget");
    }

    SearchTrace trace;
    FeasibleInterval interval;
    double x = 0.0;
    bool last_label = true;

    while (true) {
        const std::size_t taken = trace.steps.size();
        if (options.sample_budget != 0 && taken >= options.sample_budget) {
            trace.status = SearchStatus::budget_exhausted;
            break;
        }
        if (options.stop_error > 0.0 && interval.length() <= options.stop_error) {
            trace.status = SearchStatus::converged;
            break;
        }
        if (taken >= options.max_iterations) {
            trace.status = SearchStatus::timeout;
            break;
        }

        const double z = policy.fraction_at(taken + 1);
        const double move = z * interval.length();
        const double next = std::clamp(last_label ? x + move : x - move, 0.0, 1.0);

        const double y = oracle(next);
        if (y != 0.0 && y != 1.0) {
            throw ContractViolation(
                fmt::format("binary oracle returned {} at x = {}", y, next));
        }
        last_label = (y == 1.0);
        if (last_label) {
            interval.lower = next;
        } else {
            interval.upper = next;
        }
        trace.total_distance += std::abs(next - x);
        x = next;

        trace.steps.push_back(SearchStep{
            .index = taken + 1,
            .x = x,
            .raw = y,
            .label = last_label,
            .lower = interval.lower,
            .upper = interval.upper,
            .estimate = interval.midpoint(),
            .cumulative_distance = trace.total_distance,
            .spread = interval.length(),
        });
    }

    trace.sample_count = trace.steps.size();
    trace.estimate = interval.midpoint();
    trace.final_spread = interval.length();
    return trace;
}

SearchTrace fhs_search(const BinaryOracle& oracle, const Policy& policy, double stop_error) {
    return fhs_search(oracle, policy, SearchOptions{.stop_error = stop_error});
}

void write_trace_csv(std::ostream& out, const SearchTrace& trace) {
    out << "step,x,y,label,a,b,estimate,cumulative_distance\n";
    for (const SearchStep& s : trace.steps) {
        fmt::print(out, "{},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.index, s.x,
                   s.raw, s.label ? 1 : 0, s.lower, s.upper, s.estimate, s.cumulative_distance);
    }
}

}  // namespace fhlse
