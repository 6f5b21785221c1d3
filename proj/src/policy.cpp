#include "fhlse/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "fhlse/errors.hpp"

namespace fhlse {

double Policy::min_fraction() const noexcept {
    double smallest = greedy_fraction;
    for (double z : fractions) smallest = std::min(smallest, z);
    return smallest;
}

void check_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda < 2.0)) {
        throw DomainError(fmt::format("lambda must lie in [0,2), got {}", lambda));
    }
}

namespace {

void check_length(double length, const char* what) {
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw DomainError(fmt::format("{} must be positive and finite, got {}", what, length));
    }
}

double next_fraction(double lambda, double rho) { return 0.5 - lambda / (4.0 * rho); }

}  // namespace

Policy compute_policy(std::size_t n_steps, double lambda) {
    check_lambda(lambda);
    if (n_steps == 0) throw DomainError("compute_policy needs at least one step");

    Policy policy;
    policy.lambda = lambda;
    policy.greedy_fraction = greedy_fraction(lambda);
    policy.fractions.assign(n_steps, 0.0);

    double rho = 1.0;
    policy.fractions[n_steps - 1] = next_fraction(lambda, rho);
    for (std::size_t k = n_steps - 1; k-- > 0;) {
        const double z_next = policy.fractions[k + 1];
        rho = shrink_factor(z_next) * rho + lambda * z_next;
        policy.fractions[k] = next_fraction(lambda, rho);
    }
    return policy;
}

std::vector<double> rho_values(std::span<const double> fractions, double lambda) {
    std::vector<double> rho(fractions.size(), 1.0);
    for (std::size_t k = fractions.size(); k-- > 1;) {
        rho[k - 1] = shrink_factor(fractions[k]) * rho[k] + lambda * fractions[k];
    }
    return rho;
}

double expected_interval_length(std::span<const double> fractions, double initial_length) {
    double length = initial_length;
    for (double z : fractions) length *= shrink_factor(z);
    return length;
}

double expected_distance(std::span<const double> fractions, double initial_length) {
    double length = initial_length;
    double distance = 0.0;
    for (double z : fractions) {
        distance += z * length;
        length *= shrink_factor(z);
    }
    return distance;
}

double expected_cost(std::span<const double> fractions, double lambda, double initial_length) {
    return expected_interval_length(fractions, initial_length) +
           lambda * expected_distance(fractions, initial_length);
}

double expected_interval_length(const Policy& policy, double initial_length) {
    return expected_interval_length(policy.fractions, initial_length);
}

double expected_distance(const Policy& policy, double initial_length) {
    return expected_distance(policy.fractions, initial_length);
}

double expected_cost(const Policy& policy, double initial_length) {
    return expected_cost(policy.fractions, policy.lambda, initial_length);
}

std::vector<double> cost_gradient(std::span<const double> fractions, double lambda) {
    const std::vector<double> rho = rho_values(fractions, lambda);
    std::vector<double> gradient(fractions.size());
    double prefix = 1.0;
    for (std::size_t l = 0; l < fractions.size(); ++l) {
        gradient[l] = prefix * ((4.0 * fractions[l] - 2.0) * rho[l] + lambda);
        prefix *= shrink_factor(fractions[l]);
    }
    return gradient;
}

PolicyDiagnostics diagnose(const Policy& policy, double initial_length) {
    PolicyDiagnostics diag;
    diag.xi.reserve(policy.size());
    for (double z : policy.fractions) diag.xi.push_back(shrink_factor(z));
    diag.rho = rho_values(policy.fractions, policy.lambda);
    diag.expected_length = expected_interval_length(policy, initial_length);
    diag.expected_distance = expected_distance(policy, initial_length);
    diag.expected_cost = diag.expected_length + policy.lambda * diag.expected_distance;
    return diag;
}

Policy policy_for_error(double target_error, double lambda, double initial_length,
                        std::size_t max_horizon) {
    check_lambda(lambda);
    check_length(target_error, "target error");
    check_length(initial_length, "initial length");

    Policy policy;
    policy.lambda = lambda;
    policy.greedy_fraction = greedy_fraction(lambda);
    if (initial_length <= target_error) return policy;

    // Built back to front: reversed[0] is z_N.
    std::vector<double> reversed;
    double rho = 1.0;
    double z = next_fraction(lambda, rho);
    double product = shrink_factor(z);
    reversed.push_back(z);
    while (initial_length * product > target_error) {
        if (reversed.size() >= max_horizon) {
            throw HorizonExceeded(fmt::format(
                "policy for error {} with lambda {} needs more than {} steps", target_error,
                lambda, max_horizon));
        }
        rho = shrink_factor(z) * rho + lambda * z;
        z = next_fraction(lambda, rho);
        product *= shrink_factor(z);
        reversed.push_back(z);
    }
    policy.fractions.assign(reversed.rbegin(), reversed.rend());
    return policy;
}

LambdaSelection select_lambda(double sample_time, double travel_time, double target_error,
                              double initial_length, std::span<const double> lambda_grid,
                              std::optional<std::span<const CostTableEntry>> cost_table) {
    if (lambda_grid.empty()) throw DomainError("lambda grid is empty");
    if (!(sample_time >= 0.0) || !(travel_time >= 0.0)) {
        throw DomainError("sample and travel times must be non-negative");
    }

    LambdaSelection selection;
    selection.candidates.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        check_lambda(lambda);
        LambdaCandidate candidate{.lambda = lambda};
        if (cost_table) {
            const auto it = std::ranges::find_if(*cost_table, [lambda](const CostTableEntry& e) {
                return std::abs(e.lambda - lambda) <= 1e-12;
            });
            if (it == cost_table->end()) {
                throw DomainError(fmt::format("cost table has no entry for lambda {}", lambda));
            }
            candidate.samples = it->samples;
            candidate.distance = it->distance;
        } else {
            const Policy policy = policy_for_error(target_error, lambda, initial_length);
            candidate.samples = static_cast<double>(policy.size());
            candidate.distance = expected_distance(policy, initial_length);
        }
        candidate.time = sample_time * candidate.samples + travel_time * candidate.distance;
        selection.candidates.push_back(candidate);
    }

    const auto better = [](const LambdaCandidate& a, const LambdaCandidate& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.lambda < b.lambda;
    };
    const auto best = std::ranges::min_element(selection.candidates, better);
    selection.lambda = best->lambda;
    selection.policy = policy_for_error(target_error, selection.lambda, initial_length);
    return selection;
}

}  // namespace fhlse
