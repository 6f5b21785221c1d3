#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fhlse {

/// Default cap on the number of steps policy_for_error may plan.
inline constexpr std::size_t kDefaultMaxHorizon = 10'000;

/**
 * Finite-horizon sampling policy.
 *
 * `fractions[k]` is the share of the current feasible interval (or of the
 * posterior mass) travelled at step k+1. Once the planned steps are used up
 * the search keeps sampling the one-step optimal fraction 1/2 - lambda/4.
 */
struct Policy {
    double lambda = 0.0;
    std::vector<double> fractions;
    double greedy_fraction = 0.5;

    std::size_t size() const noexcept { return fractions.size(); }
    bool empty() const noexcept { return fractions.empty(); }

    /// Fraction used at the 1-based step `n`.
    double fraction_at(std::size_t n) const noexcept {
        return (n >= 1 && n <= fractions.size()) ? fractions[n - 1] : greedy_fraction;
    }

    /// Smallest fraction the policy can ever use.
    double min_fraction() const noexcept;
};

struct PolicyDiagnostics {
    std::vector<double> xi;
    std::vector<double> rho;
    double expected_length = 0.0;
    double expected_distance = 0.0;
    double expected_cost = 0.0;
};

/// xi(z) = z^2 + (1-z)^2, the expected shrink factor of one sample.
constexpr double shrink_factor(double z) noexcept { return z * z + (1.0 - z) * (1.0 - z); }

/// One-step optimal fraction 1/2 - lambda/4.
constexpr double greedy_fraction(double lambda) noexcept { return 0.5 - 0.25 * lambda; }

/// Throws DomainError unless 0 <= lambda < 2.
void check_lambda(double lambda);

/// Closed-form optimal N-step policy, computed backward from rho_N = 1 in O(N).
Policy compute_policy(std::size_t n_steps, double lambda);

/// rho_k for arbitrary fractions: rho_N = 1, rho_k = xi_{k+1} rho_{k+1} + lambda z_{k+1}.
std::vector<double> rho_values(std::span<const double> fractions, double lambda);

double expected_interval_length(std::span<const double> fractions, double initial_length = 1.0);
double expected_distance(std::span<const double> fractions, double initial_length = 1.0);
double expected_cost(std::span<const double> fractions, double lambda, double initial_length = 1.0);

double expected_interval_length(const Policy& policy, double initial_length = 1.0);
double expected_distance(const Policy& policy, double initial_length = 1.0);
double expected_cost(const Policy& policy, double initial_length = 1.0);

/// Gradient of the unit-length expected cost with respect to each fraction.
std::vector<double> cost_gradient(std::span<const double> fractions, double lambda);

PolicyDiagnostics diagnose(const Policy& policy, double initial_length = 1.0);

/**
 * Shortest optimal policy whose expected final interval is at most
 * `target_error`.
 *
 * The policy is grown backward from z_N = 1/2 - lambda/4; because every
 * suffix of an optimal policy is itself optimal, each extension only
 * prepends a fraction. Returns a zero-step policy when the initial interval
 * already meets the target.
 *
 * Throws DomainError for lambda outside [0, 2) or non-positive lengths, and
 * HorizonExceeded if more than `max_horizon` steps would be needed.
 */
Policy policy_for_error(double target_error, double lambda, double initial_length = 1.0,
                        std::size_t max_horizon = kDefaultMaxHorizon);

/// Empirical (N_lambda, D_lambda) for one lambda, e.g. from a noisy Monte Carlo sweep.
struct CostTableEntry {
    double lambda = 0.0;
    double samples = 0.0;
    double distance = 0.0;
};

struct LambdaCandidate {
    double lambda = 0.0;
    double samples = 0.0;
    double distance = 0.0;
    double time = 0.0;
};

struct LambdaSelection {
    double lambda = 0.0;
    Policy policy;
    std::vector<LambdaCandidate> candidates;
};

/**
 * Picks the lambda minimizing sample_time * N_lambda + travel_time * D_lambda
 * over `lambda_grid`; ties go to the smaller lambda.
 *
 * Without `cost_table`, N_lambda and D_lambda come from policy_for_error and
 * the analytic expected distance. With it, every grid value must have a
 * table entry.
 */
LambdaSelection select_lambda(double sample_time, double travel_time, double target_error,
                              double initial_length, std::span<const double> lambda_grid,
                              std::optional<std::span<const CostTableEntry>> cost_table = {});

}  // namespace fhlse
