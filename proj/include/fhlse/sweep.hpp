#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fhlse/oracle.hpp"
#include "fhlse/policy.hpp"
#include "fhlse/posterior.hpp"
#include "fhlse/search.hpp"

namespace fhlse {

enum class Algorithm { fhs, pfhs, qs, pqs };

std::string_view to_string(Algorithm algorithm) noexcept;
/// Throws DomainError on an unknown tag.
Algorithm parse_algorithm(std::string_view tag);

/// True for the posterior-based searches.
constexpr bool is_probabilistic(Algorithm a) noexcept {
    return a == Algorithm::pfhs || a == Algorithm::pqs;
}

/**
 * Constant-fraction policy sampling 1/m of the interval every step. Its
 * lambda is the one whose one-step optimal fraction is 1/m, i.e. 2 - 4/m.
 * Throws DomainError for m < 2.
 */
Policy qs_policy(double m);

/// sample_time * samples + travel_time * distance. Negative times are a DomainError.
double time_cost(double samples, double distance, double sample_time, double travel_time);

/// i/(count+1), i = 1..count; the endpoints are excluded.
std::vector<double> theta_grid(std::size_t count);

struct SweepParams {
    Algorithm algorithm = Algorithm::fhs;
    std::vector<double> thetas;
    std::size_t trials = 100;
    double lambda = 0.0;
    /// qs/pqs only: the QS divisor. Defaults to the m matching `lambda`.
    std::optional<double> qs_m;
    StepNoise noise;
    /// >0: optimal fixed-horizon policy of this length. 0: policy sized for `epsilon`.
    std::size_t horizon = 0;
    /// Target final interval length. Interval searches stop at length <= epsilon;
    /// posterior searches stop at 4 E|error| <= epsilon. 0 disables.
    double epsilon = 0.0;
    /// Fixed number of samples per trial when non-zero.
    std::size_t sample_budget = 0;
    std::size_t grid_size = kDefaultGridSize;
    std::size_t max_iterations = kDefaultMaxIterations;
    double sample_time = 0.0;
    double travel_time = 0.0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct TrialRecord {
    std::size_t theta_index = 0;
    std::size_t trial = 0;
    double theta = 0.0;
    double lambda = 0.0;
    double noise = 0.0;
    std::size_t samples = 0;
    double distance = 0.0;
    double estimate = 0.0;
    double error = 0.0;   ///< |estimate - theta|
    double spread = 0.0;  ///< final-uncertainty term of the cost
    double cost = 0.0;    ///< spread + lambda * distance
    double time = 0.0;
    SearchStatus status = SearchStatus::converged;
};

struct Aggregate {
    double mean = 0.0;
    double standard_error = 0.0;
};

Aggregate aggregate(const std::vector<double>& values);

struct SweepSummary {
    std::size_t trials = 0;
    Aggregate samples, distance, error, spread, cost, time;
};

struct CostReport {
    Algorithm algorithm = Algorithm::fhs;
    double lambda = 0.0;
    double noise = 0.0;
    Policy policy;
    std::vector<TrialRecord> records;  ///< ordered by (theta index, trial)

    /// Recomputed from `records` on every call.
    SweepSummary summary() const;
};

/// Policy a sweep will drive its searches with.
Policy sweep_policy(const SweepParams& params);

/**
 * Runs every (theta, trial) pair. Trial seeds are derived from
 * (seed, theta index, trial), so results do not depend on `threads`.
 *
 * The spread term is 4|estimate - theta| for noisy runs, the final interval
 * length for noiseless interval searches and the exponentiated posterior
 * entropy for noiseless posterior searches.
 */
CostReport run_sweep(const SweepParams& params);

/// Runs the sweep's search once against `oracle`.
SearchTrace run_search(const SweepParams& params, const Policy& policy, StepOracle& oracle);

/// One trial, exactly as run_sweep would run it.
TrialRecord run_trial(const SweepParams& params, const Policy& policy, std::size_t theta_index,
                      std::size_t trial);

/**
 * Empirical (N_lambda, D_lambda) table. For each lambda the policy of `base`
 * (its lambda replaced) is run for a fixed number of samples on every
 * (theta, trial) pair; N_lambda is the first sample count at which the mean
 * spread over all runs is at most `base.epsilon`, and D_lambda the mean
 * distance travelled by then. Throws HorizonExceeded if the crossing needs
 * more than `base.max_iterations` samples.
 */
std::vector<CostTableEntry> cost_table(const SweepParams& base, std::span<const double> lambdas);

/// Header: algo,theta,lambda,noise,samples,distance,error,cost,time
void write_report_csv(std::ostream& out, const CostReport& report);
/// Header: algo,lambda,noise,trials,samples_mean,samples_se,... (mean and se per metric)
void write_summary_csv(std::ostream& out, const CostReport& report);

}  // namespace fhlse
