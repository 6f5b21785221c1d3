#include "fhlse/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fhlse/errors.hpp"

namespace fhlse {

std::string_view to_string(Algorithm algorithm) noexcept {
    switch (algorithm) {
        case Algorithm::fhs: return "fhs";
        case Algorithm::pfhs: return "pfhs";
        case Algorithm::qs: return "qs";
        case Algorithm::pqs: return "pqs";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view tag) {
    for (Algorithm a : {Algorithm::fhs, Algorithm::pfhs, Algorithm::qs, Algorithm::pqs}) {
        if (tag == to_string(a)) return a;
    }
    throw DomainError(fmt::format("unknown algorithm '{}' (expected fhs, pfhs, qs or pqs)", tag));
}

Policy qs_policy(double m) {
    // Fractions above 1/2 would need a negative lambda.
    if (!(m >= 2.0) || !std::isfinite(m)) {
        throw DomainError(fmt::format("QS divisor must be at least 2, got {}", m));
    }
    const double z = 1.0 / m;
    return Policy{.lambda = 2.0 - 4.0 * z, .fractions = {}, .greedy_fraction = z};
}

double time_cost(double samples, double distance, double sample_time, double travel_time) {
    if (!(sample_time >= 0.0) || !(travel_time >= 0.0)) {
        throw DomainError(fmt::format("sample and travel times must be non-negative (got {}, {})",
                                      sample_time, travel_time));
    }
    return sample_time * samples + travel_time * distance;
}

std::vector<double> theta_grid(std::size_t count) {
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = static_cast<double>(i + 1) / static_cast<double>(count + 1);
    }
    return grid;
}

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) return {};
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

SweepSummary CostReport::summary() const {
    SweepSummary s;
    s.trials = records.size();
    std::vector<double> samples, distance, error, spread, cost, time;
    for (const TrialRecord& r : records) {
        samples.push_back(static_cast<double>(r.samples));
        distance.push_back(r.distance);
        error.push_back(r.error);
        spread.push_back(r.spread);
        cost.push_back(r.cost);
        time.push_back(r.time);
    }
    s.samples = aggregate(samples);
    s.distance = aggregate(distance);
    s.error = aggregate(error);
    s.spread = aggregate(spread);
    s.cost = aggregate(cost);
    s.time = aggregate(time);
    return s;
}

namespace {

bool noisy(const StepNoise& noise) {
    return noise.kind != NoiseKind::none && noise.level > 0.0;
}

void validate(const SweepParams& params) {
    if (params.thetas.empty()) throw DomainError("sweep needs at least one theta");
    for (double theta : params.thetas) {
        if (!(theta >= 0.0 && theta <= 1.0)) {
            throw DomainError(fmt::format("theta must lie in [0,1], got {}", theta));
        }
    }
    if (params.trials == 0) throw DomainError("sweep needs at least one trial");
    if (!(params.epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
    if (params.epsilon == 0.0 && params.sample_budget == 0) {
        throw DomainError("sweep needs an epsilon or a sample budget");
    }
    time_cost(0.0, 0.0, params.sample_time, params.travel_time);
    // Surfaces an invalid noise level before any thread starts.
    StepOracle probe(0.5, params.noise, 0);
}

}  // namespace

Policy sweep_policy(const SweepParams& params) {
    if (params.algorithm == Algorithm::qs || params.algorithm == Algorithm::pqs) {
        check_lambda(params.lambda);
        return qs_policy(params.qs_m.value_or(1.0 / greedy_fraction(params.lambda)));
    }
    if (params.horizon > 0) return compute_policy(params.horizon, params.lambda);
    if (params.epsilon > 0.0) return policy_for_error(params.epsilon, params.lambda);
    return compute_policy(params.sample_budget, params.lambda);
}

SearchTrace run_search(const SweepParams& params, const Policy& policy, StepOracle& oracle) {
    if (is_probabilistic(params.algorithm)) {
        const PfhsOptions options{.stop_error = 0.25 * params.epsilon,
                                  .sample_budget = params.sample_budget,
                                  .max_iterations = params.max_iterations,
                                  .grid_size = params.grid_size};
        return pfhs_search([&](double x) { return oracle.observe(x); }, policy, options);
    }
    const SearchOptions options{.stop_error = params.epsilon,
                                .sample_budget = params.sample_budget,
                                .max_iterations = params.max_iterations};
    return fhs_search([&](double x) { return oracle.label(x); }, policy, options);
}

TrialRecord run_trial(const SweepParams& params, const Policy& policy, std::size_t theta_index,
                      std::size_t trial) {
    const double theta = params.thetas.at(theta_index);
    StepOracle oracle(theta, params.noise, derive_seed(params.seed, theta_index, trial));
    const SearchTrace trace = run_search(params, policy, oracle);

    TrialRecord r;
    r.theta_index = theta_index;
    r.trial = trial;
    r.theta = theta;
    r.lambda = policy.lambda;
    r.noise = params.noise.kind == NoiseKind::none ? 0.0 : params.noise.level;
    r.samples = trace.sample_count;
    r.distance = trace.total_distance;
    r.estimate = trace.estimate;
    r.error = std::abs(trace.estimate - theta);
    r.spread = noisy(params.noise) ? 4.0 * r.error : trace.final_spread;
    r.cost = r.spread + r.lambda * r.distance;
    r.time = time_cost(static_cast<double>(r.samples), r.distance, params.sample_time,
                       params.travel_time);
    r.status = trace.status;
    return r;
}

namespace {

// Calls fn(k) for k in [0, total) on strided worker threads and rethrows the
// first failure. Each k is written by exactly one worker.
template <class Fn>
void parallel_for(std::size_t total, std::size_t threads, Fn fn) {
    if (total == 0) return;
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, total);
    std::vector<std::exception_ptr> failures(workers);
    auto work = [&](std::size_t worker) {
        try {
            for (std::size_t k = worker; k < total; k += workers) fn(k);
        } catch (...) {
            failures[worker] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
}

}  // namespace

CostReport run_sweep(const SweepParams& params) {
    validate(params);
    CostReport report;
    report.algorithm = params.algorithm;
    report.policy = sweep_policy(params);
    report.lambda = report.policy.lambda;
    report.noise = params.noise.kind == NoiseKind::none ? 0.0 : params.noise.level;

    report.records.resize(params.thetas.size() * params.trials);
    parallel_for(report.records.size(), params.threads, [&](std::size_t k) {
        report.records[k] = run_trial(params, report.policy, k / params.trials, k % params.trials);
    });
    return report;
}

namespace {

struct MeanCurves {
    std::vector<double> spread;    ///< mean spread after n samples, n = 0..budget
    std::vector<double> distance;  ///< mean cumulative distance after n samples
};

// Runs every trial for exactly `budget` samples and averages the per-step
// spread and distance. Noiseless tables run the interval search, which the
// posterior search reproduces exactly, so the spread is the interval length.
MeanCurves mean_curves(const SweepParams& params, const Policy& policy, std::size_t budget) {
    SweepParams fixed = params;
    fixed.epsilon = 0.0;
    fixed.sample_budget = budget;
    const bool noisy_run = noisy(params.noise);
    if (!noisy_run) fixed.algorithm = Algorithm::fhs;

    const std::size_t total = params.thetas.size() * params.trials;
    std::vector<std::vector<double>> spreads(total), distances(total);
    parallel_for(total, params.threads, [&](std::size_t k) {
        const std::size_t theta_index = k / params.trials;
        const double theta = params.thetas[theta_index];
        StepOracle oracle(theta, params.noise,
                          derive_seed(params.seed, theta_index, k % params.trials));
        const SearchTrace trace = run_search(fixed, policy, oracle);
        auto& spread = spreads[k];
        auto& distance = distances[k];
        spread.reserve(budget + 1);
        distance.reserve(budget + 1);
        spread.push_back(noisy_run ? 4.0 * std::abs(0.5 - theta) : 1.0);
        distance.push_back(0.0);
        for (const SearchStep& step : trace.steps) {
            spread.push_back(noisy_run ? 4.0 * std::abs(step.estimate - theta)
                                       : step.upper - step.lower);
            distance.push_back(step.cumulative_distance);
        }
    });

    MeanCurves curves{std::vector<double>(budget + 1, 0.0), std::vector<double>(budget + 1, 0.0)};
    for (std::size_t k = 0; k < total; ++k) {
        for (std::size_t n = 0; n <= budget; ++n) {
            curves.spread[n] += spreads[k][n];
            curves.distance[n] += distances[k][n];
        }
    }
    for (std::size_t n = 0; n <= budget; ++n) {
        curves.spread[n] /= static_cast<double>(total);
        curves.distance[n] /= static_cast<double>(total);
    }
    return curves;
}

}  // namespace

std::vector<CostTableEntry> cost_table(const SweepParams& base,
                                       std::span<const double> lambdas) {
    if (!(base.epsilon > 0.0)) throw DomainError("cost tables need a positive epsilon");
    std::vector<CostTableEntry> table;
    table.reserve(lambdas.size());
    for (double lambda : lambdas) {
        SweepParams params = base;
        params.lambda = lambda;
        params.qs_m.reset();
        validate(params);
        const Policy policy = sweep_policy(params);

        // N_lambda is the first sample count whose mean spread reaches epsilon,
        // the Monte Carlo counterpart of the expected-length rule used to plan
        // the policy; the budget doubles until the crossing is inside it.
        std::size_t budget = std::min(params.max_iterations, 2 * policy.size() + 16);
        while (true) {
            const MeanCurves curves = mean_curves(params, policy, budget);
            const auto hit = std::find_if(curves.spread.begin(), curves.spread.end(),
                                          [&](double v) { return v <= params.epsilon; });
            if (hit != curves.spread.end()) {
                const auto n = static_cast<std::size_t>(hit - curves.spread.begin());
                table.push_back({.lambda = lambda,
                                 .samples = static_cast<double>(n),
                                 .distance = curves.distance[n]});
                break;
            }
            if (budget >= params.max_iterations) {
                throw HorizonExceeded(fmt::format(
                    "mean spread for lambda {} stays above {} within {} samples", lambda,
                    params.epsilon, params.max_iterations));
            }
            budget = std::min(params.max_iterations, 2 * budget);
        }
    }
    return table;
}

void write_report_csv(std::ostream& out, const CostReport& report) {
    out << "algo,theta,lambda,noise,samples,distance,error,cost,time\n";
    for (const TrialRecord& r : report.records) {
        fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                   to_string(report.algorithm), r.theta, r.lambda, r.noise, r.samples, r.distance,
                   r.error, r.cost, r.time);
    }
}

void write_summary_csv(std::ostream& out, const CostReport& report) {
    out << "algo,lambda,noise,trials,samples_mean,samples_se,distance_mean,distance_se,"
           "error_mean,error_se,spread_mean,spread_se,cost_mean,cost_se,time_mean,time_se\n";
    const SweepSummary s = report.summary();
    fmt::print(out, "{},{:.17g},{:.17g},{}", to_string(report.algorithm), report.lambda,
               report.noise, s.trials);
    for (const Aggregate& a : {s.samples, s.distance, s.error, s.spread, s.cost, s.time}) {
        fmt::print(out, ",{:.17g},{:.17g}", a.mean, a.standard_error);
    }
    out << '\n';
}

}  // namespace fhlse
