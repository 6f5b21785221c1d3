#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "fhlse/errors.hpp"
#include "fhlse/policy.hpp"
#include "fhlse/search.hpp"

using namespace fhlse;

namespace {

BinaryOracle step(double theta) {
    return [theta](double x) { return x < theta ? 1.0 : 0.0; };
}

}  // namespace

TEST_CASE("bisection example") {
    const SearchTrace t = fhs_search(step(0.5), compute_policy(1, 0.0), 0.1);
    REQUIRE(t.sample_count == 4);
    CHECK(t.steps[0].x == 0.5);
    CHECK_FALSE(t.steps[0].label);  // right-open indicator: f(theta) = 0
    CHECK(t.steps[1].x == 0.25);
    CHECK(t.steps.back().upper - t.steps.back().lower <= 0.1);
    CHECK(t.status == SearchStatus::converged);
    CHECK(std::abs(t.estimate - 0.5) <= 0.05);
}

TEST_CASE("noiseless invariants over random change points and policies") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double theta = unit(rng);
        const double lambda = 1.99 * unit(rng);
        const std::size_t n = 1 + trial % 15;
        const Policy policy = compute_policy(n, lambda);
        const double stop = 0.001 + 0.05 * unit(rng);
        const SearchTrace t = fhs_search(step(theta), policy, stop);

        CHECK(t.sample_count == t.steps.size());
        double position = 0.0;
        double distance = 0.0;
        double lower = 0.0;
        double upper = 1.0;
        for (const SearchStep& s : t.steps) {
            CHECK(s.x >= 0.0);
            CHECK(s.x <= 1.0);
            CHECK(s.lower <= theta);
            CHECK(theta <= s.upper);
            const double z = policy.fraction_at(s.index);
            const double before = upper - lower;
            const double after = s.upper - s.lower;
            const bool near = std::abs(after - z * before) <= 1e-12;
            const bool far = std::abs(after - (1.0 - z) * before) <= 1e-12;
            CHECK((near || far));
            distance += std::abs(s.x - position);
            CHECK(s.cumulative_distance == doctest::Approx(distance).epsilon(1e-12));
            position = s.x;
            lower = s.lower;
            upper = s.upper;
        }
        CHECK(t.total_distance == doctest::Approx(distance).epsilon(1e-12));
        CHECK(upper - lower <= stop);
        CHECK(std::abs(t.estimate - theta) <= stop / 2 + 1e-15);
        CHECK(t.final_spread == doctest::Approx(upper - lower));
    }
}

TEST_CASE("a large distance penalty travels less near the far end") {
    const double theta = 0.999;
    const SearchTrace cautious = fhs_search(step(theta), policy_for_error(0.01, 1.5), 0.01);
    const SearchTrace bisect = fhs_search(step(theta), policy_for_error(0.01, 0.0), 0.01);
    CHECK(cautious.total_distance < bisect.total_distance);
    CHECK(cautious.sample_count > bisect.sample_count);
}

TEST_CASE("Monte Carlo mean length and distance match the analytic expectations") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& [n, lambda] : {std::pair<std::size_t, double>{6, 0.5}, {4, 1.2}}) {
        const Policy policy = compute_policy(n, lambda);
        const SearchOptions options{.sample_budget = n};
        const int trials = 100000;
        double sum_l = 0, sum_l2 = 0, sum_d = 0, sum_d2 = 0;
        for (int i = 0; i < trials; ++i) {
            const SearchTrace t = fhs_search(step(unit(rng)), policy, options);
            sum_l += t.final_spread;
            sum_l2 += t.final_spread * t.final_spread;
            sum_d += t.total_distance;
            sum_d2 += t.total_distance * t.total_distance;
        }
        const double mean_l = sum_l / trials;
        const double se_l = std::sqrt((sum_l2 / trials - mean_l * mean_l) / trials);
        const double mean_d = sum_d / trials;
        const double se_d = std::sqrt((sum_d2 / trials - mean_d * mean_d) / trials);
        CHECK(std::abs(mean_l - expected_interval_length(policy)) <= 3 * se_l);
        CHECK(std::abs(mean_d - expected_distance(policy)) <= 3 * se_d);
    }
}

TEST_CASE("budget, greedy continuation and timeout") {
    const Policy policy = compute_policy(3, 1.0);
    const SearchTrace budget = fhs_search(step(0.7), policy, SearchOptions{.sample_budget = 8});
    CHECK(budget.sample_count == 8);
    CHECK(budget.status == SearchStatus::budget_exhausted);

    const SearchTrace capped =
        fhs_search(step(0.7), compute_policy(1, 1.9), SearchOptions{.stop_error = 1e-12,
                                                                    .max_iterations = 20});
    CHECK(capped.status == SearchStatus::timeout);
    CHECK(capped.sample_count == 20);
}

TEST_CASE("errors") {
    const Policy policy = compute_policy(2, 0.5);
    CHECK_THROWS_AS(fhs_search([](double) { return 0.5; }, policy, 0.1), ContractViolation);
    CHECK_THROWS_AS(fhs_search(step(0.5), policy, SearchOptions{}), DomainError);
}

TEST_CASE("noisy labels keep the search well defined") {
    std::mt19937_64 rng(9);
    std::bernoulli_distribution flip(0.2);
    const double theta = 0.4;
    const SearchTrace t = fhs_search(
        [&](double x) {
            const double exact = x < theta ? 1.0 : 0.0;
            return flip(rng) ? 1.0 - exact : exact;
        },
        policy_for_error(0.01, 0.5), 0.01);
    CHECK(t.estimate >= 0.0);
    CHECK(t.estimate <= 1.0);
    for (const SearchStep& s : t.steps) CHECK(s.lower <= s.upper);
}

TEST_CASE("trace CSV") {
    const SearchTrace t = fhs_search(step(0.3), compute_policy(2, 0.0), 0.2);
    std::ostringstream out;
    write_trace_csv(out, t);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,x,y,label,a,b,estimate,cumulative_distance");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == t.sample_count);
}
