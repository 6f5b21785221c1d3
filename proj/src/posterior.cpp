#include "fhlse/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fhlse/errors.hpp"

namespace fhlse {

namespace {

// a * log(b) with 0 * log(0) := 0.
double xlogy(double a, double b) { return a == 0.0 ? 0.0 : a * std::log(b); }

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 0.5)) {
        throw DomainError(fmt::format("error probability must lie in [0, 1/2], got {}", p));
    }
}

}  // namespace

double standard_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double error_probability(double raw, const NoiseModel& noise) {
    if (!(noise.sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
    if (raw == noise.threshold) return 0.5;
    if (noise.sigma == 0.0) return 0.0;
    const double t = (raw - noise.threshold) / noise.sigma;
    return raw > noise.threshold ? standard_normal_cdf(-t) : standard_normal_cdf(t);
}

Posterior::Posterior(std::size_t grid_size) : grid_size_(grid_size) {
    if (grid_size == 0) throw DomainError("posterior grid needs at least one bin");
    edges_.resize(grid_size + 1);
    for (std::size_t i = 0; i <= grid_size; ++i) {
        edges_[i] = static_cast<double>(i) / static_cast<double>(grid_size);
    }
    mass_.assign(grid_size, 1.0 / static_cast<double>(grid_size));
}

double Posterior::total_mass() const noexcept {
    return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

double Posterior::cdf(double x) const noexcept {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return total_mass();
    double cum = 0.0;
    for (std::size_t k = 0; k < mass_.size(); ++k) {
        const double lo = edges_[k];
        const double hi = edges_[k + 1];
        if (hi <= x) {
            cum += mass_[k];
        } else {
            if (x > lo) cum += mass_[k] * (x - lo) / (hi - lo);
            break;
        }
    }
    return cum;
}

double Posterior::quantile(double q) const noexcept {
    double cum = 0.0;
    std::size_t last = mass_.size();
    for (std::size_t k = 0; k < mass_.size(); ++k) {
        const double m = mass_[k];
        if (m <= 0.0) continue;
        last = k;
        if (cum + m >= q) {
            const double share = std::clamp((q - cum) / m, 0.0, 1.0);
            return edges_[k] + share * (edges_[k + 1] - edges_[k]);
        }
        cum += m;
    }
    // Rounding left the running sum just short of q.
    return last < mass_.size() ? edges_[last + 1] : 1.0;
}

double Posterior::expected_abs_error(double estimate) const noexcept {
    double total = 0.0;
    for (std::size_t k = 0; k < mass_.size(); ++k) {
        const double m = mass_[k];
        if (m <= 0.0) continue;
        const double lo = edges_[k];
        const double hi = edges_[k + 1];
        if (estimate <= lo) {
            total += m * (0.5 * (lo + hi) - estimate);
        } else if (estimate >= hi) {
            total += m * (estimate - 0.5 * (lo + hi));
        } else {
            const double density = m / (hi - lo);
            const double left = estimate - lo;
            const double right = hi - estimate;
            total += 0.5 * density * (left * left + right * right);
        }
    }
    return total;
}

double Posterior::entropy() const noexcept {
    double h = 0.0;
    for (std::size_t k = 0; k < mass_.size(); ++k) {
        const double m = mass_[k];
        if (m <= 0.0) continue;
        h -= m * std::log(m / (edges_[k + 1] - edges_[k]));
    }
    return h;
}

std::size_t Posterior::split_at(double x) {
    if (x <= 0.0) return 0;
    if (x >= 1.0) return mass_.size();
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    const auto k = static_cast<std::size_t>(std::distance(edges_.begin(), it)) - 1;
    if (edges_[k] == x) return k;

    const double share = (x - edges_[k]) / (edges_[k + 1] - edges_[k]);
    const double left_mass = mass_[k] * share;
    const double right_mass = mass_[k] - left_mass;
    edges_.insert(edges_.begin() + static_cast<std::ptrdiff_t>(k) + 1, x);
    mass_[k] = left_mass;
    mass_.insert(mass_.begin() + static_cast<std::ptrdiff_t>(k) + 1, right_mass);
    return k + 1;
}

void Posterior::update(double x, bool positive, double p) {
    check_probability(p);
    if (!std::isfinite(x)) throw DomainError("sample location must be finite");

    const std::size_t boundary = split_at(x);
    const auto split = mass_.begin() + static_cast<std::ptrdiff_t>(boundary);
    const double left = std::accumulate(mass_.begin(), split, 0.0);
    const double right = std::accumulate(split, mass_.end(), 0.0);

    const double left_factor = positive ? p : 1.0 - p;
    const double right_factor = positive ? 1.0 - p : p;
    const double normalizer = left * left_factor + right * right_factor;
    if (!(normalizer > 0.0) || !std::isfinite(normalizer)) {
        throw DegenerateUpdate(fmt::format(
            "update at x = {} with p = {} leaves no posterior mass", x, p));
    }

    for (std::size_t k = 0; k < mass_.size(); ++k) {
        mass_[k] *= (k < boundary ? left_factor : right_factor) / normalizer;
    }
    const double total = total_mass();
    for (double& m : mass_) m /= total;
}

Posterior update(const Posterior& prior, double x, bool positive, double p, double z) {
    const double left = prior.cdf(x);
    if (std::abs(left - z) > 1e-9) {
        throw ContractViolation(fmt::format(
            "fraction z = {} does not match the prior mass {} left of x = {}", z, left, x));
    }
    Posterior posterior = prior;
    posterior.update(x, positive, p);
    return posterior;
}

double quantile(const Posterior& posterior, double q) { return posterior.quantile(q); }

void write_posterior_csv(std::ostream& out, const Posterior& posterior) {
    out << "bin_center,mass\n";
    const auto edges = posterior.edges();
    const auto masses = posterior.masses();
    for (std::size_t k = 0; k < masses.size(); ++k) {
        fmt::print(out, "{:.17g},{:.17g}\n", 0.5 * (edges[k] + edges[k + 1]), masses[k]);
    }
}

double effective_interval_size(double x0, bool positive, double p) {
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("initial sample must lie in [0,1]");
    check_probability(p);
    const double q = 1.0 - p;
    // Weights of log p and log(1-p) in the entropy of the updated density.
    const double p_weight = positive ? p * x0 : p * (1.0 - x0);
    const double q_weight = positive ? q * (1.0 - x0) : q * x0;
    const double normalizer = p_weight + q_weight;
    if (!(normalizer > 0.0)) throw DegenerateUpdate("initial sample leaves no posterior mass");
    const double log_size =
        std::log(normalizer) - (xlogy(p_weight, p) + xlogy(q_weight, q)) / normalizer;
    return std::exp(log_size);
}

ConvergenceTerms convergence_terms(double p) {
    if (!(p >= 0.0 && p < 0.5)) throw DomainError("noise level must lie in [0, 1/2)");
    // With s = sqrt(p) + sqrt(1-p): alpha = sqrt(p)/s, so both ratios stay
    // finite as p -> 0.
    const double sp = std::sqrt(p);
    const double sq = std::sqrt(1.0 - p);
    const double s = sp + sq;
    ConvergenceTerms terms;
    terms.upper = 0.5 * sq * s;
    terms.lower = 0.5 * sp * s;
    terms.mixing = (terms.upper - terms.lower) * (sq - sp) / s;
    return terms;
}

double convergence_factor(double z, double p) {
    if (!(z > 0.0 && z <= 0.5)) throw DomainError("fraction must lie in (0, 1/2]");
    const ConvergenceTerms terms = convergence_terms(p);
    return terms.upper + terms.lower + terms.mixing * (1.0 - 2.0 * z);
}

Observation observe(double raw, const NoiseModel& noise) {
    if (!std::isfinite(raw)) {
        throw ContractViolation(fmt::format("oracle returned non-finite value {}", raw));
    }
    return Observation{
        .raw = raw,
        .positive = raw > noise.threshold,
        .error_probability = error_probability(raw, noise),
        .uninformative = raw == noise.threshold,
    };
}

PfhsState::PfhsState(std::size_t grid_size, double start)
    : posterior(grid_size), location(start) {
    trace.start = start;
    trace.estimate = posterior.median();
}

void pfhs_measure(PfhsState& state, const Observer& observer, double x) {
    const Observation obs = observer(x);
    if (!std::isfinite(obs.raw)) {
        throw ContractViolation(fmt::format("oracle returned non-finite value {}", obs.raw));
    }

    SearchStep step{.index = state.trace.steps.size() + 1, .x = x, .raw = obs.raw,
                    .label = obs.positive};
    if (obs.uninformative) {
        step.error_probability = 0.5;
    } else {
        if (!(obs.error_probability >= 0.0)) {
            throw ContractViolation("observer produced a negative error probability");
        }
        double p = obs.error_probability;
        if (p > kMaxErrorProbability) {
            p = kMaxErrorProbability;
            step.clamped = true;
        }
        step.error_probability = p;
        state.posterior.update(x, obs.positive, p);
    }

    state.trace.total_distance += std::abs(x - state.location);
    state.location = x;

    const Posterior& post = state.posterior;
    step.lower = post.quantile(0.025);
    step.upper = post.quantile(0.975);
    step.estimate = post.median();
    step.cumulative_distance = state.trace.total_distance;
    step.spread = std::exp(post.entropy());
    state.trace.steps.push_back(step);
    state.trace.sample_count = state.trace.steps.size();
    state.trace.estimate = step.estimate;
}

namespace {

// Moves to the nearer of the z and 1-z quantiles when that keeps the sensor
// heading toward the median. When the quantile on the median side lies behind
// the sensor, the posterior is instead truncated at the sensor to the median
// side and the sensor moves a fraction z into that mass. With exact labels
// the sensor always sits at an end of the feasible interval, so the plain
// quantile rule applies and the move is the noiseless one.
double choose_location(const Posterior& posterior, double current, double z) {
    const double low = posterior.quantile(z);
    const double high = posterior.quantile(1.0 - z);
    const double median = posterior.median();
    if (current < median) {
        if (low >= current) return low;
        const double below = posterior.cdf(current);
        return posterior.quantile(below + z * (1.0 - below));
    }
    if (current > median) {
        if (high <= current) return high;
        return posterior.quantile(posterior.cdf(current) * (1.0 - z));
    }
    return std::abs(low - current) <= std::abs(high - current) ? low : high;
}

}  // namespace

void pfhs_run(PfhsState& state, const Observer& observer, const Policy& policy,
              const PfhsOptions& options) {
    if (!(options.stop_error > 0.0) && options.sample_budget == 0) {
        throw DomainError("search needs a positive stop error or a sample budget");
    }
    const double grid = static_cast<double>(state.posterior.grid_size());

    std::size_t policy_step = 0;
    while (true) {
        const std::size_t taken = state.trace.steps.size();
        if (options.sample_budget != 0 && taken >= options.sample_budget) {
            state.trace.status = SearchStatus::budget_exhausted;
            break;
        }
        const double median = state.posterior.median();
        if (options.stop_error > 0.0 &&
            state.posterior.expected_abs_error(median) <= options.stop_error) {
            state.trace.status = SearchStatus::converged;
            break;
        }
        if (taken >= options.max_iterations) {
            state.trace.status = SearchStatus::timeout;
            break;
        }

        ++policy_step;
        double x = choose_location(state.posterior, state.location, policy.fraction_at(policy_step));
        if (options.snap_to_grid) x = std::round(x * grid) / grid;
        pfhs_measure(state, observer, x);
    }

    state.trace.sample_count = state.trace.steps.size();
    state.trace.estimate = state.posterior.median();
    state.trace.final_spread = std::exp(state.posterior.entropy());
}

SearchTrace pfhs_search(const Observer& observer, const Policy& policy,
                        const PfhsOptions& options) {
    PfhsState state(options.grid_size, 0.0);
    pfhs_run(state, observer, policy, options);
    return std::move(state.trace);
}

SearchTrace pfhs_search(const std::function<double(double)>& oracle, const Policy& policy,
                        const NoiseModel& noise, double stop_error, std::size_t grid_size) {
    const Observer observer = [&](double x) { return observe(oracle(x), noise); };
    return pfhs_search(observer, policy,
                       PfhsOptions{.stop_error = stop_error, .grid_size = grid_size});
}

}  // namespace fhlse
