#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fhlse/policy.hpp"
#include "fhlse/search.hpp"

namespace fhlse {

inline constexpr std::size_t kDefaultGridSize = 10'000;
/// Error probabilities are clamped to this before a Bayesian update.
inline constexpr double kMaxErrorProbability = 0.4999;

/// Gaussian measurement noise around a level-set threshold.
struct NoiseModel {
    double sigma = 0.0;
    double threshold = 0.5;
};

double standard_normal_cdf(double x) noexcept;

/**
 * Probability that thresholding `raw` at the noise model's threshold gives
 * the wrong side: 1 - Phi((y - gamma)/sigma) above the threshold and
 * Phi((y - gamma)/sigma) below it. Exactly 0 when sigma = 0 and y != gamma;
 * exactly 1/2 (uninformative) when y == gamma.
 */
double error_probability(double raw, const NoiseModel& noise);

/**
 * Piecewise-constant density over the change point on [0,1].
 *
 * Starts as `grid_size` equal bins. Every update splits the cell holding
 * the sample location, so the density stays exactly constant within each
 * cell and quantiles interpolate linearly without approximation.
 */
class Posterior {
public:
    explicit Posterior(std::size_t grid_size = kDefaultGridSize);

    std::size_t grid_size() const noexcept { return grid_size_; }
    double bin_width() const noexcept { return 1.0 / static_cast<double>(grid_size_); }
    std::size_t cell_count() const noexcept { return mass_.size(); }
    std::span<const double> edges() const noexcept { return edges_; }
    std::span<const double> masses() const noexcept { return mass_; }

    double total_mass() const noexcept;
    /// Mass strictly left of x.
    double cdf(double x) const noexcept;
    /// Smallest x with cdf(x) >= q, interpolated linearly inside cells.
    double quantile(double q) const noexcept;
    double median() const noexcept { return quantile(0.5); }
    /// E|estimate - theta| under the posterior, summed exactly per cell.
    double expected_abs_error(double estimate) const noexcept;
    /// Differential entropy; exp(entropy()) is the effective interval size.
    double entropy() const noexcept;

    /**
     * Bayesian update after measuring at x.
     *
     * A positive label (measurement above threshold) scales mass left of x
     * by p and mass right of x by 1 - p; a negative label the other way
     * round. Throws DegenerateUpdate if no mass survives.
     */
    void update(double x, bool positive, double p);

private:
    std::size_t split_at(double x);

    std::size_t grid_size_;
    std::vector<double> edges_;
    std::vector<double> mass_;
};

/**
 * Functional form of Posterior::update taking the prior mass left of x
 * explicitly; throws ContractViolation if `z` disagrees with the prior.
 */
Posterior update(const Posterior& prior, double x, bool positive, double p, double z);

double quantile(const Posterior& posterior, double q);

/// Header: bin_center,mass
void write_posterior_csv(std::ostream& out, const Posterior& posterior);

/// Exponentiated entropy of a uniform prior after one noisy sample at x0.
double effective_interval_size(double x0, bool positive, double p);

/// The three coefficients of the contraction factor; they sum to 1 for p < 1/2.
struct ConvergenceTerms {
    double upper = 0.0;   ///< (1-p) / (2(1-alpha))
    double lower = 0.0;   ///< p / (2 alpha)
    double mixing = 0.0;  ///< (upper - lower)(1 - 2 alpha)
};

ConvergenceTerms convergence_terms(double p);

/// Per-step contraction factor t(z) bounding discretized search error decay.
double convergence_factor(double z, double p);

struct Observation {
    double raw = 0.0;
    bool positive = false;
    double error_probability = 0.0;
    bool uninformative = false;
};

/// Thresholds a raw value with the noise model.
Observation observe(double raw, const NoiseModel& noise);

using Observer = std::function<Observation(double)>;

struct PfhsOptions {
    /// Stop once E|median - theta| under the posterior is at most this. 0 disables.
    double stop_error = 0.0;
    /// Stop after exactly this many samples in total when non-zero.
    std::size_t sample_budget = 0;
    std::size_t max_iterations = kDefaultMaxIterations;
    std::size_t grid_size = kDefaultGridSize;
    /// Round sample locations to bin edges (the discretized algorithm).
    bool snap_to_grid = false;
};

/// Mutable state of a probabilistic search: the posterior, where the sensor
/// is, and what it has measured so far.
struct PfhsState {
    Posterior posterior;
    double location = 0.0;
    SearchTrace trace;

    explicit PfhsState(std::size_t grid_size = kDefaultGridSize, double start = 0.0);
};

/// Travels to x, measures and updates the posterior.
void pfhs_measure(PfhsState& state, const Observer& observer, double x);

/**
 * Runs the probabilistic search loop from the current state until the stop
 * rule, the sample budget or the iteration cap is hit. Policy steps are
 * counted from the start of this call.
 *
 * Each step truncates the posterior at the sensor to the side holding the
 * median and moves to the nearer of the z and 1-z quantiles of the truncated
 * mass, so the sensor never moves away from the median.
 */
void pfhs_run(PfhsState& state, const Observer& observer, const Policy& policy,
              const PfhsOptions& options);

SearchTrace pfhs_search(const Observer& observer, const Policy& policy,
                        const PfhsOptions& options);

/// Raw-valued oracle thresholded by a Gaussian noise model.
SearchTrace pfhs_search(const std::function<double(double)>& oracle, const Policy& policy,
                        const NoiseModel& noise, double stop_error,
                        std::size_t grid_size = kDefaultGridSize);

}  // namespace fhlse
