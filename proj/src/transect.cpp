#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fhlse/errors.hpp"
#include "fhlse/level_set.hpp"

namespace fhlse {

void GridDims::validate() const {
    if (rows < 2 || cols < 2) {
        throw DomainError(fmt::format("grid must be at least 2x2, got {}x{}", rows, cols));
    }
}

LevelSetEstimate classify_by_boundary(const GridDims& dims,
                                      const std::function<double(double)>& boundary) {
    dims.validate();
    LevelSetEstimate estimate{.dims = dims};
    estimate.super.resize(dims.cells());
    estimate.boundary.resize(dims.rows);
    for (std::size_t r = 0; r < dims.rows; ++r) {
        const double level = boundary(dims.first(r));
        estimate.boundary[r] = level;
        for (std::size_t c = 0; c < dims.cols; ++c) {
            estimate.super[r * dims.cols + c] = dims.second(c) < level ? 1 : 0;
        }
    }
    return estimate;
}

LevelSetEstimate classify_by_field(const GridDims& dims, std::span<const double> values,
                                   double threshold) {
    dims.validate();
    if (values.size() != dims.cells()) {
        throw DomainError(fmt::format("field has {} values, grid needs {}", values.size(),
                                      dims.cells()));
    }
    LevelSetEstimate estimate{.dims = dims};
    estimate.super.resize(dims.cells());
    for (std::size_t i = 0; i < values.size(); ++i) {
        estimate.super[i] = values[i] >= threshold ? 1 : 0;
    }
    return estimate;
}

double level_set_error(const LevelSetEstimate& truth, const LevelSetEstimate& estimate) {
    if (!(truth.dims == estimate.dims) || truth.super.size() != estimate.super.size()) {
        throw DomainError(fmt::format("grid mismatch: {}x{} vs {}x{}", truth.dims.rows,
                                      truth.dims.cols, estimate.dims.rows, estimate.dims.cols));
    }
    std::size_t mismatched = 0;
    for (std::size_t i = 0; i < truth.super.size(); ++i) {
        if (truth.super[i] != estimate.super[i]) ++mismatched;
    }
    return static_cast<double>(mismatched) / static_cast<double>(truth.super.size());
}

double LseResult::boundary_at(double first) const {
    return boundary_offset + gp_predict(boundary_model, first).mean;
}

LseResult transect_lse(const FieldOracle& field, const NoiseModel& noise,
                       const TransectConfig& config) {
    if (config.n_transects < 2) throw DomainError("transect search needs at least 2 transects");
    if (!(config.stop_error > 0.0)) throw DomainError("transect stop error must be positive");
    check_lambda(config.lambda);
    config.grid.validate();
    config.boundary_kernel.validate();

    LseResult result;
    const double spacing = 1.0 / static_cast<double>(config.n_transects - 1);
    // Length-scale target for planning: an interval of length 4e has
    // expected absolute error e under a uniform posterior.
    const double planning_error = 4.0 * config.stop_error;
    const PfhsOptions options{.stop_error = config.stop_error,
                              .max_iterations = config.max_iterations,
                              .grid_size = config.posterior_grid};

    double previous_estimate = 0.0;
    double previous_last = 0.0;
    for (std::size_t i = 0; i < config.n_transects; ++i) {
        const double coordinate = static_cast<double>(i) * spacing;
        const Observer observer = [&](double second) {
            return observe(field(coordinate, second), noise);
        };

        TransectRun run{.coordinate = coordinate, .start = i > 0 ? previous_estimate : 0.0};
        PfhsState state(config.posterior_grid, run.start);
        if (i > 0) {
            pfhs_measure(state, observer, run.start);
            const SearchStep& first = state.trace.steps.front();
            run.effective_length =
                first.error_probability >= 0.5
                    ? 1.0
                    : effective_interval_size(run.start, first.label, first.error_probability);

            const double hop_first = spacing * config.extent_first;
            const double hop_second = (run.start - previous_last) * config.extent_second;
            result.transit_distance += std::hypot(hop_first, hop_second);
        }
        run.policy = policy_for_error(planning_error, config.lambda, run.effective_length);
        pfhs_run(state, observer, run.policy, options);
        run.trace = std::move(state.trace);

        result.transect_distance += run.trace.total_distance * config.extent_second;
        result.total_samples += run.trace.sample_count;
        previous_estimate = run.trace.estimate;
        previous_last = run.trace.steps.empty() ? run.start : run.trace.steps.back().x;
        const bool timed_out = run.trace.status == SearchStatus::timeout;
        result.transects.push_back(std::move(run));
        if (timed_out) {
            result.timed_out = true;
            break;
        }
    }
    result.total_distance = result.transect_distance + result.transit_distance;

    std::vector<double> coordinates;
    std::vector<double> estimates;
    for (const TransectRun& run : result.transects) {
        coordinates.push_back(run.coordinate);
        estimates.push_back(run.trace.estimate);
    }
    result.boundary_offset = std::accumulate(estimates.begin(), estimates.end(), 0.0) /
                             static_cast<double>(estimates.size());
    for (double& e : estimates) e -= result.boundary_offset;

    KernelSpec kernel = config.boundary_kernel;
    kernel.noise_variance = config.boundary_noise_variance.value_or(
        0.25 * config.stop_error * config.stop_error);
    result.boundary_model = gp_fit(coordinates, estimates, kernel);
    result.estimate =
        classify_by_boundary(config.grid, [&](double first) { return result.boundary_at(first); });
    return result;
}

void write_boundary_csv(std::ostream& out, const LevelSetEstimate& estimate) {
    out << "first,boundary\n";
    for (std::size_t r = 0; r < estimate.boundary.size(); ++r) {
        fmt::print(out, "{:.17g},{:.17g}\n", estimate.dims.first(r), estimate.boundary[r]);
    }
}

void write_classification_csv(std::ostream& out, const LevelSetEstimate& estimate) {
    out << "row,col,first,second,super\n";
    for (std::size_t r = 0; r < estimate.dims.rows; ++r) {
        for (std::size_t c = 0; c < estimate.dims.cols; ++c) {
            fmt::print(out, "{},{},{:.17g},{:.17g},{}\n", r, c, estimate.dims.first(r),
                       estimate.dims.second(c), estimate.is_super(r, c) ? 1 : 0);
        }
    }
}

}  // namespace fhlse
