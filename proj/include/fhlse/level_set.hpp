#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fhlse/gp.hpp"
#include "fhlse/policy.hpp"
#include "fhlse/posterior.hpp"
#include "fhlse/search.hpp"

namespace fhlse {

/// Grid of nodes over [0,1]^2. Row r sits at first coordinate r/(rows-1),
/// column c at second coordinate c/(cols-1).
struct GridDims {
    std::size_t rows = 21;
    std::size_t cols = 20;

    std::size_t cells() const noexcept { return rows * cols; }
    double first(std::size_t r) const noexcept {
        return static_cast<double>(r) / static_cast<double>(rows - 1);
    }
    double second(std::size_t c) const noexcept {
        return static_cast<double>(c) / static_cast<double>(cols - 1);
    }
    void validate() const;

    friend bool operator==(const GridDims&, const GridDims&) = default;
};

/**
 * Super/sub-level classification of every grid node. The super-level set is
 * the region below a boundary curve: a node is super-level when its second
 * coordinate is strictly below the boundary value at its first coordinate.
 */
struct LevelSetEstimate {
    GridDims dims;
    std::vector<std::uint8_t> super;  ///< row-major, 1 = super-level
    std::vector<double> boundary;     ///< boundary value per row

    bool is_super(std::size_t r, std::size_t c) const noexcept {
        return super[r * dims.cols + c] != 0;
    }
};

LevelSetEstimate classify_by_boundary(const GridDims& dims,
                                      const std::function<double(double)>& boundary);

/// Nodes with value >= threshold are super-level. `boundary` is left empty.
LevelSetEstimate classify_by_field(const GridDims& dims, std::span<const double> values,
                                   double threshold);

/// |S symmetric-difference S_hat| / M. Throws DomainError on mismatched grids.
double level_set_error(const LevelSetEstimate& truth, const LevelSetEstimate& estimate);

/// Raw measurement at (first, second); noise, if any, is the oracle's business.
using FieldOracle = std::function<double(double, double)>;

struct TransectConfig {
    std::size_t n_transects = 5;
    /// Per-transect stop rule on the posterior expected absolute error.
    double stop_error = 0.03;
    double lambda = 0.5;
    KernelSpec boundary_kernel;
    /// Noise variance of the change-point estimates in the boundary GP;
    /// defaults to (stop_error / 2)^2.
    std::optional<double> boundary_noise_variance;
    GridDims grid;
    std::size_t posterior_grid = kDefaultGridSize;
    std::size_t max_iterations = kDefaultMaxIterations;
    /// Physical side lengths of the unit square, for distance accounting.
    double extent_first = 1.0;
    double extent_second = 1.0;
};

struct TransectRun {
    double coordinate = 0.0;
    double start = 0.0;
    double effective_length = 1.0;
    Policy policy;
    SearchTrace trace;
};

struct LseResult {
    LevelSetEstimate estimate;
    std::vector<TransectRun> transects;
    GPModel boundary_model;
    double boundary_offset = 0.0;  ///< mean of the change-point estimates
    double transect_distance = 0.0;
    double transit_distance = 0.0;
    double total_distance = 0.0;
    std::size_t total_samples = 0;
    bool timed_out = false;

    /// Boundary location predicted at a first coordinate.
    double boundary_at(double first) const;
};

/**
 * Level-set estimation along equally spaced transects.
 *
 * Transect i sits at first coordinate i/(n-1). The first transect searches
 * from the origin; each later one takes its first sample at the previous
 * change-point estimate, converts that sample into an effective interval
 * size and plans its policy for that length. The change-point estimates are
 * then smoothed with a GP (fit to mean-centred estimates) and the grid is
 * classified against the predicted boundary.
 *
 * If a transect times out the remaining transects are skipped and the result
 * is built from what was measured, with `timed_out` set.
 */
LseResult transect_lse(const FieldOracle& field, const NoiseModel& noise,
                       const TransectConfig& config);

/// Header: first,boundary; one row per grid row.
void write_boundary_csv(std::ostream& out, const LevelSetEstimate& estimate);
/// Header: row,col,first,second,super
void write_classification_csv(std::ostream& out, const LevelSetEstimate& estimate);

}  // namespace fhlse
