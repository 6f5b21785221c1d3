#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fhlse/gp.hpp"
#include "fhlse/level_set.hpp"

namespace fhlse {

/**
 * Scalar field sampled on a GridDims lattice, row-major. Rows run along the
 * first coordinate. `cell_km` is the physical node spacing; `gamma` the level
 * threshold; `sigma` the sensor noise standard deviation.
 */
struct GridField {
    GridDims dims;
    double cell_km = 1.0;
    double gamma = 0.0;
    double sigma = 0.0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values.at(r * dims.cols + c); }
    /// Bilinear interpolation; coordinates are clamped into [0,1].
    double interpolate(double first, double second) const;
    double extent_first() const noexcept { return cell_km * static_cast<double>(dims.rows - 1); }
    double extent_second() const noexcept { return cell_km * static_cast<double>(dims.cols - 1); }
    LevelSetEstimate level_set() const { return classify_by_field(dims, values, gamma); }
    void validate() const;
};

/// CSV: a metadata line `rows,cols,cell_km,gamma,sigma` (optionally preceded
/// by that literal header), then `rows` lines of `cols` values.
GridField read_grid_field(std::istream& in);
GridField load_grid_field(const std::filesystem::path& path);
void write_grid_field(std::ostream& out, const GridField& field);
void save_grid_field(const std::filesystem::path& path, const GridField& field);

struct FieldGenParams {
    KernelSpec boundary_kernel{.lengthscale = 0.6, .variance = 1.0};
    /// Boundary = 0.5 + scale * g with g drawn from the boundary prior.
    double boundary_scale = 0.2;
    /// Accepted boundaries stay inside [margin, 1 - margin].
    double boundary_margin = 0.02;
    std::size_t boundary_resolution = 201;
    double field_lengthscale = 0.1;
    double field_variance = 1.0;
    GridDims dims;
    std::size_t n_field_samples = 500;
    double field_noise = 1e-4;  ///< variance added to the signed distances
    /// Physical value = gamma + value_scale * smoothed signed distance.
    double gamma = 0.0;
    double value_scale = 1.0;
    double sensor_sigma = 0.0;  ///< stored in the field, not applied
    double cell_km = 1.0;
    std::uint64_t seed = 0;
    std::size_t max_attempts = 100;
};

struct GeneratedField {
    GridField field;
    std::vector<double> boundary;  ///< values at i/(resolution-1)
    std::uint64_t seed = 0;        ///< seed of the accepted boundary draw
    std::size_t attempts = 1;

    /// Linear interpolation of the sampled boundary.
    double boundary_at(double first) const;
    /// Classification of the grid against the exact boundary.
    LevelSetEstimate truth() const;
};

/// Signed Euclidean distance to the polyline through `boundary` (sampled
/// uniformly on [0,1]); positive below the curve.
double signed_boundary_distance(const std::vector<double>& boundary, double first, double second);

/**
 * Synthetic field: a smooth random boundary, signed distances to it at random
 * locations (plus noise), smoothed onto the grid by 2-D GP regression. A
 * boundary draw leaving the margin band is rejected and redrawn with the
 * next seed, up to `max_attempts` draws.
 */
GeneratedField generate_gp_field(const FieldGenParams& params);

}  // namespace fhlse
