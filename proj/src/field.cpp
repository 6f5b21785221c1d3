#include "fhlse/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "fhlse/errors.hpp"
#include "fhlse/oracle.hpp"

namespace fhlse {

namespace {

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

// Position along an axis of `count` nodes: index of the left node and weight.
std::pair<std::size_t, double> locate(double u, std::size_t count) {
    const double scaled = clamp_unit(u) * static_cast<double>(count - 1);
    const auto left = std::min(static_cast<std::size_t>(scaled), count - 2);
    return {left, scaled - static_cast<double>(left)};
}

std::vector<double> draw_boundary(const FieldGenParams& params, std::uint64_t seed) {
    const std::size_t n = params.boundary_resolution;
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            const double step = 1.0 / static_cast<double>(n - 1);
            cov(i, j) = params.boundary_kernel(d * d * step * step);
        }
    }
    // Eigendecomposition rather than Cholesky: the dense RBF matrix is
    // numerically singular.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd white(n);
    for (std::size_t i = 0; i < n; ++i) white(i) = gauss(rng);
    const Eigen::VectorXd g = eig.eigenvectors() * root.cwiseProduct(white);

    std::vector<double> boundary(n);
    for (std::size_t i = 0; i < n; ++i) boundary[i] = 0.5 + params.boundary_scale * g(i);
    return boundary;
}

}  // namespace

double GridField::interpolate(double first, double second) const {
    const auto [r, fr] = locate(first, dims.rows);
    const auto [c, fc] = locate(second, dims.cols);
    const double top = (1.0 - fc) * at(r, c) + fc * at(r, c + 1);
    const double bottom = (1.0 - fc) * at(r + 1, c) + fc * at(r + 1, c + 1);
    return (1.0 - fr) * top + fr * bottom;
}

void GridField::validate() const {
    dims.validate();
    if (values.size() != dims.cells()) {
        throw DomainError(fmt::format("field has {} values, grid needs {}", values.size(),
                                      dims.cells()));
    }
    if (!(cell_km > 0.0)) throw DomainError("cell size must be positive");
    if (!(sigma >= 0.0)) throw DomainError("sensor sigma must be non-negative");
}

double GeneratedField::boundary_at(double first) const {
    const auto [i, w] = locate(first, boundary.size());
    return (1.0 - w) * boundary[i] + w * boundary[i + 1];
}

LevelSetEstimate GeneratedField::truth() const {
    return classify_by_boundary(field.dims, [this](double first) { return boundary_at(first); });
}

double signed_boundary_distance(const std::vector<double>& boundary, double first,
                                double second) {
    const std::size_t n = boundary.size();
    const double step = 1.0 / static_cast<double>(n - 1);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double ax = static_cast<double>(i) * step;
        const double ay = boundary[i];
        const double dx = step;
        const double dy = boundary[i + 1] - ay;
        const double t =
            std::clamp(((first - ax) * dx + (second - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
        best = std::min(best, std::hypot(first - ax - t * dx, second - ay - t * dy));
    }
    const auto [i, w] = locate(first, n);
    const double level = (1.0 - w) * boundary[i] + w * boundary[i + 1];
    return second < level ? best : -best;
}

GeneratedField generate_gp_field(const FieldGenParams& params) {
    params.boundary_kernel.validate();
    params.dims.validate();
    if (params.boundary_resolution < 2) throw DomainError("boundary resolution must be >= 2");
    if (params.n_field_samples == 0) throw DomainError("need at least one field sample");
    if (!(params.field_noise >= 0.0)) throw DomainError("field noise must be non-negative");
    if (!(params.boundary_margin >= 0.0 && params.boundary_margin < 0.5)) {
        throw DomainError("boundary margin must lie in [0, 1/2)");
    }

    GeneratedField out;
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < params.max_attempts; ++attempt) {
        const std::uint64_t seed = params.seed + attempt;
        std::vector<double> boundary = draw_boundary(params, seed);
        const auto [lo, hi] = std::minmax_element(boundary.begin(), boundary.end());
        if (*lo >= params.boundary_margin && *hi <= 1.0 - params.boundary_margin) {
            out.boundary = std::move(boundary);
            out.seed = seed;
            out.attempts = attempt + 1;
            accepted = true;
            break;
        }
    }
    if (!accepted) {
        throw DomainError(fmt::format("no boundary inside the unit square after {} draws",
                                      params.max_attempts));
    }

    Rng rng(derive_seed(out.seed, 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, std::sqrt(params.field_noise));
    const auto m = static_cast<Eigen::Index>(params.n_field_samples);
    Eigen::MatrixXd inputs(m, 2);
    Eigen::VectorXd targets(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        inputs(i, 0) = unit(rng);
        inputs(i, 1) = unit(rng);
        targets(i) = signed_boundary_distance(out.boundary, inputs(i, 0), inputs(i, 1));
        if (params.field_noise > 0.0) targets(i) += gauss(rng);
    }
    const GaussianProcess smoother(std::move(inputs), std::move(targets),
                                   KernelSpec{.lengthscale = params.field_lengthscale,
                                              .variance = params.field_variance,
                                              .noise_variance = params.field_noise});

    GridField& field = out.field;
    field.dims = params.dims;
    field.cell_km = params.cell_km;
    field.gamma = params.gamma;
    field.sigma = params.sensor_sigma;
    field.values.resize(params.dims.cells());
    Eigen::VectorXd q(2);
    for (std::size_t r = 0; r < params.dims.rows; ++r) {
        for (std::size_t c = 0; c < params.dims.cols; ++c) {
            q << params.dims.first(r), params.dims.second(c);
            field.values[r * params.dims.cols + c] =
                params.gamma + params.value_scale * smoother.mean(q);
        }
    }
    return out;
}

}  // namespace fhlse
