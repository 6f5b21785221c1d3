#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace fhlse {

/// Diagonal jitter added before every factorization.
inline constexpr double kKernelJitter = 1e-10;

/// Radial-basis-function kernel with additive observation noise.
struct KernelSpec {
    double lengthscale = 1.0;
    double variance = 1.0;
    double noise_variance = 0.0;

    double operator()(double squared_distance) const noexcept;
    void validate() const;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/**
 * Zero-mean GP regression over points in R^d (one point per row of
 * `inputs`). The kernel matrix plus noise and jitter is Cholesky-factored
 * once at construction.
 */
class GaussianProcess {
public:
    GaussianProcess() = default;
    GaussianProcess(Eigen::MatrixXd inputs, Eigen::VectorXd targets, const KernelSpec& kernel);

    Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    double mean(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    const KernelSpec& kernel() const noexcept { return kernel_; }
    const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
    const Eigen::VectorXd& targets() const noexcept { return targets_; }
    /// Lower-triangular L with L L^T = K + (noise + jitter) I.
    const Eigen::MatrixXd& factor() const noexcept { return factor_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(targets_.size()); }

    Eigen::MatrixXd kernel_matrix() const;

private:
    Eigen::VectorXd kernel_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    KernelSpec kernel_;
    Eigen::MatrixXd inputs_;
    Eigen::VectorXd targets_;
    Eigen::MatrixXd factor_;
    Eigen::VectorXd weights_;  // (K + noise I)^{-1} y
};

/// One-dimensional model over boundary locations.
using GPModel = GaussianProcess;

GPModel gp_fit(std::span<const double> x, std::span<const double> y, const KernelSpec& kernel);
Prediction gp_predict(const GPModel& model, double x);

}  // namespace fhlse
