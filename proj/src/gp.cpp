#include "fhlse/gp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fhlse/errors.hpp"

namespace fhlse {

double KernelSpec::operator()(double squared_distance) const noexcept {
    return variance * std::exp(-0.5 * squared_distance / (lengthscale * lengthscale));
}

void KernelSpec::validate() const {
    if (!(lengthscale > 0.0) || !(variance > 0.0) || !(noise_variance >= 0.0)) {
        throw DomainError(fmt::format(
            "kernel needs lengthscale > 0, variance > 0, noise variance >= 0 (got {}, {}, {})",
            lengthscale, variance, noise_variance));
    }
}

GaussianProcess::GaussianProcess(Eigen::MatrixXd inputs, Eigen::VectorXd targets,
                                 const KernelSpec& kernel)
    : kernel_(kernel), inputs_(std::move(inputs)), targets_(std::move(targets)) {
    kernel_.validate();
    if (inputs_.rows() != targets_.size()) {
        throw DomainError(fmt::format("{} inputs but {} targets", inputs_.rows(), targets_.size()));
    }
    const Eigen::Index n = targets_.size();
    if (n == 0) return;

    Eigen::MatrixXd k = kernel_matrix();
    k.diagonal().array() += kernel_.noise_variance + kKernelJitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
        throw FactorizationError(
            fmt::format("kernel matrix of {} points is not positive definite", n));
    }
    factor_ = llt.matrixL();
    weights_ = llt.solve(targets_);
}

Eigen::MatrixXd GaussianProcess::kernel_matrix() const {
    const Eigen::Index n = inputs_.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = kernel_.variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double value = kernel_((inputs_.row(i) - inputs_.row(j)).squaredNorm());
            k(i, j) = value;
            k(j, i) = value;
        }
    }
    return k;
}

Eigen::VectorXd GaussianProcess::kernel_vector(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::VectorXd kx(inputs_.rows());
    for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
        kx(i) = kernel_((inputs_.row(i).transpose() - x).squaredNorm());
    }
    return kx;
}

Prediction GaussianProcess::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (targets_.size() == 0) return {0.0, kernel_.variance};
    if (x.size() != inputs_.cols()) {
        throw DomainError(fmt::format("query has dimension {}, model has {}", x.size(),
                                      inputs_.cols()));
    }
    const Eigen::VectorXd kx = kernel_vector(x);
    const Eigen::VectorXd v = factor_.triangularView<Eigen::Lower>().solve(kx);
    // Cancellation can push the variance a hair below zero.
    const double variance = std::max(0.0, kernel_.variance - v.squaredNorm());
    return {kx.dot(weights_), variance};
}

double GaussianProcess::mean(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (targets_.size() == 0) return 0.0;
    return kernel_vector(x).dot(weights_);
}

GPModel gp_fit(std::span<const double> x, std::span<const double> y, const KernelSpec& kernel) {
    if (x.size() != y.size()) throw DomainError("gp_fit needs as many targets as locations");
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd inputs(n, 1);
    Eigen::VectorXd targets(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        inputs(i, 0) = x[static_cast<std::size_t>(i)];
        targets(i) = y[static_cast<std::size_t>(i)];
    }
    return GPModel(std::move(inputs), std::move(targets), kernel);
}

Prediction gp_predict(const GPModel& model, double x) {
    Eigen::VectorXd q(1);
    q(0) = x;
    return model.predict(q);
}

}  // namespace fhlse
