#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "fhlse/posterior.hpp"

namespace fhlse {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Independent stream seed for (base, i, j); used for per-trial seeding.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t i, std::uint64_t j = 0) noexcept;

enum class NoiseKind {
    none,      ///< exact labels
    flip,      ///< labels flipped with constant probability `level`
    gaussian,  ///< step value plus N(0, level^2), thresholded at 1/2
};

struct StepNoise {
    NoiseKind kind = NoiseKind::none;
    double level = 0.0;
};

/**
 * Step function 1{x < theta} observed through a noise channel. The same
 * seed always yields the same measurement sequence.
 */
class StepOracle {
public:
    explicit StepOracle(double theta, StepNoise noise = {}, std::uint64_t seed = 0);

    double theta() const noexcept { return theta_; }
    const StepNoise& noise() const noexcept { return noise_; }

    double truth(double x) const noexcept { return x < theta_ ? 1.0 : 0.0; }

    /// Raw measurement: a (possibly flipped) 0/1 label, or a noisy real value.
    double raw(double x);

    /// Thresholded measurement with its error probability.
    Observation observe(double x);

    /// Thresholded label as 0.0 / 1.0, for interval searches.
    double label(double x) { return observe(x).positive ? 1.0 : 0.0; }

private:
    double theta_;
    StepNoise noise_;
    Rng rng_;
};

/// Adds N(0, sigma^2) to a deterministic 2-D field.
class NoisyField {
public:
    NoisyField(std::function<double(double, double)> field, double sigma, std::uint64_t seed);

    double operator()(double first, double second);

private:
    std::function<double(double, double)> field_;
    double sigma_;
    Rng rng_;
};

}  // namespace fhlse
