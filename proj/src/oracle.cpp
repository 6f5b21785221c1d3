#include "fhlse/oracle.hpp"

#include <fmt/format.h>

#include "fhlse/errors.hpp"

namespace fhlse {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t i, std::uint64_t j) noexcept {
    return splitmix64(splitmix64(splitmix64(base) ^ i) ^ (j + 0x632BE59BD9B4E019ULL));
}

StepOracle::StepOracle(double theta, StepNoise noise, std::uint64_t seed)
    : theta_(theta), noise_(noise), rng_(seed) {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw DomainError(fmt::format("change point must lie in [0,1], got {}", theta));
    }
    switch (noise.kind) {
        case NoiseKind::none: break;
        case NoiseKind::flip:
            if (!(noise.level >= 0.0 && noise.level < 0.5)) {
                throw DomainError(fmt::format("flip probability must lie in [0, 1/2), got {}",
                                              noise.level));
            }
            break;
        case NoiseKind::gaussian:
            if (!(noise.level >= 0.0)) throw DomainError("noise sigma must be non-negative");
            break;
    }
}

double StepOracle::raw(double x) {
    const double exact = truth(x);
    switch (noise_.kind) {
        case NoiseKind::none: return exact;
        case NoiseKind::flip: {
            std::bernoulli_distribution flip(noise_.level);
            return flip(rng_) ? 1.0 - exact : exact;
        }
        case NoiseKind::gaussian: {
            std::normal_distribution<double> gauss(0.0, 1.0);
            return exact + noise_.level * gauss(rng_);
        }
    }
    return exact;
}

Observation StepOracle::observe(double x) {
    const double value = raw(x);
    switch (noise_.kind) {
        case NoiseKind::none:
            return {.raw = value, .positive = value == 1.0};
        case NoiseKind::flip:
            return {.raw = value, .positive = value == 1.0, .error_probability = noise_.level};
        case NoiseKind::gaussian:
            return fhlse::observe(value, NoiseModel{.sigma = noise_.level, .threshold = 0.5});
    }
    return {.raw = value, .positive = value == 1.0};
}

NoisyField::NoisyField(std::function<double(double, double)> field, double sigma,
                       std::uint64_t seed)
    : field_(std::move(field)), sigma_(sigma), rng_(seed) {
    if (!(sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
}

double NoisyField::operator()(double first, double second) {
    const double value = field_(first, second);
    if (sigma_ == 0.0) return value;
    std::normal_distribution<double> gauss(0.0, 1.0);
    return value + sigma_ * gauss(rng_);
}

}  // namespace fhlse
