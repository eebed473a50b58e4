#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace synlog {

// Inputs to Cochran's sample size formula. population is empty for the
// unbounded (no finite-population correction) case.
struct CochranParams {
    std::optional<std::uint64_t> population;  // N
    double z = 1.96;                          // normal deviate
    double p = 0.5;                           // assumed proportion
    double e = 0.05;                          // margin of error
};

// n0 = z^2 p (1-p) / e^2, corrected by n = n0 / (1 + (n0 - 1)/N) for finite
// populations, rounded up.
inline std::uint64_t cochran_sample_size(const CochranParams& params) {
    if (!(params.z > 0.0)) throw std::domain_error("cochran: z must be > 0");
    if (!(params.p > 0.0 && params.p < 1.0)) throw std::domain_error("cochran: p must be in (0,1)");
    if (!(params.e > 0.0 && params.e < 1.0)) throw std::domain_error("cochran: e must be in (0,1)");
    if (params.population && *params.population == 0)
        throw std::domain_error("cochran: population must be positive");

    const double n0 = params.z * params.z * params.p * (1.0 - params.p) / (params.e * params.e);
    double n = n0;
    if (params.population) {
        const double N = static_cast<double>(*params.population);
        n = n0 / (1.0 + (n0 - 1.0) / N);
    }
    const double up = std::ceil(n);
    return up < 1.0 ? 1u : static_cast<std::uint64_t>(up);
}

}  // namespace synlog
