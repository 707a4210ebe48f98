#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace medshift {

inline double clamp_prob(double p, double lo) {
    if (p < lo) return lo;
    if (p > 1.0 - lo) return 1.0 - lo;
    return p;
}

// conventional expit
inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// reversed orientation, expit(x) = {1 + exp(x)}^{-1}
inline double expit_reversed(double x) {
    if (x == std::numeric_limits<double>::infinity()) return 0.0;
    return 1.0 / (1.0 + std::exp(x));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// splitmix64, used to derive independent stream seeds
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = mix64(master);
    s = mix64(s ^ mix64(a + 0x517cc1b727220a95ULL));
    s = mix64(s ^ mix64(b + 0x6c62272e07bb0142ULL));
    s = mix64(s ^ mix64(c + 0x2545f4914f6cdd1dULL));
    return s;
}

// uniform in [0,1) from raw 64-bit output; avoids libstdc++-specific
// distributions so streams are identical across platforms
inline double u01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// inverse standard normal CDF (Acklam's rational approximation refined by
// one Halley step; ~1e-15 absolute accuracy)
double normal_quantile(double p);

inline double z_value(double alpha) { return normal_quantile(1.0 - alpha / 2.0); }

} // namespace medshift
