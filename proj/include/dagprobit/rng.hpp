#pragma once

#include <cstdint>
#include <random>

namespace dagprobit {

// Standard-normal CDF, its complement and log, and the quantile function.
// Phi uses erfc so both tails keep full relative precision; the quantile is
// Wichura's AS241 (double precision over the whole open unit interval).
double norm_cdf(double x);
double norm_cdf_upper(double x);  // P(Z > x)
double log_norm_cdf(double x);
double norm_quantile(double p);

// Deterministic seed-splitting for independent streams: child k of a master
// seed is splitmix64 applied to master + (k+1)*golden-gamma. Documented here
// because replicate/chain parallelism relies on it for reproducibility.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// All stochastic code takes an explicit Rng. Draws are generated from
// mt19937_64 uniforms only (normals via the AS241 quantile, gammas via
// Marsaglia-Tsang), so a seed fixes the entire sample path independent of
// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform on (0,1), endpoints excluded
    double uniform() {
        constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
        double u = static_cast<double>(gen_() >> 11) * scale;
        return u > 0.0 ? u : 5e-324;
    }

    double normal() { return norm_quantile(uniform()); }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Gamma(shape, scale 1), shape > 0
    double gamma(double shape);

    std::uint64_t next_raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace dagprobit
