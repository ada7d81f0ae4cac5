#pragma once

#include <cstdint>
#include <vector>

#include "subgauss/common.hpp"
#include "subgauss/core.hpp"

namespace subgauss::chaining {

enum class CoverMethod { exact, greedy };

// Minimal number of closed eps-balls centered at points of T covering T.
// Exact method is an exhaustive set-cover over ball bitmasks (n <= 20);
// greedy is the standard max-coverage upper bound.
std::size_t covering_number(const MetricOnT& metric, double eps, CoverMethod method);

struct CoveringProfile {
    std::vector<double> scales;        // decreasing
    std::vector<std::size_t> exact;    // empty when not computed
    std::vector<std::size_t> greedy;
};

CoveringProfile covering_profile(const MetricOnT& metric, const std::vector<double>& scales,
                                 bool withExact);

struct EntropyIntegral {
    double upper = 0.0;  // left-endpoint sum on the dyadic ladder
    double lower = 0.0;  // right-endpoint sum; shared exact tail below the last scale
    std::vector<double> scales;
    std::vector<std::size_t> numbers;
};

// Dyadic ladder eps_j = diam * 2^-j down to the scale where the covering
// number saturates; the integrand vanishes above the diameter and is
// constant below the minimal positive distance, so the tail is exact.
EntropyIntegral entropy_integral(const MetricOnT& metric,
                                 CoverMethod method = CoverMethod::exact);

// Permutations of T, given as label index maps.
struct GroupAction {
    std::vector<std::vector<std::size_t>> generators;
    bool verifiedTransitive = false;

    static GroupAction cyclicShift(std::size_t n);
    static GroupAction fullSymmetric(std::size_t n);  // adjacent transpositions
};

// Transitivity by orbit computation plus distributional invariance:
// Sigma(g(t), g(s)) == Sigma(t, s) and mean(g(t)) == mean(t) for every
// generator, entrywise within 1e-12. Throws NotTransitive / NotInvariant;
// on success the action's verifiedTransitive flag is set.
CheckReport verify_stationary(const GaussianSpec& spec, GroupAction& action);
CheckReport verify_stationary(const GaussianSpec& spec, const GroupAction& action);

struct SandwichReport {
    double supProcess = 0.0;   // E[sup X_t]
    double supProcessSe = 0.0; // 0 for exact enumeration
    double supGauss = 0.0;     // E[sup G_t], Monte Carlo
    double supGaussSe = 0.0;
    double entropyUpper = 0.0;
    double entropyLower = 0.0;
    double ratioProcess = 0.0; // entropyUpper / supProcess
    double ratioGauss = 0.0;   // entropyUpper / supGauss
    bool exactZero = false;    // single-point / degenerate case
    bool pass = false;
};

// acceptance band for the unquantified universal constant
inline constexpr double kSandwichBandLo = 1.0 / 64.0;
inline constexpr double kSandwichBandHi = 64.0;

// Both ratios entropy / E[sup] must land in [1/64, 64]. The process side is
// enumerated exactly for a discrete law and estimated by MC for a Gaussian
// spec; the Gaussian side is always MC.
SandwichReport fernique_sandwich_check(const DiscreteLaw& lawX, const GaussianSpec& spec,
                                       const GroupAction& action, std::size_t samples,
                                       std::uint64_t seed,
                                       CoverMethod method = CoverMethod::exact);
SandwichReport fernique_sandwich_check(const GaussianSpec& lawX, const GaussianSpec& spec,
                                       const GroupAction& action, std::size_t samples,
                                       std::uint64_t seed,
                                       CoverMethod method = CoverMethod::exact);

// E[sup_t X_t] helpers used by the sandwich and tests.
double expected_sup_exact(const DiscreteLaw& law);
EstimateWithCI expected_sup_gaussian(const GaussianSpec& spec, std::size_t samples,
                                     std::uint64_t seed);

}  // namespace subgauss::chaining
