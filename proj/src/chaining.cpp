#include "subgauss/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <utility>

namespace subgauss::chaining {

namespace {

std::vector<std::uint64_t> ball_masks(const MetricOnT& metric, double eps) {
    const std::size_t n = metric.index.n();
    if (n > 64) throw ExactTooLarge("covering_number: limited to n <= 64");
    std::vector<std::uint64_t> balls(n, 0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t s = 0; s < n; ++s)
            if (metric(t, s) <= eps) balls[t] |= std::uint64_t{1} << s;
    return balls;
}

std::size_t exact_cover(const std::vector<std::uint64_t>& balls, std::size_t n) {
    // dp over covered subsets; n <= 20 keeps this at 2^n * n steps
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    std::vector<std::uint8_t> dp(std::size_t{1} << n,
                                 std::numeric_limits<std::uint8_t>::max());
    dp[0] = 0;
    for (std::uint64_t mask = 0; mask < full; ++mask) {
        if (dp[mask] == std::numeric_limits<std::uint8_t>::max()) continue;
        // cover the lowest uncovered point; some chosen ball must contain it
        const std::uint64_t uncovered = full & ~mask;
        const int point = __builtin_ctzll(uncovered);
        for (std::size_t t = 0; t < n; ++t) {
            if (!(balls[t] >> point & 1u)) continue;
            const std::uint64_t next = mask | balls[t];
            dp[next] = std::min<std::uint8_t>(dp[next], dp[mask] + 1);
        }
    }
    return dp[full];
}

std::size_t greedy_cover(const std::vector<std::uint64_t>& balls, std::size_t n) {
    const std::uint64_t full = n == 64 ? ~std::uint64_t{0}
                                       : (std::uint64_t{1} << n) - 1;
    std::uint64_t covered = 0;
    std::size_t count = 0;
    while (covered != full) {
        std::size_t best = 0, bestGain = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t gain =
                static_cast<std::size_t>(__builtin_popcountll(balls[t] & ~covered));
            if (gain > bestGain) {
                bestGain = gain;
                best = t;
            }
        }
        if (bestGain == 0) throw Error("greedy_cover: balls cannot cover T");
        covered |= balls[best];
        ++count;
    }
    return count;
}

}  // namespace

std::size_t covering_number(const MetricOnT& metric, double eps, CoverMethod method) {
    if (eps <= 0.0) throw InvalidArgument("covering_number: eps must be positive");
    const std::size_t n = metric.index.n();
    if (method == CoverMethod::exact && n > 20)
        throw ExactTooLarge("covering_number: exact method limited to n <= 20");
    const auto balls = ball_masks(metric, eps);
    return method == CoverMethod::exact ? exact_cover(balls, n) : greedy_cover(balls, n);
}

CoveringProfile covering_profile(const MetricOnT& metric, const std::vector<double>& scales,
                                 bool withExact) {
    CoveringProfile profile;
    profile.scales = scales;
    std::sort(profile.scales.rbegin(), profile.scales.rend());
    for (double eps : profile.scales) {
        profile.greedy.push_back(covering_number(metric, eps, CoverMethod::greedy));
        if (withExact)
            profile.exact.push_back(covering_number(metric, eps, CoverMethod::exact));
    }
    return profile;
}

EntropyIntegral entropy_integral(const MetricOnT& metric, CoverMethod method) {
    EntropyIntegral out;
    const double diam = metric.diameter();
    if (diam <= 0.0) return out;  // single point or all-zero pseudometric
    // number of zero-distance classes = covering number just below minPositive
    const double minPos = metric.minPositive();
    const std::size_t nEff = covering_number(metric, minPos * 0.5, method);
    if (nEff <= 1) return out;

    double upper = 0.0, lower = 0.0;
    double eps = diam;
    std::size_t nAtEps = 1;  // closed balls of radius diam cover from any center
    for (int j = 0; j < 4096; ++j) {
        const double epsNext = eps * 0.5;
        const std::size_t nNext = covering_number(metric, epsNext, method);
        upper += (eps - epsNext) * std::sqrt(std::log(static_cast<double>(nNext)));
        lower += (eps - epsNext) * std::sqrt(std::log(static_cast<double>(nAtEps)));
        out.scales.push_back(epsNext);
        out.numbers.push_back(nNext);
        eps = epsNext;
        nAtEps = nNext;
        if (nNext >= nEff) break;  // integrand is constant below this scale
    }
    // exact tail: N is constant on (0, eps]
    const double tail = eps * std::sqrt(std::log(static_cast<double>(nAtEps)));
    out.upper = upper + tail;
    out.lower = lower + tail;
    return out;
}

// ---------------------------------------------------------------------------
// Group actions and stationarity
// ---------------------------------------------------------------------------

GroupAction GroupAction::cyclicShift(std::size_t n) {
    GroupAction a;
    std::vector<std::size_t> shift(n);
    for (std::size_t i = 0; i < n; ++i) shift[i] = (i + 1) % n;
    a.generators.push_back(std::move(shift));
    return a;
}

GroupAction GroupAction::fullSymmetric(std::size_t n) {
    GroupAction a;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::vector<std::size_t> tr(n);
        std::iota(tr.begin(), tr.end(), std::size_t{0});
        std::swap(tr[i], tr[i + 1]);
        a.generators.push_back(std::move(tr));
    }
    return a;
}

CheckReport verify_stationary(const GaussianSpec& spec, GroupAction& action) {
    const CheckReport report = verify_stationary(spec, std::as_const(action));
    action.verifiedTransitive = true;
    return report;
}

CheckReport verify_stationary(const GaussianSpec& spec, const GroupAction& action) {
    const std::size_t n = spec.n();
    if (action.generators.empty())
        throw InvalidArgument("verify_stationary: no generators");
    for (const auto& g : action.generators) {
        if (g.size() != n) throw InvalidArgument("verify_stationary: generator size != n");
        std::vector<char> seen(n, 0);
        for (std::size_t v : g) {
            if (v >= n || seen[v])
                throw InvalidArgument("verify_stationary: generator is not a bijection");
            seen[v] = 1;
        }
    }

    // orbit of point 0 under the generated (finite) group
    std::vector<char> reached(n, 0);
    std::queue<std::size_t> q;
    reached[0] = 1;
    q.push(0);
    std::size_t reachedCount = 1;
    while (!q.empty()) {
        const std::size_t t = q.front();
        q.pop();
        for (const auto& g : action.generators)
            if (!reached[g[t]]) {
                reached[g[t]] = 1;
                ++reachedCount;
                q.push(g[t]);
            }
    }
    if (reachedCount != n) {
        std::ostringstream os;
        os << "action reaches only " << reachedCount << " of " << n << " points";
        throw NotTransitive(os.str());
    }

    double worst = 0.0;
    for (std::size_t gi = 0; gi < action.generators.size(); ++gi) {
        const auto& g = action.generators[gi];
        for (std::size_t t = 0; t < n; ++t) {
            const double meanDev = std::abs(spec.mean[g[t]] - spec.mean[t]);
            if (meanDev > 1e-12) {
                std::ostringstream os;
                os << "generator " << gi << " moves the mean at index " << t;
                throw NotInvariant(os.str());
            }
            for (std::size_t s = 0; s < n; ++s) {
                const double dev =
                    std::abs(spec.covariance(g[t], g[s]) - spec.covariance(t, s));
                worst = std::max(worst, dev);
                if (dev > 1e-12) {
                    std::ostringstream os;
                    os << "generator " << gi << " breaks covariance invariance at ("
                       << t << "," << s << "), deviation " << dev;
                    throw NotInvariant(os.str());
                }
            }
        }
    }
    CheckReport report;
    report.pass = true;
    report.worst = worst;
    report.metrics["generators"] = static_cast<double>(action.generators.size());
    report.metrics["orbit_size"] = static_cast<double>(reachedCount);
    return report;
}

// ---------------------------------------------------------------------------
// Sandwich check
// ---------------------------------------------------------------------------

double expected_sup_exact(const DiscreteLaw& law) {
    double v = 0.0;
    for (std::size_t k = 0; k < law.size(); ++k) {
        const double mx = *std::max_element(law.atoms[k].begin(), law.atoms[k].end());
        v += law.weights[k] * mx;
    }
    return v;
}

EstimateWithCI expected_sup_gaussian(const GaussianSpec& spec, std::size_t samples,
                                     std::uint64_t seed) {
    const std::size_t n = spec.n();
    const Matrix root = psd_sqrt(spec.covariance);
    double mean = 0.0, m2 = 0.0;
    std::vector<double> z(n);
    for (std::size_t rep = 0; rep < samples; ++rep) {
        Rng rng(derive_seed(seed, rep));
        for (std::size_t t = 0; t < n; ++t) z[t] = rng.normal();
        double sup = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            double v = spec.mean[t];
            for (std::size_t s = 0; s < n; ++s) v += root(t, s) * z[s];
            sup = std::max(sup, v);
        }
        const double delta = sup - mean;
        mean += delta / static_cast<double>(rep + 1);
        m2 += delta * (sup - mean);
    }
    return EstimateWithCI::fromMoments(mean, m2 / static_cast<double>(samples - 1), samples);
}

namespace {

SandwichReport sandwich_impl(double supX, double supXse, const GaussianSpec& spec,
                             const GroupAction& action, std::size_t samples,
                             std::uint64_t seed, CoverMethod method) {
    verify_stationary(spec, action);
    const MetricOnT metric = natural_metric(spec);
    const EntropyIntegral entropy = entropy_integral(metric, method);
    const EstimateWithCI supG = expected_sup_gaussian(spec, samples, derive_seed(seed, 1));

    SandwichReport report;
    report.supProcess = supX;
    report.supProcessSe = supXse;
    report.supGauss = supG.mean;
    report.supGaussSe = supG.se;
    report.entropyUpper = entropy.upper;
    report.entropyLower = entropy.lower;
    if (entropy.upper == 0.0 && std::abs(supX) < 1e-9 && std::abs(supG.mean) < 1e-9) {
        report.exactZero = true;  // degenerate geometry: all three vanish
        report.pass = true;
        return report;
    }
    report.ratioProcess = supX > 0.0 ? entropy.upper / supX
                                     : std::numeric_limits<double>::infinity();
    report.ratioGauss = supG.mean > 0.0 ? entropy.upper / supG.mean
                                        : std::numeric_limits<double>::infinity();
    report.pass = report.ratioProcess >= kSandwichBandLo &&
                  report.ratioProcess <= kSandwichBandHi &&
                  report.ratioGauss >= kSandwichBandLo &&
                  report.ratioGauss <= kSandwichBandHi;
    return report;
}

}  // namespace

SandwichReport fernique_sandwich_check(const DiscreteLaw& lawX, const GaussianSpec& spec,
                                       const GroupAction& action, std::size_t samples,
                                       std::uint64_t seed, CoverMethod method) {
    require_same_index(lawX.index, spec.index, "fernique_sandwich_check");
    const MetricOnT metric = natural_metric(spec);
    const CheckReport domination =
        subgaussian_increment_check(lawX, metric, SubgaussianCheckOptions{}.xGrid);
    if (!domination.pass)
        throw CheckFailed(
            "fernique_sandwich_check: process is not dominated by the Gaussian metric");
    return sandwich_impl(expected_sup_exact(lawX), 0.0, spec, action, samples, seed, method);
}

SandwichReport fernique_sandwich_check(const GaussianSpec& lawX, const GaussianSpec& spec,
                                       const GroupAction& action, std::size_t samples,
                                       std::uint64_t seed, CoverMethod method) {
    require_same_index(lawX.index, spec.index, "fernique_sandwich_check");
    const MetricOnT metric = natural_metric(spec);
    const CheckReport domination =
        subgaussian_increment_check(lawX, metric, SubgaussianCheckOptions{}.xGrid);
    if (!domination.pass)
        throw CheckFailed(
            "fernique_sandwich_check: process is not dominated by the Gaussian metric");
    const EstimateWithCI supX = expected_sup_gaussian(lawX, samples, derive_seed(seed, 0));
    return sandwich_impl(supX.mean, supX.se, spec, action, samples, seed, method);
}

}  // namespace subgauss::chaining
