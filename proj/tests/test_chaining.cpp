#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "subgauss/chaining.hpp"

using namespace subgauss;
using namespace subgauss::chaining;

namespace {

MetricOnT path_metric() {
    Matrix d(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            d(i, j) = std::abs(static_cast<double>(i) - static_cast<double>(j));
    return MetricOnT(IndexSet::numbered(4), d);
}

MetricOnT random_euclidean_metric(Rng& rng, std::size_t n) {
    // points in the plane guarantee a genuine metric
    std::vector<std::pair<double, double>> pts(n);
    for (auto& p : pts) p = {rng.uniform() * 4.0, rng.uniform() * 4.0};
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            d(i, j) = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
    return MetricOnT(IndexSet::numbered(n), d);
}

}  // namespace

TEST_CASE("covering number endpoints") {
    const MetricOnT metric = path_metric();
    CHECK(covering_number(metric, 3.0, CoverMethod::exact) == 1);   // eps >= diam
    CHECK(covering_number(metric, 0.5, CoverMethod::exact) == 4);   // below min distance
    CHECK(covering_number(metric, 1.0, CoverMethod::exact) == 2);   // B(1) and B(3)
    CHECK(covering_number(metric, 1.0, CoverMethod::greedy) >= 2);
}

TEST_CASE("exact covering matches the exhaustive oracle; greedy never beats it") {
    Rng rng(2025);
    for (int inst = 0; inst < 30; ++inst) {
        const std::size_t n = 3 + rng.below(8);  // up to 10
        const MetricOnT metric = random_euclidean_metric(rng, n);
        const double eps = metric.diameter() * (0.1 + 0.8 * rng.uniform());
        const std::size_t exact = covering_number(metric, eps, CoverMethod::exact);
        const std::size_t brute = oracle::covering_number_bruteforce(metric, eps);
        const std::size_t greedy = covering_number(metric, eps, CoverMethod::greedy);
        CHECK(exact == brute);
        CHECK(greedy >= exact);
    }
}

TEST_CASE("covering profiles carry nonincreasing counts with greedy above exact") {
    Rng rng(77);
    const MetricOnT metric = random_euclidean_metric(rng, 8);
    const double diam = metric.diameter();
    const CoveringProfile profile =
        covering_profile(metric, {diam, diam / 2, diam / 4, diam / 8}, true);
    REQUIRE(profile.exact.size() == profile.scales.size());
    for (std::size_t i = 1; i < profile.scales.size(); ++i) {
        CHECK(profile.scales[i] < profile.scales[i - 1]);
        CHECK(profile.exact[i] >= profile.exact[i - 1]);  // smaller balls, more of them
    }
    for (std::size_t i = 0; i < profile.scales.size(); ++i) {
        CHECK(profile.greedy[i] >= profile.exact[i]);
        CHECK(profile.exact[i] >= 1);
        CHECK(profile.exact[i] <= metric.index.n());
    }
}

TEST_CASE("covering number is nonincreasing in the scale") {
    Rng rng(42);
    const MetricOnT metric = random_euclidean_metric(rng, 9);
    std::size_t prev = metric.index.n() + 1;
    for (double eps = 0.05; eps < metric.diameter() * 1.2; eps *= 1.5) {
        const std::size_t now = covering_number(metric, eps, CoverMethod::exact);
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("exact covering rejects oversized index sets") {
    const std::size_t n = 21;
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d(i, j) = i == j ? 0.0 : 1.0;
    const MetricOnT metric(IndexSet::numbered(n), d);
    CHECK_THROWS_AS(covering_number(metric, 0.5, CoverMethod::exact), ExactTooLarge);
    CHECK(covering_number(metric, 0.5, CoverMethod::greedy) == n);
}

TEST_CASE("entropy integral of a single point vanishes") {
    const MetricOnT metric(IndexSet::numbered(1), Matrix(1, 1, 0.0));
    const EntropyIntegral e = entropy_integral(metric);
    CHECK(e.upper == 0.0);
    CHECK(e.lower == 0.0);
}

TEST_CASE("entropy integral of two points brackets the closed form") {
    const double delta = 1.3;
    Matrix d(2, 2);
    d(0, 1) = d(1, 0) = delta;
    const MetricOnT metric(IndexSet::numbered(2), d);
    const EntropyIntegral e = entropy_integral(metric);
    const double exact = delta * std::sqrt(std::log(2.0));
    // closed form: N = 1 down to eps = delta (closed balls), N = 2 below
    CHECK(e.upper == doctest::Approx(exact).epsilon(1e-12));
    CHECK(e.lower == doctest::Approx(0.5 * exact).epsilon(1e-12));
    CHECK(e.lower <= exact);
    CHECK(exact <= e.upper);
}

TEST_CASE("entropy bracket contains the Riemann refinement within its factor-2 width") {
    const MetricOnT metric = path_metric();
    const EntropyIntegral e = entropy_integral(metric);
    const double riemann = oracle::entropy_integral_riemann(metric);
    CHECK(e.lower <= riemann + 1e-9);
    CHECK(riemann <= e.upper + 1e-9);
    CHECK(e.upper <= 2.0 * e.lower + 1e-12);  // dyadic ladder bracket width
    CHECK(e.upper <= 2.0 * riemann);
    CHECK(riemann <= 2.0 * e.lower);
}

TEST_CASE("entropy bounds are ordered and vanish only in degenerate geometry") {
    Rng rng(7);
    for (int inst = 0; inst < 20; ++inst) {
        const MetricOnT metric = random_euclidean_metric(rng, 3 + rng.below(6));
        const EntropyIntegral e = entropy_integral(metric);
        CHECK(e.lower <= e.upper + 1e-12);
        if (metric.diameter() > 0.0) CHECK(e.upper > 0.0);
    }
}

TEST_CASE("stationarity verification") {
    SUBCASE("cyclic shift on circulant covariance passes") {
        const std::size_t n = 8;
        GaussianSpec spec(IndexSet::numbered(n), std::vector<double>(n, 0.0),
                          oracle::circulant_covariance(n));
        GroupAction action = GroupAction::cyclicShift(n);
        const CheckReport r = verify_stationary(spec, action);
        CHECK(r.pass);
        CHECK(r.metrics.at("orbit_size") == doctest::Approx(8.0));
        CHECK(action.verifiedTransitive);
    }
    SUBCASE("identity covariance passes under the full symmetric group") {
        GaussianSpec spec = GaussianSpec::standard(IndexSet::numbered(5));
        CHECK(verify_stationary(spec, GroupAction::fullSymmetric(5)).pass);
    }
    SUBCASE("perturbed circulant is detected as not invariant") {
        Matrix sigma = oracle::circulant_covariance(3);
        sigma(0, 1) += 0.05;
        sigma(1, 0) += 0.05;
        GaussianSpec spec(IndexSet::numbered(3), std::vector<double>(3, 0.0), sigma);
        CHECK_THROWS_AS(verify_stationary(spec, GroupAction::cyclicShift(3)), NotInvariant);
    }
    SUBCASE("a non-transitive action is detected") {
        GaussianSpec spec = GaussianSpec::standard(IndexSet::numbered(3));
        GroupAction trivial;
        trivial.generators.push_back({0, 1, 2});  // identity only
        CHECK_THROWS_AS(verify_stationary(spec, trivial), NotTransitive);
    }
}

TEST_CASE("expected supremum helpers") {
    const IndexSet idx({"a", "b"});
    const DiscreteLaw law(idx, {{1.0, -1.0}, {-1.0, 1.0}}, {0.5, 0.5});
    CHECK(expected_sup_exact(law) == doctest::Approx(1.0));
    // E[max of 16 iid N(0,1)]: frozen from the Simpson quadrature oracle
    GaussianSpec iso16 = GaussianSpec::standard(IndexSet::numbered(16));
    const EstimateWithCI est = expected_sup_gaussian(iso16, 200000, 16161);
    const double oracleValue = oracle::expected_max_iid_gaussians(16);
    CHECK(oracleValue == doctest::Approx(1.7659913931).epsilon(1e-6));
    CHECK(std::abs(est.mean - oracleValue) <= 3.0 * est.se);
}

TEST_CASE("sudakov-direction sanity band for independent coordinates") {
    for (std::size_t n : {2, 4, 16, 64}) {
        GaussianSpec spec = GaussianSpec::standard(IndexSet::numbered(n));
        const EstimateWithCI est = expected_sup_gaussian(spec, 100000, 1000 + n);
        const double lo = std::sqrt(std::log(static_cast<double>(n))) / 4.0;
        const double hi = 2.0 * std::sqrt(2.0 * std::log(static_cast<double>(n)));
        CHECK(est.mean + 3.0 * est.se >= lo);
        CHECK(est.mean - 3.0 * est.se <= hi);
    }
}

TEST_CASE("sandwich check on a single point is the exact-zero case") {
    GaussianSpec spec(IndexSet::numbered(1), {0.0}, Matrix(1, 1, 0.0));
    GroupAction id;
    id.generators.push_back({0});
    const SandwichReport r = fernique_sandwich_check(spec, spec, id, 1000, 3);
    CHECK(r.exactZero);
    CHECK(r.pass);
}

TEST_CASE("sandwich holds for independent coordinates under the symmetric group") {
    const std::size_t n = 16;
    GaussianSpec spec = GaussianSpec::standard(IndexSet::numbered(n));
    const SandwichReport r =
        fernique_sandwich_check(spec, spec, GroupAction::fullSymmetric(n), 100000, 5);
    CHECK(r.pass);
    CHECK(r.ratioGauss > kSandwichBandLo);
    CHECK(r.ratioGauss < kSandwichBandHi);
    // E[sup G] close to the frozen quadrature value
    CHECK(r.supGauss == doctest::Approx(1.76599).epsilon(0.02));
}

TEST_CASE("sandwich holds on the discrete torus, empirical process side included") {
    const std::size_t n = 12;
    GaussianSpec spec(IndexSet::numbered(n), std::vector<double>(n, 0.0),
                      oracle::circulant_covariance(n));
    const DiscreteLaw lawX = empirical_law(sample_gaussian(spec, 20000, 99));
    const SandwichReport r =
        fernique_sandwich_check(lawX, spec, GroupAction::cyclicShift(n), 50000, 6);
    CHECK(r.pass);
    CHECK(r.supProcessSe == 0.0);  // exact enumeration over the empirical atoms
    CHECK(r.ratioProcess > kSandwichBandLo);
    CHECK(r.ratioProcess < kSandwichBandHi);
}

TEST_CASE("sandwich preconditions reject undominated processes") {
    const std::size_t n = 4;
    GaussianSpec spec = GaussianSpec::standard(IndexSet::numbered(n));
    std::vector<std::vector<double>> atoms = {{6, -6, 6, -6}, {-6, 6, -6, 6}};
    const DiscreteLaw wild(IndexSet::numbered(n), atoms, {0.5, 0.5});
    CHECK_THROWS_AS(
        fernique_sandwich_check(wild, spec, GroupAction::fullSymmetric(n), 1000, 4),
        CheckFailed);
}
