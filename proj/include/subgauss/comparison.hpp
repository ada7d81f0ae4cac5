#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subgauss/common.hpp"
#include "subgauss/core.hpp"

namespace subgauss::comparison {

// f(x) = max_i (<slope_i, x> + offset_i), a finite maximum of affine pieces.
struct MaxAffine {
    std::string id;
    std::vector<std::vector<double>> slopes;
    std::vector<double> offsets;

    MaxAffine() = default;
    MaxAffine(std::string id_, std::vector<std::vector<double>> slopes_,
              std::vector<double> offsets_);

    std::size_t dim() const { return slopes.empty() ? 0 : slopes[0].size(); }
    double operator()(const std::vector<double>& x) const;
    double atZero() const;  // max offset
};

// E[f(X)] exactly over the atoms.
double expected_value(const MaxAffine& f, const DiscreteLaw& law);

// E[sup_t (X_t + m_t)], exact over atoms.
double expected_sup_shifted(const DiscreteLaw& law, const std::vector<double>& shifts);

// The sup-decomposition identity: E[sup_t (X_t + m_t)] equals
// F(X, mu*) + <mu*, m> at the argmax-index law mu* (ties to the lowest
// label), verified exactly by the transport LP plus a local first-order
// check that perturbing mu* along coordinate pairs does not improve.
CheckReport sup_decomposition_check(const DiscreteLaw& law,
                                    const std::vector<double>& shifts);

// How E[f(cG)] is computed for G ~ N(0, I_n):
//   exact      - piecewise-affine envelope integration, n == 1 only
//   quadrature - symmetric tensor midpoint grid, n <= 3
//   montecarlo - antithetic pairs, any n
enum class GaussMethod { automatic, exact, quadrature, montecarlo };

struct ConvexOrderOptions {
    GaussMethod method = GaussMethod::automatic;
    std::size_t samples = 200000;        // MC paths (antithetic pairs share a draw)
    std::size_t quadraturePoints = 201;  // per axis
    double quadratureClip = 8.0;
    double tolerance = 1e-9;             // deterministic slack added to every witness
    std::vector<double> xGrid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};  // precondition checks
    bool checkPreconditions = true;
};

struct WitnessResult {
    std::string id;
    double expectationX = 0.0;
    double expectationG = 0.0;  // at the tested c
    double se = 0.0;            // 0 in deterministic modes
    double gap = 0.0;           // expectationX - expectationG
    bool pass = false;
};

struct OrderingReport {
    double cTested = 0.0;
    std::string family;
    double worstGap = 0.0;
    std::optional<MaxAffine> violatingWitness;
    std::vector<WitnessResult> witnesses;
    bool pass = false;
};

// E[f(X)] <= E[f(cG)] over the witness family; worstGap is the largest
// violation, pass iff every witness clears its slack. Throws NonpositiveC;
// precondition failures (centeredness, projection subgaussianity along the
// witness slopes) throw InvalidArgument.
OrderingReport convex_order_check(const DiscreteLaw& lawX, double c,
                                  const std::vector<MaxAffine>& witnesses,
                                  std::uint64_t seed, const ConvexOrderOptions& opts = {});

struct WitnessFamilySpec {
    bool canonical = true;      // +/- coordinates, |<v,.>|, sup over atom slopes
    std::size_t randomCount = 20;
    std::size_t maxPieces = 5;
    std::uint64_t seed = 1;
};

std::vector<MaxAffine> make_witness_family(const DiscreteLaw& law,
                                           const WitnessFamilySpec& spec);

struct ConstantRow {
    double c = 0.0;
    double worstGap = 0.0;
    std::string worstWitnessId;
    bool pass = false;
};

struct ConstantReport {
    std::vector<ConstantRow> rows;
    double smallestPassingC = 0.0;  // NaN when nothing passes
    double strassenC = 0.0;         // NaN when not computed
    std::string family;
};

// gap(c) curve over an increasing grid, the smallest passing c, and (for
// one-dimensional laws) the Strassen bisection constant for cross-reference.
ConstantReport estimate_constant(const DiscreteLaw& lawX,
                                 const std::vector<MaxAffine>& witnesses,
                                 const std::vector<double>& cGrid, std::uint64_t seed,
                                 const ConvexOrderOptions& opts = {},
                                 bool withStrassen = true);

}  // namespace subgauss::comparison
