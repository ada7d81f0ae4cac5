#pragma once

#include <cstdint>
#include <vector>

#include "subgauss/common.hpp"
#include "subgauss/core.hpp"
#include "subgauss/transport.hpp"

namespace subgauss::tensor {

// Probability measure on T with masses that are integer multiples of 1/K.
struct RationalMeasure {
    IndexSet index;
    std::vector<std::uint64_t> counts;
    std::uint64_t K = 0;

    RationalMeasure() = default;
    RationalMeasure(IndexSet index_, std::vector<std::uint64_t> counts_);

    MeasureOnT toMeasure() const;
};

// The class of length-NK sequences in which label t appears exactly
// N*counts[t] times, enumerated in lexicographic order of label indices.
struct SequenceClass {
    RationalMeasure base;
    std::uint64_t N = 0;
    std::size_t length = 0;                          // NK
    std::uint64_t size = 0;                          // multinomial coefficient
    std::vector<std::vector<std::uint32_t>> sequences;  // label indices per position

    const IndexSet& index() const { return base.index; }
};

// Multinomial coefficient (sum counts)! / prod counts_t!, saturating at
// UINT64_MAX on overflow.
std::uint64_t multinomial(const std::vector<std::uint64_t>& counts);

SequenceClass enumerate_sequence_class(const RationalMeasure& mu, std::uint64_t N,
                                       std::uint64_t cap = 100000);

// d_N(t,s) = (1/NK) sqrt(sum_i d(t_i, s_i)^2) over a sequence class; the
// index set of the result names each sequence by its joined labels.
MetricOnT tensor_metric(const MetricOnT& metric, const SequenceClass& seqClass);

// Covariance of the averaged process over the class:
// Cov(G_t, G_s) = (1/(NK)^2) sum_i Sigma(t_i, s_i).
struct TensorGaussian {
    GaussianSpec spec;  // over the sequence index set
    SequenceClass cls;
};

// covCap guards the size^2 covariance matrix, not the enumeration itself.
TensorGaussian tensor_gaussian_cov(const GaussianSpec& spec, const SequenceClass& seqClass,
                                   std::uint64_t covCap = 2048);

// Monte Carlo estimate of E[sup over the class of (1/NK) sum_i X^{(i)}_{t_i}]
// from i.i.d. copies of the base process, one fresh set of NK copies per
// replicate. Singleton classes are computed exactly (the supremum is a plain
// average, so its expectation is the shifted mean).
EstimateWithCI mc_sup_tensorized(const DiscreteLaw& law, const SequenceClass& seqClass,
                                 std::size_t samples, std::uint64_t seed);
EstimateWithCI mc_sup_tensorized(const GaussianSpec& spec, const SequenceClass& seqClass,
                                 std::size_t samples, std::uint64_t seed);

struct StudyRow {
    std::uint64_t N = 0;
    std::uint64_t classSize = 0;
    EstimateWithCI estimate;
    double exactF = 0.0;
    double gap = 0.0;  // estimate.mean - exactF
};

struct StudyTable {
    std::vector<StudyRow> rows;
    double exactF = 0.0;
    bool monotoneUpToNoise = true;  // flagged, not asserted
};

// Estimates at each N against the exact LP value of Fernique's functional.
StudyTable convergence_study(const DiscreteLaw& law, const RationalMeasure& mu,
                             const std::vector<std::uint64_t>& Ns, std::size_t samples,
                             std::uint64_t seed, std::uint64_t cap = 100000);
// Gaussian base law: the LP reference is computed on a tensor-grid
// discretization of the spec (n <= 3).
StudyTable convergence_study(const GaussianSpec& spec, const RationalMeasure& mu,
                             const std::vector<std::uint64_t>& Ns, std::size_t samples,
                             std::uint64_t seed, std::uint64_t cap = 100000,
                             std::size_t refGridPoints = 41);

// Exact covariance invariance under random S_{NK} permutations acting on
// sequence positions, plus transitivity of the action on the class.
CheckReport stationarity_check(const TensorGaussian& tensorG, std::size_t trials,
                               std::uint64_t seed);

struct TensorSubgaussianOptions {
    std::vector<double> xGrid = {0.5, 1.0, 1.5, 2.0};
    std::vector<double> cGrid = {0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0};
    std::size_t maxPairs = 512;  // pairs checked, in lexicographic order
};

// Tails of |X_t - X_s| against 2 e^{-x^2/(2 d_N^2)} at the supplied C, with
// the empirical slack policy of the core check; also reports the smallest
// grid C at which every pair passes.
CheckReport tensor_subgaussian_check(const DiscreteLaw& law, const SequenceClass& seqClass,
                                     const MetricOnT& metric, double C, std::size_t samples,
                                     std::uint64_t seed,
                                     const TensorSubgaussianOptions& opts = {});
// Gaussian base process: increments are exactly Gaussian with standard
// deviation d_N, so the tails are analytic and pass at C = 1.
CheckReport tensor_subgaussian_check(const GaussianSpec& spec, const SequenceClass& seqClass,
                                     const MetricOnT& metric, double C,
                                     const TensorSubgaussianOptions& opts = {});

}  // namespace subgauss::tensor
