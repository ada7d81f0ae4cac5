#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subgauss/common.hpp"

namespace subgauss {

// ---------------------------------------------------------------------------
// Domain types for finite-index random processes.
//
// All types are immutable after construction; constructors validate the
// structural invariants and throw on violation. Representation tolerances
// (weight sums, symmetry) are 1e-12; derived inequalities (PSD, triangle)
// are checked at 1e-10 / 1e-9.
// ---------------------------------------------------------------------------

struct IndexSet {
    std::vector<std::string> labels;

    IndexSet() = default;
    explicit IndexSet(std::vector<std::string> labels_);

    // labels "t0", "t1", ...
    static IndexSet numbered(std::size_t n);

    std::size_t n() const { return labels.size(); }
    bool operator==(const IndexSet& o) const { return labels == o.labels; }
    bool operator!=(const IndexSet& o) const { return !(*this == o); }
};

void require_same_index(const IndexSet& a, const IndexSet& b, const char* where);

// Finitely supported probability law on R^T.
struct DiscreteLaw {
    IndexSet index;
    std::vector<std::vector<double>> atoms;  // each of length n
    std::vector<double> weights;             // nonnegative, sum 1 within 1e-12

    DiscreteLaw() = default;
    DiscreteLaw(IndexSet index_, std::vector<std::vector<double>> atoms_,
                std::vector<double> weights_);

    static DiscreteLaw pointMass(IndexSet index_, std::vector<double> atom);

    std::size_t size() const { return atoms.size(); }
    std::vector<double> mean() const;
    // law of X + v (every atom shifted)
    DiscreteLaw shifted(const std::vector<double>& v) const;
};

// Mean vector and PSD covariance on T; mean is zero for centered processes.
struct GaussianSpec {
    IndexSet index;
    std::vector<double> mean;
    Matrix covariance;

    GaussianSpec() = default;
    GaussianSpec(IndexSet index_, std::vector<double> mean_, Matrix covariance_);

    static GaussianSpec standard(IndexSet index_);

    std::size_t n() const { return index.n(); }
    bool isCentered(double tol = 0.0) const;
};

// Symmetric nonnegative matrix with zero diagonal satisfying the triangle
// inequality within 1e-9 (a pseudometric: zero off-diagonal entries allowed).
struct MetricOnT {
    IndexSet index;
    Matrix dist;

    MetricOnT() = default;
    MetricOnT(IndexSet index_, Matrix dist_);

    double operator()(std::size_t t, std::size_t s) const { return dist(t, s); }
    double diameter() const;
    // smallest nonzero distance; 0 if the metric is identically zero
    double minPositive() const;
};

struct MeasureOnT {
    IndexSet index;
    std::vector<double> probs;

    MeasureOnT() = default;
    MeasureOnT(IndexSet index_, std::vector<double> probs_);

    static MeasureOnT uniform(IndexSet index_);
    static MeasureOnT pointMass(IndexSet index_, std::size_t t);
};

// Carrier for i.i.d. realizations of a process.
struct SampleBatch {
    IndexSet index;
    Matrix rows;                        // m x n
    std::optional<std::uint64_t> seed;  // absent for ingested data

    SampleBatch() = default;
    SampleBatch(IndexSet index_, Matrix rows_, std::optional<std::uint64_t> seed_ = {});

    std::size_t m() const { return rows.rows(); }
};

// ---------------------------------------------------------------------------
// PSD machinery (spectral, rank-deficiency tolerant)
// ---------------------------------------------------------------------------

// Throws NonPSDCovariance if an eigenvalue is below -tolScale * ||sigma||.
void check_psd(const Matrix& sigma, double tolScale = 1e-10);

// Symmetric square root with negative eigenvalues clamped to zero.
Matrix psd_sqrt(const Matrix& sigma, double tolScale = 1e-10);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// d(t,s) = sqrt(Sigma_tt + Sigma_ss - 2 Sigma_ts), the L2 distance between
// coordinates of the Gaussian process.
MetricOnT natural_metric(const GaussianSpec& spec);

// m i.i.d. draws from N(mean, Sigma). Row i uses the derived stream
// (seed, i), so parallel generation would be bitwise identical.
SampleBatch sample_gaussian(const GaussianSpec& spec, std::size_t m, std::uint64_t seed);

// Draw m atoms i.i.d. from a discrete law (CDF inversion, atom order fixed).
SampleBatch sample_discrete(const DiscreteLaw& law, std::size_t m, std::uint64_t seed);

// Empirical law of a batch: distinct rows with exact rational frequencies.
DiscreteLaw empirical_law(const SampleBatch& batch);

struct SubgaussianCheckOptions {
    std::vector<double> xGrid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
};

// Pairwise increment tails against 2 e^{-x^2/2}:
//   P[|X_t - X_s| > x d(t,s)] <= 2 e^{-x^2/2}  (+ slack where sampled).
// Exact tail probabilities for a DiscreteLaw (no slack), empirical tails with
// slack 3 sqrt(bound/m) for a SampleBatch, analytic Gaussian tails for a
// GaussianSpec.
CheckReport subgaussian_increment_check(const DiscreteLaw& law, const MetricOnT& metric,
                                        const std::vector<double>& xGrid);
CheckReport subgaussian_increment_check(const SampleBatch& batch, const MetricOnT& metric,
                                        const std::vector<double>& xGrid);
CheckReport subgaussian_increment_check(const GaussianSpec& spec, const MetricOnT& metric,
                                        const std::vector<double>& xGrid);

// Tails of one-dimensional projections <v, X> against 2 e^{-x^2/2}, exact
// over atoms. Directions are normalized internally; zero directions skipped.
CheckReport projection_subgaussian_check(const DiscreteLaw& law,
                                         const std::vector<std::vector<double>>& directions,
                                         const std::vector<double>& xGrid);

// pass iff |E[X_t]| <= tol for all t; worst = max deviation.
CheckReport centeredness_check(const DiscreteLaw& law, double tol);

}  // namespace subgauss
