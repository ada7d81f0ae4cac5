#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace subgauss {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPSDCovariance : Error { using Error::Error; };
struct IndexMismatch : Error { using Error::Error; };
struct MarginalMismatch : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct ClassTooLarge : Error { using Error::Error; };
struct NonpositiveC : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };
struct ExactTooLarge : Error { using Error::Error; };
struct NotTransitive : Error { using Error::Error; };
struct NotInvariant : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };
struct IOError : Error { using Error::Error; };
// a mathematical precondition did not hold for otherwise well-formed inputs
struct CheckFailed : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Dense row-major matrix, sized for desk-scale problems.
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool sameShape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double maxAbs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Deterministic RNG.
//
// Sampling must be bitwise reproducible given a 64-bit seed, and parallel
// workers must be able to derive independent streams from (seed, stream).
// std::normal_distribution is implementation-defined, so normals are drawn
// with the Marsaglia polar method on top of a splitmix64 stream.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (stream + 1));
    std::uint64_t a = splitmix64_next(s);
    std::uint64_t b = splitmix64_next(s);
    return a ^ (b >> 1);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() { return splitmix64_next(state_); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, bound)
    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    double normal() {
        if (hasSpare_) {
            hasSpare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double k = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * k;
        hasSpare_ = true;
        return u * k;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool hasSpare_ = false;
};

// ---------------------------------------------------------------------------
// Normal distribution helpers
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_pdf(double x) {
    static const double inv = 1.0 / std::sqrt(2.0 * M_PI);
    return inv * std::exp(-0.5 * x * x);
}
// the subgaussian reference tail 2 e^{-x^2/2}
inline double subgaussian_bound(double x) { return 2.0 * std::exp(-0.5 * x * x); }

// ---------------------------------------------------------------------------
// Report types shared across modules
// ---------------------------------------------------------------------------

// Generic result of a mathematical check. `worst` is the headline violation
// (negative or zero when the checked inequality holds with slack); `metrics`
// carries op-specific scalars in a deterministic order.
struct CheckReport {
    bool pass = false;
    double worst = 0.0;
    std::map<std::string, double> metrics;
    std::vector<std::string> notes;
};

struct EstimateWithCI {
    double mean = 0.0;
    double se = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t samples = 0;
    bool exact = false;  // analytic fast path, no sampling noise

    static EstimateWithCI fromMoments(double mean, double variance, std::size_t samples) {
        EstimateWithCI e;
        e.mean = mean;
        e.samples = samples;
        e.se = samples > 1 ? std::sqrt(std::max(0.0, variance) / static_cast<double>(samples)) : 0.0;
        // 99% normal-theory interval
        constexpr double z99 = 2.5758293035489004;
        e.lo = mean - z99 * e.se;
        e.hi = mean + z99 * e.se;
        return e;
    }

    static EstimateWithCI exactValue(double value) {
        EstimateWithCI e;
        e.mean = e.lo = e.hi = value;
        e.exact = true;
        return e;
    }
};

}  // namespace subgauss
