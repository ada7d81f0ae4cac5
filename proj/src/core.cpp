#include "subgauss/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace subgauss {

namespace {

constexpr double kStructuralTol = 1e-12;

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
    Matrix m(e.rows(), e.cols());
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j)
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

IndexSet::IndexSet(std::vector<std::string> labels_) : labels(std::move(labels_)) {
    if (labels.empty()) throw InvalidArgument("IndexSet: need at least one label");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size())
        throw InvalidArgument("IndexSet: labels must be distinct");
}

IndexSet IndexSet::numbered(std::size_t n) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "t" + std::to_string(i);
    return IndexSet(std::move(labels));
}

void require_same_index(const IndexSet& a, const IndexSet& b, const char* where) {
    if (a != b) throw IndexMismatch(std::string(where) + ": index sets differ");
}

DiscreteLaw::DiscreteLaw(IndexSet index_, std::vector<std::vector<double>> atoms_,
                         std::vector<double> weights_)
    : index(std::move(index_)), atoms(std::move(atoms_)), weights(std::move(weights_)) {
    if (atoms.empty()) throw InvalidArgument("DiscreteLaw: no atoms");
    if (atoms.size() != weights.size())
        throw InvalidArgument("DiscreteLaw: atom/weight count mismatch");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InvalidArgument("DiscreteLaw: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kStructuralTol)
        throw InvalidArgument("DiscreteLaw: weights sum to " + std::to_string(sum));
    for (const auto& a : atoms)
        if (a.size() != index.n()) throw InvalidArgument("DiscreteLaw: atom length != n");
}

DiscreteLaw DiscreteLaw::pointMass(IndexSet index_, std::vector<double> atom) {
    return DiscreteLaw(std::move(index_), {std::move(atom)}, {1.0});
}

std::vector<double> DiscreteLaw::mean() const {
    std::vector<double> m(index.n(), 0.0);
    for (std::size_t k = 0; k < atoms.size(); ++k)
        for (std::size_t t = 0; t < m.size(); ++t) m[t] += weights[k] * atoms[k][t];
    return m;
}

DiscreteLaw DiscreteLaw::shifted(const std::vector<double>& v) const {
    if (v.size() != index.n()) throw InvalidArgument("shifted: vector length != n");
    auto shiftedAtoms = atoms;
    for (auto& a : shiftedAtoms)
        for (std::size_t t = 0; t < v.size(); ++t) a[t] += v[t];
    return DiscreteLaw(index, std::move(shiftedAtoms), weights);
}

GaussianSpec::GaussianSpec(IndexSet index_, std::vector<double> mean_, Matrix covariance_)
    : index(std::move(index_)), mean(std::move(mean_)), covariance(std::move(covariance_)) {
    const std::size_t n = index.n();
    if (mean.size() != n) throw InvalidArgument("GaussianSpec: mean length != n");
    if (covariance.rows() != n || covariance.cols() != n)
        throw InvalidArgument("GaussianSpec: covariance shape != n x n");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(covariance(i, j) - covariance(j, i)) > kStructuralTol)
                throw InvalidArgument("GaussianSpec: covariance not symmetric");
    check_psd(covariance);
}

GaussianSpec GaussianSpec::standard(IndexSet index_) {
    const std::size_t n = index_.n();
    return GaussianSpec(std::move(index_), std::vector<double>(n, 0.0), Matrix::identity(n));
}

bool GaussianSpec::isCentered(double tol) const {
    for (double m : mean)
        if (std::abs(m) > tol) return false;
    return true;
}

MetricOnT::MetricOnT(IndexSet index_, Matrix dist_)
    : index(std::move(index_)), dist(std::move(dist_)) {
    const std::size_t n = index.n();
    if (dist.rows() != n || dist.cols() != n)
        throw InvalidArgument("MetricOnT: shape != n x n");
    for (std::size_t i = 0; i < n; ++i) {
        if (dist(i, i) != 0.0) throw InvalidArgument("MetricOnT: nonzero diagonal");
        for (std::size_t j = 0; j < n; ++j) {
            if (dist(i, j) < 0.0) throw InvalidArgument("MetricOnT: negative distance");
            if (std::abs(dist(i, j) - dist(j, i)) > kStructuralTol)
                throw InvalidArgument("MetricOnT: asymmetric");
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (dist(i, j) > dist(i, k) + dist(k, j) + 1e-9)
                    throw InvalidArgument("MetricOnT: triangle inequality violated");
}

double MetricOnT::diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < index.n(); ++i)
        for (std::size_t j = 0; j < index.n(); ++j) d = std::max(d, dist(i, j));
    return d;
}

double MetricOnT::minPositive() const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < index.n(); ++i)
        for (std::size_t j = 0; j < index.n(); ++j)
            if (dist(i, j) > 0.0) d = std::min(d, dist(i, j));
    return std::isfinite(d) ? d : 0.0;
}

MeasureOnT::MeasureOnT(IndexSet index_, std::vector<double> probs_)
    : index(std::move(index_)), probs(std::move(probs_)) {
    if (probs.size() != index.n()) throw InvalidArgument("MeasureOnT: length != n");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw InvalidArgument("MeasureOnT: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kStructuralTol)
        throw InvalidArgument("MeasureOnT: probabilities sum to " + std::to_string(sum));
}

MeasureOnT MeasureOnT::uniform(IndexSet index_) {
    const std::size_t n = index_.n();
    return MeasureOnT(std::move(index_), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

MeasureOnT MeasureOnT::pointMass(IndexSet index_, std::size_t t) {
    std::vector<double> p(index_.n(), 0.0);
    p.at(t) = 1.0;
    return MeasureOnT(std::move(index_), std::move(p));
}

SampleBatch::SampleBatch(IndexSet index_, Matrix rows_, std::optional<std::uint64_t> seed_)
    : index(std::move(index_)), rows(std::move(rows_)), seed(seed_) {
    if (rows.rows() < 1) throw InvalidArgument("SampleBatch: need m >= 1");
    if (rows.cols() != index.n()) throw InvalidArgument("SampleBatch: row length != n");
}

// ---------------------------------------------------------------------------
// PSD machinery
// ---------------------------------------------------------------------------

void check_psd(const Matrix& sigma, double tolScale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(sigma),
                                                      Eigen::EigenvaluesOnly);
    const double norm = std::max(sigma.maxAbs(), 1.0);
    const double minEig = es.eigenvalues().minCoeff();
    if (minEig < -tolScale * norm) {
        std::ostringstream os;
        os << "covariance not PSD: min eigenvalue " << minEig;
        throw NonPSDCovariance(os.str());
    }
}

Matrix psd_sqrt(const Matrix& sigma, double tolScale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(sigma));
    const double norm = std::max(sigma.maxAbs(), 1.0);
    if (es.eigenvalues().minCoeff() < -tolScale * norm)
        throw NonPSDCovariance("psd_sqrt: covariance not PSD");
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd root = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    return from_eigen(root);
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

MetricOnT natural_metric(const GaussianSpec& spec) {
    const std::size_t n = spec.n();
    Matrix d(n, n);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t s = t + 1; s < n; ++s) {
            const double r = spec.covariance(t, t) + spec.covariance(s, s)
                             - 2.0 * spec.covariance(t, s);
            if (r < -1e-10)
                throw NonPSDCovariance("natural_metric: negative increment variance");
            const double v = std::sqrt(std::max(0.0, r));
            d(t, s) = v;
            d(s, t) = v;
        }
    }
    return MetricOnT(spec.index, std::move(d));
}

SampleBatch sample_gaussian(const GaussianSpec& spec, std::size_t m, std::uint64_t seed) {
    if (m < 1) throw InvalidArgument("sample_gaussian: need m >= 1");
    const std::size_t n = spec.n();
    const Matrix root = psd_sqrt(spec.covariance);
    Matrix rows(m, n);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng(derive_seed(seed, i));
        for (std::size_t t = 0; t < n; ++t) z[t] = rng.normal();
        for (std::size_t t = 0; t < n; ++t) {
            double v = spec.mean[t];
            for (std::size_t s = 0; s < n; ++s) v += root(t, s) * z[s];
            rows(i, t) = v;
        }
    }
    return SampleBatch(spec.index, std::move(rows), seed);
}

SampleBatch sample_discrete(const DiscreteLaw& law, std::size_t m, std::uint64_t seed) {
    if (m < 1) throw InvalidArgument("sample_discrete: need m >= 1");
    const std::size_t n = law.index.n();
    Matrix rows(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng(derive_seed(seed, i));
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t pick = law.size() - 1;
        for (std::size_t k = 0; k < law.size(); ++k) {
            acc += law.weights[k];
            if (u < acc) {
                pick = k;
                break;
            }
        }
        for (std::size_t t = 0; t < n; ++t) rows(i, t) = law.atoms[pick][t];
    }
    return SampleBatch(law.index, std::move(rows), seed);
}

DiscreteLaw empirical_law(const SampleBatch& batch) {
    const std::size_t n = batch.index.n();
    const std::size_t m = batch.m();
    // dedup rows that are equal to all bits, keeping exact rational frequencies
    std::map<std::vector<double>, std::size_t> counts;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(n);
        for (std::size_t t = 0; t < n; ++t) row[t] = batch.rows(i, t);
        ++counts[std::move(row)];
    }
    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;
    atoms.reserve(counts.size());
    weights.reserve(counts.size());
    for (const auto& [row, c] : counts) {
        atoms.push_back(row);
        weights.push_back(static_cast<double>(c) / static_cast<double>(m));
    }
    return DiscreteLaw(batch.index, std::move(atoms), std::move(weights));
}

namespace {

struct TailSource {
    // P[|X_t - X_s| > threshold] and the slack policy
    std::function<double(std::size_t, std::size_t, double)> tail;
    std::function<double(double)> slack;  // slack(bound)
};

CheckReport increment_check_impl(const IndexSet& index, const MetricOnT& metric,
                                 const std::vector<double>& xGrid, const TailSource& src) {
    require_same_index(index, metric.index, "subgaussian_increment_check");
    if (xGrid.empty()) throw InvalidArgument("subgaussian_increment_check: empty x grid");
    const std::size_t n = index.n();
    CheckReport report;
    report.pass = true;
    double worstRatio = 0.0;
    double worstViolation = -std::numeric_limits<double>::infinity();
    std::size_t pairs = 0;
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t s = t + 1; s < n; ++s) {
            const double d = metric(t, s);
            if (d <= 0.0) continue;
            ++pairs;
            for (double x : xGrid) {
                if (x <= 0.0) throw InvalidArgument("x grid entries must be positive");
                const double bound = subgaussian_bound(x);
                const double p = src.tail(t, s, x * d);
                const double violation = p - bound - src.slack(bound);
                if (bound > 0.0) worstRatio = std::max(worstRatio, p / bound);
                if (violation > worstViolation) {
                    worstViolation = violation;
                    report.metrics["worst_t"] = static_cast<double>(t);
                    report.metrics["worst_s"] = static_cast<double>(s);
                    report.metrics["worst_x"] = x;
                }
                if (violation > 0.0) report.pass = false;
            }
        }
    }
    report.worst = pairs == 0 ? 0.0 : worstViolation;
    report.metrics["pairs_checked"] = static_cast<double>(pairs);
    report.metrics["worst_ratio"] = worstRatio;
    if (pairs == 0) {
        report.pass = true;
        report.notes.push_back("no pairs with positive distance");
    }
    return report;
}

}  // namespace

CheckReport subgaussian_increment_check(const DiscreteLaw& law, const MetricOnT& metric,
                                        const std::vector<double>& xGrid) {
    TailSource src;
    src.tail = [&law](std::size_t t, std::size_t s, double thr) {
        double p = 0.0;
        for (std::size_t k = 0; k < law.size(); ++k)
            if (std::abs(law.atoms[k][t] - law.atoms[k][s]) > thr) p += law.weights[k];
        return p;
    };
    src.slack = [](double) { return 0.0; };  // exact law, exact tails
    return increment_check_impl(law.index, metric, xGrid, src);
}

CheckReport subgaussian_increment_check(const SampleBatch& batch, const MetricOnT& metric,
                                        const std::vector<double>& xGrid) {
    const double m = static_cast<double>(batch.m());
    TailSource src;
    src.tail = [&batch](std::size_t t, std::size_t s, double thr) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < batch.m(); ++i)
            if (std::abs(batch.rows(i, t) - batch.rows(i, s)) > thr) ++c;
        return static_cast<double>(c) / static_cast<double>(batch.m());
    };
    src.slack = [m](double bound) { return 3.0 * std::sqrt(bound / m); };
    return increment_check_impl(batch.index, metric, xGrid, src);
}

CheckReport subgaussian_increment_check(const GaussianSpec& spec, const MetricOnT& metric,
                                        const std::vector<double>& xGrid) {
    const MetricOnT own = natural_metric(spec);
    TailSource src;
    src.tail = [&own](std::size_t t, std::size_t s, double thr) {
        const double sd = own(t, s);
        if (sd <= 0.0) return 0.0;
        return 2.0 * (1.0 - normal_cdf(thr / sd));  // X_t - X_s ~ N(0, sd^2)
    };
    src.slack = [](double) { return 0.0; };  // analytic tails
    return increment_check_impl(spec.index, metric, xGrid, src);
}

CheckReport projection_subgaussian_check(const DiscreteLaw& law,
                                         const std::vector<std::vector<double>>& directions,
                                         const std::vector<double>& xGrid) {
    if (xGrid.empty()) throw InvalidArgument("projection_subgaussian_check: empty x grid");
    const std::size_t n = law.index.n();
    CheckReport report;
    report.pass = true;
    double worstViolation = -std::numeric_limits<double>::infinity();
    double worstRatio = 0.0;
    std::size_t checked = 0;
    for (std::size_t d = 0; d < directions.size(); ++d) {
        const auto& dir = directions[d];
        if (dir.size() != n)
            throw IndexMismatch("projection_subgaussian_check: direction length != n");
        double norm = 0.0;
        for (double v : dir) norm += v * v;
        norm = std::sqrt(norm);
        if (norm <= 0.0) continue;
        ++checked;
        std::vector<double> proj(law.size());
        for (std::size_t k = 0; k < law.size(); ++k) {
            double v = 0.0;
            for (std::size_t t = 0; t < n; ++t) v += dir[t] * law.atoms[k][t];
            proj[k] = v / norm;
        }
        for (double x : xGrid) {
            const double bound = subgaussian_bound(x);
            double p = 0.0;
            for (std::size_t k = 0; k < law.size(); ++k)
                if (std::abs(proj[k]) > x) p += law.weights[k];
            const double violation = p - bound;
            worstRatio = std::max(worstRatio, bound > 0.0 ? p / bound : 0.0);
            if (violation > worstViolation) {
                worstViolation = violation;
                report.metrics["worst_direction"] = static_cast<double>(d);
                report.metrics["worst_x"] = x;
            }
            if (violation > 0.0) report.pass = false;
        }
    }
    report.worst = checked == 0 ? 0.0 : worstViolation;
    report.metrics["directions_checked"] = static_cast<double>(checked);
    report.metrics["worst_ratio"] = worstRatio;
    return report;
}

CheckReport centeredness_check(const DiscreteLaw& law, double tol) {
    const auto m = law.mean();
    CheckReport report;
    double worst = 0.0;
    for (double v : m) worst = std::max(worst, std::abs(v));
    report.worst = worst;
    report.pass = worst <= tol;
    report.metrics["max_abs_mean"] = worst;
    return report;
}

}  // namespace subgauss
