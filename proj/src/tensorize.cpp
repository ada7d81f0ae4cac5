#include "subgauss/tensorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace subgauss::tensor {

RationalMeasure::RationalMeasure(IndexSet index_, std::vector<std::uint64_t> counts_)
    : index(std::move(index_)), counts(std::move(counts_)) {
    if (counts.size() != index.n())
        throw InvalidArgument("RationalMeasure: counts length != n");
    K = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (K == 0) throw InvalidArgument("RationalMeasure: K must be positive");
}

MeasureOnT RationalMeasure::toMeasure() const {
    std::vector<double> probs(counts.size());
    for (std::size_t t = 0; t < counts.size(); ++t)
        probs[t] = static_cast<double>(counts[t]) / static_cast<double>(K);
    return MeasureOnT(index, std::move(probs));
}

std::uint64_t multinomial(const std::vector<std::uint64_t>& counts) {
    // product of binomials over prefix sums; saturates instead of overflowing
    unsigned __int128 result = 1;
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) {
        for (std::uint64_t i = 1; i <= c; ++i) {
            ++total;
            result = result * total / i;  // exact: C(total, i) is integral
            if (result > std::numeric_limits<std::uint64_t>::max())
                return std::numeric_limits<std::uint64_t>::max();
        }
    }
    return static_cast<std::uint64_t>(result);
}

SequenceClass enumerate_sequence_class(const RationalMeasure& mu, std::uint64_t N,
                                       std::uint64_t cap) {
    if (N == 0) throw InvalidArgument("enumerate_sequence_class: N must be positive");
    SequenceClass cls;
    cls.base = mu;
    cls.N = N;

    std::vector<std::uint64_t> scaled(mu.counts.size());
    for (std::size_t t = 0; t < mu.counts.size(); ++t) scaled[t] = N * mu.counts[t];
    const std::uint64_t length = N * mu.K;
    cls.length = static_cast<std::size_t>(length);
    cls.size = multinomial(scaled);
    if (cls.size > cap) {
        std::ostringstream os;
        os << "sequence class has " << cls.size << " elements, cap is " << cap;
        throw ClassTooLarge(os.str());
    }

    std::vector<std::uint32_t> seq;
    seq.reserve(cls.length);
    for (std::size_t t = 0; t < scaled.size(); ++t)
        for (std::uint64_t i = 0; i < scaled[t]; ++i)
            seq.push_back(static_cast<std::uint32_t>(t));
    // sorted start + next_permutation = all distinct multiset permutations,
    // lexicographic
    cls.sequences.reserve(static_cast<std::size_t>(cls.size));
    do {
        cls.sequences.push_back(seq);
    } while (std::next_permutation(seq.begin(), seq.end()));
    if (cls.sequences.size() != cls.size)
        throw Error("enumerate_sequence_class: enumeration does not match the multinomial");
    return cls;
}

namespace {

IndexSet sequence_index(const SequenceClass& cls) {
    std::vector<std::string> labels;
    labels.reserve(cls.sequences.size());
    for (const auto& seq : cls.sequences) {
        std::string name;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (i) name += '.';
            name += cls.index().labels[seq[i]];
        }
        labels.push_back(std::move(name));
    }
    return IndexSet(std::move(labels));
}

}  // namespace

MetricOnT tensor_metric(const MetricOnT& metric, const SequenceClass& seqClass) {
    require_same_index(metric.index, seqClass.index(), "tensor_metric");
    const std::size_t S = seqClass.sequences.size();
    const double M = static_cast<double>(seqClass.length);
    Matrix d(S, S);
    for (std::size_t a = 0; a < S; ++a) {
        for (std::size_t b = a + 1; b < S; ++b) {
            double sq = 0.0;
            for (std::size_t i = 0; i < seqClass.length; ++i) {
                const double di = metric(seqClass.sequences[a][i], seqClass.sequences[b][i]);
                sq += di * di;
            }
            const double v = std::sqrt(sq) / M;
            d(a, b) = v;
            d(b, a) = v;
        }
    }
    return MetricOnT(sequence_index(seqClass), std::move(d));
}

TensorGaussian tensor_gaussian_cov(const GaussianSpec& spec, const SequenceClass& seqClass,
                                   std::uint64_t covCap) {
    require_same_index(spec.index, seqClass.index(), "tensor_gaussian_cov");
    if (!spec.isCentered())
        throw InvalidArgument("tensor_gaussian_cov: base process must be centered");
    const std::size_t S = seqClass.sequences.size();
    if (S > covCap)
        throw ClassTooLarge("tensor_gaussian_cov: class too large for a dense covariance");
    const double M2 = static_cast<double>(seqClass.length) *
                      static_cast<double>(seqClass.length);
    Matrix cov(S, S);
    for (std::size_t a = 0; a < S; ++a)
        for (std::size_t b = a; b < S; ++b) {
            double sum = 0.0;
            for (std::size_t i = 0; i < seqClass.length; ++i)
                sum += spec.covariance(seqClass.sequences[a][i], seqClass.sequences[b][i]);
            cov(a, b) = sum / M2;
            cov(b, a) = cov(a, b);
        }
    TensorGaussian out;
    out.spec = GaussianSpec(sequence_index(seqClass), std::vector<double>(S, 0.0),
                            std::move(cov));
    out.cls = seqClass;
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo supremum
// ---------------------------------------------------------------------------

namespace {

// Draw one replicate's copies (NK x n values), evaluate every sequence
// average, return the max.
template <typename DrawCopies>
EstimateWithCI mc_sup_impl(const SequenceClass& cls, const std::vector<double>& baseMean,
                           std::size_t samples, std::uint64_t seed, DrawCopies draw) {
    if (samples < 100) throw InsufficientSamples("mc_sup_tensorized: need samples >= 100");
    const std::size_t S = cls.sequences.size();
    const std::size_t M = cls.length;
    if (S == 1) {
        // sup over a singleton is the plain average; expectation is exact
        double v = 0.0;
        for (std::size_t i = 0; i < M; ++i) v += baseMean[cls.sequences[0][i]];
        return EstimateWithCI::exactValue(v / static_cast<double>(M));
    }
    double mean = 0.0, m2 = 0.0;
    std::vector<std::vector<double>> copies(M);
    std::vector<double> vals(S);
    for (std::size_t rep = 0; rep < samples; ++rep) {
        Rng rng(derive_seed(seed, rep));
        draw(rng, copies);
        for (std::size_t a = 0; a < S; ++a) {
            double sum = 0.0;
            for (std::size_t i = 0; i < M; ++i) sum += copies[i][cls.sequences[a][i]];
            vals[a] = sum;
        }
        const double sup = *std::max_element(vals.begin(), vals.end()) /
                           static_cast<double>(M);
        const double delta = sup - mean;
        mean += delta / static_cast<double>(rep + 1);
        m2 += delta * (sup - mean);
    }
    return EstimateWithCI::fromMoments(mean, m2 / static_cast<double>(samples - 1), samples);
}

}  // namespace

EstimateWithCI mc_sup_tensorized(const DiscreteLaw& law, const SequenceClass& seqClass,
                                 std::size_t samples, std::uint64_t seed) {
    require_same_index(law.index, seqClass.index(), "mc_sup_tensorized");
    const std::size_t M = seqClass.length;
    return mc_sup_impl(seqClass, law.mean(), samples, seed,
                       [&](Rng& rng, std::vector<std::vector<double>>& copies) {
                           for (std::size_t i = 0; i < M; ++i) {
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
                               copies[i] = law.atoms[pick];
                           }
                       });
}

EstimateWithCI mc_sup_tensorized(const GaussianSpec& spec, const SequenceClass& seqClass,
                                 std::size_t samples, std::uint64_t seed) {
    require_same_index(spec.index, seqClass.index(), "mc_sup_tensorized");
    const std::size_t M = seqClass.length;
    const std::size_t n = spec.n();
    const Matrix root = psd_sqrt(spec.covariance);
    std::vector<double> z(n);
    return mc_sup_impl(seqClass, spec.mean, samples, seed,
                       [&](Rng& rng, std::vector<std::vector<double>>& copies) {
                           for (std::size_t i = 0; i < M; ++i) {
                               copies[i].assign(n, 0.0);
                               for (std::size_t t = 0; t < n; ++t) z[t] = rng.normal();
                               for (std::size_t t = 0; t < n; ++t) {
                                   double v = spec.mean[t];
                                   for (std::size_t s = 0; s < n; ++s)
                                       v += root(t, s) * z[s];
                                   copies[i][t] = v;
                               }
                           }
                       });
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

namespace {

template <typename Base>
StudyTable study_impl(const Base& base, const RationalMeasure& mu,
                      const std::vector<std::uint64_t>& Ns, std::size_t samples,
                      std::uint64_t seed, std::uint64_t cap, double exactF) {
    StudyTable table;
    table.exactF = exactF;
    double prev = -std::numeric_limits<double>::infinity();
    double prevSe = 0.0;
    for (std::uint64_t N : Ns) {
        const SequenceClass cls = enumerate_sequence_class(mu, N, cap);
        StudyRow row;
        row.N = N;
        row.classSize = cls.size;
        row.estimate = mc_sup_tensorized(base, cls, samples, derive_seed(seed, N));
        row.exactF = exactF;
        row.gap = row.estimate.mean - exactF;
        // monotonicity is flagged up to 3 combined standard errors, not asserted
        const double slack = 3.0 * (row.estimate.se + prevSe);
        if (row.estimate.mean < prev - slack) table.monotoneUpToNoise = false;
        prev = row.estimate.mean;
        prevSe = row.estimate.se;
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace

StudyTable convergence_study(const DiscreteLaw& law, const RationalMeasure& mu,
                             const std::vector<std::uint64_t>& Ns, std::size_t samples,
                             std::uint64_t seed, std::uint64_t cap) {
    const double exactF = transport::fernique_functional(law, mu.toMeasure()).value;
    return study_impl(law, mu, Ns, samples, seed, cap, exactF);
}

StudyTable convergence_study(const GaussianSpec& spec, const RationalMeasure& mu,
                             const std::vector<std::uint64_t>& Ns, std::size_t samples,
                             std::uint64_t seed, std::uint64_t cap,
                             std::size_t refGridPoints) {
    const DiscreteLaw gridLaw = transport::discretize_gaussian(spec, refGridPoints);
    const double exactF = transport::fernique_functional(gridLaw, mu.toMeasure()).value;
    return study_impl(spec, mu, Ns, samples, seed, cap, exactF);
}

// ---------------------------------------------------------------------------
// Stationarity
// ---------------------------------------------------------------------------

namespace {

// position permutation: sigma(t)_i = t_{sigma(i)}
std::vector<std::uint32_t> apply_position_permutation(const std::vector<std::uint32_t>& seq,
                                                      const std::vector<std::size_t>& sigma) {
    std::vector<std::uint32_t> out(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) out[i] = seq[sigma[i]];
    return out;
}

std::size_t locate_sequence(const SequenceClass& cls, const std::vector<std::uint32_t>& seq) {
    const auto it = std::lower_bound(cls.sequences.begin(), cls.sequences.end(), seq);
    if (it == cls.sequences.end() || *it != seq)
        throw Error("stationarity_check: permuted sequence left the class");
    return static_cast<std::size_t>(it - cls.sequences.begin());
}

}  // namespace

CheckReport stationarity_check(const TensorGaussian& tensorG, std::size_t trials,
                               std::uint64_t seed) {
    const SequenceClass& cls = tensorG.cls;
    const std::size_t S = cls.sequences.size();
    const std::size_t M = cls.length;
    if (S < 2) throw InvalidArgument("stationarity_check: class size must be >= 2");
    CheckReport report;
    report.pass = true;
    double worst = 0.0;

    // transitivity: exhibit a permutation mapping sequence 0 to each other
    // sequence by matching positions label by label
    for (std::size_t target = 0; target < S; ++target) {
        std::vector<std::size_t> sigma(M);
        std::vector<char> used(M, 0);
        for (std::size_t i = 0; i < M; ++i) {
            const std::uint32_t want = cls.sequences[target][i];
            std::size_t pick = M;
            for (std::size_t j = 0; j < M; ++j)
                if (!used[j] && cls.sequences[0][j] == want) {
                    pick = j;
                    break;
                }
            if (pick == M) throw Error("stationarity_check: class is not a single orbit");
            used[pick] = 1;
            sigma[i] = pick;
        }
        if (apply_position_permutation(cls.sequences[0], sigma) != cls.sequences[target])
            throw Error("stationarity_check: transitivity witness failed");
    }
    report.metrics["transitive"] = 1.0;

    // invariance: Cov(G_{sigma(t)}, G_{sigma(s)}) == Cov(G_t, G_s) entrywise
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Rng rng(derive_seed(seed, trial));
        std::vector<std::size_t> sigma(M);
        std::iota(sigma.begin(), sigma.end(), std::size_t{0});
        for (std::size_t i = M; i > 1; --i)
            std::swap(sigma[i - 1], sigma[rng.below(i)]);
        std::vector<std::size_t> image(S);
        for (std::size_t a = 0; a < S; ++a)
            image[a] = locate_sequence(cls, apply_position_permutation(cls.sequences[a], sigma));
        for (std::size_t a = 0; a < S; ++a)
            for (std::size_t b = 0; b < S; ++b) {
                const double dev = std::abs(tensorG.spec.covariance(image[a], image[b]) -
                                            tensorG.spec.covariance(a, b));
                worst = std::max(worst, dev);
            }
    }
    report.worst = worst;
    report.pass = worst <= 1e-12;
    report.metrics["trials"] = static_cast<double>(trials);
    return report;
}

// ---------------------------------------------------------------------------
// Tensorized subgaussian increments
// ---------------------------------------------------------------------------

CheckReport tensor_subgaussian_check(const DiscreteLaw& law, const SequenceClass& seqClass,
                                     const MetricOnT& metric, double C, std::size_t samples,
                                     std::uint64_t seed,
                                     const TensorSubgaussianOptions& opts) {
    require_same_index(law.index, seqClass.index(), "tensor_subgaussian_check");
    if (C <= 0.0) throw NonpositiveC("tensor_subgaussian_check: C must be positive");
    const CheckReport baseCheck = subgaussian_increment_check(law, metric, opts.xGrid);
    if (!baseCheck.pass)
        throw CheckFailed("tensor_subgaussian_check: base law fails the increment check");

    const MetricOnT dN = tensor_metric(metric, seqClass);
    const std::size_t S = seqClass.sequences.size();
    const std::size_t M = seqClass.length;

    // store per-replicate process values, then read tails per pair
    std::vector<std::vector<double>> vals(S, std::vector<double>(samples));
    std::vector<std::vector<double>> copies(M);
    for (std::size_t rep = 0; rep < samples; ++rep) {
        Rng rng(derive_seed(seed, rep));
        for (std::size_t i = 0; i < M; ++i) {
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
            copies[i] = law.atoms[pick];
        }
        for (std::size_t a = 0; a < S; ++a) {
            double sum = 0.0;
            for (std::size_t i = 0; i < M; ++i) sum += copies[i][seqClass.sequences[a][i]];
            vals[a][rep] = sum / static_cast<double>(M);
        }
    }

    const double m = static_cast<double>(samples);
    CheckReport report;
    report.pass = true;
    double worst = -std::numeric_limits<double>::infinity();
    // smallest C in the grid passing all pairs, computed from the same sample
    std::vector<double> cGrid = opts.cGrid;
    std::sort(cGrid.begin(), cGrid.end());
    std::vector<char> cPasses(cGrid.size(), 1);
    std::size_t pairsChecked = 0;
    for (std::size_t a = 0; a < S && pairsChecked < opts.maxPairs; ++a) {
        for (std::size_t b = a + 1; b < S && pairsChecked < opts.maxPairs; ++b) {
            const double d = dN(a, b);
            if (d <= 0.0) continue;
            ++pairsChecked;
            for (double x : opts.xGrid) {
                const double bound = subgaussian_bound(x);
                const double slack = 3.0 * std::sqrt(bound / m);
                auto tailAt = [&](double cMult) {
                    const double thr = cMult * x * d;
                    std::size_t cnt = 0;
                    for (std::size_t rep = 0; rep < samples; ++rep)
                        if (std::abs(vals[a][rep] - vals[b][rep]) > thr) ++cnt;
                    return static_cast<double>(cnt) / m;
                };
                const double violation = tailAt(C) - bound - slack;
                if (violation > worst) {
                    worst = violation;
                    report.metrics["worst_x"] = x;
                }
                if (violation > 0.0) report.pass = false;
                for (std::size_t ci = 0; ci < cGrid.size(); ++ci)
                    if (cPasses[ci] && tailAt(cGrid[ci]) > bound + slack) cPasses[ci] = 0;
            }
        }
    }
    report.worst = pairsChecked == 0 ? 0.0 : worst;
    report.metrics["pairs_checked"] = static_cast<double>(pairsChecked);
    report.metrics["c_tested"] = C;
    double smallest = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t ci = 0; ci < cGrid.size(); ++ci)
        if (cPasses[ci]) {
            smallest = cGrid[ci];
            break;
        }
    report.metrics["smallest_passing_c"] = smallest;
    if (pairsChecked == 0) report.pass = true;
    return report;
}

CheckReport tensor_subgaussian_check(const GaussianSpec& spec, const SequenceClass& seqClass,
                                     const MetricOnT& metric, double C,
                                     const TensorSubgaussianOptions& opts) {
    require_same_index(spec.index, seqClass.index(), "tensor_subgaussian_check");
    if (C <= 0.0) throw NonpositiveC("tensor_subgaussian_check: C must be positive");
    const MetricOnT dN = tensor_metric(metric, seqClass);
    const std::size_t S = seqClass.sequences.size();
    const std::size_t M = seqClass.length;

    CheckReport report;
    report.pass = true;
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<double> cGrid = opts.cGrid;
    std::sort(cGrid.begin(), cGrid.end());
    std::vector<char> cPasses(cGrid.size(), 1);
    std::size_t pairsChecked = 0;
    for (std::size_t a = 0; a < S && pairsChecked < opts.maxPairs; ++a) {
        for (std::size_t b = a + 1; b < S && pairsChecked < opts.maxPairs; ++b) {
            const double d = dN(a, b);
            if (d <= 0.0) continue;
            // Var(X_a - X_b) from the base covariance, the true Gaussian scale
            double var = 0.0;
            for (std::size_t i = 0; i < M; ++i) {
                const std::uint32_t t = seqClass.sequences[a][i];
                const std::uint32_t s = seqClass.sequences[b][i];
                var += spec.covariance(t, t) + spec.covariance(s, s) -
                       2.0 * spec.covariance(t, s);
            }
            const double sd = std::sqrt(std::max(0.0, var)) / static_cast<double>(M);
            if (sd <= 0.0) continue;
            ++pairsChecked;
            for (double x : opts.xGrid) {
                const double bound = subgaussian_bound(x);
                auto tailAt = [&](double cMult) {
                    return 2.0 * (1.0 - normal_cdf(cMult * x * d / sd));
                };
                const double violation = tailAt(C) - bound;
                if (violation > worst) {
                    worst = violation;
                    report.metrics["worst_x"] = x;
                }
                if (violation > 0.0) report.pass = false;
                for (std::size_t ci = 0; ci < cGrid.size(); ++ci)
                    if (cPasses[ci] && tailAt(cGrid[ci]) > bound) cPasses[ci] = 0;
            }
        }
    }
    report.worst = pairsChecked == 0 ? 0.0 : worst;
    report.metrics["pairs_checked"] = static_cast<double>(pairsChecked);
    report.metrics["c_tested"] = C;
    double smallest = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t ci = 0; ci < cGrid.size(); ++ci)
        if (cPasses[ci]) {
            smallest = cGrid[ci];
            break;
        }
    report.metrics["smallest_passing_c"] = smallest;
    if (pairsChecked == 0) report.pass = true;
    return report;
}

}  // namespace subgauss::tensor
