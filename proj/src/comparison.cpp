#include "subgauss/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "subgauss/transport.hpp"

namespace subgauss::comparison {

MaxAffine::MaxAffine(std::string id_, std::vector<std::vector<double>> slopes_,
                     std::vector<double> offsets_)
    : id(std::move(id_)), slopes(std::move(slopes_)), offsets(std::move(offsets_)) {
    if (slopes.empty() || slopes.size() != offsets.size())
        throw InvalidArgument("MaxAffine: need matching, nonempty slopes and offsets");
    for (const auto& s : slopes)
        if (s.size() != slopes[0].size())
            throw InvalidArgument("MaxAffine: inconsistent slope dimensions");
}

double MaxAffine::operator()(const std::vector<double>& x) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        double v = offsets[i];
        for (std::size_t t = 0; t < x.size(); ++t) v += slopes[i][t] * x[t];
        best = std::max(best, v);
    }
    return best;
}

double MaxAffine::atZero() const {
    return *std::max_element(offsets.begin(), offsets.end());
}

double expected_value(const MaxAffine& f, const DiscreteLaw& law) {
    if (f.dim() != law.index.n()) throw IndexMismatch("expected_value: dimension mismatch");
    double v = 0.0;
    for (std::size_t k = 0; k < law.size(); ++k) v += law.weights[k] * f(law.atoms[k]);
    return v;
}

double expected_sup_shifted(const DiscreteLaw& law, const std::vector<double>& shifts) {
    if (shifts.size() != law.index.n())
        throw IndexMismatch("expected_sup_shifted: shift length != n");
    double v = 0.0;
    for (std::size_t k = 0; k < law.size(); ++k) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < shifts.size(); ++t)
            mx = std::max(mx, law.atoms[k][t] + shifts[t]);
        v += law.weights[k] * mx;
    }
    return v;
}

CheckReport sup_decomposition_check(const DiscreteLaw& law,
                                    const std::vector<double>& shifts) {
    if (shifts.size() != law.index.n())
        throw IndexMismatch("sup_decomposition_check: shift length != n");
    const std::size_t n = law.index.n();
    const double lhs = expected_sup_shifted(law, shifts);

    // mu* = law of the argmax index, ties broken to the lowest label
    std::vector<double> muStar(n, 0.0);
    for (std::size_t k = 0; k < law.size(); ++k) {
        std::size_t arg = 0;
        double best = law.atoms[k][0] + shifts[0];
        for (std::size_t t = 1; t < n; ++t) {
            const double v = law.atoms[k][t] + shifts[t];
            if (v > best) {
                best = v;
                arg = t;
            }
        }
        muStar[arg] += law.weights[k];
    }
    const MeasureOnT mu(law.index, muStar);

    auto objective = [&](const MeasureOnT& m) {
        double dot = 0.0;
        for (std::size_t t = 0; t < n; ++t) dot += m.probs[t] * shifts[t];
        return transport::fernique_functional(law, m).value + dot;
    };
    const double rhs = objective(mu);

    // first-order check: moving mass along any coordinate pair cannot help
    constexpr double kStep = 1e-3;
    double worstImprovement = 0.0;
    for (std::size_t from = 0; from < n; ++from) {
        if (muStar[from] < kStep) continue;
        for (std::size_t to = 0; to < n; ++to) {
            if (to == from) continue;
            auto probs = muStar;
            probs[from] -= kStep;
            probs[to] += kStep;
            const double perturbed = objective(MeasureOnT(law.index, probs));
            worstImprovement = std::max(worstImprovement, perturbed - rhs);
        }
    }

    CheckReport report;
    report.worst = std::abs(lhs - rhs);
    report.pass = report.worst <= 1e-9 && worstImprovement <= 1e-9;
    report.metrics["lhs"] = lhs;
    report.metrics["rhs"] = rhs;
    report.metrics["local_improvement"] = worstImprovement;
    return report;
}

// ---------------------------------------------------------------------------
// E[f(cG)] engines
// ---------------------------------------------------------------------------

namespace {

// n == 1: integrate the upper envelope of the lines u -> slope*c*u + offset
// against the standard normal density, exactly.
double gauss_expectation_exact1d(const MaxAffine& f, double c) {
    struct Line {
        double a, b;
    };
    std::vector<Line> lines;
    lines.reserve(f.slopes.size());
    for (std::size_t i = 0; i < f.slopes.size(); ++i)
        lines.push_back({f.slopes[i][0] * c, f.offsets[i]});
    std::sort(lines.begin(), lines.end(), [](const Line& x, const Line& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    // equal slopes: only the largest offset survives
    std::vector<Line> dedup;
    for (const Line& l : lines) {
        if (!dedup.empty() && dedup.back().a == l.a) dedup.back() = l;
        else dedup.push_back(l);
    }
    auto cross = [](const Line& p, const Line& q) { return (q.b - p.b) / (p.a - q.a); };
    std::vector<Line> hull;
    for (const Line& l : dedup) {
        while (hull.size() >= 2 &&
               cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back()))
            hull.pop_back();
        hull.push_back(l);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const double lo = i == 0 ? -std::numeric_limits<double>::infinity()
                                 : cross(hull[i - 1], hull[i]);
        const double hi = i + 1 == hull.size() ? std::numeric_limits<double>::infinity()
                                               : cross(hull[i], hull[i + 1]);
        const double phiLo = std::isinf(lo) ? 0.0 : normal_pdf(lo);
        const double phiHi = std::isinf(hi) ? 0.0 : normal_pdf(hi);
        const double cdfLo = std::isinf(lo) ? 0.0 : normal_cdf(lo);
        const double cdfHi = std::isinf(hi) ? 1.0 : normal_cdf(hi);
        total += hull[i].a * (phiLo - phiHi) + hull[i].b * (cdfHi - cdfLo);
    }
    return total;
}

struct GaussEngine {
    GaussMethod method = GaussMethod::exact;
    DiscreteLaw grid;  // quadrature nodes, standard normal
    std::size_t samples = 0;
    std::size_t n = 1;

    // returns (mean, se); se = 0 in deterministic modes
    std::pair<double, double> expectation(const MaxAffine& f, double c,
                                          std::uint64_t witnessSeed) const {
        if (method == GaussMethod::exact) return {gauss_expectation_exact1d(f, c), 0.0};
        if (method == GaussMethod::quadrature) {
            double v = 0.0;
            std::vector<double> x(n);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                for (std::size_t t = 0; t < n; ++t) x[t] = c * grid.atoms[k][t];
                v += grid.weights[k] * f(x);
            }
            return {v, 0.0};
        }
        // Monte Carlo with antithetic pairs; paths depend on the witness seed
        // only, so expectations at different c share draws.
        const std::size_t pairs = std::max<std::size_t>(1, samples / 2);
        double mean = 0.0, m2 = 0.0;
        std::vector<double> g(n), xp(n), xm(n);
        for (std::size_t p = 0; p < pairs; ++p) {
            Rng rng(derive_seed(witnessSeed, p));
            for (std::size_t t = 0; t < n; ++t) g[t] = rng.normal();
            for (std::size_t t = 0; t < n; ++t) {
                xp[t] = c * g[t];
                xm[t] = -c * g[t];
            }
            const double v = 0.5 * (f(xp) + f(xm));
            const double delta = v - mean;
            mean += delta / static_cast<double>(p + 1);
            m2 += delta * (v - mean);
        }
        const double var = pairs > 1 ? m2 / static_cast<double>(pairs - 1) : 0.0;
        return {mean, std::sqrt(var / static_cast<double>(pairs))};
    }
};

GaussEngine make_engine(std::size_t n, const ConvexOrderOptions& opts) {
    GaussEngine engine;
    engine.n = n;
    GaussMethod method = opts.method;
    if (method == GaussMethod::automatic) {
        if (n == 1) method = GaussMethod::exact;
        else if (n <= 3) method = GaussMethod::quadrature;
        else method = GaussMethod::montecarlo;
    }
    if (method == GaussMethod::exact && n != 1)
        throw InvalidArgument("convex_order_check: exact method requires n == 1");
    engine.method = method;
    if (method == GaussMethod::quadrature) {
        std::size_t points = opts.quadraturePoints;
        if (n == 3) points = std::min<std::size_t>(points, 41);
        engine.grid = transport::discretize_gaussian(GaussianSpec::standard(IndexSet::numbered(n)),
                                                     points, opts.quadratureClip);
    }
    engine.samples = opts.samples;
    return engine;
}

void check_preconditions(const DiscreteLaw& lawX, const std::vector<MaxAffine>& witnesses,
                         const ConvexOrderOptions& opts) {
    const CheckReport centered = centeredness_check(lawX, 1e-9);
    if (!centered.pass) {
        std::ostringstream os;
        os << "convex_order_check: law is not centered, max |mean| = " << centered.worst;
        throw CheckFailed(os.str());
    }
    std::vector<std::vector<double>> directions;
    for (const auto& w : witnesses)
        for (const auto& s : w.slopes) directions.push_back(s);
    const CheckReport proj = projection_subgaussian_check(lawX, directions, opts.xGrid);
    if (!proj.pass) {
        std::ostringstream os;
        os << "convex_order_check: law is not 1-subgaussian along the witness slopes, "
              "worst violation "
           << proj.worst;
        throw CheckFailed(os.str());
    }
}

}  // namespace

OrderingReport convex_order_check(const DiscreteLaw& lawX, double c,
                                  const std::vector<MaxAffine>& witnesses,
                                  std::uint64_t seed, const ConvexOrderOptions& opts) {
    if (c <= 0.0) throw NonpositiveC("convex_order_check: c must be positive");
    if (witnesses.empty()) throw InvalidArgument("convex_order_check: no witnesses");
    const std::size_t n = lawX.index.n();
    for (const auto& w : witnesses)
        if (w.dim() != n) throw IndexMismatch("convex_order_check: witness dimension != n");
    if (opts.checkPreconditions) check_preconditions(lawX, witnesses, opts);

    const GaussEngine engine = make_engine(n, opts);
    OrderingReport report;
    report.cTested = c;
    {
        std::ostringstream os;
        os << witnesses.size() << " max-affine witnesses ("
           << (engine.method == GaussMethod::exact        ? "exact"
               : engine.method == GaussMethod::quadrature ? "quadrature"
                                                          : "montecarlo")
           << " Gaussian expectations)";
        report.family = os.str();
    }
    report.pass = true;
    report.worstGap = -std::numeric_limits<double>::infinity();
    std::size_t worstIdx = 0;
    for (std::size_t w = 0; w < witnesses.size(); ++w) {
        WitnessResult res;
        res.id = witnesses[w].id;
        res.expectationX = expected_value(witnesses[w], lawX);
        const auto [eg, se] = engine.expectation(witnesses[w], c, derive_seed(seed, w));
        res.expectationG = eg;
        res.se = se;
        res.gap = res.expectationX - res.expectationG;
        const double slack = 3.0 * se + opts.tolerance;
        res.pass = res.gap <= slack;
        // Jensen sanity: both expectations dominate f(0) for centered laws
        const double floor = witnesses[w].atZero();
        if (res.expectationX < floor - 1e-9 || res.expectationG < floor - 1e-9)
            throw Error("convex_order_check: Jensen lower bound violated (internal)");
        if (!res.pass) report.pass = false;
        if (res.gap > report.worstGap) {
            report.worstGap = res.gap;
            worstIdx = w;
        }
        report.witnesses.push_back(std::move(res));
    }
    if (!report.pass) report.violatingWitness = witnesses[worstIdx];
    return report;
}

std::vector<MaxAffine> make_witness_family(const DiscreteLaw& law,
                                           const WitnessFamilySpec& spec) {
    const std::size_t n = law.index.n();
    std::vector<MaxAffine> family;
    auto unit = [n](std::size_t t, double sign) {
        std::vector<double> e(n, 0.0);
        e[t] = sign;
        return e;
    };
    double lo = 0.0, hi = 0.0;
    for (const auto& atom : law.atoms)
        for (double v : atom) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (spec.canonical) {
        for (std::size_t t = 0; t < n; ++t) {
            family.emplace_back("coord+" + law.index.labels[t],
                                std::vector<std::vector<double>>{unit(t, 1.0)},
                                std::vector<double>{0.0});
            family.emplace_back("coord-" + law.index.labels[t],
                                std::vector<std::vector<double>>{unit(t, -1.0)},
                                std::vector<double>{0.0});
        }
        Rng rng(derive_seed(spec.seed, 0xABu));
        for (std::size_t j = 0; j < std::min<std::size_t>(n, 3); ++j) {
            std::vector<double> v(n);
            double norm = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                v[t] = rng.normal();
                norm += v[t] * v[t];
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            std::vector<double> vn(n), vneg(n);
            for (std::size_t t = 0; t < n; ++t) {
                vn[t] = v[t] / norm;
                vneg[t] = -vn[t];
            }
            family.emplace_back("absproj" + std::to_string(j),
                                std::vector<std::vector<double>>{vn, vneg},
                                std::vector<double>{0.0, 0.0});
        }
        bool nontrivial = false;
        for (const auto& atom : law.atoms)
            for (double v : atom)
                if (v != 0.0) nontrivial = true;
        if (nontrivial)
            family.emplace_back("atomsup", law.atoms,
                                std::vector<double>(law.size(), 0.0));
    }
    for (std::size_t r = 0; r < spec.randomCount; ++r) {
        Rng rng(derive_seed(spec.seed, r + 1));
        const std::size_t pieces = 2 + rng.below(std::max<std::size_t>(1, spec.maxPieces - 1));
        std::vector<std::vector<double>> slopes;
        std::vector<double> offsets;
        for (std::size_t p = 0; p < pieces; ++p) {
            std::vector<double> s(n);
            double norm = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                s[t] = rng.normal();
                norm += s[t] * s[t];
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) norm = 1.0;
            for (double& x : s) x /= norm;
            slopes.push_back(std::move(s));
            offsets.push_back(lo + (hi - lo) * rng.uniform());
        }
        family.emplace_back("rand" + std::to_string(r), std::move(slopes), std::move(offsets));
    }
    if (family.empty()) throw InvalidArgument("make_witness_family: empty family");
    return family;
}

ConstantReport estimate_constant(const DiscreteLaw& lawX,
                                 const std::vector<MaxAffine>& witnesses,
                                 const std::vector<double>& cGrid, std::uint64_t seed,
                                 const ConvexOrderOptions& opts, bool withStrassen) {
    if (cGrid.empty()) throw InvalidArgument("estimate_constant: empty c grid");
    for (std::size_t i = 0; i < cGrid.size(); ++i) {
        if (cGrid[i] <= 0.0) throw NonpositiveC("estimate_constant: c grid must be positive");
        if (i > 0 && cGrid[i] <= cGrid[i - 1])
            throw InvalidArgument("estimate_constant: c grid must be increasing");
    }
    ConstantReport report;
    report.smallestPassingC = std::numeric_limits<double>::quiet_NaN();
    report.strassenC = std::numeric_limits<double>::quiet_NaN();
    ConvexOrderOptions perCall = opts;
    for (std::size_t i = 0; i < cGrid.size(); ++i) {
        perCall.checkPreconditions = opts.checkPreconditions && i == 0;
        const OrderingReport order = convex_order_check(lawX, cGrid[i], witnesses, seed, perCall);
        ConstantRow row;
        row.c = cGrid[i];
        row.worstGap = order.worstGap;
        row.pass = order.pass;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& w : order.witnesses)
            if (w.gap > worst) {
                worst = w.gap;
                row.worstWitnessId = w.id;
            }
        if (order.pass && std::isnan(report.smallestPassingC))
            report.smallestPassingC = cGrid[i];
        if (report.family.empty()) report.family = order.family;
        report.rows.push_back(std::move(row));
    }
    if (withStrassen && lawX.index.n() == 1) {
        const DiscreteLaw grid =
            transport::discretize_gaussian(GaussianSpec::standard(lawX.index), 41, 6.0);
        report.strassenC =
            transport::strassen_bisect(lawX, grid, 0.05, 2.0 * cGrid.back(), 1e-6);
    }
    return report;
}

}  // namespace subgauss::comparison
