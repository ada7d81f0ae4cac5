#include "subgauss/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace subgauss::transport {

double vector_norm(const std::vector<double>& v, VectorNorm norm) {
    if (norm == VectorNorm::sup) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

namespace {

constexpr double kMarginalTol = 1e-12;

void validate_marginals(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw DegenerateInput("solve_transport: empty marginal");
    double sa = 0.0, sb = 0.0;
    for (double x : a) {
        if (x < 0.0) throw MarginalMismatch("solve_transport: negative marginal entry");
        sa += x;
    }
    for (double x : b) {
        if (x < 0.0) throw MarginalMismatch("solve_transport: negative marginal entry");
        sb += x;
    }
    if (std::abs(sa - 1.0) > kMarginalTol || std::abs(sb - 1.0) > kMarginalTol) {
        std::ostringstream os;
        os << "solve_transport: marginals sum to " << sa << " and " << sb;
        throw MarginalMismatch(os.str());
    }
}

// Transportation simplex state over the bipartite graph K_{k,l}. The basis
// is a spanning tree with k+l-1 cells; Bland's entering rule plus a
// lexicographic leaving tie-break prevents cycling on degenerate bases.
class TransportSimplex {
public:
    TransportSimplex(const Matrix& cost, std::vector<double> a, std::vector<double> b)
        : cost_(cost), a_(std::move(a)), b_(std::move(b)),
          k_(a_.size()), l_(b_.size()),
          basic_(k_ * l_, 0), flow_(k_ * l_, 0.0) {
        // balance exactly so the north-west pass exhausts both sides
        double sa = 0.0, sb = 0.0;
        for (double x : a_) sa += x;
        for (double x : b_) sb += x;
        b_.back() += sa - sb;
        northWestStart();
        const double scale = std::max(1.0, cost_.maxAbs());
        enterTol_ = 1e-11 * scale;
    }

    void run() {
        std::vector<double> u(k_), v(l_);
        const std::size_t maxIters = 2000 * (k_ + l_) * (k_ + l_) + 10000;
        for (std::size_t iter = 0; iter < maxIters; ++iter) {
            computeDuals(u, v);
            std::size_t enter = k_ * l_;
            for (std::size_t cell = 0; cell < k_ * l_; ++cell) {
                if (basic_[cell]) continue;
                const std::size_t i = cell / l_, j = cell % l_;
                if (cost_(i, j) - u[i] - v[j] < -enterTol_) {
                    enter = cell;  // Bland: first improving cell in row-major order
                    break;
                }
            }
            if (enter == k_ * l_) return;  // optimal
            pivot(enter);
        }
        throw Error("solve_transport: iteration limit exceeded");
    }

    TransportPlan extract(Sense sense, const Matrix& originalCost, bool negated) const {
        TransportPlan out;
        out.sense = sense;
        out.plan = Matrix(k_, l_);
        double value = 0.0;
        for (std::size_t i = 0; i < k_; ++i)
            for (std::size_t j = 0; j < l_; ++j) {
                const double x = basic_[i * l_ + j] ? std::max(0.0, flow_[i * l_ + j]) : 0.0;
                out.plan(i, j) = x;
                value += x * originalCost(i, j);
            }
        out.value = value;
        std::vector<double> u(k_), v(l_);
        computeDuals(u, v);
        const double sign = negated ? -1.0 : 1.0;
        out.dualRow.resize(k_);
        out.dualCol.resize(l_);
        for (std::size_t i = 0; i < k_; ++i) out.dualRow[i] = sign * u[i];
        for (std::size_t j = 0; j < l_; ++j) out.dualCol[j] = sign * v[j];
        return out;
    }

private:
    void northWestStart() {
        std::vector<double> ra = a_, rb = b_;
        std::size_t i = 0, j = 0;
        while (true) {
            const double x = std::min(ra[i], rb[j]);
            basic_[i * l_ + j] = 1;
            flow_[i * l_ + j] = x;
            ra[i] -= x;
            rb[j] -= x;
            if (i + 1 == k_ && j + 1 == l_) break;
            // advance one side only; ties leave a degenerate zero cell behind
            if (i + 1 == k_) ++j;
            else if (j + 1 == l_) ++i;
            else if (ra[i] <= rb[j]) ++i;
            else ++j;
        }
    }

    // Tree-consistent duals: u[0] = 0, u[i] + v[j] = cost(i,j) on basic cells.
    void computeDuals(std::vector<double>& u, std::vector<double>& v) const {
        std::vector<char> haveU(k_, 0), haveV(l_, 0);
        std::vector<std::vector<std::size_t>> rowCells(k_), colCells(l_);
        for (std::size_t cell = 0; cell < k_ * l_; ++cell)
            if (basic_[cell]) {
                rowCells[cell / l_].push_back(cell);
                colCells[cell % l_].push_back(cell);
            }
        std::queue<std::size_t> q;  // node ids: rows then cols offset by k_
        u[0] = 0.0;
        haveU[0] = 1;
        q.push(0);
        while (!q.empty()) {
            const std::size_t node = q.front();
            q.pop();
            if (node < k_) {
                for (std::size_t cell : rowCells[node]) {
                    const std::size_t j = cell % l_;
                    if (!haveV[j]) {
                        v[j] = cost_(node, j) - u[node];
                        haveV[j] = 1;
                        q.push(k_ + j);
                    }
                }
            } else {
                const std::size_t j = node - k_;
                for (std::size_t cell : colCells[j]) {
                    const std::size_t i = cell / l_;
                    if (!haveU[i]) {
                        u[i] = cost_(i, j) - v[j];
                        haveU[i] = 1;
                        q.push(i);
                    }
                }
            }
        }
        for (std::size_t i = 0; i < k_; ++i)
            if (!haveU[i]) throw Error("solve_transport: basis not spanning");
        for (std::size_t j = 0; j < l_; ++j)
            if (!haveV[j]) throw Error("solve_transport: basis not spanning");
    }

    // Unique cycle created by the entering cell; alternate +/- along it,
    // shift by the minimum flow on the minus cells.
    void pivot(std::size_t enter) {
        const std::size_t ei = enter / l_, ej = enter % l_;
        // path from row node ei to col node k_+ej through the basis tree
        const std::size_t nodes = k_ + l_;
        std::vector<std::size_t> parentNode(nodes, nodes), parentCell(nodes, k_ * l_);
        std::vector<char> seen(nodes, 0);
        std::vector<std::vector<std::size_t>> rowCells(k_), colCells(l_);
        for (std::size_t cell = 0; cell < k_ * l_; ++cell)
            if (basic_[cell]) {
                rowCells[cell / l_].push_back(cell);
                colCells[cell % l_].push_back(cell);
            }
        std::queue<std::size_t> q;
        seen[ei] = 1;
        q.push(ei);
        while (!q.empty() && !seen[k_ + ej]) {
            const std::size_t node = q.front();
            q.pop();
            const auto& cells = node < k_ ? rowCells[node] : colCells[node - k_];
            for (std::size_t cell : cells) {
                const std::size_t other = node < k_ ? k_ + cell % l_ : cell / l_;
                if (!seen[other]) {
                    seen[other] = 1;
                    parentNode[other] = node;
                    parentCell[other] = cell;
                    q.push(other);
                }
            }
        }
        if (!seen[k_ + ej]) throw Error("solve_transport: disconnected basis");

        // cells on the cycle, alternating sign starting with + at the entry
        std::vector<std::size_t> cycle{enter};
        for (std::size_t node = k_ + ej; node != ei; node = parentNode[node])
            cycle.push_back(parentCell[node]);

        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = k_ * l_;
        for (std::size_t pos = 1; pos < cycle.size(); pos += 2) {
            const double f = flow_[cycle[pos]];
            if (f < theta - 1e-15 || (std::abs(f - theta) <= 1e-15 && cycle[pos] < leave))
                theta = f, leave = cycle[pos];
        }
        if (leave == k_ * l_) throw Error("solve_transport: unbounded pivot");
        for (std::size_t pos = 0; pos < cycle.size(); ++pos) {
            if (pos % 2 == 0) flow_[cycle[pos]] += theta;
            else flow_[cycle[pos]] -= theta;
        }
        basic_[enter] = 1;
        basic_[leave] = 0;
        flow_[leave] = 0.0;
    }

    Matrix cost_;
    std::vector<double> a_, b_;
    std::size_t k_, l_;
    std::vector<char> basic_;
    std::vector<double> flow_;
    double enterTol_ = 1e-11;
};

}  // namespace

double verify_plan(const TransportPlan& plan, const Matrix& cost,
                   const std::vector<double>& rowMarginal,
                   const std::vector<double>& colMarginal, bool strict) {
    const std::size_t k = plan.plan.rows(), l = plan.plan.cols();
    double marginalViolation = 0.0;  // tolerance 1e-10
    double dualViolation = 0.0;      // tolerance 1e-9
    double value = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < l; ++j) {
            const double x = plan.plan(i, j);
            marginalViolation = std::max(marginalViolation, -x);
            rs += x;
            value += x * cost(i, j);
        }
        marginalViolation = std::max(marginalViolation, std::abs(rs - rowMarginal[i]));
    }
    for (std::size_t j = 0; j < l; ++j) {
        double cs = 0.0;
        for (std::size_t i = 0; i < k; ++i) cs += plan.plan(i, j);
        marginalViolation = std::max(marginalViolation, std::abs(cs - colMarginal[j]));
    }
    dualViolation = std::abs(value - plan.value);
    const double sign = plan.sense == Sense::maximize ? 1.0 : -1.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < l; ++j) {
            // maximize: u_i + v_j >= c_ij everywhere, equality on support
            const double margin = sign * (plan.dualRow[i] + plan.dualCol[j] - cost(i, j));
            dualViolation = std::max(dualViolation, -margin);
            if (plan.plan(i, j) > 1e-12) dualViolation = std::max(dualViolation, std::abs(margin));
        }
    if (strict && (marginalViolation > 1e-10 || dualViolation > 1e-9)) {
        std::ostringstream os;
        os << "transport plan failed its certificate: marginal violation "
           << marginalViolation << ", dual violation " << dualViolation;
        throw Error(os.str());
    }
    return std::max(marginalViolation, dualViolation);
}

TransportPlan solve_transport(const Matrix& cost, const std::vector<double>& rowMarginal,
                              const std::vector<double>& colMarginal, Sense sense) {
    validate_marginals(rowMarginal, colMarginal);
    if (cost.rows() != rowMarginal.size() || cost.cols() != colMarginal.size())
        throw InvalidArgument("solve_transport: cost shape mismatch");
    for (double c : cost.data())
        if (!std::isfinite(c)) throw InvalidArgument("solve_transport: non-finite cost");

    const bool negate = sense == Sense::maximize;
    Matrix work = cost;
    if (negate)
        for (double& c : work.data()) c = -c;

    TransportSimplex simplex(work, rowMarginal, colMarginal);
    simplex.run();
    TransportPlan plan = simplex.extract(sense, cost, negate);
    verify_plan(plan, cost, rowMarginal, colMarginal, true);
    return plan;
}

TransportPlan fernique_functional(const DiscreteLaw& law, const MeasureOnT& mu) {
    require_same_index(law.index, mu.index, "fernique_functional");
    const std::size_t k = law.size(), n = law.index.n();
    Matrix cost(k, n);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t t = 0; t < n; ++t) cost(a, t) = law.atoms[a][t];
    return solve_transport(cost, law.weights, mu.probs, Sense::maximize);
}

double wasserstein1(const DiscreteLaw& lawA, const DiscreteLaw& lawB, VectorNorm norm) {
    require_same_index(lawA.index, lawB.index, "wasserstein1");
    const std::size_t k = lawA.size(), l = lawB.size(), n = lawA.index.n();
    Matrix cost(k, l);
    std::vector<double> diff(n);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < l; ++b) {
            for (std::size_t t = 0; t < n; ++t) diff[t] = lawA.atoms[a][t] - lawB.atoms[b][t];
            cost(a, b) = vector_norm(diff, norm);
        }
    const TransportPlan plan = solve_transport(cost, lawA.weights, lawB.weights,
                                               Sense::minimize);
    return std::max(0.0, plan.value);
}

double total_variation(const MeasureOnT& muA, const MeasureOnT& muB) {
    require_same_index(muA.index, muB.index, "total_variation");
    double s = 0.0;
    for (std::size_t t = 0; t < muA.probs.size(); ++t)
        s += std::abs(muA.probs[t] - muB.probs[t]);
    return 0.5 * s;
}

CheckReport continuity_gap_w1(const DiscreteLaw& lawA, const DiscreteLaw& lawB,
                              const MeasureOnT& mu, VectorNorm norm) {
    const double fa = fernique_functional(lawA, mu).value;
    const double fb = fernique_functional(lawB, mu).value;
    const double lhs = std::abs(fa - fb);
    const double rhs = wasserstein1(lawA, lawB, norm);
    CheckReport report;
    report.worst = lhs - rhs;
    report.pass = report.worst <= 1e-9;
    report.metrics["lhs"] = lhs;
    report.metrics["rhs"] = rhs;
    report.metrics["fernique_a"] = fa;
    report.metrics["fernique_b"] = fb;
    return report;
}

namespace {

double truncation_term(const DiscreteLaw& law, double r, VectorNorm norm) {
    double s = 0.0;
    for (std::size_t k = 0; k < law.size(); ++k) {
        const double nx = vector_norm(law.atoms[k], norm);
        if (nx > r) s += law.weights[k] * nx;
    }
    return 2.0 * s;
}

}  // namespace

CheckReport continuity_gap_tv(const DiscreteLaw& law, const MeasureOnT& muA,
                              const MeasureOnT& muB, double r,
                              const std::vector<double>& rGrid, VectorNorm norm) {
    if (r < 0.0) throw InvalidArgument("continuity_gap_tv: r must be nonnegative");
    const double fa = fernique_functional(law, muA).value;
    const double fb = fernique_functional(law, muB).value;
    const double lhs = std::abs(fa - fb);
    const double tv = total_variation(muA, muB);
    // the bound uses the total-variation norm sum_t |muA_t - muB_t|, which is
    // twice the probability distance (2 tv = 2 inf P[Z != Z'])
    const double tvNorm = 2.0 * tv;
    const double rhs = r * tvNorm + truncation_term(law, r, norm);
    CheckReport report;
    report.worst = lhs - rhs;
    report.pass = report.worst <= 1e-9;
    report.metrics["lhs"] = lhs;
    report.metrics["rhs"] = rhs;
    report.metrics["tv"] = tv;
    report.metrics["r"] = r;
    if (!rGrid.empty()) {
        double bestR = r, bestRhs = rhs;
        for (double rg : rGrid) {
            if (rg < 0.0) continue;
            const double cand = rg * tvNorm + truncation_term(law, rg, norm);
            if (cand < bestRhs) {
                bestRhs = cand;
                bestR = rg;
            }
        }
        report.metrics["best_r"] = bestR;
        report.metrics["best_rhs"] = bestRhs;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Strassen coupling feasibility: phase-1 dense simplex.
//
// Constraint rows: p row-marginal rows, q column-marginal rows, p*n
// barycenter rows. Variables: p*q couplings plus paired violation slacks.
// ---------------------------------------------------------------------------

namespace {

struct Phase1Result {
    double objective = 0.0;
    std::vector<double> pi;  // p*q, row-major
};

// min sum(s+ + s-) s.t. A pi + s+ - s- = b, pi,s >= 0. Dense tableau with
// Bland's rule; rows are flipped so b >= 0 and the s+ block is the start
// basis.
Phase1Result phase1_simplex(const std::vector<std::vector<double>>& A,
                            std::vector<double> b, std::size_t nPi) {
    const std::size_t R = A.size();
    const std::size_t N = nPi + 2 * R;
    std::vector<std::vector<double>> T(R, std::vector<double>(N + 1, 0.0));
    std::vector<std::size_t> basis(R);
    for (std::size_t r = 0; r < R; ++r) {
        const double flip = b[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < nPi; ++c) T[r][c] = flip * A[r][c];
        T[r][nPi + r] = flip;           // s+ column
        T[r][nPi + R + r] = -flip;      // s- column
        T[r][N] = flip * b[r];
        // whichever slack has the +1 coefficient in the flipped row starts basic
        basis[r] = b[r] < 0.0 ? nPi + R + r : nPi + r;
    }

    // reduced-cost row for objective = sum of all slack variables
    std::vector<double> z(N + 1, 0.0);
    for (std::size_t c = nPi; c < N; ++c) z[c] = 1.0;
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c <= N; ++c) z[c] -= T[r][c];  // cB = 1 on start basis

    const std::size_t maxIters = 200000;
    for (std::size_t iter = 0; iter < maxIters; ++iter) {
        std::size_t enter = N;
        for (std::size_t c = 0; c < N; ++c)
            if (z[c] < -1e-11) {
                enter = c;  // Bland
                break;
            }
        if (enter == N) break;
        std::size_t leaveRow = R;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < R; ++r) {
            if (T[r][enter] > 1e-11) {
                const double ratio = T[r][N] / T[r][enter];
                if (ratio < best - 1e-15 ||
                    (ratio < best + 1e-15 && (leaveRow == R || basis[r] < basis[leaveRow]))) {
                    best = ratio;
                    leaveRow = r;
                }
            }
        }
        if (leaveRow == R) throw Error("strassen_feasibility: phase-1 LP unbounded");
        const double pivot = T[leaveRow][enter];
        for (std::size_t c = 0; c <= N; ++c) T[leaveRow][c] /= pivot;
        for (std::size_t r = 0; r < R; ++r) {
            if (r == leaveRow) continue;
            const double f = T[r][enter];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= N; ++c) T[r][c] -= f * T[leaveRow][c];
        }
        const double fz = z[enter];
        if (fz != 0.0)
            for (std::size_t c = 0; c <= N; ++c) z[c] -= fz * T[leaveRow][c];
        basis[leaveRow] = enter;
        if (iter + 1 == maxIters) throw Error("strassen_feasibility: iteration limit");
    }

    Phase1Result out;
    out.pi.assign(nPi, 0.0);
    double obj = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        const double x = std::max(0.0, T[r][N]);
        if (basis[r] < nPi) out.pi[basis[r]] = x;
        else obj += x;
    }
    out.objective = obj;
    return out;
}

}  // namespace

std::pair<double, double> strassen_residuals(const Matrix& pi, const DiscreteLaw& lawX,
                                             const DiscreteLaw& gaussGrid, double c) {
    const std::size_t p = lawX.size(), q = gaussGrid.size(), n = lawX.index.n();
    double l1 = 0.0, linf = 0.0;
    auto add = [&](double resid) {
        l1 += std::abs(resid);
        linf = std::max(linf, std::abs(resid));
    };
    for (std::size_t x = 0; x < p; ++x) {
        double rs = 0.0;
        for (std::size_t g = 0; g < q; ++g) rs += pi(x, g);
        add(rs - lawX.weights[x]);
    }
    for (std::size_t g = 0; g < q; ++g) {
        double cs = 0.0;
        for (std::size_t x = 0; x < p; ++x) cs += pi(x, g);
        add(cs - gaussGrid.weights[g]);
    }
    for (std::size_t x = 0; x < p; ++x)
        for (std::size_t t = 0; t < n; ++t) {
            double bary = 0.0;
            for (std::size_t g = 0; g < q; ++g) bary += pi(x, g) * gaussGrid.atoms[g][t];
            add(bary - lawX.atoms[x][t] / c * lawX.weights[x]);
        }
    return {l1, linf};
}

FeasibilityResult strassen_feasibility(const DiscreteLaw& lawX, const DiscreteLaw& gaussGrid,
                                       double c, double tol) {
    require_same_index(lawX.index, gaussGrid.index, "strassen_feasibility");
    if (c <= 0.0) throw NonpositiveC("strassen_feasibility: c must be positive");
    const std::size_t p = lawX.size(), q = gaussGrid.size(), n = lawX.index.n();
    const std::size_t nPi = p * q;
    const std::size_t R = p + q + p * n;
    std::vector<std::vector<double>> A(R, std::vector<double>(nPi, 0.0));
    std::vector<double> b(R, 0.0);
    std::size_t row = 0;
    for (std::size_t x = 0; x < p; ++x, ++row) {
        for (std::size_t g = 0; g < q; ++g) A[row][x * q + g] = 1.0;
        b[row] = lawX.weights[x];
    }
    for (std::size_t g = 0; g < q; ++g, ++row) {
        for (std::size_t x = 0; x < p; ++x) A[row][x * q + g] = 1.0;
        b[row] = gaussGrid.weights[g];
    }
    for (std::size_t x = 0; x < p; ++x)
        for (std::size_t t = 0; t < n; ++t, ++row) {
            for (std::size_t g = 0; g < q; ++g) A[row][x * q + g] = gaussGrid.atoms[g][t];
            b[row] = lawX.atoms[x][t] / c * lawX.weights[x];
        }

    const Phase1Result sol = phase1_simplex(A, b, nPi);
    FeasibilityResult out;
    out.gap = sol.objective;
    out.feasible = out.gap <= tol;
    Matrix witness(p, q);
    for (std::size_t x = 0; x < p; ++x)
        for (std::size_t g = 0; g < q; ++g) witness(x, g) = sol.pi[x * q + g];
    out.residualInf = strassen_residuals(witness, lawX, gaussGrid, c).second;
    if (out.feasible) out.witness = std::move(witness);
    return out;
}

double strassen_bisect(const DiscreteLaw& lawX, const DiscreteLaw& gaussGrid, double cLo,
                       double cHi, double tol, int iters) {
    if (cLo <= 0.0 || cHi <= cLo) throw InvalidArgument("strassen_bisect: need 0 < cLo < cHi");
    if (!strassen_feasibility(lawX, gaussGrid, cHi, tol).feasible)
        return std::numeric_limits<double>::quiet_NaN();
    if (strassen_feasibility(lawX, gaussGrid, cLo, tol).feasible) return cLo;
    double lo = cLo, hi = cHi;
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (strassen_feasibility(lawX, gaussGrid, mid, tol).feasible) hi = mid;
        else lo = mid;
    }
    return hi;
}

DiscreteLaw discretize_gaussian(const GaussianSpec& spec, std::size_t pointsPerAxis,
                                double clip) {
    if (pointsPerAxis < 3 || pointsPerAxis % 2 == 0)
        throw InvalidArgument("discretize_gaussian: pointsPerAxis must be odd and >= 3");
    if (clip <= 0.0) throw InvalidArgument("discretize_gaussian: clip must be positive");
    const std::size_t n = spec.n();
    double total = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        total *= static_cast<double>(pointsPerAxis);
        if (total > 2e5) throw ClassTooLarge("discretize_gaussian: grid too large");
    }
    // nodes built mirror-symmetric so weights cancel in exact pairs
    const std::size_t P = pointsPerAxis;
    std::vector<double> nodes(P, 0.0), w1(P);
    const double step = 2.0 * clip / static_cast<double>(P - 1);
    for (std::size_t i = 0; i < P / 2; ++i) {
        const double a = clip - static_cast<double>(i) * step;
        nodes[i] = -a;
        nodes[P - 1 - i] = a;
    }
    double wSum = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
        w1[i] = normal_pdf(nodes[i]);
        wSum += w1[i];
    }
    for (double& w : w1) w /= wSum;

    const bool isStandard = [&] {
        if (!spec.isCentered()) return false;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (spec.covariance(i, j) != (i == j ? 1.0 : 0.0)) return false;
        return true;
    }();
    Matrix root;
    if (!isStandard) root = psd_sqrt(spec.covariance);

    const std::size_t count = static_cast<std::size_t>(total + 0.5);
    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;
    atoms.reserve(count);
    weights.reserve(count);
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        std::vector<double> g(n);
        double w = 1.0;
        for (std::size_t t = 0; t < n; ++t) {
            g[t] = nodes[idx[t]];
            w *= w1[idx[t]];
        }
        if (isStandard) {
            atoms.push_back(std::move(g));
        } else {
            std::vector<double> x(n);
            for (std::size_t t = 0; t < n; ++t) {
                double v = spec.mean[t];
                for (std::size_t s = 0; s < n; ++s) v += root(t, s) * g[s];
                x[t] = v;
            }
            atoms.push_back(std::move(x));
        }
        weights.push_back(w);
        std::size_t d = 0;
        while (d < n && ++idx[d] == P) idx[d++] = 0;
        if (d == n) break;
    }
    return DiscreteLaw(spec.index, std::move(atoms), std::move(weights));
}

}  // namespace subgauss::transport
