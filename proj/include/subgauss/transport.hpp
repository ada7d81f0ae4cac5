#pragma once

#include <optional>
#include <vector>

#include "subgauss/common.hpp"
#include "subgauss/core.hpp"

namespace subgauss::transport {

enum class Sense { minimize, maximize };
enum class VectorNorm { euclidean, sup };

double vector_norm(const std::vector<double>& v, VectorNorm norm);

// Optimal coupling of two discrete marginals with its dual certificate.
struct TransportPlan {
    Matrix plan;                  // k x l, nonnegative, marginals match
    double value = 0.0;           // objective at the optimum
    std::vector<double> dualRow;  // length k
    std::vector<double> dualCol;  // length l
    Sense sense = Sense::minimize;
};

// Complementary-slackness certificate check; throws on violation when
// `strict`, else returns the worst violation.
double verify_plan(const TransportPlan& plan, const Matrix& cost,
                   const std::vector<double>& rowMarginal,
                   const std::vector<double>& colMarginal, bool strict = true);

// Transportation simplex: north-west start, Bland entering rule, minimum
// ratio with lexicographic tie-breaking on the leaving cell. Returns an
// optimal basic feasible solution with tree-consistent duals.
TransportPlan solve_transport(const Matrix& cost, const std::vector<double>& rowMarginal,
                              const std::vector<double>& colMarginal, Sense sense);

// Fernique's coupling functional: the largest E[X_Z] over couplings of the
// process law and the index law. Transportation LP with cost(k,t) =
// atoms_k[t], maximized.
TransportPlan fernique_functional(const DiscreteLaw& law, const MeasureOnT& mu);

double wasserstein1(const DiscreteLaw& lawA, const DiscreteLaw& lawB,
                    VectorNorm norm = VectorNorm::euclidean);

// Half the L1 distance between probability vectors.
double total_variation(const MeasureOnT& muA, const MeasureOnT& muB);

// |F(P,mu) - F(P',mu)| <= W1(P, P'), both sides exact LPs.
CheckReport continuity_gap_w1(const DiscreteLaw& lawA, const DiscreteLaw& lawB,
                              const MeasureOnT& mu, VectorNorm norm = VectorNorm::euclidean);

// |F(P,muA) - F(P,muB)| <= r ||muA - muB||_TV + 2 E[||X|| 1{||X||>r}], with
// ||.||_TV the total-variation norm sum_t |muA_t - muB_t| (twice the
// distance total_variation returns). When rGrid is given, also reports the
// best bound over the grid.
CheckReport continuity_gap_tv(const DiscreteLaw& law, const MeasureOnT& muA,
                              const MeasureOnT& muB, double r,
                              const std::vector<double>& rGrid = {},
                              VectorNorm norm = VectorNorm::euclidean);

struct FeasibilityResult {
    bool feasible = false;
    double gap = 0.0;           // minimized total constraint violation (phase-1 objective)
    double residualInf = 0.0;   // max constraint residual of the witness
    std::optional<Matrix> witness;  // p x q coupling when feasible
};

// Residual check for a candidate Strassen coupling; returns (L1, Linf).
std::pair<double, double> strassen_residuals(const Matrix& pi, const DiscreteLaw& lawX,
                                             const DiscreteLaw& gaussGrid, double c);

// Feasibility of the martingale coupling X = c E[G|X] on a discretized
// Gaussian grid: nonnegative pi with marginals p, q and barycenter rows
// sum_g pi(x,g) g = (x/c) p(x). Decided by a phase-1 LP minimizing the total
// constraint violation; feasible iff that minimum is <= tol.
FeasibilityResult strassen_feasibility(const DiscreteLaw& lawX, const DiscreteLaw& gaussGrid,
                                       double c, double tol = 1e-6);

// Smallest feasible c found by bisection on [cLo, cHi]; NaN when even cHi
// is infeasible.
double strassen_bisect(const DiscreteLaw& lawX, const DiscreteLaw& gaussGrid, double cLo,
                       double cHi, double tol = 1e-6, int iters = 40);

// Tensor-product discretization of N(mean, Sigma): odd pointsPerAxis,
// symmetric about 0, clipped at |g| <= clip on each axis, density weights
// renormalized. Symmetry keeps the grid mean at exactly `mean`.
DiscreteLaw discretize_gaussian(const GaussianSpec& spec, std::size_t pointsPerAxis = 41,
                                double clip = 6.0);

}  // namespace subgauss::transport
