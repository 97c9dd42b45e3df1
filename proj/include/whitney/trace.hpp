#pragma once

// Boundary traces of ambient data: level-k step functions of tent averages
// (measure-weighted, from a pyramid) and of inflated-Whitney-box averages
// (Lebesgue, from any ambient field), the f* ladder diagnostics certifying
// that the averages settle, a shrinking half-ball probe of the
// Lebesgue-point form, and the constructive sampling-lemma subcube search.

#include <array>
#include <cstdint>
#include <vector>

#include "whitney/extension.hpp"
#include "whitney/function.hpp"

namespace whitney {

// T_k: mass-weighted average of the ambient pyramid over each tent
// Q x (0, l]^n, returned as the level-k boundary step over the pyramid's
// horizontal hull. Anchored summation: columns of constant data reproduce
// the constant bitwise.
BoundaryFunction tent_trace(const Pyramid& amb, int k);

// curly T_k: Lebesgue average of g over the 5/4-inflated Whitney box of
// each boundary cube, by Gauss panels aligned to the l/16 lattice of the
// shell containing each normal-segment combo. subdiv = panels per shell
// side length (16 keeps every blend breakpoint on a panel edge; smaller
// values ride on the C^2 smoothness of the integrand). footprint [lo,lo+n)
// is in level-k boundary indices.
BoundaryFunction whitney_trace(const AmbientField& g, int d, int codim, int k,
                               const std::array<std::int64_t, max_dim>& lo,
                               const std::array<std::int64_t, max_dim>& n, int subdiv = 16);
// footprint = the field's boundary hull at level k widened by 3 cells
BoundaryFunction whitney_trace(const ExtensionField& g, int k, int subdiv = 16);

// center-sample pyramid of an arbitrary ambient field over the ambient
// hull spanned by the level-K boundary block [lo, lo+n): horizontal march
// of the data plus a 2^K/8 margin, heights (0, 17/8] (codim 1) or normal
// axes (-17/8, 17/8]^n (codim >= 2). For g an extension field this is
// extension_pyramid; the overload exists for perturbed fields.
Pyramid sampled_pyramid(const AmbientField& g, const WeightedMeasure& mu, int boundary_dim,
                        int codim, int K, const std::array<std::int64_t, max_dim>& lo,
                        const std::array<std::int64_t, max_dim>& n);

struct TraceDiagnostics {
    // increment_lp[0] = ||T_0||_p, increment_lp[k+1] = ||T_{k+1} - T_k||_p
    // (boundary Lebesgue L^p). Convergent traces decay geometrically.
    std::vector<double> increment_lp;
    double fstar_lp = 0.0;  // L^p norm of the pointwise ladder sum f*
    // set when the last two increments both failed to decay by 5%, or the
    // last one grew outright: the averages are not settling
    bool flagged = false;
    // |half-ball average - trace value| at sampled interior boundary
    // points, radius 2^{-K+2} (codim-1 probes only; empty otherwise)
    std::vector<double> spot_residuals;
};

struct TraceResult {
    BoundaryFunction trace;  // the level-K averages
    TraceDiagnostics diag;
};

// tent route: T_K plus diagnostics from the pyramid's own ladder
TraceResult trace(const Pyramid& amb, double p);

// Whitney-box route: curly T_K plus diagnostics; spot_checks > 0 compares
// the trace against shrinking half-ball averages at that many sampled
// cells (codim 1 only)
TraceResult trace(const ExtensionField& g, double p, int subdiv = 16, int spot_checks = 0);

// mu-average of g over B(x0, r) intersected with the domain, x0 on the
// boundary plane: the Lebesgue-point form of the trace. Polar quadrature
// graded toward the weight singularity; self-normalized and anchored so
// constants reproduce bitwise. Codim 1, boundary dim <= 2.
double half_ball_average(const AmbientField& g, const WeightedMeasure& mu,
                         const std::array<double, max_dim>& x0, double r);

// ---- sampling lemma subcube search ---------------------------------------

// mean oscillation of the level-K step under the pyramid's measure over an
// arbitrary box: avg_B |f - f_B| dmu / mu(B). Exact (per-cell clipping).
double mean_oscillation(const Pyramid& f, const std::array<double, 2 * max_dim>& lohi);

struct SamplingResult {
    std::array<double, 2 * max_dim> subcube{};  // edge lambda*l(Q), inside Q
    double osc_q = 0.0;                         // mean oscillation over Q
    double osc_sub = 0.0;                       // over the returned subcube
    double constant = 1.0;                      // osc_q / osc_sub, 1 if osc_q = 0
    int steps = 0;                              // corner iterations taken
    // oscillation drop per corner step; the final cube contains the last
    // iterate, so constant <= prod(step_ratios) <= max(step_ratios)^steps
    std::vector<double> step_ratios;
};

// Corner-cube iteration: k_lambda steps shrinking by 3/4 (corner of
// maximal mean oscillation, lexicographic corner order breaking ties),
// then the enclosing cube of edge lambda*l(Q) clamped inside Q. lambda
// must be a dyadic rational so every corner stays exactly representable.
SamplingResult sampling_subcube(const Pyramid& f, const std::array<double, 2 * max_dim>& q,
                                int dim, double lambda);

}  // namespace whitney
