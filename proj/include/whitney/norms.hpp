#pragma once

// Dyadic-average function space norms. Every functional here consumes a
// Pyramid of measure-weighted cell averages (levels 0..K) and combines
// neighbor differences |f_Q - f_Q'| over cubes whose closures touch and
// whose levels differ by at most one, clipped to [0, K]. The level cap
// mirrors the level-0 floor: both are the finite-resolution truncation of
// the same two-sided family, applied identically to every operand so that
// ratios of norms are comparable across runs at equal K.

#include <vector>

#include "whitney/extension.hpp"
#include "whitney/function.hpp"
#include "whitney/measure.hpp"

namespace whitney {

struct NormReport {
    double lp_part = 0.0;      // plain L^p of the finest averages
    double energy_part = 0.0;  // smoothness energy
    double total = 0.0;        // lp_part + energy_part
    std::vector<double> per_level;  // per-level energy summands (linear scale)
    double tail = 0.0;              // finest-level share of the energy
    double quadrature_delta = 0.0;  // self-refinement delta (quadrature norms)
};

// Besov: e_k = 2^{ks} (sum_Q mu(Q) sum_{Q'~Q} |f_Q - f_Q'|^p)^{1/p},
// energy = l^q over levels. p or q = infinity swap sums for sups.
NormReport besov_norm(const Pyramid& pyr, double s, double p, double q);

// Triebel-Lizorkin: the level sum moves inside the integral; the x-integral
// is exact because the integrand is constant on finest cells. p < infinity.
NormReport triebel_norm(const Pyramid& pyr, double s, double p, double q);

// Tent-counterpart seminorm on a half-space pyramid: differences are taken
// between the tent cube N(P) = P x (0, l] and its half-space neighbors, and
// the tower at x collects the tents containing x. p < infinity.
NormReport tent_seminorm(const Pyramid& half_space_pyr, double s, double p, double q);

// Codimension-n seminorm on a full-space ambient pyramid: oscillation
// tables live on the cubes touching the boundary plane; each is counted
// with multiplicity 2^d (one per boundary cube whose closure meets it).
// p < infinity.
NormReport codim_seminorm(const Pyramid& ambient_pyr, int codim, double s, double p, double q);

// First-order Sobolev norm of a field over the Whitney decomposition:
// tensor Gauss quadrature (subdiv panels per axis per box) over every
// Whitney box of levels 0..K plus the decay region outside the outermost
// shell; heights below 2^{-K} are the reported truncation tail.
// quadrature_delta compares two Gauss orders. subdiv = 0 picks a panel
// count matching the blend breakpoint lattice for the ambient dimension.
NormReport sobolev_norm(const ExtensionField& g, const WeightedMeasure& mu, double p,
                        int subdiv = 0);

// same quadrature core for an arbitrary field over an explicit horizontal
// footprint (level-0 cube index range per horizontal axis)
NormReport sobolev_norm_box(const AmbientField& g, const WeightedMeasure& mu, int codim,
                            double p, int levels,
                            const std::array<std::int64_t, max_dim>& h_lo,
                            const std::array<std::int64_t, max_dim>& h_n, int subdiv = 2);

// Integral-form Besov norm on the line (d = 1): t-modulus
// A(t) = int mu(B(x,t))^{-1} int_{B(x,t)} |f(x)-f(y)| dmu(y)^... dmu(x)
// evaluated exactly per cell pair, aggregated over a geometric t-grid with
// grid_per_octave points per octave between 2^{-K} and 1.
NormReport integral_besov_norm(const BoundaryFunction& f, const WeightedMeasure& mu, double s,
                               double p, double q, int grid_per_octave = 4);

// admissibility of the parameter combinations the trace statements cover
bool sobolev_trace_admissible(double p, double alpha, int codim);
bool besov_trace_admissible(double s, double p, double alpha, int codim);

// smoothness of the boundary image: s - (alpha + n)/p
double trace_smoothness(double s, double p, double alpha, int codim);

}  // namespace whitney
