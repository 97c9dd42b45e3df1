#pragma once

// Independent reference implementations for the test suite. Each energy is
// computed straight from its definition: touching cubes are enumerated
// geometrically from interval overlap, towers are integrated cell by cell
// over the finest level, and sums accumulate in long double. No code is
// shared with the library's norm kernels beyond the Pyramid accessors.

#include "whitney/function.hpp"
#include "whitney/measure.hpp"

namespace whitney::oracle {

// total = L^p of finest averages + l^q-aggregated neighbor-difference energy
double besov_total(const Pyramid& pyr, double s, double p, double q);

// total = L^p part + (integral over finest cells of the q-tower)^{1/p}
double triebel_total(const Pyramid& pyr, double s, double p, double q);

// tent-counterpart seminorm on a half-space pyramid (energy only)
double tent_total(const Pyramid& pyr, double s, double p, double q);

// codimension-n seminorm on a full ambient pyramid (energy only)
double codim_total(const Pyramid& pyr, int codim, double s, double p, double q);

// graded midpoint Riemann integral of min(1,|t|)^alpha over (a,b); pieces
// touching the weight's kinks are split off, singular ends get geometric
// shells so the midpoint error stays O(cells^-2) per shell
double riemann_line_weight(double a, double b, double alpha, int cells = 512);

// codim-1 box mass: product of horizontal side lengths times the line weight
double riemann_box_mass_codim1(const WeightedMeasure& m,
                               const std::array<double, 2 * max_dim>& lohi);

}  // namespace whitney::oracle
