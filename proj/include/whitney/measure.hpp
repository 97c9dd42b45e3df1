#pragma once

// Boundary-distance weighted measures d(mu) = min(1, dist(x, R^d))^alpha dx
// on the ambient space R^{d+n}. The distance is taken to the d-dimensional
// coordinate plane spanned by the first d axes, i.e. the euclidean norm of
// the last n ("normal") coordinates. n = 0 degenerates to Lebesgue.
//
// Codimension 1 is closed-form: the normal coordinate integral of
// min(1,|t|)^alpha splits at the kink |t| = 1. Codimension >= 2 uses
// graded quadrature on sup-norm shells toward the singular set.

#include <array>
#include <stdexcept>

#include "whitney/dyadic.hpp"

namespace whitney {

struct WeightedMeasure {
    int ambient_dim = 1;
    int normal_dims = 0;  // codimension n; 0 = Lebesgue
    double alpha = 0.0;   // requires alpha > -n when n >= 1

    WeightedMeasure() = default;
    WeightedMeasure(int ambient, int normal, double a)
        : ambient_dim(ambient), normal_dims(normal), alpha(a) {
        if (ambient < 1 || ambient > max_dim || normal < 0 || normal > ambient)
            throw std::domain_error("WeightedMeasure: bad dimensions");
        if (normal >= 1 && !(a > -normal))
            throw std::domain_error("WeightedMeasure: alpha must exceed -codim for integrability");
    }

    bool is_lebesgue() const { return normal_dims == 0 || alpha == 0.0; }
    int boundary_dim() const { return ambient_dim - normal_dims; }
};

inline WeightedMeasure lebesgue(int dim) { return WeightedMeasure(dim, 0, 0.0); }

double weight_at(const WeightedMeasure& m, const std::array<double, max_dim>& x);

// integral of min(1,|t|)^alpha over (a,b], closed form, any signed interval
double weight_line_integral(double a, double b, double alpha);

// integral of min(1,|z|)^alpha over a box in R^n (n = normal_dims >= 2)
double normal_box_integral(const std::array<double, 2 * max_dim>& lohi, int n, double alpha,
                           double rel_tol = 1e-10);

double box_measure(const WeightedMeasure& m, const Box& b);
// bounds as {lo_0, hi_0, lo_1, hi_1, ...}
double box_measure(const WeightedMeasure& m, const std::array<double, 2 * max_dim>& lohi);

inline double cube_measure(const WeightedMeasure& m, const DyadicCube& q) {
    return box_measure(m, q.box());
}

// mu(B(x0, r) cap domain) / r^{ambient_dim + alpha} for a boundary point x0
// (the ratio is translation invariant, so x0 is not a parameter). For
// codimension 1 the domain is the upper half-space; otherwise all of R^D.
double boundary_ball_ratio(const WeightedMeasure& m, double r);

double boundary_ball_measure(const WeightedMeasure& m, double r);

}  // namespace whitney
