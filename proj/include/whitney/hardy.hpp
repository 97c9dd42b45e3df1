#pragma once

// Localized Hardy-space machinery on the weighted half-space: a C^2 radial
// mollifier with unit mass, the radial maximal function g+ = sup_t |g*Phi_t|
// over dyadic scales, weighted h^1 / h^{1,1} norms of ambient fields, and a
// finite-dictionary lower bound for the grand maximal function.
//
// Scales are capped by min(height, 1), so every convolution stays inside the
// half-space; the support radius 1/8 keeps the smoothing ball well inside
// the Whitney box of comparable height.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "whitney/dyadic.hpp"
#include "whitney/extension.hpp"
#include "whitney/measure.hpp"

namespace whitney {

// Radial bump c * p(8|x|) on R^D with p a quintic-smoothstep ramp: plateau
// for |x| <= 1/16, C^2 decay to 0 at |x| = 1/8. The normalization integral
// is piecewise polynomial, so the unit mass is exact to rounding.
class Mollifier {
  public:
    explicit Mollifier(int ambient_dim);

    int dim() const { return dim_; }
    static constexpr double support_radius = 0.125;

    double value(const std::array<double, max_dim>& x) const;
    double value_radial(double rho) const;
    // dilation Phi_t = t^{-D} Phi(./t) evaluated at x - y
    double dilated(double t, const std::array<double, max_dim>& x,
                   const std::array<double, max_dim>& y) const;

    double sup_value() const { return scale_; }          // ||Phi||_inf
    double sup_gradient() const { return 30.0 * scale_; }  // ||grad Phi||_inf, exact
    // max_{|beta| <= n} ||d^beta Phi||_inf, the dictionary normalization (n in {0,1})
    double test_norm(int n) const;
    double mass_residual() const { return mass_residual_; }  // independent-rule check

  private:
    int dim_;
    double scale_ = 1.0;
    double mass_residual_ = 0.0;
};

// (g * Phi_t)(x) by tensor Gauss panels on the rescaled support box
// [-1/8,1/8]^D; the discrete mollifier mass is accumulated on the same
// nodes and divided out, so constants convolve to themselves exactly.
double convolve(const AmbientField& g, const Mollifier& phi, double t,
                const std::array<double, max_dim>& x, int panels = 4, int order = 4);

struct MaximalResult {
    double value = 0.0;
    double best_t = 0.0;            // argmax scale, 0 when the grid was empty
    double refinement_delta = 0.0;  // gain from the half-octave refinement
    bool empty_grid = false;        // height below the finest resolved scale
};

// g+(x) over the dyadic grid {2^{-j}} inside (2^{-finest_level}, min(x_D, 1)),
// refined by half-octave neighbors of the argmax; empty grid falls back to
// |g(x)| with a flag.
MaximalResult radial_maximal(const AmbientField& g, const Mollifier& phi,
                             const std::array<double, max_dim>& x, int finest_level,
                             int panels = 4, int order = 4);

struct H1Result {
    double value = 0.0;  // integral of g+ against mu
    double l1 = 0.0;     // plain weighted L^1 of g on the same grid
    double max_refinement_delta = 0.0;
    std::size_t flagged_nodes = 0;  // nodes below the resolved scale
    bool alpha_admissible = true;   // alpha in (-1,0), the h^1 range
};

// ||g+||_{L^1(mu)} over the strip (horizontal box) x (0, top]: Whitney-row
// tensor panels above height 2^{-finest_level}, a geometrically graded
// sliver below it, and the ceiling band up to `top`. `horizontal` packs
// {lo_0, hi_0, ...} for the first boundary_dim(mu) axes.
H1Result h1_norm(const AmbientField& g, const Mollifier& phi, const WeightedMeasure& mu,
                 const std::array<double, 2 * max_dim>& horizontal, int finest_level,
                 double top = 2.25, int panels = 3);

struct H11Result {
    double value = 0.0;  // l1 + sum of the component h^1 norms
    double l1 = 0.0;
    std::vector<double> component_h1;  // one entry per ambient axis
    double max_refinement_delta = 0.0;
    std::size_t flagged_nodes = 0;
    bool alpha_admissible = true;
};

// ||f||_{L^1(mu)} + sum_j ||d_j f||_{h^1(mu)} over the codim-1 strip, all
// components in one sweep (one gradient evaluation serves every axis).
H11Result h11_norm(const AmbientField& f, const Mollifier& phi, const WeightedMeasure& mu,
                   const std::array<double, 2 * max_dim>& horizontal, int finest_level,
                   double top = 2.25, int panels = 3);

// extension fields carry their strip: horizontal hull of the boundary data
// plus the mollifier spread, scale floor at the field's own resolution
H11Result h11_norm(const ExtensionField& f, const Mollifier& phi, const WeightedMeasure& mu,
                   int panels = 3);

// j-th partial derivative of a field as a scalar field; value uses the
// analytic gradient, gradient() falls back to centered differences.
struct PartialDerivativeField : AmbientField {
    const AmbientField* base = nullptr;
    int axis = 0;
    double fd_step = 1e-5;

    PartialDerivativeField() = default;
    PartialDerivativeField(const AmbientField& f, int a) : base(&f), axis(a) {}

    int dim() const override { return base->dim(); }
    double value(const std::array<double, max_dim>& x) const override {
        return base->gradient(x)[static_cast<std::size_t>(axis)];
    }
    std::array<double, max_dim> gradient(const std::array<double, max_dim>& x) const override;
};

// Lower bound for the grand maximal function M*_N h(x): max of |<h, psi>|
// over a finite dictionary of translated/dilated mollifier bumps psi =
// Phi_r(. - y)/test_norm(N) with x in B(y,r), B(y,r) inside the half-space,
// and r dyadic down to 2^{-radius_levels}. Enlarging the dictionary
// (radius_levels) never decreases the value.
double grand_maximal_approx(const AmbientField& h, const Mollifier& phi,
                            const std::array<double, max_dim>& x, int n = 1,
                            int radius_levels = 8, int panels = 3);

// Lebesgue mean and mean oscillation of a field over a box {lo_0, hi_0, ...}
// (two-pass anchored tensor Gauss)
double field_box_mean(const AmbientField& g, const std::array<double, 2 * max_dim>& lohi,
                      int panels = 3, int order = 4);
double field_oscillation(const AmbientField& g, const std::array<double, 2 * max_dim>& lohi,
                         int panels = 3, int order = 4);

struct PoincareSample {
    int level = 0;
    std::array<std::int64_t, max_dim> cell{};
    double oscillation = 0.0;    // mean |f - mean| over the inflated Whitney box
    double maximal_mean = 0.0;   // mean of sum_j M*_1(d_j f) over the same box
    double ratio = 0.0;          // oscillation / (l(Q) * maximal_mean)
};

// Oscillation-versus-maximal-gradient ratio over the inflated Whitney boxes
// above the boundary hull, levels 0..k_max (codim 1).
std::vector<PoincareSample> poincare_scan(const ExtensionField& f, const Mollifier& phi,
                                          int k_max, int radius_levels = 6);

}  // namespace whitney
