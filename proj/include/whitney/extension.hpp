#pragma once

// Whitney-style extension of boundary data into the upper half-space
// (codim 1) or the complement of a lower-dimensional plane (codim n).
//
// The cover family consists of one bump per Whitney/annulus cube: the bump
// is 1 on the closed cube, decays through a quintic ramp inside a margin of
// l/8 per side, and vanishes outside the 5/4-inflated box. Because the
// plateaus tile the region, the raw sum is >= 1 everywhere away from the
// boundary; a ceiling bump takes over smoothly above the outermost shell so
// the Shepard quotient stays smooth where the field decays to zero.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "whitney/dyadic.hpp"
#include "whitney/function.hpp"
#include "whitney/measure.hpp"

namespace whitney {

struct AmbientField {
    virtual ~AmbientField() = default;
    virtual int dim() const = 0;
    virtual double value(const std::array<double, max_dim>& x) const = 0;
    virtual std::array<double, max_dim> gradient(const std::array<double, max_dim>& x) const = 0;
    virtual double value_and_gradient(const std::array<double, max_dim>& x,
                                      std::array<double, max_dim>& grad) const {
        grad = gradient(x);
        return value(x);
    }
};

struct AnalyticField : AmbientField {
    int ambient_dim = 1;
    std::function<double(const std::array<double, max_dim>&)> v;
    std::function<std::array<double, max_dim>(const std::array<double, max_dim>&)> g;

    int dim() const override { return ambient_dim; }
    double value(const std::array<double, max_dim>& x) const override { return v(x); }
    std::array<double, max_dim> gradient(const std::array<double, max_dim>& x) const override {
        return g(x);
    }
};

// quintic smoothstep: 0 below 0, 1 above 1, C^2 at both ends, and
// ramp(v) + ramp(1-v) = 1
double smooth_ramp(double v);
double smooth_ramp_deriv(double v);

// bump of the cover cube c: 1 on the closed cube, 0 outside the 5/4-inflate;
// optional gradient output
double cover_bump(const DyadicCube& c, const std::array<double, max_dim>& x,
                  std::array<double, max_dim>* grad = nullptr);

// cover cubes whose bump can be nonzero at x (codim-1: Whitney boxes over
// boundary cubes; codim-n: annulus cubes). d = boundary dim, n = codim.
std::vector<DyadicCube> cover_cubes_at(int d, int n, const std::array<double, max_dim>& x);

// Shepard denominator: sum of cover bumps plus the ceiling bump
double shepard_denominator(int d, int n, const std::array<double, max_dim>& x,
                           std::array<double, max_dim>* grad = nullptr);

struct BumpPartition {
    int boundary_dim = 1;
    int codim = 1;
    int max_level = 0;
    double min_shepard = 0.0;        // measured min of the denominator
    double max_scaled_gradient = 0.0;  // measured sup over cubes of l_Q * |grad psi_Q|
};

// samples the cover over a deterministic grid and records the partition
// constants; throws if the denominator ever drops below 1 - 1e-12
BumpPartition build_partition(int d, int n, int K);

class ExtensionField : public AmbientField {
  public:
    ExtensionField(std::shared_ptr<const Pyramid> boundary_avgs, int codim);

    int dim() const override { return d_ + n_; }
    int boundary_dim() const { return d_; }
    int codim() const { return n_; }
    int top_level() const { return K_; }
    const Pyramid& boundary() const { return *boundary_; }

    double value(const std::array<double, max_dim>& x) const override;
    std::array<double, max_dim> gradient(const std::array<double, max_dim>& x) const override;

    // single pass computing both
    double value_and_gradient(const std::array<double, max_dim>& x,
                              std::array<double, max_dim>& grad) const override;

  private:
    double eval(const std::array<double, max_dim>& x, bool need_grad,
                std::array<double, max_dim>* grad) const;

    std::shared_ptr<const Pyramid> boundary_;
    int d_;
    int n_;
    int K_;
};

// builds the Lebesgue-average pyramid of f and wraps it in a field
ExtensionField extend(const BoundaryFunction& f, int codim = 1);

// Measure-weighted average pyramid of the extension over the half-space
// (codim 1 only): horizontal footprint = support of the field, heights
// (0, 17/8] at the resolution of the boundary data. Finest entries sample
// the field at cell centers; the pyramid is the level-K step proxy the
// dyadic norms consume.
Pyramid extension_pyramid(const ExtensionField& g, const WeightedMeasure& mu);

// Same for codim n >= 2: normal axes cover (-17/8, 17/8]^n around the plane.
Pyramid extension_pyramid_codim(const ExtensionField& g, const WeightedMeasure& mu);

}  // namespace whitney
