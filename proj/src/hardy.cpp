#include "whitney/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "whitney/quadrature.hpp"

namespace whitney {

namespace {

// ramp profile of the radial bump: 1 on [0,1/2], quintic decay to 0 at 1
double profile(double u) {
    if (u <= 0.5) return 1.0;
    if (u >= 1.0) return 0.0;
    return smooth_ramp(2.0 - 2.0 * u);
}

double sphere_area(int D) {
    switch (D) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
        case 4: return 2.0 * M_PI * M_PI;
        default: throw std::domain_error("mollifier: unsupported dimension");
    }
}

// integral of profile(u) * u^{D-1} over (0,1); the ramp piece is polynomial
// of degree <= 8, so Gauss-8 on (1/2,1) is exact
double profile_moment(int D, int order) {
    double plateau = std::pow(0.5, D) / D;
    double ramp = integrate([D](double u) { return profile(u) * std::pow(u, D - 1); }, 0.5,
                            1.0, order);
    return plateau + ramp;
}

}  // namespace

Mollifier::Mollifier(int ambient_dim) : dim_(ambient_dim) {
    if (ambient_dim < 1 || ambient_dim > max_dim)
        throw std::domain_error("mollifier: unsupported dimension");
    const double s = support_radius;  // Phi(x) = scale * profile(|x|/s)
    const double mass_unit = sphere_area(dim_) * profile_moment(dim_, 8) * std::pow(s, dim_);
    scale_ = 1.0 / mass_unit;
    // residual against an independent higher-order rule
    const double check = sphere_area(dim_) * profile_moment(dim_, 16) * std::pow(s, dim_);
    mass_residual_ = std::abs(scale_ * check - 1.0);
}

double Mollifier::value_radial(double rho) const {
    return scale_ * profile(rho / support_radius);
}

double Mollifier::value(const std::array<double, max_dim>& x) const {
    double r2 = 0.0;
    for (int a = 0; a < dim_; ++a) r2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    return value_radial(std::sqrt(r2));
}

double Mollifier::dilated(double t, const std::array<double, max_dim>& x,
                          const std::array<double, max_dim>& y) const {
    double r2 = 0.0;
    for (int a = 0; a < dim_; ++a) {
        const double u = (x[static_cast<std::size_t>(a)] - y[static_cast<std::size_t>(a)]) / t;
        r2 += u * u;
    }
    return value_radial(std::sqrt(r2)) / std::pow(t, dim_);
}

double Mollifier::test_norm(int n) const {
    if (n == 0) return sup_value();
    if (n == 1) return sup_gradient();
    throw std::invalid_argument("mollifier: test norms tabulated for n <= 1 only");
}

// ---- convolution core -----------------------------------------------------

namespace {

// tensor Gauss panels on the rescaled support box [-s,s]^D: accumulates
// sum w*Phi(u)*eval_j(x - t*u) for m components together with the discrete
// mollifier mass, and divides it out. eval(z, out) fills m values.
template <class VecEval>
void mollified_average(const Mollifier& phi, double t, const std::array<double, max_dim>& x,
                       int panels, int order, int m, VecEval&& eval, double* out) {
    const int D = phi.dim();
    const GaussRule g = gauss(order);
    const int per_axis = panels * static_cast<int>(g.x.size());
    if (per_axis > 64) throw std::invalid_argument("convolve: panel grid too fine");
    const double s = Mollifier::support_radius;
    const double h = 2.0 * s / panels;

    double un[64], uw[64];
    int idx = 0;
    for (int p = 0; p < panels; ++p) {
        const double mid = -s + (p + 0.5) * h;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            un[idx] = mid + 0.5 * h * g.x[i];
            uw[idx] = 0.5 * h * g.w[i];
            ++idx;
        }
    }

    for (int j = 0; j < m; ++j) out[j] = 0.0;
    double mass = 0.0;
    double vals[8];

    std::array<int, max_dim> it{};
    std::array<double, max_dim> z{};
    z = x;
    while (true) {
        double w = 1.0, r2 = 0.0;
        for (int a = 0; a < D; ++a) {
            const double u = un[it[static_cast<std::size_t>(a)]];
            w *= uw[it[static_cast<std::size_t>(a)]];
            r2 += u * u;
        }
        const double pv = phi.value_radial(std::sqrt(r2));
        if (pv != 0.0) {
            for (int a = 0; a < D; ++a)
                z[static_cast<std::size_t>(a)] =
                    x[static_cast<std::size_t>(a)] - t * un[it[static_cast<std::size_t>(a)]];
            eval(z, vals);
            const double wp = w * pv;
            mass += wp;
            for (int j = 0; j < m; ++j) out[j] += wp * vals[j];
        }
        int a = 0;
        for (; a < D; ++a) {
            if (++it[static_cast<std::size_t>(a)] < per_axis) break;
            it[static_cast<std::size_t>(a)] = 0;
        }
        if (a == D) break;
    }
    for (int j = 0; j < m; ++j) out[j] /= mass;
}

// octave scan of sup_t |conv_j(t)| over the dyadic grid in
// (2^{-finest}, min(x_D,1)), with half-octave refinement of each argmax.
// Returns false when the grid is empty (best untouched).
template <class VecEval>
bool octave_maximal(const Mollifier& phi, const std::array<double, max_dim>& x, int finest,
                    int panels, int order, int m, VecEval&& eval, double* best,
                    double* best_t, double* delta) {
    const int D = phi.dim();
    const double cap = std::min(x[static_cast<std::size_t>(D - 1)], 1.0);
    const double floor_t = std::ldexp(1.0, -finest);
    double conv[8];
    if (!(cap > 0.0)) return false;

    int j = 0;
    while (std::ldexp(1.0, -j) >= cap) ++j;
    bool any = false;
    for (int c = 0; c < m; ++c) {
        best[c] = 0.0;
        best_t[c] = 0.0;
        delta[c] = 0.0;
    }
    for (; std::ldexp(1.0, -j) > floor_t; ++j) {
        const double t = std::ldexp(1.0, -j);
        mollified_average(phi, t, x, panels, order, m, eval, conv);
        for (int c = 0; c < m; ++c) {
            const double v = std::abs(conv[c]);
            if (!any || v > best[c]) {
                best[c] = v;
                best_t[c] = t;
            }
        }
        any = true;
    }
    if (!any) return false;

    double grid_best[8];
    for (int c = 0; c < m; ++c) grid_best[c] = best[c];
    double refts[16];
    int nref = 0;
    const double half = std::sqrt(0.5);
    for (int c = 0; c < m; ++c)
        for (double t : {best_t[c] * half, best_t[c] / half}) {
            if (!(t > floor_t && t < cap)) continue;
            bool seen = false;
            for (int i = 0; i < nref; ++i)
                if (std::abs(refts[i] - t) < 1e-14 * t) seen = true;
            if (!seen && nref < 16) refts[nref++] = t;
        }
    for (int i = 0; i < nref; ++i) {
        mollified_average(phi, refts[i], x, panels, order, m, eval, conv);
        for (int c = 0; c < m; ++c) {
            const double v = std::abs(conv[c]);
            if (v > best[c]) {
                best[c] = v;
                best_t[c] = refts[i];
            }
        }
    }
    for (int c = 0; c < m; ++c) delta[c] = best[c] - grid_best[c];
    return true;
}

}  // namespace

double convolve(const AmbientField& g, const Mollifier& phi, double t,
                const std::array<double, max_dim>& x, int panels, int order) {
    double out = 0.0;
    mollified_average(phi, t, x, panels, order, 1,
                      [&g](const std::array<double, max_dim>& z, double* v) { v[0] = g.value(z); },
                      &out);
    return out;
}

MaximalResult radial_maximal(const AmbientField& g, const Mollifier& phi,
                             const std::array<double, max_dim>& x, int finest_level,
                             int panels, int order) {
    MaximalResult r;
    double best = 0.0, best_t = 0.0, delta = 0.0;
    const bool ok = octave_maximal(
        phi, x, finest_level, panels, order, 1,
        [&g](const std::array<double, max_dim>& z, double* v) { v[0] = g.value(z); }, &best,
        &best_t, &delta);
    if (!ok) {
        r.value = std::abs(g.value(x));
        r.empty_grid = true;
        return r;
    }
    r.value = best;
    r.best_t = best_t;
    r.refinement_delta = delta;
    return r;
}

// ---- weighted strip integration -------------------------------------------

namespace {

struct StripSpec {
    int d = 1;                                // boundary (horizontal) axes
    std::array<double, 2 * max_dim> hor{};    // {lo_0, hi_0, ...}
    int finest = 6;                           // resolution level of the rows
    double top = 2.25;                        // ceiling of the strip
};

// node(x, out[m]) -> true when the node fell back below the resolved scale;
// contributions out[j] * mass accumulate into acc[j]
template <class NodeFn>
void strip_sweep(const StripSpec& sp, const WeightedMeasure& mu, int m, NodeFn&& node,
                 double* acc, std::size_t* flagged_nodes) {
    const int d = sp.d;
    const std::size_t ud = static_cast<std::size_t>(d);
    const GaussRule g2 = gauss(2);
    double out[8];
    std::array<double, max_dim> x{};

    auto account = [&](double mass, bool flagged) {
        if (flagged) ++*flagged_nodes;
        for (int j = 0; j < m; ++j) acc[j] += mass * out[j];
    };

    // Whitney rows (2^{-k}, 2^{-k+1}], k = 0..finest
    for (int k = 0; k <= sp.finest; ++k) {
        const double hlo = std::ldexp(1.0, -k), hhi = std::ldexp(2.0, -k);
        const bool coarse = k <= 3;
        const double w = coarse ? 0.5 * hlo : hlo;
        std::array<int, max_dim> np{};
        int total = 1;
        for (int a = 0; a < d; ++a) {
            const double lo = sp.hor[static_cast<std::size_t>(2 * a)];
            const double hi = sp.hor[static_cast<std::size_t>(2 * a + 1)];
            np[static_cast<std::size_t>(a)] =
                std::max(1, static_cast<int>(std::ceil((hi - lo) / w - 1e-9)));
            total *= np[static_cast<std::size_t>(a)];
        }
        std::array<int, max_dim> it{};
        for (int p = 0; p < total; ++p) {
            std::array<double, 2 * max_dim> panel{};
            for (int a = 0; a < d; ++a) {
                const double lo =
                    sp.hor[static_cast<std::size_t>(2 * a)] + it[static_cast<std::size_t>(a)] * w;
                panel[static_cast<std::size_t>(2 * a)] = lo;
                panel[static_cast<std::size_t>(2 * a + 1)] = lo + w;
            }
            panel[static_cast<std::size_t>(2 * d)] = hlo;
            panel[static_cast<std::size_t>(2 * d + 1)] = hhi;

            if (coarse) {
                // tensor Gauss-2 with pointwise weight
                std::array<int, max_dim> gt{};
                while (true) {
                    double gw = 1.0;
                    for (int a = 0; a <= d; ++a) {
                        const double lo = panel[static_cast<std::size_t>(2 * a)];
                        const double hi = panel[static_cast<std::size_t>(2 * a + 1)];
                        const double mid = 0.5 * (lo + hi), hf = 0.5 * (hi - lo);
                        x[static_cast<std::size_t>(a)] =
                            mid + hf * g2.x[static_cast<std::size_t>(
                                      gt[static_cast<std::size_t>(a)])];
                        gw *= hf * g2.w[static_cast<std::size_t>(gt[static_cast<std::size_t>(a)])];
                    }
                    account(gw * weight_at(mu, x), node(x, out));
                    int a = 0;
                    for (; a <= d; ++a) {
                        if (++gt[static_cast<std::size_t>(a)] < 2) break;
                        gt[static_cast<std::size_t>(a)] = 0;
                    }
                    if (a > d) break;
                }
            } else {
                // panel center against the exact panel mass
                for (int a = 0; a <= d; ++a)
                    x[static_cast<std::size_t>(a)] =
                        0.5 * (panel[static_cast<std::size_t>(2 * a)] +
                               panel[static_cast<std::size_t>(2 * a + 1)]);
                account(box_measure(mu, panel), node(x, out));
            }
            int a = 0;
            for (; a < d; ++a) {
                if (++it[static_cast<std::size_t>(a)] < np[static_cast<std::size_t>(a)]) break;
                it[static_cast<std::size_t>(a)] = 0;
            }
            if (a == d && p + 1 < total) break;
        }
    }

    // ceiling band (2, top]
    if (sp.top > 2.0) {
        const double w = 0.25;
        std::array<int, max_dim> np{};
        int total = 1;
        for (int a = 0; a < d; ++a) {
            const double lo = sp.hor[static_cast<std::size_t>(2 * a)];
            const double hi = sp.hor[static_cast<std::size_t>(2 * a + 1)];
            np[static_cast<std::size_t>(a)] =
                std::max(1, static_cast<int>(std::ceil((hi - lo) / w - 1e-9)));
            total *= np[static_cast<std::size_t>(a)];
        }
        std::array<int, max_dim> it{};
        for (int p = 0; p < total; ++p) {
            std::array<int, max_dim> gt{};
            while (true) {
                double gw = 1.0;
                for (int a = 0; a <= d; ++a) {
                    double lo, hi;
                    if (a < d) {
                        lo = sp.hor[static_cast<std::size_t>(2 * a)] +
                             it[static_cast<std::size_t>(a)] * w;
                        hi = lo + w;
                    } else {
                        lo = 2.0;
                        hi = sp.top;
                    }
                    const double mid = 0.5 * (lo + hi), hf = 0.5 * (hi - lo);
                    x[static_cast<std::size_t>(a)] =
                        mid +
                        hf * g2.x[static_cast<std::size_t>(gt[static_cast<std::size_t>(a)])];
                    gw *= hf * g2.w[static_cast<std::size_t>(gt[static_cast<std::size_t>(a)])];
                }
                account(gw * weight_at(mu, x), node(x, out));
                int a = 0;
                for (; a <= d; ++a) {
                    if (++gt[static_cast<std::size_t>(a)] < 2) break;
                    gt[static_cast<std::size_t>(a)] = 0;
                }
                if (a > d) break;
            }
            int a = 0;
            for (; a < d; ++a) {
                if (++it[static_cast<std::size_t>(a)] < np[static_cast<std::size_t>(a)]) break;
                it[static_cast<std::size_t>(a)] = 0;
            }
            if (a == d && p + 1 < total) break;
        }
    }

    // graded sliver (0, 2^{-finest}]: geometric depth shells with exact
    // line masses; stops above the supported evaluation depth
    {
        const double w = std::ldexp(1.0, -sp.finest);
        std::array<int, max_dim> np{};
        int total = 1;
        for (int a = 0; a < d; ++a) {
            const double lo = sp.hor[static_cast<std::size_t>(2 * a)];
            const double hi = sp.hor[static_cast<std::size_t>(2 * a + 1)];
            np[static_cast<std::size_t>(a)] =
                std::max(1, static_cast<int>(std::ceil((hi - lo) / w - 1e-9)));
            total *= np[static_cast<std::size_t>(a)];
        }
        const int max_shell = std::max(0, 45 - sp.finest);
        std::array<int, max_dim> it{};
        for (int p = 0; p < total; ++p) {
            double cum = 0.0;
            int small_streak = 0;
            for (int j = 0; j <= max_shell; ++j) {
                const double dhi = std::ldexp(1.0, -sp.finest - j);
                const double line = weight_line_integral(0.5 * dhi, dhi, mu.alpha);
                double shell_sum = 0.0;
                std::array<int, max_dim> gt{};
                while (true) {
                    double gw = line;
                    for (int a = 0; a < d; ++a) {
                        const double lo = sp.hor[static_cast<std::size_t>(2 * a)] +
                                          it[static_cast<std::size_t>(a)] * w;
                        const double mid = lo + 0.5 * w, hf = 0.5 * w;
                        x[static_cast<std::size_t>(a)] =
                            mid +
                            hf * g2.x[static_cast<std::size_t>(gt[static_cast<std::size_t>(a)])];
                        gw *= hf * g2.w[static_cast<std::size_t>(gt[static_cast<std::size_t>(a)])];
                    }
                    x[ud] = 0.75 * dhi;
                    account(gw, node(x, out));
                    for (int c = 0; c < m; ++c) shell_sum += std::abs(gw * out[c]);
                    int a = 0;
                    for (; a < d; ++a) {
                        if (++gt[static_cast<std::size_t>(a)] < 2) break;
                        gt[static_cast<std::size_t>(a)] = 0;
                    }
                    if (a == d) break;
                }
                cum += shell_sum;
                if (j >= 4 && shell_sum < 1e-9 * std::max(cum, 1e-300)) {
                    if (++small_streak >= 2) break;
                } else {
                    small_streak = 0;
                }
            }
            int a = 0;
            for (; a < d; ++a) {
                if (++it[static_cast<std::size_t>(a)] < np[static_cast<std::size_t>(a)]) break;
                it[static_cast<std::size_t>(a)] = 0;
            }
            if (a == d && p + 1 < total) break;
        }
    }
}

}  // namespace

H1Result h1_norm(const AmbientField& g, const Mollifier& phi, const WeightedMeasure& mu,
                 const std::array<double, 2 * max_dim>& horizontal, int finest_level,
                 double top, int panels) {
    if (mu.normal_dims != 1 || mu.ambient_dim != g.dim())
        throw std::domain_error("h1_norm: measure must weight the codim-1 boundary distance");
    H1Result r;
    r.alpha_admissible = mu.alpha > -1.0 && mu.alpha < 0.0;
    StripSpec sp;
    sp.d = g.dim() - 1;
    sp.hor = horizontal;
    sp.finest = finest_level;
    sp.top = top;

    double acc[2] = {0.0, 0.0};
    auto node = [&](const std::array<double, max_dim>& x, double* out) {
        const double gv = g.value(x);
        double best = 0.0, best_t = 0.0, delta = 0.0;
        const bool ok = octave_maximal(
            phi, x, finest_level, panels, 4, 1,
            [&g](const std::array<double, max_dim>& z, double* v) { v[0] = g.value(z); }, &best,
            &best_t, &delta);
        out[0] = std::abs(gv);
        out[1] = ok ? best : std::abs(gv);
        r.max_refinement_delta = std::max(r.max_refinement_delta, delta);
        return !ok;
    };
    strip_sweep(sp, mu, 2, node, acc, &r.flagged_nodes);
    r.l1 = acc[0];
    r.value = acc[1];
    return r;
}

H11Result h11_norm(const AmbientField& f, const Mollifier& phi, const WeightedMeasure& mu,
                   const std::array<double, 2 * max_dim>& horizontal, int finest_level,
                   double top, int panels) {
    if (mu.normal_dims != 1 || mu.ambient_dim != f.dim())
        throw std::domain_error("h11_norm: measure must weight the codim-1 boundary distance");
    const int D = f.dim();
    const int d = D - 1;
    const int K = finest_level;

    H11Result r;
    r.alpha_admissible = mu.alpha > -1.0 && mu.alpha < 0.0;
    r.component_h1.assign(static_cast<std::size_t>(D), 0.0);

    StripSpec sp;
    sp.d = d;
    sp.hor = horizontal;
    sp.finest = K;
    sp.top = top;

    double acc[8] = {0.0};
    auto grad_eval = [&f, D](const std::array<double, max_dim>& z, double* v) {
        std::array<double, max_dim> gr;
        f.value_and_gradient(z, gr);
        for (int a = 0; a < D; ++a) v[a] = gr[static_cast<std::size_t>(a)];
    };
    auto node = [&](const std::array<double, max_dim>& x, double* out) {
        std::array<double, max_dim> gr;
        const double fv = f.value_and_gradient(x, gr);
        out[0] = std::abs(fv);
        double best[8], best_t[8], delta[8];
        const bool ok = octave_maximal(phi, x, K, panels, 4, D, grad_eval, best, best_t, delta);
        for (int a = 0; a < D; ++a) {
            out[1 + a] = ok ? best[a] : std::abs(gr[static_cast<std::size_t>(a)]);
            if (ok) r.max_refinement_delta = std::max(r.max_refinement_delta, delta[a]);
        }
        return !ok;
    };
    strip_sweep(sp, mu, 1 + D, node, acc, &r.flagged_nodes);

    r.l1 = acc[0];
    r.value = r.l1;
    for (int a = 0; a < D; ++a) {
        r.component_h1[static_cast<std::size_t>(a)] = acc[1 + a];
        r.value += acc[1 + a];
    }
    return r;
}

H11Result h11_norm(const ExtensionField& f, const Mollifier& phi, const WeightedMeasure& mu,
                   int panels) {
    if (f.codim() != 1)
        throw std::domain_error("h11_norm: codim-1 extension fields only");
    const int d = f.boundary_dim();
    const int K = f.top_level();
    std::array<double, 2 * max_dim> hor{};
    const Pyramid::Level& L = f.boundary().level(K);
    for (int a = 0; a < d; ++a) {
        const double lo = std::ldexp(static_cast<double>(L.lo[static_cast<std::size_t>(a)]), -K);
        const double hi = std::ldexp(
            static_cast<double>(L.lo[static_cast<std::size_t>(a)] + L.n[static_cast<std::size_t>(a)]),
            -K);
        hor[static_cast<std::size_t>(2 * a)] = std::floor(lo) - 0.25;
        hor[static_cast<std::size_t>(2 * a + 1)] = std::ceil(hi) + 0.25;
    }
    return h11_norm(f, phi, mu, hor, K, 2.25, panels);
}

std::array<double, max_dim> PartialDerivativeField::gradient(
    const std::array<double, max_dim>& x) const {
    const int D = dim();
    std::array<double, max_dim> g{};
    std::array<double, max_dim> p = x;
    for (int a = 0; a < D; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        double h = fd_step * std::max(1.0, std::abs(x[ua]));
        if (a == D - 1) h = std::min(h, 0.25 * x[ua]);  // stay inside the half-space
        p[ua] = x[ua] + h;
        const double vp = value(p);
        p[ua] = x[ua] - h;
        const double vm = value(p);
        p[ua] = x[ua];
        g[ua] = (vp - vm) / (2.0 * h);
    }
    return g;
}

double grand_maximal_approx(const AmbientField& h, const Mollifier& phi,
                            const std::array<double, max_dim>& x, int n, int radius_levels,
                            int panels) {
    const int D = phi.dim();
    const std::size_t uD = static_cast<std::size_t>(D - 1);
    const double norm = phi.test_norm(n);
    auto eval = [&h](const std::array<double, max_dim>& z, double* v) { v[0] = h.value(z); };

    double best = 0.0;
    for (int j = 1; j <= radius_levels; ++j) {
        const double r = std::ldexp(1.0, -j);
        std::array<double, max_dim> cands[12];
        int nc = 0;
        auto push = [&](std::array<double, max_dim> y) {
            if (!(y[uD] > r * (1.0 + 1e-12))) return;
            double d2 = 0.0;
            for (int a = 0; a < D; ++a) {
                const double e = y[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(a)];
                d2 += e * e;
            }
            if (!(d2 < r * r * (1.0 - 1e-12))) return;
            for (int i = 0; i < nc; ++i) {
                double m2 = 0.0;
                for (int a = 0; a < D; ++a) {
                    const double e = cands[i][static_cast<std::size_t>(a)] -
                                     y[static_cast<std::size_t>(a)];
                    m2 += e * e;
                }
                if (m2 < 1e-24 * r * r) return;
            }
            if (nc < 12) cands[nc++] = y;
        };

        std::array<double, max_dim> base = x;
        std::array<double, max_dim> lifted = x;
        lifted[uD] = std::max(x[uD], r * (17.0 / 16.0));
        for (const auto& b : {base, lifted}) {
            push(b);
            for (int a = 0; a < D; ++a) {
                std::array<double, max_dim> y = b;
                y[static_cast<std::size_t>(a)] = b[static_cast<std::size_t>(a)] + 0.25 * r;
                push(y);
                y[static_cast<std::size_t>(a)] = b[static_cast<std::size_t>(a)] - 0.25 * r;
                push(y);
            }
        }
        for (int i = 0; i < nc; ++i) {
            double conv = 0.0;
            mollified_average(phi, r, cands[i], panels, 4, 1, eval, &conv);
            best = std::max(best, std::abs(conv) / norm);
        }
    }
    return best;
}

// ---- box means and the oscillation/maximal-gradient scan -------------------

namespace {

template <class Fn>
void box_nodes(const std::array<double, 2 * max_dim>& lohi, int D, int panels, int order,
               Fn&& fn) {
    const GaussRule g = gauss(order);
    const int per_axis = panels * static_cast<int>(g.x.size());
    std::array<int, max_dim> it{};
    std::array<double, max_dim> x{};
    while (true) {
        double w = 1.0;
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            const double lo = lohi[2 * ua], hi = lohi[2 * ua + 1];
            const double hp = (hi - lo) / panels;
            const int p = it[ua] / static_cast<int>(g.x.size());
            const int i = it[ua] % static_cast<int>(g.x.size());
            const double mid = lo + (p + 0.5) * hp;
            x[ua] = mid + 0.5 * hp * g.x[static_cast<std::size_t>(i)];
            w *= 0.5 * hp * g.w[static_cast<std::size_t>(i)];
        }
        fn(x, w);
        int a = 0;
        for (; a < D; ++a) {
            if (++it[static_cast<std::size_t>(a)] < per_axis) break;
            it[static_cast<std::size_t>(a)] = 0;
        }
        if (a == D) break;
    }
}

double box_volume(const std::array<double, 2 * max_dim>& lohi, int D) {
    double v = 1.0;
    for (int a = 0; a < D; ++a)
        v *= lohi[static_cast<std::size_t>(2 * a + 1)] - lohi[static_cast<std::size_t>(2 * a)];
    return v;
}

}  // namespace

double field_box_mean(const AmbientField& g, const std::array<double, 2 * max_dim>& lohi,
                      int panels, int order) {
    const int D = g.dim();
    double anchor = 0.0, num = 0.0;
    bool first = true;
    box_nodes(lohi, D, panels, order, [&](const std::array<double, max_dim>& x, double w) {
        const double v = g.value(x);
        if (first) {
            anchor = v;
            first = false;
        }
        num += w * (v - anchor);
    });
    return anchor + num / box_volume(lohi, D);
}

double field_oscillation(const AmbientField& g, const std::array<double, 2 * max_dim>& lohi,
                         int panels, int order) {
    const int D = g.dim();
    const double mean = field_box_mean(g, lohi, panels, order);
    double num = 0.0;
    box_nodes(lohi, D, panels, order, [&](const std::array<double, max_dim>& x, double w) {
        num += w * std::abs(g.value(x) - mean);
    });
    return num / box_volume(lohi, D);
}

std::vector<PoincareSample> poincare_scan(const ExtensionField& f, const Mollifier& phi,
                                          int k_max, int radius_levels) {
    if (f.codim() != 1)
        throw std::domain_error("poincare_scan: codim-1 extension fields only");
    const int d = f.boundary_dim();
    const int D = d + 1;
    std::vector<PartialDerivativeField> parts;
    parts.reserve(static_cast<std::size_t>(D));
    for (int a = 0; a < D; ++a) parts.emplace_back(f, a);

    std::vector<PoincareSample> samples;
    for (int k = 0; k <= std::min(k_max, f.top_level()); ++k) {
        const Pyramid::Level& L = f.boundary().level(k);
        const double l = std::ldexp(1.0, -k);
        std::array<std::int64_t, max_dim> it{};
        while (true) {
            std::array<double, 2 * max_dim> box{};
            PoincareSample s;
            s.level = k;
            for (int a = 0; a < d; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                s.cell[ua] = L.lo[ua] + it[ua];
                box[2 * ua] = s.cell[ua] * l - 0.125 * l;
                box[2 * ua + 1] = (s.cell[ua] + 1) * l + 0.125 * l;
            }
            box[static_cast<std::size_t>(2 * d)] = 0.875 * l;
            box[static_cast<std::size_t>(2 * d + 1)] = 2.125 * l;

            s.oscillation = field_oscillation(f, box, 3, 4);
            double mean = 0.0;
            box_nodes(box, D, 1, 2, [&](const std::array<double, max_dim>& x, double w) {
                double gsum = 0.0;
                for (int a = 0; a < D; ++a)
                    gsum += grand_maximal_approx(parts[static_cast<std::size_t>(a)], phi, x, 1,
                                                 radius_levels);
                mean += w * gsum;
            });
            mean /= box_volume(box, D);
            s.maximal_mean = mean;
            const double den = l * mean;
            s.ratio = den > 0.0 ? s.oscillation / den
                                : (s.oscillation > 0.0 ? std::numeric_limits<double>::infinity()
                                                       : 0.0);
            samples.push_back(s);

            int a = 0;
            for (; a < d; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                if (++it[ua] < L.n[ua]) break;
                it[ua] = 0;
            }
            if (a == d) break;
        }
    }
    return samples;
}

}  // namespace whitney
