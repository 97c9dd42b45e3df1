#include "whitney/trace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "whitney/quadrature.hpp"

namespace whitney {

namespace {

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

std::int64_t ceildiv(std::int64_t a, std::int64_t b) { return -floordiv(-a, b); }

// level-k ceil cover of the pyramid's horizontal hull
void horizontal_footprint(const Pyramid& amb, int d, int k, std::array<std::int64_t, max_dim>& lo,
                          std::array<std::int64_t, max_dim>& n) {
    const Pyramid::Level& LK = amb.level(amb.top_level());
    const std::int64_t w = std::int64_t{1} << (amb.top_level() - k);
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = floordiv(LK.lo[ua], w);
        n[ua] = ceildiv(LK.lo[ua] + LK.n[ua], w) - lo[ua];
    }
}

}  // namespace

// ---- tent averages ----------------------------------------------------------

BoundaryFunction tent_trace(const Pyramid& amb, int k) {
    const WeightedMeasure& mu = amb.measure();
    const int n_cd = mu.normal_dims;
    const int d = amb.dim() - n_cd;
    const int K = amb.top_level();
    if (n_cd < 1 || d < 1) throw std::invalid_argument("tent_trace: ambient pyramid expected");
    if (k < 0 || k > K) throw resolution_error("tent_trace: level out of range");

    BoundaryFunction out;
    out.dim = d;
    out.level = k;
    horizontal_footprint(amb, d, k, out.lo, out.n);
    out.values.assign(out.cell_count(), 0.0);

    const std::int64_t w = std::int64_t{1} << (K - k);
    std::array<std::int64_t, max_dim> cell{}, idx{}, off{};
    for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
        std::size_t rem = flat;
        for (int a = d - 1; a >= 0; --a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            cell[ua] = out.lo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(out.n[ua]));
            rem /= static_cast<std::size_t>(out.n[ua]);
        }
        // column of level-K cells under the tent: horizontal block of side
        // w, normal indices [0, w)^n
        for (int a = 0; a < d; ++a) idx[static_cast<std::size_t>(a)] = cell[static_cast<std::size_t>(a)] * w;
        for (int a = d; a < d + n_cd; ++a) idx[static_cast<std::size_t>(a)] = 0;
        const double anchor = amb.average(K, idx);
        double num = 0.0, den = 0.0;
        off.fill(0);
        for (;;) {
            const double m = amb.mass(K, idx);
            num += m * (amb.average(K, idx) - anchor);
            den += m;
            int a = 0;
            for (; a < d + n_cd; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                if (++off[ua] < w) {
                    ++idx[ua];
                    break;
                }
                off[ua] = 0;
                idx[ua] -= w - 1;
            }
            if (a == d + n_cd) break;
        }
        out.values[flat] = anchor + num / den;
    }
    return out;
}

// ---- inflated-Whitney-box averages -------------------------------------------

namespace {

// accumulates the anchored Gauss sum of g over one axis-aligned box with
// uniform panels per axis; the anchor is captured from the first node
struct AnchoredAverage {
    double anchor = 0.0;
    bool have_anchor = false;
    double num = 0.0, den = 0.0;

    void add_box(const AmbientField& g, int D, const std::array<double, 2 * max_dim>& lohi,
                 const std::array<int, max_dim>& panels, const GaussRule& R) {
        const int order = static_cast<int>(R.x.size());
        std::array<int, max_dim> pan{}, node{};
        std::array<double, max_dim> plo{}, half{}, x{};
        pan.fill(0);
        for (;;) {
            double pw = 1.0;
            for (int a = 0; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                const double width = (lohi[static_cast<std::size_t>(2 * a + 1)] - lohi[static_cast<std::size_t>(2 * a)]) /
                                     static_cast<double>(panels[ua]);
                plo[ua] = lohi[static_cast<std::size_t>(2 * a)] + width * static_cast<double>(pan[ua]);
                half[ua] = 0.5 * width;
                pw *= half[ua];
            }
            node.fill(0);
            for (;;) {
                double wt = pw;
                for (int a = 0; a < D; ++a) {
                    const std::size_t ua = static_cast<std::size_t>(a);
                    const std::size_t ui = static_cast<std::size_t>(node[ua]);
                    x[ua] = plo[ua] + half[ua] * (1.0 + R.x[ui]);
                    wt *= R.w[ui];
                }
                const double gv = g.value(x);
                if (!have_anchor) {
                    anchor = gv;
                    have_anchor = true;
                }
                num += wt * (gv - anchor);
                den += wt;
                int a = 0;
                for (; a < D; ++a) {
                    const std::size_t ua = static_cast<std::size_t>(a);
                    if (++node[ua] < order) break;
                    node[ua] = 0;
                }
                if (a == D) break;
            }
            int a = 0;
            for (; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                if (++pan[ua] < panels[ua]) break;
                pan[ua] = 0;
            }
            if (a == D) break;
        }
    }

    double result() const { return anchor + num / den; }
};

int panel_count(double extent, double pitch) {
    return std::max(1, static_cast<int>(std::llround(extent / pitch)));
}

}  // namespace

BoundaryFunction whitney_trace(const AmbientField& g, int d, int codim, int k,
                               const std::array<std::int64_t, max_dim>& lo,
                               const std::array<std::int64_t, max_dim>& n, int subdiv) {
    const int D = d + codim;
    if (g.dim() != D) throw std::invalid_argument("whitney_trace: field dimension mismatch");
    if (k < 0) throw std::invalid_argument("whitney_trace: negative level");
    const double l = std::ldexp(1.0, -k);
    const GaussRule R = gauss(4);

    BoundaryFunction out;
    out.dim = d;
    out.level = k;
    out.lo = lo;
    out.n = n;
    out.values.assign(out.cell_count(), 0.0);

    // the three normal segments of the 5/4-inflated box (l, 2l]^n: below
    // the cube, the cube, above the cube; the shell level is constant on
    // each segment combo so the panel lattice can align per combo
    const double seg[4] = {7.0 / 8.0 * l, l, 2.0 * l, 17.0 / 8.0 * l};
    int combos = 1;
    for (int a = 0; a < codim; ++a) combos *= 3;

    std::array<std::int64_t, max_dim> cell{};
    for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
        std::size_t rem = flat;
        for (int a = d - 1; a >= 0; --a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            cell[ua] = lo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(n[ua]));
            rem /= static_cast<std::size_t>(n[ua]);
        }
        AnchoredAverage acc;
        for (int c = 0; c < combos; ++c) {
            std::array<double, 2 * max_dim> lohi{};
            int cc = c, topseg = 0;
            for (int a = d; a < D; ++a) {
                const int s = cc % 3;
                cc /= 3;
                lohi[static_cast<std::size_t>(2 * a)] = seg[s];
                lohi[static_cast<std::size_t>(2 * a + 1)] = seg[s + 1];
                topseg = std::max(topseg, s);
            }
            // segment 0 sits in the finer shell, segment 2 in the coarser
            const int jc = k + 1 - topseg;
            const double pitch = std::ldexp(1.0, -jc) / static_cast<double>(subdiv);
            std::array<int, max_dim> panels{};
            for (int a = 0; a < d; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                lohi[static_cast<std::size_t>(2 * a)] = (static_cast<double>(cell[ua]) - 0.125) * l;
                lohi[static_cast<std::size_t>(2 * a + 1)] = (static_cast<double>(cell[ua]) + 1.125) * l;
                panels[ua] = panel_count(1.25 * l, pitch);
            }
            for (int a = d; a < D; ++a)
                panels[static_cast<std::size_t>(a)] =
                    panel_count(lohi[static_cast<std::size_t>(2 * a + 1)] - lohi[static_cast<std::size_t>(2 * a)], pitch);
            acc.add_box(g, D, lohi, panels, R);
        }
        out.values[flat] = acc.result();
    }
    return out;
}

BoundaryFunction whitney_trace(const ExtensionField& g, int k, int subdiv) {
    const int d = g.boundary_dim();
    std::array<std::int64_t, max_dim> lo{}, n{};
    horizontal_footprint(g.boundary(), d, std::min(k, g.top_level()), lo, n);
    if (k > g.top_level()) {  // refine the footprint rather than coarsen past K
        const std::int64_t w = std::int64_t{1} << (k - g.top_level());
        for (int a = 0; a < d; ++a) {
            lo[static_cast<std::size_t>(a)] *= w;
            n[static_cast<std::size_t>(a)] *= w;
        }
    }
    for (int a = 0; a < d; ++a) {
        lo[static_cast<std::size_t>(a)] -= 3;
        n[static_cast<std::size_t>(a)] += 6;
    }
    return whitney_trace(g, d, g.codim(), k, lo, n, subdiv);
}

// ---- centre-sampled pyramid of an arbitrary field ---------------------------

Pyramid sampled_pyramid(const AmbientField& g, const WeightedMeasure& mu, int boundary_dim,
                        int codim, int K, const std::array<std::int64_t, max_dim>& blo,
                        const std::array<std::int64_t, max_dim>& bn) {
    const int d = boundary_dim, D = d + codim;
    if (g.dim() != D || mu.ambient_dim != D || mu.normal_dims != codim)
        throw std::invalid_argument("sampled_pyramid: dimension mismatch");
    const std::int64_t margin = ((std::int64_t{1} << K) >> 3) + 1;
    std::array<std::int64_t, max_dim> lo{}, n{};
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = blo[ua] - margin;
        n[ua] = bn[ua] + 2 * margin;
    }
    const std::int64_t nv = (17 * (std::int64_t{1} << K) + 7) / 8;
    for (int a = d; a < D; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = codim == 1 ? 0 : -nv;
        n[ua] = codim == 1 ? nv : 2 * nv;
    }
    std::size_t total = 1;
    for (int a = 0; a < D; ++a) total *= static_cast<std::size_t>(n[static_cast<std::size_t>(a)]);
    std::vector<double> vals(total);
    const double h = std::ldexp(1.0, -K);
    std::array<double, max_dim> x{};
    std::array<std::int64_t, max_dim> idx{};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = D - 1; a >= 0; --a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            idx[ua] = lo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(n[ua]));
            rem /= static_cast<std::size_t>(n[ua]);
        }
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            x[ua] = (static_cast<double>(idx[ua]) + 0.5) * h;
        }
        vals[flat] = g.value(x);
    }
    return Pyramid(D, codim == 1, mu, K, lo, n, std::move(vals));
}

// ---- ladder diagnostics ------------------------------------------------------

namespace {

// L^p norms of T_0 and of the inter-level differences, plus the L^p norm
// of the pointwise ladder sum f* = |T_0| + sum |T_{k+1} - T_k|, computed
// over the level-0 footprint refined to level K (the widest domain any
// ladder member can touch)
TraceDiagnostics ladder_diagnostics(const std::vector<BoundaryFunction>& ladder, double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw std::invalid_argument("trace diagnostics: p in [1, inf) expected");
    TraceDiagnostics diag;
    const BoundaryFunction& b0 = ladder.front();
    const int d = b0.dim;
    const int K = static_cast<int>(ladder.size()) - 1;
    const std::int64_t w = std::int64_t{1} << K;
    std::array<std::int64_t, max_dim> lo{}, n{};
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = b0.lo[ua] * w;
        n[ua] = b0.n[ua] * w;
        total *= static_cast<std::size_t>(n[ua]);
    }
    std::vector<double> fstar(total, 0.0);
    const double cellvol = std::ldexp(1.0, -K * d);
    std::array<std::int64_t, max_dim> idx{}, up{};
    for (int k = 0; k <= K; ++k) {
        double acc = 0.0;
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            for (int a = d - 1; a >= 0; --a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                idx[ua] = lo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(n[ua]));
                rem /= static_cast<std::size_t>(n[ua]);
            }
            for (int a = 0; a < d; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                up[ua] = floordiv(idx[ua], std::int64_t{1} << (K - k));
            }
            double dv = ladder[static_cast<std::size_t>(k)].value_at_index(up);
            if (k > 0) {
                for (int a = 0; a < d; ++a) {
                    const std::size_t ua = static_cast<std::size_t>(a);
                    up[ua] = floordiv(idx[ua], std::int64_t{1} << (K - k + 1));
                }
                dv -= ladder[static_cast<std::size_t>(k - 1)].value_at_index(up);
            }
            fstar[flat] += std::abs(dv);
            acc += cellvol * std::pow(std::abs(dv), p);
        }
        diag.increment_lp.push_back(std::pow(acc, 1.0 / p));
    }
    double facc = 0.0;
    for (double v : fstar) facc += cellvol * std::pow(v, p);
    diag.fstar_lp = std::pow(facc, 1.0 / p);

    const std::vector<double>& inc = diag.increment_lp;
    const std::size_t m = inc.size();
    if (m >= 2 && inc[m - 1] > inc[m - 2]) diag.flagged = true;
    if (m >= 3 && inc[m - 1] > 0.95 * inc[m - 2] && inc[m - 2] > 0.95 * inc[m - 3])
        diag.flagged = true;
    return diag;
}

}  // namespace

TraceResult trace(const Pyramid& amb, double p) {
    const int K = amb.top_level();
    std::vector<BoundaryFunction> ladder;
    ladder.reserve(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) ladder.push_back(tent_trace(amb, k));
    TraceResult res;
    res.diag = ladder_diagnostics(ladder, p);
    res.trace = std::move(ladder.back());
    return res;
}

TraceResult trace(const ExtensionField& g, double p, int subdiv, int spot_checks) {
    const int K = g.top_level();
    std::vector<BoundaryFunction> ladder;
    ladder.reserve(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) ladder.push_back(whitney_trace(g, k, subdiv));
    TraceResult res;
    res.diag = ladder_diagnostics(ladder, p);
    res.trace = std::move(ladder.back());

    if (spot_checks > 0 && g.codim() == 1) {
        const int d = g.boundary_dim();
        const WeightedMeasure mu(d + 1, 1, 0.0);
        const double r = std::ldexp(1.0, -K + 2);
        const BoundaryFunction& tr = res.trace;
        std::size_t total = tr.values.size();
        std::array<std::int64_t, max_dim> idx{};
        std::array<double, max_dim> x0{};
        for (int j = 0; j < spot_checks; ++j) {
            // deterministic spread through the footprint
            std::size_t flat = (static_cast<std::size_t>(j) * 2 + 1) * total / (2 * static_cast<std::size_t>(spot_checks));
            std::size_t rem = flat;
            for (int a = d - 1; a >= 0; --a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                idx[ua] = tr.lo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(tr.n[ua]));
                rem /= static_cast<std::size_t>(tr.n[ua]);
            }
            for (int a = 0; a < d; ++a)
                x0[static_cast<std::size_t>(a)] =
                    (static_cast<double>(idx[static_cast<std::size_t>(a)]) + 0.5) * std::ldexp(1.0, -K);
            const double hb = half_ball_average(g, mu, x0, r);
            res.diag.spot_residuals.push_back(std::abs(hb - tr.value_at_index(idx)));
        }
    }
    return res;
}

// ---- half-ball averages ------------------------------------------------------

namespace {

// uniform composite Gauss over (a, b]
template <class F>
double panels_integrate(F&& f, double a, double b, int panels, const GaussRule& R) {
    double s = 0.0;
    const double w = (b - a) / static_cast<double>(panels);
    for (int i = 0; i < panels; ++i) {
        const double plo = a + w * static_cast<double>(i), half = 0.5 * w;
        for (std::size_t j = 0; j < R.x.size(); ++j)
            s += half * R.w[j] * f(plo + half * (1.0 + R.x[j]));
    }
    return s;
}

}  // namespace

double half_ball_average(const AmbientField& g, const WeightedMeasure& mu,
                         const std::array<double, max_dim>& x0, double r) {
    if (mu.normal_dims != 1 || mu.ambient_dim > 3)
        throw std::invalid_argument("half_ball_average: codim-1 probe, boundary dim <= 2");
    const int d = mu.ambient_dim - 1;
    if (g.dim() != mu.ambient_dim) throw std::invalid_argument("half_ball_average: field dim mismatch");
    const double alpha = mu.alpha;
    const double pi = 3.141592653589793;
    const GaussRule R4 = gauss(4);

    std::array<double, max_dim> xa = x0;
    xa[static_cast<std::size_t>(d)] = 0.5 * r;
    const double anchor = g.value(xa);

    // The graded angle integration would otherwise drive evaluation to
    // depths where index arithmetic loses meaning; below resolution the
    // extension is constant in depth away from jump columns, so clamping
    // the depth is exact there and the clamped slice carries a vanishing
    // share of the measure elsewhere.
    const double depth_floor = r * std::ldexp(1.0, -20);

    // numerator integral of (g - anchor) dmu over the half ball; the
    // denominator is the exact half-ball measure, so constants reproduce
    // the anchor bitwise (numerator vanishes node by node)
    double num = 0.0;
    if (d == 1) {
        // polar (rho, theta): x = x0 + rho (cos t, sin t), weight
        // min(1, rho sin t)^alpha, jacobian rho; theta graded toward the
        // endpoint singularities of the weight, rho bounded (rho^{1+alpha})
        auto slice = [&](double t) {
            const double ct = std::cos(t), st = std::sin(t);
            auto fr = [&](double rho) {
                std::array<double, max_dim> x{};
                x[0] = x0[0] + rho * ct;
                x[1] = rho * st;
                const double w = std::pow(std::min(1.0, x[1]), alpha) * rho;
                x[1] = std::max(x[1], depth_floor);
                return w * (g.value(x) - anchor);
            };
            return panels_integrate(fr, 0.0, r, 192, R4);
        };
        num += integrate_graded([&](double t) { return slice(t); }, 0.0, 0.5 * pi, {}, 8);
        num += integrate_graded([&](double t) { return slice(pi - t); }, 0.0, 0.5 * pi, {}, 8);
    } else {
        // spherical (rho, psi, phi): height rho cos psi, horizontal radius
        // rho sin psi; psi graded toward the weight singularity at pi/2
        auto slice = [&](double psi) {
            const double cp = std::cos(psi), sp = std::sin(psi);
            auto fphi = [&](double phi) {
                auto frho = [&](double rho) {
                    std::array<double, max_dim> x{};
                    x[0] = x0[0] + rho * sp * std::cos(phi);
                    x[1] = x0[1] + rho * sp * std::sin(phi);
                    x[2] = rho * cp;
                    const double w = std::pow(std::min(1.0, x[2]), alpha) * rho * rho * sp;
                    x[2] = std::max(x[2], depth_floor);
                    return w * (g.value(x) - anchor);
                };
                return panels_integrate(frho, 0.0, r, 64, R4);
            };
            return panels_integrate(fphi, 0.0, 2.0 * pi, 8, R4);
        };
        num = integrate_graded([&](double u) { return slice(0.5 * pi - u); }, 0.0, 0.5 * pi, {}, 4);
    }
    return anchor + num / boundary_ball_measure(mu, r);
}

// ---- sampling lemma ----------------------------------------------------------

double mean_oscillation(const Pyramid& f, const std::array<double, 2 * max_dim>& lohi) {
    const int D = f.dim(), K = f.top_level();
    const double h = std::ldexp(1.0, -K);
    std::array<std::int64_t, max_dim> ilo{}, icnt{}, idx{};
    std::size_t total = 1;
    for (int a = 0; a < D; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        const double lo = lohi[static_cast<std::size_t>(2 * a)], hi = lohi[static_cast<std::size_t>(2 * a + 1)];
        if (!(hi > lo)) throw std::invalid_argument("mean_oscillation: empty box");
        ilo[ua] = static_cast<std::int64_t>(std::floor(lo / h));
        const std::int64_t ihi = static_cast<std::int64_t>(std::ceil(hi / h));
        icnt[ua] = ihi - ilo[ua];
        total *= static_cast<std::size_t>(icnt[ua]);
    }
    // pass 1: anchored weighted mean; pass 2: weighted absolute deviation
    std::vector<double> cmass(total), cval(total);
    double anchor = 0.0, num = 0.0, den = 0.0;
    bool have_anchor = false;
    std::array<double, 2 * max_dim> clip{};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = D - 1; a >= 0; --a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            idx[ua] = ilo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(icnt[ua]));
            rem /= static_cast<std::size_t>(icnt[ua]);
        }
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            clip[static_cast<std::size_t>(2 * a)] = std::max(lohi[static_cast<std::size_t>(2 * a)],
                                                             static_cast<double>(idx[ua]) * h);
            clip[static_cast<std::size_t>(2 * a + 1)] = std::min(lohi[static_cast<std::size_t>(2 * a + 1)],
                                                                 static_cast<double>(idx[ua] + 1) * h);
        }
        const double m = box_measure(f.measure(), clip);
        const double v = f.average(K, idx);
        cmass[flat] = m;
        cval[flat] = v;
        if (!have_anchor) {
            anchor = v;
            have_anchor = true;
        }
        num += m * (v - anchor);
        den += m;
    }
    if (!(den > 0.0)) throw std::domain_error("mean_oscillation: box has zero measure");
    const double mean = anchor + num / den;
    double osc = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) osc += cmass[flat] * std::abs(cval[flat] - mean);
    return osc / den;
}

SamplingResult sampling_subcube(const Pyramid& f, const std::array<double, 2 * max_dim>& q,
                                int dim, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("sampling_subcube: lambda in (0,1)");
    const int D = dim;
    const double edge0 = q[1] - q[0];
    for (int a = 1; a < D; ++a)
        if (std::abs((q[static_cast<std::size_t>(2 * a + 1)] - q[static_cast<std::size_t>(2 * a)]) - edge0) >
            1e-12 * edge0)
            throw std::invalid_argument("sampling_subcube: box is not a cube");

    SamplingResult res;
    res.osc_q = mean_oscillation(f, q);

    // k_lambda single steps: (3/4)^k <= lambda < (3/4)^{k-1}
    int klam = 1;
    while (std::pow(0.75, klam) > lambda) ++klam;
    res.steps = klam;

    std::array<double, 2 * max_dim> cur = q;
    double edge = edge0;
    double prev_osc = res.osc_q;
    for (int it = 0; it < klam; ++it) {
        const double ce = 0.75 * edge;
        double best = -1.0;
        std::array<double, 2 * max_dim> bestbox{};
        for (int corner = 0; corner < (1 << D); ++corner) {
            std::array<double, 2 * max_dim> cand{};
            for (int a = 0; a < D; ++a) {
                const bool high = (corner >> a) & 1;
                const double lo = high ? cur[static_cast<std::size_t>(2 * a + 1)] - ce
                                       : cur[static_cast<std::size_t>(2 * a)];
                cand[static_cast<std::size_t>(2 * a)] = lo;
                cand[static_cast<std::size_t>(2 * a + 1)] = lo + ce;
            }
            const double osc = mean_oscillation(f, cand);
            if (osc > best) {  // strict: lexicographically first corner wins ties
                best = osc;
                bestbox = cand;
            }
        }
        res.step_ratios.push_back(prev_osc > 0.0 && best > 0.0 ? prev_osc / best : 1.0);
        prev_osc = best;
        cur = bestbox;
        edge = ce;
    }

    // enclosing cube of edge lambda*l(Q), centred on the iterate, clamped
    // inside Q
    const double fe = lambda * edge0;
    for (int a = 0; a < D; ++a) {
        const std::size_t u0 = static_cast<std::size_t>(2 * a), u1 = static_cast<std::size_t>(2 * a + 1);
        double lo = cur[u0] - 0.5 * (fe - edge);
        lo = std::max(q[u0], std::min(lo, q[u1] - fe));
        res.subcube[u0] = lo;
        res.subcube[u1] = lo + fe;
    }
    res.osc_sub = mean_oscillation(f, res.subcube);
    res.constant = res.osc_q == 0.0 ? 1.0 : res.osc_q / res.osc_sub;
    return res;
}

}  // namespace whitney
