#include "whitney/measure.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "whitney/quadrature.hpp"

namespace whitney {

namespace {

// ---- closed-form codim-1 pieces ----------------------------------------

// integral of t^alpha over [u,v], 0 < u <= v (or u = 0 with alpha > -1)
double power_piece(double u, double v, double alpha) {
    if (v <= u) return 0.0;
    if (alpha == -1.0) {
        if (u <= 0.0) throw std::domain_error("weight integral diverges at the boundary");
        return std::log(v / u);
    }
    double p = alpha + 1.0;
    if (u <= 0.0 && p <= 0.0) throw std::domain_error("weight integral diverges at the boundary");
    double up = (u <= 0.0) ? 0.0 : std::pow(u, p);
    return (std::pow(v, p) - up) / p;
}

// integral of min(1,t)^alpha over [u,v] subset [0,inf)
double clamped_piece(double u, double v, double alpha) {
    if (v <= u) return 0.0;
    double s = 0.0;
    if (u < 1.0) s += power_piece(u, std::min(v, 1.0), alpha);
    if (v > 1.0) s += v - std::max(u, 1.0);
    return s;
}

// ---- codim >= 2 normal integrals ---------------------------------------

// radial primitive R(r) = integral of rho * min(1,rho)^alpha d rho on [0,r]
double radial_primitive(double r, double alpha) {
    if (r <= 0.0) return 0.0;
    double p = alpha + 2.0;  // > 0 whenever alpha > -2
    if (r <= 1.0) return std::pow(r, p) / p;
    return 1.0 / p + 0.5 * (r * r - 1.0);
}

// integral of min(1,|z|)^alpha over a box in the closed first quadrant,
// computed in polar coordinates: the radial part is closed form, the
// angular integrand is smooth between corner angles / circle crossings.
double quadrant_box_polar(double a, double b, double c, double d, double alpha) {
    if (b <= a || d <= c) return 0.0;
    double th_lo = std::atan2(c, b);  // smallest angle seen by the box
    double th_hi = std::atan2(d, a);  // largest
    std::vector<double> cuts{th_lo, th_hi};
    for (double x : {a, b})
        for (double y : {c, d}) cuts.push_back(std::atan2(y, x));
    // breakpoints where the unit circle crosses a box edge (kink of the weight)
    auto add_circle_cut = [&](double x, double y) {
        double t = std::atan2(y, x);
        if (t > th_lo && t < th_hi) cuts.push_back(t);
    };
    for (double x : {a, b})
        if (x < 1.0) add_circle_cut(x, std::sqrt(1.0 - x * x));
    for (double y : {c, d})
        if (y < 1.0) add_circle_cut(std::sqrt(1.0 - y * y), y);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double u, double v) { return std::abs(u - v) < 1e-15; }),
               cuts.end());
    auto f = [&](double th) {
        double ct = std::cos(th), st = std::sin(th);
        double r_in = 0.0, r_out = std::numeric_limits<double>::infinity();
        if (ct > 0.0) {
            r_in = std::max(r_in, a / ct);
            r_out = std::min(r_out, b / ct);
        } else if (a > 0.0)
            return 0.0;
        if (st > 0.0) {
            r_in = std::max(r_in, c / st);
            r_out = std::min(r_out, d / st);
        } else if (c > 0.0)
            return 0.0;
        if (!(r_out > r_in)) return 0.0;
        return radial_primitive(r_out, alpha) - radial_primitive(r_in, alpha);
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double lo = cuts[i], hi = cuts[i + 1];
        if (!(hi > lo)) continue;
        // a few panels per piece keeps Gauss-16 comfortably past 1e-12
        int panels = 4;
        double h = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) total += integrate(f, lo + p * h, lo + (p + 1) * h, 16);
    }
    return total;
}

struct NBox {
    std::array<double, max_dim> lo{}, hi{};
    int n = 2;
};

double nbox_dist2(const NBox& b) {  // squared distance of closed box to origin
    double d2 = 0.0;
    for (int i = 0; i < b.n; ++i) {
        double d = std::max({b.lo[i], 0.0, -b.hi[i]});
        d2 += d * d;
    }
    return d2;
}

double nbox_rad2(const NBox& b) {  // squared farthest corner distance
    double r2 = 0.0;
    for (int i = 0; i < b.n; ++i) {
        double d = std::max(std::abs(b.lo[i]), std::abs(b.hi[i]));
        r2 += d * d;
    }
    return r2;
}

double nbox_gauss(const NBox& b, double alpha) {
    GaussRule g = gauss(8);
    double s = 0.0;
    if (b.n == 2) {
        double m0 = 0.5 * (b.lo[0] + b.hi[0]), h0 = 0.5 * (b.hi[0] - b.lo[0]);
        double m1 = 0.5 * (b.lo[1] + b.hi[1]), h1 = 0.5 * (b.hi[1] - b.lo[1]);
        for (std::size_t i = 0; i < g.x.size(); ++i)
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                double z0 = m0 + h0 * g.x[i], z1 = m1 + h1 * g.x[j];
                double r = std::hypot(z0, z1);
                s += g.w[i] * g.w[j] * std::pow(std::min(1.0, r), alpha);
            }
        return s * h0 * h1;
    }
    // n == 3
    double m[3], h[3];
    for (int a = 0; a < 3; ++a) {
        m[a] = 0.5 * (b.lo[a] + b.hi[a]);
        h[a] = 0.5 * (b.hi[a] - b.lo[a]);
    }
    for (std::size_t i = 0; i < g.x.size(); ++i)
        for (std::size_t j = 0; j < g.x.size(); ++j)
            for (std::size_t k = 0; k < g.x.size(); ++k) {
                double z0 = m[0] + h[0] * g.x[i];
                double z1 = m[1] + h[1] * g.x[j];
                double z2 = m[2] + h[2] * g.x[k];
                double r = std::sqrt(z0 * z0 + z1 * z1 + z2 * z2);
                s += g.w[i] * g.w[j] * g.w[k] * std::pow(std::min(1.0, r), alpha);
            }
    return s * h[0] * h[1] * h[2];
}

// adaptive tensor quadrature for boxes away from the origin; refines where
// a one-level subdivision still moves the estimate (kink sphere |z| = 1)
double nbox_adaptive(const NBox& b, double alpha, double tol_abs, int depth = 0) {
    double coarse = nbox_gauss(b, alpha);
    // entirely on one side of the kink sphere and reasonably deep: done
    double d2 = nbox_dist2(b), r2 = nbox_rad2(b);
    bool crosses = d2 < 1.0 && r2 > 1.0;
    if (!crosses && depth >= 1) return coarse;
    if (depth >= 10) return coarse;
    int parts = 1 << b.n;
    double fine = 0.0;
    std::array<NBox, 8> subs;
    for (int c = 0; c < parts; ++c) {
        NBox sub = b;
        for (int a = 0; a < b.n; ++a) {
            double mid = 0.5 * (b.lo[a] + b.hi[a]);
            if (c & (1 << a))
                sub.lo[a] = mid;
            else
                sub.hi[a] = mid;
        }
        subs[c] = sub;
        fine += nbox_gauss(sub, alpha);
    }
    if (std::abs(fine - coarse) <= tol_abs && depth >= 1) return fine;
    double sum = 0.0;
    for (int c = 0; c < parts; ++c) sum += nbox_adaptive(subs[c], alpha, tol_abs * 0.5, depth + 1);
    return sum;
}

// clip box to the sup-norm cube [-t,t]^n
bool nbox_clip(const NBox& b, double t, NBox& out) {
    out = b;
    for (int a = 0; a < b.n; ++a) {
        out.lo[a] = std::max(b.lo[a], -t);
        out.hi[a] = std::min(b.hi[a], t);
        if (out.lo[a] >= out.hi[a]) return false;
    }
    return true;
}

// pieces of clip(b, t) \ cube(t/2): per axis, the part sticking out along
// that axis with all earlier axes confined to [-t/2, t/2]
void shell_pieces(const NBox& b, double t, std::vector<NBox>& out) {
    NBox big;
    if (!nbox_clip(b, t, big)) return;
    double half = 0.5 * t;
    for (int a = 0; a < b.n; ++a) {
        for (int side = 0; side < 2; ++side) {
            NBox p = big;
            bool ok = true;
            for (int e = 0; e < a; ++e) {
                p.lo[e] = std::max(big.lo[e], -half);
                p.hi[e] = std::min(big.hi[e], half);
                if (p.lo[e] >= p.hi[e]) ok = false;
            }
            if (!ok) continue;
            if (side == 0) {
                p.lo[a] = std::max(big.lo[a], half);
                p.hi[a] = big.hi[a];
            } else {
                p.lo[a] = big.lo[a];
                p.hi[a] = std::min(big.hi[a], -half);
            }
            if (p.lo[a] < p.hi[a]) out.push_back(p);
        }
    }
}

}  // namespace

double weight_at(const WeightedMeasure& m, const std::array<double, max_dim>& x) {
    if (m.normal_dims == 0) return 1.0;
    double r2 = 0.0;
    for (int a = m.boundary_dim(); a < m.ambient_dim; ++a) r2 += x[a] * x[a];
    double r = std::sqrt(r2);
    if (r >= 1.0) return 1.0;
    if (r == 0.0) return m.alpha == 0.0 ? 1.0 : (m.alpha > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return std::pow(r, m.alpha);
}

double weight_line_integral(double a, double b, double alpha) {
    if (b < a) std::swap(a, b);
    double s = 0.0;
    if (a < 0.0) s += clamped_piece(std::max(0.0, -b), -a, alpha);
    if (b > 0.0) s += clamped_piece(std::max(0.0, a), b, alpha);
    return s;
}

double normal_box_integral(const std::array<double, 2 * max_dim>& lohi, int n, double alpha,
                           double rel_tol) {
    if (n < 2 || n > 3) throw std::domain_error("normal_box_integral: codim must be 2 or 3");
    NBox b;
    b.n = n;
    for (int a = 0; a < n; ++a) {
        b.lo[a] = lohi[2 * a];
        b.hi[a] = lohi[2 * a + 1];
        if (b.hi[a] < b.lo[a]) throw std::domain_error("normal_box_integral: empty axis");
        if (b.hi[a] == b.lo[a]) return 0.0;
    }
    if (n == 2) {
        // split at the axes and fold into the first quadrant (weight is even)
        double total = 0.0;
        for (int sx = 0; sx < 2; ++sx)
            for (int sy = 0; sy < 2; ++sy) {
                double a0 = sx ? std::max(0.0, -b.hi[0]) : std::max(0.0, b.lo[0]);
                double b0 = sx ? -b.lo[0] : b.hi[0];
                double c0 = sy ? std::max(0.0, -b.hi[1]) : std::max(0.0, b.lo[1]);
                double d0 = sy ? -b.lo[1] : b.hi[1];
                if (b0 > a0 && d0 > c0) total += quadrant_box_polar(a0, b0, c0, d0, alpha);
            }
        return total;
    }
    // n == 3: sup-norm shells toward the singular point, plain Gauss per piece
    double vol = 1.0;
    for (int a = 0; a < n; ++a) vol *= b.hi[a] - b.lo[a];
    if (nbox_dist2(b) > 0.0) return nbox_adaptive(b, alpha, rel_tol * vol);
    double t = std::sqrt(nbox_rad2(b));
    double total = 0.0;
    std::vector<NBox> pieces;
    for (int j = 0; j < 300; ++j) {
        pieces.clear();
        shell_pieces(b, t, pieces);
        double shell = 0.0;
        for (const NBox& p : pieces) shell += nbox_adaptive(p, alpha, rel_tol * vol);
        total += shell;
        t *= 0.5;
        if (t < 1e-40) break;
        if (j > 6 && shell < rel_tol * 0.01 * total) break;
    }
    return total;
}

double box_measure(const WeightedMeasure& m, const std::array<double, 2 * max_dim>& lohi) {
    double horiz = 1.0;
    int bd = m.boundary_dim();
    for (int a = 0; a < bd; ++a) {
        double len = lohi[2 * a + 1] - lohi[2 * a];
        if (len < 0.0) throw std::domain_error("box_measure: empty axis");
        horiz *= len;
    }
    if (m.normal_dims == 0) return horiz;
    if (m.normal_dims == 1) return horiz * weight_line_integral(lohi[2 * bd], lohi[2 * bd + 1], m.alpha);
    std::array<double, 2 * max_dim> normal{};
    for (int a = 0; a < m.normal_dims; ++a) {
        normal[2 * a] = lohi[2 * (bd + a)];
        normal[2 * a + 1] = lohi[2 * (bd + a) + 1];
    }
    return horiz * normal_box_integral(normal, m.normal_dims, m.alpha);
}

double box_measure(const WeightedMeasure& m, const Box& b) {
    if (b.dim != m.ambient_dim) throw std::domain_error("box_measure: dimension mismatch");
    std::array<double, 2 * max_dim> lohi{};
    for (int a = 0; a < b.dim; ++a) {
        lohi[2 * a] = b.axis[a].lo.to_double();
        lohi[2 * a + 1] = b.axis[a].hi.to_double();
    }
    return box_measure(m, lohi);
}

double boundary_ball_measure(const WeightedMeasure& m, double r) {
    if (m.normal_dims < 1) throw std::domain_error("boundary_ball_measure: needs a weighted normal direction");
    if (!(r > 0.0)) return 0.0;
    int d = m.boundary_dim(), n = m.normal_dims;
    double alpha = m.alpha;
    double cd = std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    double sphere = (n == 1) ? 1.0  // upper half-space: one normal ray
                             : 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
    auto f = [&](double u) {
        double base = cd * sphere * std::pow(std::min(1.0, u), alpha);
        if (n >= 2) base *= std::pow(u, n - 1);
        return base * std::pow(std::max(r * r - u * u, 0.0), 0.5 * d);
    };
    // grade toward u = 0 (weight singularity) and u = r (sqrt factor);
    // the weight kink at u = 1 is inserted as a breakpoint when inside range
    double mid = 0.5 * r;
    std::vector<double> ks_left, ks_right;
    if (1.0 < mid) ks_left.push_back(1.0);
    if (1.0 > mid && 1.0 < r) ks_right.push_back(r - 1.0);
    double left = integrate_graded(f, 0.0, mid, ks_left);
    auto g = [&](double v) { return f(r - v); };
    double right = integrate_graded(g, 0.0, mid, ks_right);
    return left + right;
}

double boundary_ball_ratio(const WeightedMeasure& m, double r) {
    return boundary_ball_measure(m, r) / std::pow(r, m.ambient_dim + m.alpha);
}

}  // namespace whitney
