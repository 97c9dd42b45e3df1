#include "whitney/extension.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace whitney {

namespace {

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

constexpr double rim = 17.0 / 8.0;  // outer edge of the level-0 cover

// one-axis plateau profile: 1 on [lo, hi], quintic ramps over a margin of
// width m on both sides, 0 beyond
inline double axis_profile(double x, double lo, double hi, double m, double* deriv) {
    if (deriv) *deriv = 0.0;
    if (x <= lo - m || x >= hi + m) return 0.0;
    if (x < lo) {
        const double v = (x - (lo - m)) / m;
        if (deriv) *deriv = smooth_ramp_deriv(v) / m;
        return smooth_ramp(v);
    }
    if (x <= hi) return 1.0;
    const double v = ((hi + m) - x) / m;
    if (deriv) *deriv = -smooth_ramp_deriv(v) / m;
    return smooth_ramp(v);
}

struct Candidate {
    double fval = 0.0;
    double phi = 0.0;
    std::array<double, max_dim> dphi{};
};

// shell index j with 2^{-j} < r <= 2^{-j+1}, clamped to >= 0
int shell_level(double r) {
    int j = static_cast<int>(std::floor(-std::log2(r)));
    while (std::ldexp(1.0, -j) >= r) ++j;          // ensure 2^{-j} < r
    while (j > 0 && std::ldexp(1.0, -j + 1) < r) --j;  // ensure r <= 2^{-j+1}
    return std::max(j, 0);
}

}  // namespace

double smooth_ramp(double v) {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    return v * v * v * (10.0 + v * (-15.0 + 6.0 * v));
}

double smooth_ramp_deriv(double v) {
    if (v <= 0.0 || v >= 1.0) return 0.0;
    const double w = v * (1.0 - v);
    return 30.0 * w * w;
}

double cover_bump(const DyadicCube& c, const std::array<double, max_dim>& x,
                  std::array<double, max_dim>* grad) {
    const double l = std::ldexp(1.0, -c.level), m = l / 8.0;
    std::array<double, max_dim> p{}, dp{};
    double phi = 1.0;
    for (int a = 0; a < c.dim; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        const double lo = static_cast<double>(c.idx[ua]) * l;
        p[ua] = axis_profile(x[ua], lo, lo + l, m, grad ? &dp[ua] : nullptr);
        phi *= p[ua];
    }
    if (grad) {
        for (int a = 0; a < c.dim; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            double g = dp[ua];
            for (int b = 0; b < c.dim; ++b)
                if (b != a) g *= p[static_cast<std::size_t>(b)];
            (*grad)[ua] = g;
        }
    }
    return phi;
}

namespace {

// appends all cover cubes with a nonzero bump at x
void enumerate_cover(int d, int n, const std::array<double, max_dim>& x,
                     std::vector<DyadicCube>& out) {
    out.clear();
    const int D = d + n;
    double r;
    if (n == 1) {
        r = x[static_cast<std::size_t>(d)];
        if (r <= 0.0) throw std::domain_error("extension cover: boundary or lower half-space");
    } else {
        r = 0.0;
        for (int a = d; a < D; ++a) r = std::max(r, std::abs(x[static_cast<std::size_t>(a)]));
        if (r == 0.0) throw std::domain_error("extension cover: point on the boundary plane");
    }
    if (r >= rim) return;
    if (r < std::ldexp(1.0, -48))
        throw std::domain_error("extension cover: below the supported evaluation depth");

    const int jc = shell_level(r);
    for (int k = std::max(0, jc - 1); k <= jc + 2; ++k) {
        const double l = std::ldexp(1.0, -k);
        // per-axis candidate indices
        std::array<std::array<std::int64_t, 4>, max_dim> cand{};
        std::array<int, max_dim> ncand{};
        bool feasible = true;
        for (int a = 0; a < d && feasible; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            const double s = x[ua] / l;
            const std::int64_t mlo = static_cast<std::int64_t>(std::ceil(s - 9.0 / 8.0)) - 1;
            int cnt = 0;
            for (std::int64_t mm = mlo; mm <= mlo + 3; ++mm)
                if (axis_profile(x[ua], static_cast<double>(mm) * l, static_cast<double>(mm + 1) * l,
                                 l / 8.0, nullptr) > 0.0)
                    cand[ua][static_cast<std::size_t>(cnt)] = mm, ++cnt;
            ncand[ua] = cnt;
            feasible = cnt > 0;
        }
        if (n == 1) {
            const std::size_t uv = static_cast<std::size_t>(d);
            feasible = feasible && axis_profile(x[uv], l, 2.0 * l, l / 8.0, nullptr) > 0.0;
            cand[uv][0] = 1;
            ncand[uv] = 1;
        } else {
            for (int a = d; a < D && feasible; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                int cnt = 0;
                for (std::int64_t ii = -2; ii <= 1; ++ii)
                    if (axis_profile(x[ua], static_cast<double>(ii) * l, static_cast<double>(ii + 1) * l,
                                     l / 8.0, nullptr) > 0.0)
                        cand[ua][static_cast<std::size_t>(cnt)] = ii, ++cnt;
                ncand[ua] = cnt;
                feasible = cnt > 0;
            }
        }
        if (!feasible) continue;

        // cartesian product of per-axis candidates
        std::array<int, max_dim> pick{};
        for (;;) {
            DyadicCube c;
            c.level = k;
            c.dim = D;
            c.half_space = false;
            for (int a = 0; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                c.idx[ua] = cand[ua][static_cast<std::size_t>(pick[ua])];
            }
            bool keep = true;
            if (n >= 2) {  // annulus: not all normal indices in {-1, 0}
                keep = false;
                for (int a = d; a < D; ++a) {
                    const std::int64_t ii = c.idx[static_cast<std::size_t>(a)];
                    if (ii < -1 || ii > 0) keep = true;
                }
            }
            if (keep) out.push_back(c);
            int a = 0;
            for (; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                if (++pick[ua] < ncand[ua]) break;
                pick[ua] = 0;
            }
            if (a == D) break;
        }
    }
}

// ceiling bump: 0 on the covered region, rising to 1 past the outermost
// shell so the Shepard denominator never degenerates where the field dies
double ceiling_bump(int d, int n, const std::array<double, max_dim>& x,
                    std::array<double, max_dim>* grad) {
    if (grad) grad->fill(0.0);
    if (n == 1) {
        const std::size_t uv = static_cast<std::size_t>(d);
        const double v = (x[uv] - 2.0) * 8.0;
        if (grad) (*grad)[uv] = smooth_ramp_deriv(v) * 8.0;
        return smooth_ramp(v);
    }
    // 1 - prod_a kappa(z_a), kappa = coverage profile of [-2, 2]
    std::array<double, max_dim> kap{}, dkap{};
    double prod = 1.0;
    for (int a = d; a < d + n; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        kap[ua] = axis_profile(x[ua], -2.0, 2.0, 1.0 / 8.0, grad ? &dkap[ua] : nullptr);
        prod *= kap[ua];
    }
    if (grad) {
        for (int a = d; a < d + n; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            double g = -dkap[ua];
            for (int b = d; b < d + n; ++b)
                if (b != a) g *= kap[static_cast<std::size_t>(b)];
            (*grad)[ua] = g;
        }
    }
    return 1.0 - prod;
}

}  // namespace

std::vector<DyadicCube> cover_cubes_at(int d, int n, const std::array<double, max_dim>& x) {
    std::vector<DyadicCube> out;
    enumerate_cover(d, n, x, out);
    return out;
}

double shepard_denominator(int d, int n, const std::array<double, max_dim>& x,
                           std::array<double, max_dim>* grad) {
    thread_local std::vector<DyadicCube> cubes;
    enumerate_cover(d, n, x, cubes);
    double den = 0.0;
    if (grad) grad->fill(0.0);
    std::array<double, max_dim> g{};
    for (const DyadicCube& c : cubes) {
        den += cover_bump(c, x, grad ? &g : nullptr);
        if (grad)
            for (int a = 0; a < d + n; ++a) (*grad)[static_cast<std::size_t>(a)] += g[static_cast<std::size_t>(a)];
    }
    den += ceiling_bump(d, n, x, grad ? &g : nullptr);
    if (grad)
        for (int a = 0; a < d + n; ++a) (*grad)[static_cast<std::size_t>(a)] += g[static_cast<std::size_t>(a)];
    return den;
}

BumpPartition build_partition(int d, int n, int K) {
    if (d < 1 || d + n > max_dim || n < 1) throw std::invalid_argument("build_partition: bad dims");
    BumpPartition part;
    part.boundary_dim = d;
    part.codim = n;
    part.max_level = K;
    part.min_shepard = std::numeric_limits<double>::infinity();
    part.max_scaled_gradient = 0.0;

    thread_local std::vector<DyadicCube> cubes;
    std::array<double, max_dim> x{}, gD{}, gphi{};
    auto probe = [&](const std::array<double, max_dim>& pt) {
        enumerate_cover(d, n, pt, cubes);
        double den = 0.0;
        std::array<double, max_dim> sg{};
        std::vector<double> phis(cubes.size());
        std::vector<std::array<double, max_dim>> dphis(cubes.size());
        for (std::size_t i = 0; i < cubes.size(); ++i) {
            phis[i] = cover_bump(cubes[i], pt, &dphis[i]);
            den += phis[i];
            for (int a = 0; a < d + n; ++a) sg[static_cast<std::size_t>(a)] += dphis[i][static_cast<std::size_t>(a)];
        }
        den += ceiling_bump(d, n, pt, &gD);
        for (int a = 0; a < d + n; ++a) sg[static_cast<std::size_t>(a)] += gD[static_cast<std::size_t>(a)];
        part.min_shepard = std::min(part.min_shepard, den);
        for (std::size_t i = 0; i < cubes.size(); ++i) {
            double norm2 = 0.0;
            for (int a = 0; a < d + n; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                const double gpsi = dphis[i][ua] / den - phis[i] * sg[ua] / (den * den);
                norm2 += gpsi * gpsi;
            }
            part.max_scaled_gradient = std::max(
                part.max_scaled_gradient, std::sqrt(norm2) * std::ldexp(1.0, -cubes[i].level));
        }
    };

    const int kmax = std::min(K, 4);
    for (int k = 0; k <= kmax; ++k) {
        const double l = std::ldexp(1.0, -k);
        const int hsteps = 10 * (1 << std::min(k, 3));
        for (int hi = 0; hi <= hsteps; ++hi) {
            x[0] = -0.25 + 1.75 * static_cast<double>(hi) / static_cast<double>(hsteps);
            for (int a = 1; a < d; ++a) x[static_cast<std::size_t>(a)] = x[0] * 0.5 + 0.25;
            if (n == 1) {
                for (int j = 0; j <= 16; ++j) {
                    x[static_cast<std::size_t>(d)] = l * (1.0 + static_cast<double>(j) / 16.0);
                    probe(x);
                }
                if (k == 0)  // decay slab
                    for (int j = 1; j <= 8; ++j) {
                        x[static_cast<std::size_t>(d)] = 2.0 + static_cast<double>(j) / 64.0;
                        probe(x);
                    }
            } else {
                const int zsteps = 9;
                std::array<int, max_dim> zi{};
                for (;;) {
                    double rr = 0.0;
                    for (int a = 0; a < n; ++a) {
                        const double z =
                            -2.2 * l + 4.4 * l * static_cast<double>(zi[static_cast<std::size_t>(a)]) / zsteps;
                        x[static_cast<std::size_t>(d + a)] = z;
                        rr = std::max(rr, std::abs(z));
                    }
                    if (rr > 0.5 * l && rr < (k == 0 ? rim + 0.1 : 2.2 * l)) probe(x);
                    int a = 0;
                    for (; a < n; ++a) {
                        const std::size_t ua = static_cast<std::size_t>(a);
                        if (++zi[ua] <= zsteps) break;
                        zi[ua] = 0;
                    }
                    if (a == n) break;
                }
            }
        }
    }
    (void)gphi;
    if (!(part.min_shepard >= 1.0 - 1e-12))
        throw std::logic_error("cover bumps failed to dominate 1 on the sampled region");
    return part;
}

// ---- extension field --------------------------------------------------------

ExtensionField::ExtensionField(std::shared_ptr<const Pyramid> boundary_avgs, int codim)
    : boundary_(std::move(boundary_avgs)), n_(codim) {
    if (!boundary_) throw std::invalid_argument("extension: null boundary data");
    d_ = boundary_->dim();
    K_ = boundary_->top_level();
    if (n_ < 1 || d_ + n_ > max_dim) throw std::invalid_argument("extension: bad codimension");
}

double ExtensionField::eval(const std::array<double, max_dim>& x, bool need_grad,
                            std::array<double, max_dim>* grad) const {
    const int D = d_ + n_;
    if (grad) grad->fill(0.0);
    double r;
    if (n_ == 1) {
        r = x[static_cast<std::size_t>(d_)];
        if (r <= 0.0) throw std::domain_error("extension: evaluated on or below the boundary");
    } else {
        r = 0.0;
        for (int a = d_; a < D; ++a) r = std::max(r, std::abs(x[static_cast<std::size_t>(a)]));
        if (r == 0.0) throw std::domain_error("extension: evaluated on the boundary plane");
    }
    if (r >= rim) return 0.0;

    // the active cover and its data values are constant on cells of the
    // l/16 lattice at the shell scale (all membership breakpoints sit on
    // it), so one cached slot serves every quadrature node in a panel
    struct CoverCache {
        const void* owner = nullptr;
        int codim = 0;
        int jc = -1;
        std::array<std::int64_t, max_dim> key{};
        std::vector<DyadicCube> cubes;
        std::vector<double> fvals;
    };
    thread_local CoverCache cc;
    thread_local std::vector<Candidate> cand;

    const int jc = shell_level(r);
    std::array<std::int64_t, max_dim> key{};
    const double pitch = std::ldexp(1.0, jc + 4);
    for (int a = 0; a < D; ++a)
        key[static_cast<std::size_t>(a)] =
            static_cast<std::int64_t>(std::floor(x[static_cast<std::size_t>(a)] * pitch));
    if (cc.owner != static_cast<const void*>(boundary_.get()) || cc.codim != n_ || cc.jc != jc ||
        cc.key != key) {
        cc.owner = boundary_.get();
        cc.codim = n_;
        cc.jc = jc;
        cc.key = key;
        // enumerate from the cell midpoint: a bump active anywhere in the
        // cell is active there, including ones vanishing at the cell edge
        std::array<double, max_dim> mid{};
        for (int a = 0; a < D; ++a)
            mid[static_cast<std::size_t>(a)] =
                (static_cast<double>(key[static_cast<std::size_t>(a)]) + 0.5) / pitch;
        enumerate_cover(d_, n_, mid, cc.cubes);
        cc.fvals.resize(cc.cubes.size());
        for (std::size_t i = 0; i < cc.cubes.size(); ++i) {
            DyadicCube qb;
            qb.level = cc.cubes[i].level;
            qb.dim = d_;
            for (int a = 0; a < d_; ++a)
                qb.idx[static_cast<std::size_t>(a)] = cc.cubes[i].idx[static_cast<std::size_t>(a)];
            cc.fvals[i] = boundary_->step_value(qb);
        }
    }
    cand.clear();
    cand.reserve(cc.cubes.size());

    for (std::size_t i = 0; i < cc.cubes.size(); ++i) {
        Candidate cd;
        cd.phi = cover_bump(cc.cubes[i], x, need_grad ? &cd.dphi : nullptr);
        if (cd.phi == 0.0 && !need_grad) continue;
        cd.fval = cc.fvals[i];
        cand.push_back(cd);
    }

    const bool strip = r <= 2.0;
    double anchor = 0.0;
    if (strip) {
        const int j = std::min(shell_level(r), K_);
        std::array<std::int64_t, max_dim> hidx{};
        const double s = std::ldexp(1.0, j);
        for (int a = 0; a < d_; ++a)
            hidx[static_cast<std::size_t>(a)] =
                static_cast<std::int64_t>(std::ceil(x[static_cast<std::size_t>(a)] * s)) - 1;
        anchor = boundary_->average(j, hidx);
    }

    double den = 0.0, num = 0.0;
    std::array<double, max_dim> gden{}, gnum{};
    for (const Candidate& cd : cand) {
        const double w = strip ? cd.fval - anchor : cd.fval;
        den += cd.phi;
        num += w * cd.phi;
        if (need_grad)
            for (int a = 0; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                gden[ua] += cd.dphi[ua];
                gnum[ua] += w * cd.dphi[ua];
            }
    }
    std::array<double, max_dim> gph{};
    const double ph = ceiling_bump(d_, n_, x, need_grad ? &gph : nullptr);
    den += ph;
    if (need_grad)
        for (int a = 0; a < D; ++a) gden[static_cast<std::size_t>(a)] += gph[static_cast<std::size_t>(a)];

    if (!(den > 0.0)) throw std::logic_error("extension: degenerate cover");
    const double val = strip ? anchor + num / den : num / den;
    if (need_grad && grad) {
        const double inv = 1.0 / den, q = num * inv * inv;
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            (*grad)[ua] = gnum[ua] * inv - q * gden[ua];
        }
    }
    return val;
}

double ExtensionField::value(const std::array<double, max_dim>& x) const {
    return eval(x, false, nullptr);
}

std::array<double, max_dim> ExtensionField::gradient(const std::array<double, max_dim>& x) const {
    std::array<double, max_dim> g{};
    eval(x, true, &g);
    return g;
}

double ExtensionField::value_and_gradient(const std::array<double, max_dim>& x,
                                          std::array<double, max_dim>& grad) const {
    return eval(x, true, &grad);
}

ExtensionField extend(const BoundaryFunction& f, int codim) {
    auto pyr = std::make_shared<Pyramid>(build_pyramid(f, lebesgue(f.dim)));
    return ExtensionField(std::move(pyr), codim);
}

// ---- sampled pyramids of the extension --------------------------------------

Pyramid extension_pyramid(const ExtensionField& g, const WeightedMeasure& mu) {
    if (g.codim() != 1) throw std::invalid_argument("extension_pyramid: codim-1 field expected");
    const int d = g.boundary_dim(), K = g.top_level();
    if (mu.ambient_dim != d + 1) throw std::invalid_argument("extension_pyramid: measure dim mismatch");
    const Pyramid::Level& base = g.boundary().level(K);
    const std::int64_t margin = ((std::int64_t{1} << K) >> 3) + 1;
    std::array<std::int64_t, max_dim> lo{}, n{};
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = base.lo[ua] - margin;
        n[ua] = base.n[ua] + 2 * margin;
    }
    lo[static_cast<std::size_t>(d)] = 0;
    n[static_cast<std::size_t>(d)] = (17 * (std::int64_t{1} << K) + 7) / 8;

    std::size_t total = 1;
    for (int a = 0; a <= d; ++a) total *= static_cast<std::size_t>(n[static_cast<std::size_t>(a)]);
    std::vector<double> vals(total);
    const double h = std::ldexp(1.0, -K);
    std::array<double, max_dim> x{};
    std::array<std::int64_t, max_dim> idx{};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = d; a >= 0; --a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            idx[ua] = lo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(n[ua]));
            rem /= static_cast<std::size_t>(n[ua]);
        }
        for (int a = 0; a <= d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            x[ua] = (static_cast<double>(idx[ua]) + 0.5) * h;
        }
        vals[flat] = g.value(x);
    }
    return Pyramid(d + 1, true, mu, K, lo, n, std::move(vals));
}

Pyramid extension_pyramid_codim(const ExtensionField& g, const WeightedMeasure& mu) {
    const int d = g.boundary_dim(), n_cd = g.codim(), K = g.top_level();
    if (n_cd < 2) throw std::invalid_argument("extension_pyramid_codim: codim >= 2 expected");
    if (mu.ambient_dim != d + n_cd) throw std::invalid_argument("extension_pyramid_codim: measure dim mismatch");
    const Pyramid::Level& base = g.boundary().level(K);
    const std::int64_t margin = ((std::int64_t{1} << K) >> 3) + 1;
    std::array<std::int64_t, max_dim> lo{}, n{};
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = base.lo[ua] - margin;
        n[ua] = base.n[ua] + 2 * margin;
    }
    const std::int64_t nv = (17 * (std::int64_t{1} << K) + 7) / 8;
    for (int a = d; a < d + n_cd; ++a) {
        lo[static_cast<std::size_t>(a)] = -nv;
        n[static_cast<std::size_t>(a)] = 2 * nv;
    }
    std::size_t total = 1;
    for (int a = 0; a < d + n_cd; ++a) total *= static_cast<std::size_t>(n[static_cast<std::size_t>(a)]);
    std::vector<double> vals(total);
    const double h = std::ldexp(1.0, -K);
    std::array<double, max_dim> x{};
    std::array<std::int64_t, max_dim> idx{};
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int a = d + n_cd - 1; a >= 0; --a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            idx[ua] = lo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(n[ua]));
            rem /= static_cast<std::size_t>(n[ua]);
        }
        for (int a = 0; a < d + n_cd; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            x[ua] = (static_cast<double>(idx[ua]) + 0.5) * h;
        }
        vals[flat] = g.value(x);
    }
    return Pyramid(d + n_cd, false, mu, K, lo, n, std::move(vals));
}

}  // namespace whitney
