#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace whitney::oracle {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}
std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

// index range of level-m cubes whose closures meet the closure of the
// level-k cube with index i along one axis: j*2^{-m} <= (i+1)*2^{-k} and
// (j+1)*2^{-m} >= i*2^{-k}
void touch_range(int k, std::int64_t i, int m, std::int64_t& jlo, std::int64_t& jhi) {
    if (m >= k) {
        const std::int64_t f = std::int64_t{1} << (m - k);
        jlo = i * f - 1;
        jhi = (i + 1) * f;
    } else {
        const std::int64_t f = std::int64_t{1} << (k - m);
        jlo = ceil_div(i - f, f);
        jhi = floor_div(i + 1, f);
    }
}

// sum (or sup) of |vQ - avg(Q')|^e over all touching cubes Q' at levels
// k-1..k+1 clipped to [0, K]
long double touching_oscillation(const Pyramid& pyr, int k, const std::array<std::int64_t, max_dim>& i,
                                 double vQ, double e, bool sup_mode) {
    const int D = pyr.dim();
    const int K = pyr.top_level();
    const bool hs = pyr.half_space();
    long double acc = 0.0;
    for (int m = std::max(0, k - 1); m <= std::min(K, k + 1); ++m) {
        std::array<std::int64_t, max_dim> jlo{}, jhi{}, j{};
        for (int a = 0; a < D; ++a) {
            touch_range(k, i[static_cast<std::size_t>(a)], m, jlo[static_cast<std::size_t>(a)],
                        jhi[static_cast<std::size_t>(a)]);
        }
        if (hs) jlo[static_cast<std::size_t>(D - 1)] = std::max<std::int64_t>(jlo[static_cast<std::size_t>(D - 1)], 0);
        j = jlo;
        for (;;) {
            const long double d = std::fabs(vQ - pyr.average(m, j));
            if (sup_mode) acc = std::max(acc, d);
            else if (d != 0.0) acc += std::pow(static_cast<double>(d), e);
            int a = 0;
            for (; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                if (++j[ua] <= jhi[ua]) break;
                j[ua] = jlo[ua];
            }
            if (a == D) break;
        }
    }
    return acc;
}

constexpr int wide_margin = 8;  // anything further contributes nothing

template <typename F>
void over_hull_ring(const Pyramid& pyr, int k, int margin, F&& body) {
    const int D = pyr.dim();
    const Pyramid::Level& L = pyr.level(k);
    std::array<std::int64_t, max_dim> lo{}, hi{}, idx{};
    for (int a = 0; a < D; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = L.lo[ua] - margin;
        hi[ua] = L.lo[ua] + L.n[ua] + margin;
    }
    if (pyr.half_space()) lo[static_cast<std::size_t>(D - 1)] = std::max<std::int64_t>(lo[static_cast<std::size_t>(D - 1)], 0);
    idx = lo;
    for (;;) {
        body(static_cast<const std::array<std::int64_t, max_dim>&>(idx));
        int a = 0;
        for (; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (++idx[ua] < hi[ua]) break;
            idx[ua] = lo[ua];
        }
        if (a == D) break;
    }
}

long double finest_lp(const Pyramid& pyr, double p) {
    const int D = pyr.dim();
    const int K = pyr.top_level();
    const Pyramid::Level& L = pyr.level(K);
    std::array<std::int64_t, max_dim> lo = L.lo, hi{}, idx{};
    for (int a = 0; a < D; ++a)
        hi[static_cast<std::size_t>(a)] = L.lo[static_cast<std::size_t>(a)] + L.n[static_cast<std::size_t>(a)];
    long double acc = 0.0;
    idx = lo;
    for (;;) {
        const double v = std::fabs(pyr.average(K, idx));
        if (p == inf) acc = std::max<long double>(acc, v);
        else if (v != 0.0) acc += static_cast<long double>(pyr.mass(K, idx)) * std::pow(v, p);
        int a = 0;
        for (; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (++idx[ua] < hi[ua]) break;
            idx[ua] = lo[ua];
        }
        if (a == D) break;
    }
    return p == inf ? acc : std::pow(static_cast<double>(acc), 1.0 / p);
}

// dense per-level table of the q-oscillation, indexed over a margin ring
struct OscGrid {
    std::array<std::int64_t, max_dim> lo{}, hi{};
    std::vector<double> val;

    double at(int D, const std::array<std::int64_t, max_dim>& idx) const {
        std::size_t flat = 0;
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (idx[ua] < lo[ua] || idx[ua] >= hi[ua]) return 0.0;
            flat = flat * static_cast<std::size_t>(hi[ua] - lo[ua]) + static_cast<std::size_t>(idx[ua] - lo[ua]);
        }
        return val[flat];
    }
};

OscGrid build_grid(const Pyramid& pyr, int k, double q, bool qsup) {
    OscGrid G;
    const int D = pyr.dim();
    const Pyramid::Level& L = pyr.level(k);
    for (int a = 0; a < D; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        G.lo[ua] = L.lo[ua] - wide_margin;
        G.hi[ua] = L.lo[ua] + L.n[ua] + wide_margin;
    }
    if (pyr.half_space()) G.lo[static_cast<std::size_t>(D - 1)] = std::max<std::int64_t>(G.lo[static_cast<std::size_t>(D - 1)], 0);
    std::size_t tot = 1;
    for (int a = 0; a < D; ++a) tot *= static_cast<std::size_t>(G.hi[static_cast<std::size_t>(a)] - G.lo[static_cast<std::size_t>(a)]);
    G.val.assign(tot, 0.0);
    std::size_t flat = 0;
    over_hull_ring(pyr, k, wide_margin, [&](const std::array<std::int64_t, max_dim>& idx) {
        const double vQ = pyr.average(k, idx);
        G.val[flat++] = static_cast<double>(touching_oscillation(pyr, k, idx, vQ, q, qsup));
    });
    return G;
}

}  // namespace

double besov_total(const Pyramid& pyr, double s, double p, double q) {
    const int K = pyr.top_level();
    const bool psup = (p == inf);
    std::vector<long double> ek(static_cast<std::size_t>(K) + 1, 0.0L);
    for (int k = K; k >= 0; --k) {
        long double Sk = 0.0;
        over_hull_ring(pyr, k, wide_margin, [&](const std::array<std::int64_t, max_dim>& idx) {
            const double vQ = pyr.average(k, idx);
            const long double osc = touching_oscillation(pyr, k, idx, vQ, p, psup);
            if (psup) Sk = std::max(Sk, osc);
            else if (osc != 0.0) Sk += static_cast<long double>(pyr.mass(k, idx)) * osc;
        });
        const double root = psup ? static_cast<double>(Sk)
                                 : std::pow(static_cast<double>(Sk), 1.0 / p);
        ek[static_cast<std::size_t>(k)] = std::pow(2.0, k * s) * root;
    }
    long double energy = 0.0;
    if (q == inf) {
        for (long double v : ek) energy = std::max(energy, v);
    } else {
        for (long double v : ek) energy += std::pow(static_cast<double>(v), q);
        energy = std::pow(static_cast<double>(energy), 1.0 / q);
    }
    return static_cast<double>(finest_lp(pyr, p) + energy);
}

namespace {

// shared tower integral: for each finest cube R in the widened level-0 cone,
// aggregate coeff_k * table_k(anc_k(R)) in l^q and integrate mass * (.)^{p/q}
double tower_integral(const Pyramid& pyr, const std::vector<OscGrid>& tab, double s, double p,
                      double q, bool near_only, int normal_dims, double multiplicity) {
    const int D = pyr.dim();
    const int K = pyr.top_level();
    const bool qsup = (q == inf);
    const Pyramid::Level& L0 = pyr.level(0);
    std::array<std::int64_t, max_dim> lo{}, hi{}, idx{}, anc{};
    for (int a = 0; a < D; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = (L0.lo[ua] - wide_margin) * (std::int64_t{1} << K);
        hi[ua] = (L0.lo[ua] + L0.n[ua] + wide_margin) * (std::int64_t{1} << K);
    }
    if (pyr.half_space()) lo[static_cast<std::size_t>(D - 1)] = std::max<std::int64_t>(lo[static_cast<std::size_t>(D - 1)], 0);
    if (near_only) {
        // towers only ever collect terms from cubes whose normal indices sit
        // in {-1,0}, so finest cubes outside their descendant span never count
        for (int a = D - normal_dims; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            lo[ua] = -(std::int64_t{1} << K);
            hi[ua] = std::int64_t{1} << K;
        }
    }
    std::vector<double> coeff(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) coeff[static_cast<std::size_t>(k)] = std::pow(2.0, qsup ? k * s : k * s * q);

    long double total = 0.0;
    idx = lo;
    for (;;) {
        long double tower = 0.0;
        for (int k = 0; k <= K; ++k) {
            bool near = true;
            for (int a = 0; a < D; ++a) {
                anc[static_cast<std::size_t>(a)] = floor_div(idx[static_cast<std::size_t>(a)], std::int64_t{1} << (K - k));
            }
            if (near_only)
                for (int a = D - normal_dims; a < D && near; ++a) {
                    const std::int64_t v = anc[static_cast<std::size_t>(a)];
                    if (v < -1 || v > 0) near = false;
                }
            if (!near) continue;
            const double E = multiplicity * tab[static_cast<std::size_t>(k)].at(D, anc);
            if (E == 0.0) continue;
            if (qsup) tower = std::max<long double>(tower, coeff[static_cast<std::size_t>(k)] * E);
            else tower += coeff[static_cast<std::size_t>(k)] * E;
        }
        if (tower != 0.0)
            total += static_cast<long double>(pyr.mass(K, idx)) *
                     std::pow(static_cast<double>(tower), qsup ? p : p / q);
        int a = 0;
        for (; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (++idx[ua] < hi[ua]) break;
            idx[ua] = lo[ua];
        }
        if (a == D) break;
    }
    return std::pow(static_cast<double>(total), 1.0 / p);
}

}  // namespace

double triebel_total(const Pyramid& pyr, double s, double p, double q) {
    const int K = pyr.top_level();
    const bool qsup = (q == inf);
    std::vector<OscGrid> tab;
    tab.reserve(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) tab.push_back(build_grid(pyr, k, q, qsup));
    const double energy = tower_integral(pyr, tab, s, p, q, false, 0, 1.0);
    return static_cast<double>(finest_lp(pyr, p)) + energy;
}

double tent_total(const Pyramid& pyr, double s, double p, double q) {
    const int D = pyr.dim();
    const int d = D - 1;
    const int K = pyr.top_level();
    const bool qsup = (q == inf);

    // per-level tables of the tent-cube oscillation, horizontal index only
    std::vector<OscGrid> tab(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        OscGrid& G = tab[static_cast<std::size_t>(k)];
        const Pyramid::Level& L = pyr.level(k);
        std::size_t tot = 1;
        for (int a = 0; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            G.lo[ua] = L.lo[ua] - wide_margin;
            G.hi[ua] = L.lo[ua] + L.n[ua] + wide_margin;
            tot *= static_cast<std::size_t>(G.hi[ua] - G.lo[ua]);
        }
        G.val.assign(tot, 0.0);
        std::array<std::int64_t, max_dim> h{};
        for (int a = 0; a < d; ++a) h[static_cast<std::size_t>(a)] = G.lo[static_cast<std::size_t>(a)];
        std::size_t flat = 0;
        for (;;) {
            std::array<std::int64_t, max_dim> t = h;
            t[static_cast<std::size_t>(d)] = 0;
            const double vN = pyr.average(k, t);
            G.val[flat++] = static_cast<double>(touching_oscillation(pyr, k, t, vN, q, qsup));
            int a = 0;
            for (; a < d; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                if (++h[ua] < G.hi[ua]) break;
                h[ua] = G.lo[ua];
            }
            if (a == d) break;
        }
    }

    std::vector<double> coeff(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) coeff[static_cast<std::size_t>(k)] = std::pow(2.0, qsup ? k * s : k * s * q);

    // integrate over finest cells of the unit-height strip: the tents
    // containing the vertical cell j are the levels with j < 2^{K-k}
    const Pyramid::Level& L0 = pyr.level(0);
    std::array<std::int64_t, max_dim> lo{}, hi{}, h{}, anc{}, cell{};
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = (L0.lo[ua] - wide_margin) * (std::int64_t{1} << K);
        hi[ua] = (L0.lo[ua] + L0.n[ua] + wide_margin) * (std::int64_t{1} << K);
    }
    long double total = 0.0;
    h = lo;
    for (;;) {
        for (std::int64_t j = 0; j < (std::int64_t{1} << K); ++j) {
            long double tower = 0.0;
            for (int k = 0; k <= K; ++k) {
                if (j >= (std::int64_t{1} << (K - k))) break;  // tent too short
                for (int a = 0; a < d; ++a)
                    anc[static_cast<std::size_t>(a)] = floor_div(h[static_cast<std::size_t>(a)], std::int64_t{1} << (K - k));
                const double Dk = tab[static_cast<std::size_t>(k)].at(d, anc);
                if (Dk == 0.0) continue;
                if (qsup) tower = std::max<long double>(tower, coeff[static_cast<std::size_t>(k)] * Dk);
                else tower += coeff[static_cast<std::size_t>(k)] * Dk;
            }
            if (tower == 0.0) continue;
            for (int a = 0; a < d; ++a) cell[static_cast<std::size_t>(a)] = h[static_cast<std::size_t>(a)];
            cell[static_cast<std::size_t>(d)] = j;
            total += static_cast<long double>(pyr.mass(K, cell)) *
                     std::pow(static_cast<double>(tower), qsup ? p : p / q);
        }
        int a = 0;
        for (; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (++h[ua] < hi[ua]) break;
            h[ua] = lo[ua];
        }
        if (a == d) break;
    }
    return std::pow(static_cast<double>(total), 1.0 / p);
}

double codim_total(const Pyramid& pyr, int codim, double s, double p, double q) {
    const int D = pyr.dim();
    const int d = D - codim;
    const int K = pyr.top_level();
    const bool qsup = (q == inf);

    // near-band tables: horizontal ring x {-1,0}^n
    std::vector<OscGrid> tab(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        OscGrid& G = tab[static_cast<std::size_t>(k)];
        const Pyramid::Level& L = pyr.level(k);
        for (int a = 0; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            G.lo[ua] = L.lo[ua] - wide_margin;
            G.hi[ua] = L.lo[ua] + L.n[ua] + wide_margin;
        }
        for (int a = d; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            G.lo[ua] = -1;
            G.hi[ua] = 1;
        }
        std::size_t tot = 1;
        for (int a = 0; a < D; ++a) tot *= static_cast<std::size_t>(G.hi[static_cast<std::size_t>(a)] - G.lo[static_cast<std::size_t>(a)]);
        G.val.assign(tot, 0.0);
        std::array<std::int64_t, max_dim> idx{};
        for (int a = 0; a < D; ++a) idx[static_cast<std::size_t>(a)] = G.lo[static_cast<std::size_t>(a)];
        std::size_t flat = 0;
        for (;;) {
            const double vQ = pyr.average(k, idx);
            G.val[flat++] = static_cast<double>(touching_oscillation(pyr, k, idx, vQ, q, qsup));
            int a = D - 1;
            for (; a >= 0; --a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                if (++idx[ua] < G.hi[ua]) break;
                idx[ua] = G.lo[ua];
            }
            if (a < 0) break;
        }
    }
    const double mult = qsup ? 1.0 : std::ldexp(1.0, d);  // one tower per touching boundary cube
    return tower_integral(pyr, tab, s, p, q, true, codim, mult);
}

// ---- Riemann measure oracle ---------------------------------------------------

namespace {

// midpoint rule over n uniform cells of |t|^alpha (t in (u,v), 0 < u < v)
long double midpoint_power(double u, double v, double alpha, int cells) {
    const double h = (v - u) / cells;
    long double acc = 0.0;
    for (int i = 0; i < cells; ++i) acc += std::pow(u + (i + 0.5) * h, alpha);
    return acc * h;
}

// (0, v): geometric shells toward the singular end
long double graded_power(double v, double alpha, int cells) {
    long double acc = 0.0;
    double hi = v;
    for (int shell = 0; shell < 64 && hi > 1e-300; ++shell) {
        const double lo = hi * 0.5;
        acc += midpoint_power(lo, hi, alpha, cells);
        // remaining mass below lo is lo^{1+alpha}/(1+alpha) exactly; stop
        // when even a crude bound cannot move the 12th digit
        if (std::pow(lo, 1.0 + alpha) < 1e-16 * static_cast<double>(acc) * (1.0 + alpha)) break;
        hi = lo;
    }
    return acc;
}

// (u, v) with 0 < u < v: octave spans from u keep the relative midpoint
// error ~ cells^-2 even when u sits close to the singularity
long double spanned_power(double u, double v, double alpha, int cells) {
    long double acc = 0.0;
    double lo = u;
    while (lo < v) {
        const double hi = std::min(v, 2.0 * lo);
        acc += midpoint_power(lo, hi, alpha, cells);
        lo = hi;
    }
    return acc;
}

}  // namespace

double riemann_line_weight(double a, double b, double alpha, int cells) {
    if (b < a) return riemann_line_weight(b, a, alpha, cells);
    long double acc = 0.0;
    // split at the weight's breakpoints -1, 0, 1
    const double cuts[3] = {-1.0, 0.0, 1.0};
    std::vector<double> pts{a};
    for (double c : cuts)
        if (c > a && c < b) pts.push_back(c);
    pts.push_back(b);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double u = pts[i], v = pts[i + 1];
        if (u >= 1.0 || v <= -1.0) {
            acc += (v - u);  // weight is 1 outside [-1,1]
        } else if (u >= 0.0) {
            if (u == 0.0) acc += graded_power(v, alpha, cells);
            else acc += spanned_power(u, v, alpha, cells);
        } else {  // v <= 0, mirror
            if (v == 0.0) acc += graded_power(-u, alpha, cells);
            else acc += spanned_power(-v, -u, alpha, cells);
        }
    }
    return static_cast<double>(acc);
}

double riemann_box_mass_codim1(const WeightedMeasure& m,
                               const std::array<double, 2 * max_dim>& lohi) {
    if (m.normal_dims != 1) throw std::invalid_argument("riemann_box_mass_codim1: codim 1 only");
    const int D = m.ambient_dim;
    double horiz = 1.0;
    for (int a = 0; a + 1 < D; ++a)
        horiz *= lohi[static_cast<std::size_t>(2 * a + 1)] - lohi[static_cast<std::size_t>(2 * a)];
    return horiz * riemann_line_weight(lohi[static_cast<std::size_t>(2 * (D - 1))],
                                       lohi[static_cast<std::size_t>(2 * (D - 1) + 1)], m.alpha);
}

}  // namespace whitney::oracle
