#include "whitney/norms.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "whitney/quadrature.hpp"

namespace whitney {

namespace {

constexpr int ring_margin = 6;   // covers the reach of every neighbor band
constexpr int root_margin = 8;   // level-0 roots for the tower descents
constexpr double inf = std::numeric_limits<double>::infinity();

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

// |x|^e with fast paths for the common small exponents
struct PowOp {
    double e = 1.0;
    int code = 1;

    static PowOp make(double e) {
        PowOp op;
        op.e = e;
        if (e == 1.0) op.code = 1;
        else if (e == 2.0) op.code = 2;
        else if (e == 3.0) op.code = 3;
        else op.code = 0;
        return op;
    }
    double operator()(double x) const {
        switch (code) {
            case 1: return x;
            case 2: return x * x;
            case 3: return x * x * x;
            default: return std::pow(x, e);
        }
    }
};

template <typename F>
void for_box(int D, const std::array<std::int64_t, max_dim>& lo,
             const std::array<std::int64_t, max_dim>& hi, F&& body) {
    for (int a = 0; a < D; ++a)
        if (hi[static_cast<std::size_t>(a)] <= lo[static_cast<std::size_t>(a)]) return;
    std::array<std::int64_t, max_dim> idx = lo;
    for (;;) {
        body(static_cast<const std::array<std::int64_t, max_dim>&>(idx));
        int a = D - 1;
        for (; a >= 0; --a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (++idx[ua] < hi[ua]) break;
            idx[ua] = lo[ua];
        }
        if (a < 0) break;
    }
}

// ring of cubes at one level that can carry a nonzero oscillation term
void ring_bounds(const Pyramid& pyr, int k, int margin,
                 std::array<std::int64_t, max_dim>& lo, std::array<std::int64_t, max_dim>& hi) {
    const Pyramid::Level& L = pyr.level(k);
    const int D = pyr.dim();
    for (int a = 0; a < D; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        lo[ua] = L.lo[ua] - margin;
        hi[ua] = L.lo[ua] + L.n[ua] + margin;
    }
    if (pyr.half_space()) {
        const std::size_t uv = static_cast<std::size_t>(D - 1);
        lo[uv] = std::max<std::int64_t>(lo[uv], 0);
    }
}

// sum (or sup) of op(|vQ - vQ'|) over the neighbors Q' of the cube
// (k, idx): levels k-1, k, k+1 clipped to [0, K], closures touching,
// restricted to the half-space family when the pyramid carries one
double neighbor_oscillation(const Pyramid& pyr, int k, const std::array<std::int64_t, max_dim>& idx,
                            double vQ, const PowOp& op, bool sup_mode) {
    const int D = pyr.dim();
    const bool hs = pyr.half_space();
    const int vax = D - 1;
    double acc = 0.0;

    auto visit = [&](int lev, const std::array<std::int64_t, max_dim>& nidx) {
        if (hs && nidx[static_cast<std::size_t>(vax)] < 0) return;
        const double d = std::abs(vQ - pyr.average(lev, nidx));
        if (sup_mode) acc = std::max(acc, d);
        else acc += op(d);
    };

    // same level: offsets {-1,0,1}^D
    {
        std::array<std::int64_t, max_dim> lo{}, hi{};
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            lo[ua] = idx[ua] - 1;
            hi[ua] = idx[ua] + 2;
        }
        for_box(D, lo, hi, [&](const std::array<std::int64_t, max_dim>& nidx) { visit(k, nidx); });
    }
    // finer level
    if (k + 1 <= pyr.top_level()) {
        std::array<std::int64_t, max_dim> lo{}, hi{};
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            lo[ua] = 2 * idx[ua] - 1;
            hi[ua] = 2 * idx[ua] + 3;
        }
        for_box(D, lo, hi, [&](const std::array<std::int64_t, max_dim>& nidx) { visit(k + 1, nidx); });
    }
    // coarser level: two parity-dependent indices per axis
    if (k - 1 >= 0) {
        std::array<std::int64_t, max_dim> lo{}, hi{};
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            const std::int64_t base = floordiv(idx[ua], 2);
            if (idx[ua] % 2 == 0) { lo[ua] = base - 1; hi[ua] = base + 1; }
            else { lo[ua] = base; hi[ua] = base + 2; }
        }
        for_box(D, lo, hi, [&](const std::array<std::int64_t, max_dim>& nidx) { visit(k - 1, nidx); });
    }
    return acc;
}

double lp_of_finest(const Pyramid& pyr, double p, const PowOp& op) {
    const int D = pyr.dim();
    const int K = pyr.top_level();
    const Pyramid::Level& L = pyr.level(K);
    std::array<std::int64_t, max_dim> hi{};
    for (int a = 0; a < D; ++a)
        hi[static_cast<std::size_t>(a)] = L.lo[static_cast<std::size_t>(a)] + L.n[static_cast<std::size_t>(a)];
    double acc = 0.0;
    for_box(D, L.lo, hi, [&](const std::array<std::int64_t, max_dim>& idx) {
        const double v = std::abs(pyr.average(K, idx));
        if (p == inf) acc = std::max(acc, v);
        else acc += pyr.mass(K, idx) * op(v);
    });
    return p == inf ? acc : std::pow(acc, 1.0 / p);
}

void lq_aggregate(const std::vector<double>& e, double q, double& energy, double& tail) {
    if (e.empty()) { energy = tail = 0.0; return; }
    if (q == inf) {
        energy = 0.0;
        for (double v : e) energy = std::max(energy, v);
    } else {
        double s = 0.0;
        const PowOp op = PowOp::make(q);
        for (double v : e) s += op(v);
        energy = std::pow(s, 1.0 / q);
    }
    tail = energy > 0.0 ? e.back() / energy : 0.0;
}

// per-level oscillation table over a margin ring
struct OscTable {
    std::array<std::int64_t, max_dim> lo{}, hi{};
    std::vector<double> val;

    double at(int D, const std::array<std::int64_t, max_dim>& idx) const {
        std::size_t flat = 0;
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            const std::int64_t rel = idx[ua] - lo[ua];
            if (rel < 0 || rel >= hi[ua] - lo[ua]) return 0.0;
            flat = flat * static_cast<std::size_t>(hi[ua] - lo[ua]) + static_cast<std::size_t>(rel);
        }
        return val[flat];
    }
};

}  // namespace

bool sobolev_trace_admissible(double p, double alpha, int codim) {
    return p >= 1.0 && p < inf && codim >= 1 && alpha > -codim && alpha < p - codim;
}

bool besov_trace_admissible(double s, double p, double alpha, int codim) {
    return s > 0.0 && s < 1.0 && p >= 1.0 && p < inf && codim >= 1 && alpha > -codim &&
           alpha < s * p - codim;
}

double trace_smoothness(double s, double p, double alpha, int codim) {
    return s - (alpha + codim) / p;
}

// ---- Besov -------------------------------------------------------------------

NormReport besov_norm(const Pyramid& pyr, double s, double p, double q) {
    const int D = pyr.dim();
    const int K = pyr.top_level();
    const PowOp op = PowOp::make(p);
    const bool psup = (p == inf);
    NormReport rep;
    rep.per_level.reserve(static_cast<std::size_t>(K) + 1);

    for (int k = 0; k <= K; ++k) {
        std::array<std::int64_t, max_dim> lo{}, hi{};
        ring_bounds(pyr, k, ring_margin, lo, hi);
        double Sk = 0.0;
        for_box(D, lo, hi, [&](const std::array<std::int64_t, max_dim>& idx) {
            const double vQ = pyr.average(k, idx);
            const double osc = neighbor_oscillation(pyr, k, idx, vQ, op, psup);
            if (psup) Sk = std::max(Sk, osc);
            else if (osc != 0.0) Sk += pyr.mass(k, idx) * osc;
        });
        const double ek = std::pow(2.0, k * s) * (psup ? Sk : std::pow(Sk, 1.0 / p));
        rep.per_level.push_back(ek);
    }
    lq_aggregate(rep.per_level, q, rep.energy_part, rep.tail);
    rep.lp_part = lp_of_finest(pyr, p, op);
    rep.total = rep.lp_part + rep.energy_part;
    return rep;
}

// ---- Triebel-Lizorkin ---------------------------------------------------------

namespace {

struct TowerDescent {
    const Pyramid* pyr = nullptr;
    int D = 0, K = 0;
    bool qsup = false;
    std::vector<OscTable> tab;   // per level
    std::vector<double> coeff;   // 2^{ksq} (or 2^{ks} in sup mode)
    PowOp leaf;                  // x^{p/q} (or x^p in sup mode)
    double total = 0.0;
    // restrict the accumulation to cubes passing this predicate (codim mode)
    bool near_only = false;
    int normal_dims = 0;
    double multiplicity = 1.0;

    bool is_near(const std::array<std::int64_t, max_dim>& idx) const {
        for (int a = D - normal_dims; a < D; ++a) {
            const std::int64_t i = idx[static_cast<std::size_t>(a)];
            if (i < -1 || i > 0) return false;
        }
        return true;
    }

    void node(int k, const std::array<std::int64_t, max_dim>& idx, double partial) {
        if (!near_only || is_near(idx)) {
            const double E = multiplicity * tab[static_cast<std::size_t>(k)].at(D, idx);
            if (E != 0.0)
                partial = qsup ? std::max(partial, coeff[static_cast<std::size_t>(k)] * E)
                               : partial + coeff[static_cast<std::size_t>(k)] * E;
        }
        if (k == K) {
            if (partial != 0.0) total += pyr->mass(K, idx) * leaf(partial);
            return;
        }
        // the table hulls are nested in absolute coordinates, so once the cube
        // misses the next hull no finer level can add anything: the running sum
        // is constant over the whole cone and integrates to mass * leaf
        const OscTable& T = tab[static_cast<std::size_t>(k + 1)];
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (2 * idx[ua] + 2 <= T.lo[ua] || 2 * idx[ua] >= T.hi[ua]) {
                if (partial != 0.0) total += pyr->mass(k, idx) * leaf(partial);
                return;
            }
        }
        std::array<std::int64_t, max_dim> cidx{};
        const int children = 1 << D;
        for (int c = 0; c < children; ++c) {
            bool ok = true;
            for (int a = 0; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                cidx[ua] = 2 * idx[ua] + ((c >> a) & 1);
            }
            if (pyr->half_space() && cidx[static_cast<std::size_t>(D - 1)] < 0) ok = false;
            if (ok) node(k + 1, cidx, partial);
        }
    }
};

}  // namespace

NormReport triebel_norm(const Pyramid& pyr, double s, double p, double q) {
    if (p == inf) throw std::invalid_argument("triebel_norm: p must be finite");
    const int D = pyr.dim();
    const int K = pyr.top_level();
    const bool qsup = (q == inf);
    const PowOp opq = PowOp::make(q);
    NormReport rep;

    TowerDescent td;
    td.pyr = &pyr;
    td.D = D;
    td.K = K;
    td.qsup = qsup;
    td.leaf = PowOp::make(qsup ? p : p / q);
    td.tab.resize(static_cast<std::size_t>(K) + 1);
    td.coeff.resize(static_cast<std::size_t>(K) + 1);

    rep.per_level.assign(static_cast<std::size_t>(K) + 1, 0.0);
    for (int k = 0; k <= K; ++k) {
        OscTable& T = td.tab[static_cast<std::size_t>(k)];
        ring_bounds(pyr, k, ring_margin, T.lo, T.hi);
        std::size_t tot = 1;
        for (int a = 0; a < D; ++a)
            tot *= static_cast<std::size_t>(T.hi[static_cast<std::size_t>(a)] - T.lo[static_cast<std::size_t>(a)]);
        T.val.assign(tot, 0.0);
        std::size_t flat = 0;
        double lvl = 0.0;
        const PowOp leafdiag = PowOp::make(qsup ? p : p / q);
        for_box(D, T.lo, T.hi, [&](const std::array<std::int64_t, max_dim>& idx) {
            const double vQ = pyr.average(k, idx);
            const double E = neighbor_oscillation(pyr, k, idx, vQ, opq, qsup);
            T.val[flat++] = E;
            if (E != 0.0) lvl += pyr.mass(k, idx) * leafdiag(E);
        });
        td.coeff[static_cast<std::size_t>(k)] = std::pow(2.0, qsup ? k * s : k * s * q);
        rep.per_level[static_cast<std::size_t>(k)] = std::pow(2.0, k * s) * std::pow(lvl, 1.0 / p);
    }

    std::array<std::int64_t, max_dim> rlo{}, rhi{};
    ring_bounds(pyr, 0, root_margin, rlo, rhi);
    for_box(D, rlo, rhi,
            [&](const std::array<std::int64_t, max_dim>& idx) { td.node(0, idx, 0.0); });

    rep.energy_part = std::pow(td.total, 1.0 / p);
    rep.tail = rep.energy_part > 0.0 ? rep.per_level.back() / rep.energy_part : 0.0;
    rep.lp_part = lp_of_finest(pyr, p, PowOp::make(p));
    rep.total = rep.lp_part + rep.energy_part;
    return rep;
}

// ---- tent counterpart ----------------------------------------------------------

NormReport tent_seminorm(const Pyramid& pyr, double s, double p, double q) {
    if (!pyr.half_space()) throw std::invalid_argument("tent_seminorm: half-space pyramid expected");
    if (p == inf) throw std::invalid_argument("tent_seminorm: p must be finite");
    const int D = pyr.dim();
    const int d = D - 1;
    const int K = pyr.top_level();
    const bool qsup = (q == inf);
    const PowOp opq = PowOp::make(q);
    const PowOp leaf = PowOp::make(qsup ? p : p / q);
    NormReport rep;
    rep.per_level.assign(static_cast<std::size_t>(K) + 1, 0.0);

    // D_k tables over the horizontal ring at each level
    std::vector<OscTable> tab(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        OscTable& T = tab[static_cast<std::size_t>(k)];
        const Pyramid::Level& L = pyr.level(k);
        for (int a = 0; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            T.lo[ua] = L.lo[ua] - ring_margin;
            T.hi[ua] = L.lo[ua] + L.n[ua] + ring_margin;
        }
        std::size_t tot = 1;
        for (int a = 0; a < d; ++a)
            tot *= static_cast<std::size_t>(T.hi[static_cast<std::size_t>(a)] - T.lo[static_cast<std::size_t>(a)]);
        T.val.assign(tot, 0.0);
        std::size_t flat = 0;
        double lvl = 0.0;
        for_box(d, T.lo, T.hi, [&](const std::array<std::int64_t, max_dim>& hidx) {
            std::array<std::int64_t, max_dim> tidx = hidx;
            tidx[static_cast<std::size_t>(d)] = 0;  // tent cube N(P)
            const double vN = pyr.average(k, tidx);
            const double Dk = neighbor_oscillation(pyr, k, tidx, vN, opq, qsup);
            T.val[flat++] = Dk;
            if (Dk != 0.0) lvl += pyr.mass(k, tidx) * leaf(Dk);
        });
        rep.per_level[static_cast<std::size_t>(k)] = std::pow(2.0, k * s) * std::pow(lvl, 1.0 / p);
    }

    // exact x-integral: towers are constant on finest cells
    std::vector<int> kmax(static_cast<std::size_t>(std::int64_t{1} << K));
    for (std::int64_t j = 0; j < (std::int64_t{1} << K); ++j)
        kmax[static_cast<std::size_t>(j)] =
            K - static_cast<int>(std::bit_width(static_cast<std::uint64_t>(j)));

    std::vector<double> coeff(static_cast<std::size_t>(K) + 1), prefix(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k)
        coeff[static_cast<std::size_t>(k)] = std::pow(2.0, qsup ? k * s : k * s * q);

    const OscTable& T0 = tab[0];
    std::array<std::int64_t, max_dim> hlo{}, hhi{};
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        hlo[ua] = T0.lo[ua] * (std::int64_t{1} << K);
        hhi[ua] = T0.hi[ua] * (std::int64_t{1} << K);
    }
    double total = 0.0;
    std::array<std::int64_t, max_dim> cell{};
    for_box(d, hlo, hhi, [&](const std::array<std::int64_t, max_dim>& hidx) {
        double run = 0.0;
        for (int k = 0; k <= K; ++k) {
            std::array<std::int64_t, max_dim> anc{};
            for (int a = 0; a < d; ++a)
                anc[static_cast<std::size_t>(a)] =
                    floordiv(hidx[static_cast<std::size_t>(a)], std::int64_t{1} << (K - k));
            const double Dk = tab[static_cast<std::size_t>(k)].at(d, anc);
            run = qsup ? std::max(run, coeff[static_cast<std::size_t>(k)] * Dk)
                       : run + coeff[static_cast<std::size_t>(k)] * Dk;
            prefix[static_cast<std::size_t>(k)] = run;
        }
        if (prefix[static_cast<std::size_t>(K)] == 0.0) return;
        for (int a = 0; a < d; ++a) cell[static_cast<std::size_t>(a)] = hidx[static_cast<std::size_t>(a)];
        for (std::int64_t j = 0; j < (std::int64_t{1} << K); ++j) {
            const double pref = prefix[static_cast<std::size_t>(kmax[static_cast<std::size_t>(j)])];
            if (pref == 0.0) continue;
            cell[static_cast<std::size_t>(d)] = j;
            total += pyr.mass(K, cell) * leaf(pref);
        }
    });

    rep.energy_part = std::pow(total, 1.0 / p);
    rep.tail = rep.energy_part > 0.0 ? rep.per_level.back() / rep.energy_part : 0.0;
    rep.lp_part = 0.0;  // seminorm
    rep.total = rep.energy_part;
    return rep;
}

// ---- codimension-n counterpart --------------------------------------------------

NormReport codim_seminorm(const Pyramid& pyr, int codim, double s, double p, double q) {
    if (pyr.half_space()) throw std::invalid_argument("codim_seminorm: full ambient pyramid expected");
    if (p == inf) throw std::invalid_argument("codim_seminorm: p must be finite");
    if (codim < 1 || codim >= pyr.dim()) throw std::invalid_argument("codim_seminorm: bad codim");
    const int D = pyr.dim();
    const int d = D - codim;
    const int K = pyr.top_level();
    const bool qsup = (q == inf);
    const PowOp opq = PowOp::make(q);
    NormReport rep;
    rep.per_level.assign(static_cast<std::size_t>(K) + 1, 0.0);

    TowerDescent td;
    td.pyr = &pyr;
    td.D = D;
    td.K = K;
    td.qsup = qsup;
    td.leaf = PowOp::make(qsup ? p : p / q);
    td.near_only = true;
    td.normal_dims = codim;
    td.multiplicity = qsup ? 1.0 : std::ldexp(1.0, d);  // one tower per touching P
    td.tab.resize(static_cast<std::size_t>(K) + 1);
    td.coeff.resize(static_cast<std::size_t>(K) + 1);

    for (int k = 0; k <= K; ++k) {
        OscTable& T = td.tab[static_cast<std::size_t>(k)];
        const Pyramid::Level& L = pyr.level(k);
        for (int a = 0; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            T.lo[ua] = L.lo[ua] - ring_margin;
            T.hi[ua] = L.lo[ua] + L.n[ua] + ring_margin;
        }
        for (int a = d; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            T.lo[ua] = -1;
            T.hi[ua] = 1;  // the near band
        }
        std::size_t tot = 1;
        for (int a = 0; a < D; ++a)
            tot *= static_cast<std::size_t>(T.hi[static_cast<std::size_t>(a)] - T.lo[static_cast<std::size_t>(a)]);
        T.val.assign(tot, 0.0);
        std::size_t flat = 0;
        double lvl = 0.0;
        const PowOp leafdiag = PowOp::make(qsup ? p : p / q);
        for_box(D, T.lo, T.hi, [&](const std::array<std::int64_t, max_dim>& idx) {
            const double vQ = pyr.average(k, idx);
            const double E = neighbor_oscillation(pyr, k, idx, vQ, opq, qsup);
            T.val[flat++] = E;
            if (E != 0.0) lvl += pyr.mass(k, idx) * leafdiag(td.multiplicity * E);
        });
        td.coeff[static_cast<std::size_t>(k)] = std::pow(2.0, qsup ? k * s : k * s * q);
        rep.per_level[static_cast<std::size_t>(k)] = std::pow(2.0, k * s) * std::pow(lvl, 1.0 / p);
    }

    // roots: level-0 cubes in the near band over the widened horizontal hull
    std::array<std::int64_t, max_dim> rlo{}, rhi{};
    const Pyramid::Level& L0 = pyr.level(0);
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        rlo[ua] = L0.lo[ua] - root_margin;
        rhi[ua] = L0.lo[ua] + L0.n[ua] + root_margin;
    }
    for (int a = d; a < D; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        rlo[ua] = -1;
        rhi[ua] = 1;
    }
    for_box(D, rlo, rhi,
            [&](const std::array<std::int64_t, max_dim>& idx) { td.node(0, idx, 0.0); });

    rep.energy_part = std::pow(td.total, 1.0 / p);
    rep.tail = rep.energy_part > 0.0 ? rep.per_level.back() / rep.energy_part : 0.0;
    rep.lp_part = 0.0;
    rep.total = rep.energy_part;
    return rep;
}

// ---- Sobolev via Whitney quadrature ----------------------------------------------

namespace {

struct QuadSums {
    double vp = 0.0, gp = 0.0;       // integrals of |g|^p, |grad g|^p
    double vmax = 0.0, gmax = 0.0;   // sups for p = infinity

    void absorb(const QuadSums& o) {
        vp += o.vp;
        gp += o.gp;
        vmax = std::max(vmax, o.vmax);
        gmax = std::max(gmax, o.gmax);
    }
    double power() const { return vp + gp; }
    double sup() const { return std::max(vmax, gmax); }
};

// tensor Gauss over one box with a per-axis panel count; panels must land on
// the blend breakpoint lattice for the integrand to stay smooth per panel
void quad_over_box(const AmbientField& g, const WeightedMeasure& mu, int D,
                   const std::array<double, 2 * max_dim>& lohi, int order,
                   const std::array<int, max_dim>& panels, double p, const PowOp& op,
                   QuadSums& out) {
    const GaussRule R = gauss(order);
    std::array<int, max_dim> pan{}, node{};
    std::array<double, max_dim> plo{}, half{}, x{};
    for (;;) {  // panel odometer outside so nodes stay panel-contiguous (keeps the cover cache warm)
        double pw = 1.0;
        for (int a = 0; a < D; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            const double lo = lohi[static_cast<std::size_t>(2 * a)],
                         hi = lohi[static_cast<std::size_t>(2 * a + 1)];
            plo[ua] = lo + (hi - lo) * pan[ua] / panels[ua];
            const double phi = lo + (hi - lo) * (pan[ua] + 1) / panels[ua];
            half[ua] = 0.5 * (phi - plo[ua]);
            pw *= half[ua];
        }
        node.fill(0);
        for (;;) {
            double w = pw;
            for (int a = 0; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                const std::size_t i = static_cast<std::size_t>(node[ua]);
                x[ua] = plo[ua] + half[ua] * (1.0 + R.x[i]);
                w *= R.w[i];
            }
            std::array<double, max_dim> gr{};
            const double v = g.value_and_gradient(x, gr);
            double g2 = 0.0;
            for (int a = 0; a < D; ++a) g2 += gr[static_cast<std::size_t>(a)] * gr[static_cast<std::size_t>(a)];
            const double gn = std::sqrt(g2);
            if (p == inf) {
                out.vmax = std::max(out.vmax, std::abs(v));
                out.gmax = std::max(out.gmax, gn);
            } else {
                const double ww = w * weight_at(mu, x);
                out.vp += ww * op(std::abs(v));
                out.gp += ww * op(gn);
            }
            int a = D - 1;
            for (; a >= 0; --a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                if (++node[ua] < order) break;
                node[ua] = 0;
            }
            if (a < 0) break;
        }
        int a = D - 1;
        for (; a >= 0; --a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (++pan[ua] < panels[ua]) break;
            pan[ua] = 0;
        }
        if (a < 0) break;
    }
}

// per-box base pass plus a strided higher-order pass; the relative
// disagreement of the sampled boxes becomes quadrature_delta
struct BoxRunner {
    const AmbientField* g = nullptr;
    const WeightedMeasure* mu = nullptr;
    int D = 0;
    double p = 2.0;
    const PowOp* op = nullptr;
    int order_lo = 4, order_hi = 8, stride = 1;
    std::int64_t count = 0;
    double dnum = 0.0, dden = 0.0;

    void run(const std::array<double, 2 * max_dim>& lohi,
             const std::array<int, max_dim>& panels, QuadSums& into) {
        QuadSums blo;
        quad_over_box(*g, *mu, D, lohi, order_lo, panels, p, *op, blo);
        into.absorb(blo);
        if (count++ % stride == 0) {
            QuadSums bhi;
            quad_over_box(*g, *mu, D, lohi, order_hi, panels, p, *op, bhi);
            if (p == inf) {
                dnum += std::abs(bhi.sup() - blo.sup());
                dden += bhi.sup();
            } else {
                dnum += std::abs(bhi.power() - blo.power());
                dden += bhi.power();
            }
        }
    }
};

NormReport sobolev_core(const AmbientField& g, const WeightedMeasure& mu, int codim, double p,
                        int levels, const std::array<std::int64_t, max_dim>& h_lo,
                        const std::array<std::int64_t, max_dim>& h_n, const Pyramid* clip,
                        int order_lo, int order_hi, int subdiv, int stride) {
    const int D = g.dim();
    const int d = D - codim;
    const PowOp op = PowOp::make(p);
    NormReport rep;
    rep.per_level.assign(static_cast<std::size_t>(levels) + 1, 0.0);
    QuadSums all;

    BoxRunner runner;
    runner.g = &g;
    runner.mu = &mu;
    runner.D = D;
    runner.p = p;
    runner.op = &op;
    runner.order_lo = order_lo;
    runner.order_hi = order_hi;
    runner.stride = stride;

    // the field vanishes a bounded number of cells beyond the data hull, so
    // clip each shell to it (margin covers the widest cover-bump overhang)
    constexpr std::int64_t support_margin = 4;

    std::array<int, max_dim> panels{};
    std::array<double, 2 * max_dim> lohi{};

    for (int k = 0; k <= levels; ++k) {
        QuadSums lev;
        std::array<std::int64_t, max_dim> lo{}, hi{};
        bool empty = false;
        for (int a = 0; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            lo[ua] = h_lo[ua] * (std::int64_t{1} << k);
            hi[ua] = (h_lo[ua] + h_n[ua]) * (std::int64_t{1} << k);
            if (clip) {
                const Pyramid::Level& bl = clip->level(k);
                lo[ua] = std::max(lo[ua], bl.lo[ua] - support_margin);
                hi[ua] = std::min(hi[ua], bl.lo[ua] + bl.n[ua] + support_margin);
            }
            if (lo[ua] >= hi[ua]) empty = true;
        }
        if (codim == 1) {
            lo[static_cast<std::size_t>(d)] = 1;
            hi[static_cast<std::size_t>(d)] = 2;
        } else {
            for (int a = d; a < D; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                lo[ua] = -2;
                hi[ua] = 2;
            }
        }
        for (int a = 0; a < D; ++a) panels[static_cast<std::size_t>(a)] = subdiv;
        const double l = std::ldexp(1.0, -k);
        if (!empty)
            for_box(D, lo, hi, [&](const std::array<std::int64_t, max_dim>& idx) {
                if (codim >= 2) {  // annulus membership: not all normal indices in {-1,0}
                    bool inner = true;
                    for (int a = d; a < D; ++a) {
                        const std::int64_t i = idx[static_cast<std::size_t>(a)];
                        if (i < -1 || i > 0) inner = false;
                    }
                    if (inner) return;
                }
                for (int a = 0; a < D; ++a) {
                    lohi[static_cast<std::size_t>(2 * a)] =
                        static_cast<double>(idx[static_cast<std::size_t>(a)]) * l;
                    lohi[static_cast<std::size_t>(2 * a + 1)] =
                        lohi[static_cast<std::size_t>(2 * a)] + l;
                }
                runner.run(lohi, panels, lev);
            });
        if (p == inf) {
            all.vmax = std::max(all.vmax, lev.vmax);
            all.gmax = std::max(all.gmax, lev.gmax);
            rep.per_level[static_cast<std::size_t>(k)] = lev.gmax;
        } else {
            all.vp += lev.vp;
            all.gp += lev.gp;
            rep.per_level[static_cast<std::size_t>(k)] = std::pow(lev.gp, 1.0 / p);
        }
    }

    // decay region outside the outermost shell, split into unit columns so the
    // panel lattice matches the level-0 breakpoints
    {
        QuadSums lev;
        std::array<std::int64_t, max_dim> clo{}, chi{};
        bool empty = false;
        for (int a = 0; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            clo[ua] = h_lo[ua];
            chi[ua] = h_lo[ua] + h_n[ua];
            if (clip) {
                const Pyramid::Level& bl = clip->level(0);
                clo[ua] = std::max(clo[ua], bl.lo[ua] - support_margin);
                chi[ua] = std::min(chi[ua], bl.lo[ua] + bl.n[ua] + support_margin);
            }
            if (clo[ua] >= chi[ua]) empty = true;
        }
        const int thin_panels = std::max(1, subdiv / 8);  // extent 1/8 vs unit cells
        if (!empty)
            for_box(d, clo, chi, [&](const std::array<std::int64_t, max_dim>& col) {
                for (int a = 0; a < d; ++a) {
                    const std::size_t ua = static_cast<std::size_t>(a);
                    lohi[static_cast<std::size_t>(2 * a)] = static_cast<double>(col[ua]);
                    lohi[static_cast<std::size_t>(2 * a + 1)] = static_cast<double>(col[ua]) + 1.0;
                    panels[ua] = subdiv;
                }
                if (codim == 1) {
                    lohi[static_cast<std::size_t>(2 * d)] = 2.0;
                    lohi[static_cast<std::size_t>(2 * d + 1)] = 17.0 / 8.0;
                    panels[static_cast<std::size_t>(d)] = thin_panels;
                    runner.run(lohi, panels, lev);
                    return;
                }
                // onion pieces around [-2,2]^n: per normal axis either one of
                // the four unit cells or a thin outer shell
                std::array<int, max_dim> choice{};
                int patterns = 1;
                for (int a = 0; a < codim; ++a) patterns *= 6;
                for (int flat = 0; flat < patterns; ++flat) {
                    int rem = flat;
                    bool inner = true;
                    for (int a = 0; a < codim; ++a) {
                        choice[static_cast<std::size_t>(a)] = rem % 6;
                        rem /= 6;
                        if (choice[static_cast<std::size_t>(a)] >= 4) inner = false;
                    }
                    if (inner) continue;  // fully inside [-2,2]^n, covered by the shells
                    for (int a = 0; a < codim; ++a) {
                        const std::size_t ua = static_cast<std::size_t>(2 * (d + a));
                        const std::size_t pa = static_cast<std::size_t>(d + a);
                        const int c = choice[static_cast<std::size_t>(a)];
                        if (c < 4) {  // unit cells of [-2,2]
                            lohi[ua] = -2.0 + c;
                            lohi[ua + 1] = -1.0 + c;
                            panels[pa] = subdiv;
                        } else if (c == 4) {
                            lohi[ua] = 2.0;
                            lohi[ua + 1] = 17.0 / 8.0;
                            panels[pa] = thin_panels;
                        } else {
                            lohi[ua] = -17.0 / 8.0;
                            lohi[ua + 1] = -2.0;
                            panels[pa] = thin_panels;
                        }
                    }
                    runner.run(lohi, panels, lev);
                }
            });
        if (p == inf) {
            all.vmax = std::max(all.vmax, lev.vmax);
            all.gmax = std::max(all.gmax, lev.gmax);
            rep.per_level[0] = std::max(rep.per_level[0], lev.gmax);
        } else {
            all.vp += lev.vp;
            all.gp += lev.gp;
            rep.per_level[0] = std::pow(std::pow(rep.per_level[0], p) + lev.gp, 1.0 / p);
        }
    }

    if (p == inf) {
        rep.lp_part = all.vmax;
        rep.energy_part = all.gmax;
    } else {
        rep.lp_part = std::pow(all.vp, 1.0 / p);
        rep.energy_part = std::pow(all.gp, 1.0 / p);
    }
    rep.total = rep.lp_part + rep.energy_part;
    rep.tail = rep.energy_part > 0.0 ? rep.per_level.back() / rep.energy_part : 0.0;
    rep.quadrature_delta = runner.dden > 0.0 ? runner.dnum / runner.dden : 0.0;
    return rep;
}

}  // namespace

NormReport sobolev_norm_box(const AmbientField& g, const WeightedMeasure& mu, int codim, double p,
                            int levels, const std::array<std::int64_t, max_dim>& h_lo,
                            const std::array<std::int64_t, max_dim>& h_n, int subdiv) {
    if (subdiv < 1) throw std::invalid_argument("sobolev_norm_box: bad subdiv");
    return sobolev_core(g, mu, codim, p, levels, h_lo, h_n, nullptr, 4, 8, subdiv, 1);
}

NormReport sobolev_norm(const ExtensionField& g, const WeightedMeasure& mu, double p, int subdiv) {
    const int D = g.dim();
    if (subdiv == 0) subdiv = D <= 3 ? 16 : 8;  // resolve the l/16 breakpoint lattice
    const int order_lo = D <= 3 ? 4 : 2;
    const int order_hi = D <= 3 ? 6 : 4;  // refinement only probes order truncation
    const int stride = D <= 2 ? 1 : 16;
    const int d = g.boundary_dim(), K = g.top_level();
    const Pyramid::Level& base = g.boundary().level(K);
    std::array<std::int64_t, max_dim> h_lo{}, h_n{};
    for (int a = 0; a < d; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        const std::int64_t lo0 = floordiv(base.lo[ua], std::int64_t{1} << K);
        const std::int64_t hi0 = floordiv(base.lo[ua] + base.n[ua] - 1, std::int64_t{1} << K);
        h_lo[ua] = lo0 - 1;
        h_n[ua] = hi0 - lo0 + 3;
    }
    return sobolev_core(g, mu, g.codim(), p, K, h_lo, h_n, &g.boundary(), order_lo, order_hi,
                        subdiv, stride);
}

// ---- integral-form Besov on the line ----------------------------------------------

NormReport integral_besov_norm(const BoundaryFunction& f, const WeightedMeasure& mu, double s,
                               double p, double q, int grid_per_octave) {
    if (f.dim != 1) throw std::invalid_argument("integral_besov_norm: d = 1 only");
    if (mu.ambient_dim != 1) throw std::invalid_argument("integral_besov_norm: measure on the line expected");
    if (p == inf) throw std::invalid_argument("integral_besov_norm: p must be finite");
    if (grid_per_octave < 1) throw std::invalid_argument("integral_besov_norm: bad grid");
    const int K = f.level;
    const double h = std::ldexp(1.0, -K);
    const PowOp op = PowOp::make(p);

    // cells over support plus the largest window
    const std::int64_t pad = std::int64_t{1} << K;
    const std::int64_t lo = f.lo[0] - pad, hi = f.lo[0] + f.n[0] + pad;
    const std::int64_t nc = hi - lo;
    std::vector<double> val(static_cast<std::size_t>(nc)), mass(static_cast<std::size_t>(nc));
    auto cell_weight = [&](double a, double b) {
        return mu.normal_dims == 1 ? weight_line_integral(a, b, mu.alpha) : (b - a);
    };
    for (std::int64_t i = 0; i < nc; ++i) {
        const std::array<std::int64_t, max_dim> idx{lo + i};
        val[static_cast<std::size_t>(i)] = f.value_at_index(idx);
        const double a = static_cast<double>(lo + i) * h;
        mass[static_cast<std::size_t>(i)] = cell_weight(a, a + h);
    }

    auto ball_mass = [&](double c, double t) { return cell_weight(c - t, c + t); };

    // E(t)^p at one window radius, cell-center discretization in x, exact
    // cell overlaps in y
    auto modulus_p = [&](double t) {
        double acc = 0.0;
        const std::int64_t reach = static_cast<std::int64_t>(std::ceil(t / h)) + 1;
        for (std::int64_t i = 0; i < nc; ++i) {
            const double xi = (static_cast<double>(lo + i) + 0.5) * h;
            const double bm = ball_mass(xi, t);
            if (!(bm > 0.0)) continue;
            double inner = 0.0;
            const std::int64_t j0 = std::max<std::int64_t>(0, i - reach);
            const std::int64_t j1 = std::min<std::int64_t>(nc - 1, i + reach);
            const double vi = val[static_cast<std::size_t>(i)];
            for (std::int64_t j = j0; j <= j1; ++j) {
                const double dv = std::abs(vi - val[static_cast<std::size_t>(j)]);
                if (dv == 0.0) continue;
                const double a = std::max(static_cast<double>(lo + j) * h, xi - t);
                const double b = std::min(static_cast<double>(lo + j + 1) * h, xi + t);
                if (b <= a) continue;
                inner += cell_weight(a, b) * op(dv);
            }
            // window cells outside the padded block are zero-valued: covered,
            // since the pad equals the largest window radius
            if (inner != 0.0) acc += mass[static_cast<std::size_t>(i)] * inner / bm;
        }
        return acc;
    };

    NormReport rep;
    const int octaves = K;
    const int G = octaves * grid_per_octave;
    std::vector<double> summand(static_cast<std::size_t>(G) + 1);
    for (int gidx = 0; gidx <= G; ++gidx) {
        const double t = std::pow(2.0, -static_cast<double>(gidx) / grid_per_octave);
        const double Et = std::pow(modulus_p(t), 1.0 / p);
        summand[static_cast<std::size_t>(gidx)] = std::pow(t, -s) * Et;
    }
    rep.per_level = summand;
    if (q == inf) {
        rep.energy_part = 0.0;
        for (double v : summand) rep.energy_part = std::max(rep.energy_part, v);
        rep.tail = rep.energy_part > 0.0 ? summand.back() / rep.energy_part : 0.0;
    } else {
        // trapezoid in log t with dt/t = ln2/grid_per_octave
        const double w = std::log(2.0) / grid_per_octave;
        double acc = 0.0;
        const PowOp oq = PowOp::make(q);
        for (int gidx = 0; gidx <= G; ++gidx) {
            const double ww = (gidx == 0 || gidx == G) ? 0.5 * w : w;
            acc += ww * oq(summand[static_cast<std::size_t>(gidx)]);
        }
        rep.energy_part = std::pow(acc, 1.0 / q);
        rep.tail = rep.energy_part > 0.0 ? summand.back() / rep.energy_part : 0.0;
    }

    // plain L^p part under the same measure
    double lp = 0.0;
    for (std::int64_t i = 0; i < nc; ++i)
        lp += mass[static_cast<std::size_t>(i)] * op(std::abs(val[static_cast<std::size_t>(i)]));
    rep.lp_part = std::pow(lp, 1.0 / p);
    rep.total = rep.lp_part + rep.energy_part;
    return rep;
}

}  // namespace whitney
