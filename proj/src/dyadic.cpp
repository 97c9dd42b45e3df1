#include "whitney/dyadic.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace whitney {

namespace {

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && a < 0) ? q - 1 : q;
}

}  // namespace

int compare(DyadicRational a, DyadicRational b) {
    int e = std::max(a.exp, b.exp);
    assert(e - a.exp < 62 && e - b.exp < 62);
    std::int64_t an = a.num << (e - a.exp);
    std::int64_t bn = b.num << (e - b.exp);
    return an < bn ? -1 : an > bn ? 1 : 0;
}

DyadicRational dyadic(std::int64_t num, int exp) {
    while (exp < 0) {
        num <<= 1;
        ++exp;
    }
    while (exp > 0 && num % 2 == 0) {
        num >>= 1;
        --exp;
    }
    return {num, exp};
}

namespace {

DyadicRational dy_add(DyadicRational a, DyadicRational b) {
    int e = std::max(a.exp, b.exp);
    return dyadic((a.num << (e - a.exp)) + (b.num << (e - b.exp)), e);
}

DyadicRational dy_sub(DyadicRational a, DyadicRational b) {
    return dy_add(a, {-b.num, b.exp});
}

}  // namespace

bool Box::contains(const std::array<double, max_dim>& x) const {
    for (int i = 0; i < dim; ++i)
        if (!(axis[i].lo.to_double() < x[i] && x[i] <= axis[i].hi.to_double())) return false;
    return true;
}

Interval DyadicCube::extent(int a) const {
    assert(a >= 0 && a < dim && level >= 0);
    return {dyadic(idx[a], level), dyadic(idx[a] + 1, level)};
}

Box DyadicCube::box() const {
    Box b;
    b.dim = dim;
    for (int a = 0; a < dim; ++a) b.axis[a] = extent(a);
    return b;
}

bool DyadicCube::contains(const std::array<double, max_dim>& x) const {
    return box().contains(x);
}

DyadicCube DyadicCube::parent() const {
    if (level <= 0) throw std::domain_error("parent: no coarser cube below level 0");
    DyadicCube p = *this;
    p.level = level - 1;
    for (int a = 0; a < dim; ++a) p.idx[a] = floordiv(idx[a], 2);
    return p;
}

DyadicCube cube_at(const std::array<double, max_dim>& x, int level, int dim, bool half_space) {
    assert(level >= 0 && level < 60 && dim >= 1 && dim <= max_dim);
    DyadicCube q;
    q.level = level;
    q.dim = dim;
    q.half_space = half_space;
    for (int a = 0; a < dim; ++a) {
        double y = std::ldexp(x[a], level);
        // index of the half-open cell: m with m < y <= m+1
        double c = std::ceil(y);
        q.idx[a] = static_cast<std::int64_t>(c) - 1;
    }
    if (half_space && q.idx[dim - 1] < 0)
        throw std::domain_error("cube_at: point below the boundary of the half-space");
    return q;
}

bool closures_intersect(const DyadicCube& a, const DyadicCube& b) {
    assert(a.dim == b.dim);
    for (int i = 0; i < a.dim; ++i) {
        Interval ia = a.extent(i), ib = b.extent(i);
        if (compare(ib.hi, ia.lo) < 0 || compare(ia.hi, ib.lo) < 0) return false;
    }
    return true;
}

std::vector<DyadicCube> neighbors(const DyadicCube& q, int min_level, int max_level) {
    std::vector<DyadicCube> out;
    for (int lvl = q.level - 1; lvl <= q.level + 1; ++lvl) {
        if (lvl < min_level) continue;
        if (max_level >= 0 && lvl > max_level) continue;
        // per-axis index range of level-lvl cubes whose closure meets closure(q)
        std::array<std::int64_t, max_dim> lo{}, hi{};
        for (int a = 0; a < q.dim; ++a) {
            std::int64_t m = q.idx[a];
            if (lvl >= q.level) {
                std::int64_t s = std::int64_t{1} << (lvl - q.level);
                lo[a] = m * s - 1;
                hi[a] = (m + 1) * s;
            } else {
                std::int64_t s = std::int64_t{1} << (q.level - lvl);
                lo[a] = -floordiv(-m, s) - 1;     // ceil(m/s) - 1
                hi[a] = floordiv(m + 1, s);
            }
            if (q.half_space && a == q.dim - 1) lo[a] = std::max<std::int64_t>(lo[a], 0);
        }
        // lexicographic walk
        DyadicCube c;
        c.level = lvl;
        c.dim = q.dim;
        c.half_space = q.half_space;
        std::array<std::int64_t, max_dim> it = lo;
        while (true) {
            c.idx = it;
            out.push_back(c);
            int a = q.dim - 1;
            while (a >= 0) {
                if (++it[a] <= hi[a]) break;
                it[a] = lo[a];
                --a;
            }
            if (a < 0) break;
        }
    }
    return out;
}

bool are_neighbors(const DyadicCube& a, const DyadicCube& b, int min_level, int max_level) {
    if (std::abs(a.level - b.level) > 1) return false;
    if (a.level < min_level || b.level < min_level) return false;
    if (max_level >= 0 && (a.level > max_level || b.level > max_level)) return false;
    return closures_intersect(a, b);
}

DyadicCube whitney_cube(const DyadicCube& q, int codim) {
    assert(codim >= 1 && q.dim + codim <= max_dim);
    DyadicCube w = q;
    w.dim = q.dim + codim;
    w.half_space = (codim == 1);
    for (int a = q.dim; a < w.dim; ++a) w.idx[a] = 1;
    return w;
}

DyadicCube tent_cube(const DyadicCube& q, int codim) {
    DyadicCube t = whitney_cube(q, codim);
    for (int a = q.dim; a < t.dim; ++a) t.idx[a] = 0;
    return t;
}

Box tent_box(const DyadicCube& q, int codim) { return tent_cube(q, codim).box(); }

Box inflate_box(const Box& b, DyadicRational margin) {
    Box r = b;
    for (int a = 0; a < b.dim; ++a) {
        r.axis[a].lo = dy_sub(b.axis[a].lo, margin);
        r.axis[a].hi = dy_add(b.axis[a].hi, margin);
    }
    return r;
}

Box inflated_whitney_box(const DyadicCube& q, int codim) {
    Box w = whitney_cube(q, codim).box();
    return inflate_box(w, dyadic(1, q.level + 3));  // l/8 margin per side
}

std::vector<DyadicCube> annulus_family(const DyadicCube& q, int codim) {
    assert(codim >= 1 && q.dim + codim <= max_dim);
    std::vector<DyadicCube> out;
    DyadicCube c = q;
    c.dim = q.dim + codim;
    c.half_space = false;
    std::array<std::int64_t, max_dim> normal{};
    normal.fill(-2);
    while (true) {
        bool inner = true;
        for (int i = 0; i < codim; ++i)
            if (normal[i] < -1 || normal[i] > 0) inner = false;
        if (!inner) {
            for (int i = 0; i < codim; ++i) c.idx[q.dim + i] = normal[i];
            out.push_back(c);
        }
        int i = codim - 1;
        while (i >= 0) {
            if (++normal[i] <= 1) break;
            normal[i] = -2;
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

bool boxes_intersect(const Box& a, const Box& b) {
    assert(a.dim == b.dim);
    for (int i = 0; i < a.dim; ++i) {
        if (compare(a.axis[i].lo, b.axis[i].hi) >= 0) return false;
        if (compare(b.axis[i].lo, a.axis[i].hi) >= 0) return false;
    }
    return true;
}

bool closed_boxes_intersect(const Box& a, const Box& b) {
    assert(a.dim == b.dim);
    for (int i = 0; i < a.dim; ++i) {
        if (compare(a.axis[i].lo, b.axis[i].hi) > 0) return false;
        if (compare(b.axis[i].lo, a.axis[i].hi) > 0) return false;
    }
    return true;
}

}  // namespace whitney
