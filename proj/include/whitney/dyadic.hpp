#pragma once

// Exact dyadic geometry: half-open dyadic cubes 2^{-k}((0,1]^D + m), the
// neighbour relation used by the difference energies, and the Whitney
// family (whitney cell, tent, inflated cell, annulus shell) built on top.
// All coordinates are dyadic rationals (num, exp) so every containment and
// intersection test below is exact integer arithmetic.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace whitney {

inline constexpr int max_dim = 4;

// value = num / 2^exp, exp >= 0
struct DyadicRational {
    std::int64_t num = 0;
    int exp = 0;

    double to_double() const { return static_cast<double>(num) / static_cast<double>(std::int64_t{1} << exp); }
};

// exact comparisons via alignment to the finer exponent
int compare(DyadicRational a, DyadicRational b);
inline bool operator==(DyadicRational a, DyadicRational b) { return compare(a, b) == 0; }
inline bool operator<(DyadicRational a, DyadicRational b) { return compare(a, b) < 0; }
inline bool operator<=(DyadicRational a, DyadicRational b) { return compare(a, b) <= 0; }
DyadicRational dyadic(std::int64_t num, int exp);  // normalized (num odd or 0)

struct Interval {  // half-open (lo, hi]
    DyadicRational lo, hi;
};

struct Box {  // product of half-open intervals
    int dim = 0;
    std::array<Interval, max_dim> axis{};

    bool contains(const std::array<double, max_dim>& x) const;
};

// Dyadic cube at level k: per-axis (m_i 2^{-k}, (m_i+1) 2^{-k}].
// half_space restricts the last axis to index >= 0 (used for the upper
// half-space family over a d-dimensional boundary).
struct DyadicCube {
    int level = 0;
    int dim = 1;
    bool half_space = false;
    std::array<std::int64_t, max_dim> idx{};

    DyadicRational side() const { return dyadic(1, level); }
    Interval extent(int axis) const;
    Box box() const;
    bool contains(const std::array<double, max_dim>& x) const;
    DyadicCube parent() const;

    friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
        if (a.level != b.level || a.dim != b.dim || a.half_space != b.half_space) return false;
        for (int i = 0; i < a.dim; ++i)
            if (a.idx[i] != b.idx[i]) return false;
        return true;
    }
};

// The level-k cube whose half-open box contains x. Exact on dyadic points:
// lattice points belong to the cube to their left/below.
DyadicCube cube_at(const std::array<double, max_dim>& x, int level, int dim, bool half_space = false);

// Closed boxes intersect (touching counts).
bool closures_intersect(const DyadicCube& a, const DyadicCube& b);

// Q' ~ Q: levels within one of each other (clipped below at min_level) and
// closures intersecting. Q itself is a member. Enumeration order is
// deterministic: by level, then lexicographic index.
std::vector<DyadicCube> neighbors(const DyadicCube& q, int min_level = 0, int max_level = -1);

bool are_neighbors(const DyadicCube& a, const DyadicCube& b, int min_level = 0, int max_level = -1);

// --- Whitney family over a boundary cube Q in R^d -----------------------
// Ambient dimension is d + n where n >= 1 is the codimension. The returned
// objects live in the ambient space; the boundary cube supplies the first
// d indices.

// W(Q) = Q x (l, 2l]^n as an ambient dyadic cube (normal indices = 1).
DyadicCube whitney_cube(const DyadicCube& q, int codim = 1);

// N(Q) = Q x (0, l]^n as an ambient dyadic cube (normal indices = 0).
DyadicCube tent_cube(const DyadicCube& q, int codim = 1);
Box tent_box(const DyadicCube& q, int codim = 1);

// Concentric inflation of W(Q): every axis extent grows from l to (5/4)l,
// i.e. a margin of l/8 on each side. Exact dyadic endpoints (exp = k+3).
Box inflated_whitney_box(const DyadicCube& q, int codim = 1);
Box inflate_box(const Box& b, DyadicRational margin);

// Annulus shell A_Q: ambient level-k cubes inside Q x [-2l, 2l]^n with the
// inner block Q x (-l, l)^n removed; exactly 4^n - 2^n cubes per Q.
std::vector<DyadicCube> annulus_family(const DyadicCube& q, int codim);

bool boxes_intersect(const Box& a, const Box& b);          // as half-open boxes
bool closed_boxes_intersect(const Box& a, const Box& b);   // closures

}  // namespace whitney
