#pragma once

// Small Gauss-Legendre toolbox used by the measure and norm quadratures.
// Fixed node sets plus helpers for composite rules on geometrically graded
// partitions (integrable endpoint singularities, kinks at known points).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace whitney {

struct GaussRule {
    std::span<const double> x;  // nodes on [-1,1]
    std::span<const double> w;
};

namespace gauss_tables {
inline constexpr std::array<double, 2> x2{-0.5773502691896257, 0.5773502691896257};
inline constexpr std::array<double, 2> w2{1.0, 1.0};
inline constexpr std::array<double, 4> x4{-0.8611363115940526, -0.3399810435848563,
                                          0.3399810435848563, 0.8611363115940526};
inline constexpr std::array<double, 4> w4{0.3478548451374538, 0.6521451548625461,
                                          0.6521451548625461, 0.3478548451374538};
inline constexpr std::array<double, 6> x6{-0.9324695142031521, -0.6612093864662645,
                                          -0.2386191860831969, 0.2386191860831969,
                                          0.6612093864662645,  0.9324695142031521};
inline constexpr std::array<double, 6> w6{0.1713244923791704, 0.3607615730481386,
                                          0.4679139345726910, 0.4679139345726910,
                                          0.3607615730481386, 0.1713244923791704};
inline constexpr std::array<double, 8> x8{-0.9602898564975363, -0.7966664774136267,
                                          -0.5255324099163290, -0.1834346424956498,
                                          0.1834346424956498,  0.5255324099163290,
                                          0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> w8{0.1012285362903763, 0.2223810344533745,
                                          0.3137066458778873, 0.3626837833783620,
                                          0.3626837833783620, 0.3137066458778873,
                                          0.2223810344533745, 0.1012285362903763};
inline constexpr std::array<double, 16> x16{
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
inline constexpr std::array<double, 16> w16{
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
}  // namespace gauss_tables

inline GaussRule gauss(int n) {
    using namespace gauss_tables;
    switch (n) {
        case 2: return {x2, w2};
        case 4: return {x4, w4};
        case 6: return {x6, w6};
        case 8: return {x8, w8};
        default: return {x16, w16};
    }
}

template <class F>
double integrate(F&& f, double a, double b, int n = 8) {
    GaussRule g = gauss(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + half * g.x[i]);
    return s * half;
}

// Composite rule on (a,b] with breakpoints inserted at the given kinks and
// a geometric grading toward a (integrable singularity at the left end).
// Shells are subdivided until their contribution is negligible relative to
// the running total, up to max_shells.
template <class F>
double integrate_graded(F&& f, double a, double b, std::span<const double> kinks,
                        int n = 16, int max_shells = 200, double rel_tail = 1e-14) {
    if (!(b > a)) return 0.0;
    std::vector<double> pts{b};
    for (double k : kinks)
        if (k > a && k < b) pts.push_back(k);
    std::sort(pts.begin(), pts.end(), std::greater<>());
    double total = 0.0;
    double hi = b;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        total += integrate(f, pts[i], hi, n);
        hi = pts[i];
    }
    // geometric shells (a + (hi-a)/2^{j+1}, a + (hi-a)/2^j]
    double len = hi - a;
    for (int j = 0; j < max_shells; ++j) {
        double lo = a + len * 0.5;
        double piece = integrate(f, lo, a + len, n);
        total += piece;
        len *= 0.5;
        if (std::abs(piece) < rel_tail * std::abs(total) && j > 4) break;
    }
    return total;
}

}  // namespace whitney
