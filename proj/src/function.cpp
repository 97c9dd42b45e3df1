#include "whitney/function.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "whitney/quadrature.hpp"

namespace whitney {

namespace {

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace

// ---- BoundaryFunction -----------------------------------------------------

Box BoundaryFunction::support() const {
    Box b;
    b.dim = dim;
    for (int a = 0; a < dim; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        b.axis[ua] = {dyadic(lo[ua], level), dyadic(lo[ua] + n[ua], level)};
    }
    return b;
}

double BoundaryFunction::value_at_index(const std::array<std::int64_t, max_dim>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        const std::int64_t rel = idx[ua] - lo[ua];
        if (rel < 0 || rel >= n[ua]) return 0.0;
        flat = flat * static_cast<std::size_t>(n[ua]) + static_cast<std::size_t>(rel);
    }
    return values[flat];
}

double BoundaryFunction::value_at_point(const std::array<double, max_dim>& x) const {
    std::array<std::int64_t, max_dim> idx{};
    const double s = std::ldexp(1.0, level);
    for (int a = 0; a < dim; ++a) {
        const double y = x[static_cast<std::size_t>(a)] * s;
        idx[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::ceil(y)) - 1;
    }
    return value_at_index(idx);
}

// ---- Pyramid ---------------------------------------------------------------

Pyramid::Pyramid(int ambient_dim, bool half_space, const WeightedMeasure& mu, int K,
                 std::array<std::int64_t, max_dim> lo, std::array<std::int64_t, max_dim> n,
                 std::vector<double> finest_values)
    : dim_(ambient_dim), half_space_(half_space), mu_(mu), K_(K) {
    if (mu.ambient_dim != ambient_dim) throw std::invalid_argument("pyramid: measure dimension mismatch");
    if (K < 0) throw std::invalid_argument("pyramid: negative level");
    levels_.resize(static_cast<std::size_t>(K) + 1);

    // index boxes: level k covers the finest block
    for (int k = K; k >= 0; --k) {
        Level& L = levels_[static_cast<std::size_t>(k)];
        const std::int64_t sh = K - k;
        for (int a = 0; a < dim_; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            const std::int64_t flo = floordiv(lo[ua], std::int64_t{1} << sh);
            const std::int64_t fhi = floordiv(lo[ua] + n[ua] - 1, std::int64_t{1} << sh);
            L.lo[ua] = flo;
            L.n[ua] = fhi - flo + 1;
        }
    }

    // mass tables (normal axes only; horizontal axes contribute plain volume)
    const int nn = mu_.normal_dims;
    const int hd = dim_ - nn;
    for (int k = 0; k <= K; ++k) {
        Level& L = levels_[static_cast<std::size_t>(k)];
        L.horizontal_cell = std::pow(std::ldexp(1.0, -k), hd);
        std::size_t tot = 1;
        for (int a = 0; a < nn; ++a) {
            const std::size_t ua = static_cast<std::size_t>(hd + a);
            std::int64_t mlo = L.lo[ua] - mass_margin;
            if (half_space_ && a == nn - 1) mlo = std::max<std::int64_t>(mlo, 0);
            L.mlo[static_cast<std::size_t>(a)] = mlo;
            L.mn[static_cast<std::size_t>(a)] = (L.lo[ua] + L.n[ua] + mass_margin) - mlo;
            tot *= static_cast<std::size_t>(L.mn[static_cast<std::size_t>(a)]);
        }
        if (nn >= 3) continue;  // computed on demand (only used at toy scales)
        L.normal_mass.assign(tot, 0.0);
        const double h = std::ldexp(1.0, -k);
        if (nn == 0) {
            L.normal_mass[0] = 1.0;
        } else if (nn == 1) {
            for (std::int64_t i = 0; i < L.mn[0]; ++i) {
                const double a0 = static_cast<double>(L.mlo[0] + i) * h;
                L.normal_mass[static_cast<std::size_t>(i)] =
                    weight_line_integral(a0, a0 + h, mu_.alpha);
            }
        } else {  // nn == 2, fold onto i >= j >= 0 and mirror
            auto fold = [](std::int64_t i) { return i >= 0 ? i : -1 - i; };
            std::vector<double> memo;
            std::int64_t span = 1;
            for (int a = 0; a < 2; ++a)
                span = std::max({span, L.mlo[static_cast<std::size_t>(a)] + L.mn[static_cast<std::size_t>(a)],
                                 -L.mlo[static_cast<std::size_t>(a)]});
            memo.assign(static_cast<std::size_t>(span * span), -1.0);
            for (std::int64_t i = 0; i < L.mn[0]; ++i)
                for (std::int64_t j = 0; j < L.mn[1]; ++j) {
                    std::int64_t fi = fold(L.mlo[0] + i), fj = fold(L.mlo[1] + j);
                    if (fi < fj) std::swap(fi, fj);
                    double& slot = memo[static_cast<std::size_t>(fi * span + fj)];
                    if (slot < 0.0) {
                        std::array<double, 2 * max_dim> lohi{};
                        lohi[0] = static_cast<double>(fi) * h;
                        lohi[1] = lohi[0] + h;
                        lohi[2] = static_cast<double>(fj) * h;
                        lohi[3] = lohi[2] + h;
                        slot = normal_box_integral(lohi, 2, mu_.alpha);
                    }
                    L.normal_mass[static_cast<std::size_t>(i * L.mn[1] + j)] = slot;
                }
        }
    }

    Level& top = levels_[static_cast<std::size_t>(K)];
    top.avg.assign(top.count(), 0.0);
    // copy finest block into the level-K array (they coincide by construction)
    {
        std::size_t expect = 1;
        for (int a = 0; a < dim_; ++a) expect *= static_cast<std::size_t>(n[static_cast<std::size_t>(a)]);
        if (finest_values.size() != expect) throw std::invalid_argument("pyramid: value count mismatch");
        top.avg = std::move(finest_values);
    }

    // bottom-up anchored aggregation: constant regions stay bitwise constant
    for (int k = K - 1; k >= 0; --k) {
        Level& L = levels_[static_cast<std::size_t>(k)];
        const Level& F = levels_[static_cast<std::size_t>(k + 1)];
        L.avg.assign(L.count(), 0.0);
        std::array<std::int64_t, max_dim> idx{};
        const std::size_t cells = L.count();
        for (std::size_t flat = 0; flat < cells; ++flat) {
            std::size_t rem = flat;
            for (int a = dim_ - 1; a >= 0; --a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                idx[ua] = L.lo[ua] + static_cast<std::int64_t>(rem % static_cast<std::size_t>(L.n[ua]));
                rem /= static_cast<std::size_t>(L.n[ua]);
            }
            const int children = 1 << dim_;
            double anchor = 0.0, accum = 0.0, msum = 0.0;
            std::array<std::int64_t, max_dim> cidx{};
            for (int c = 0; c < children; ++c) {
                for (int a = 0; a < dim_; ++a)
                    cidx[static_cast<std::size_t>(a)] = 2 * idx[static_cast<std::size_t>(a)] + ((c >> a) & 1);
                const double v = child_or_zero(k + 1, cidx, F);
                const double m = mass(k + 1, cidx);
                if (c == 0) anchor = v;
                accum += (v - anchor) * m;
                msum += m;
            }
            L.avg[flat] = msum > 0.0 ? anchor + accum / msum : anchor;
        }
    }
}

double Pyramid::child_or_zero(int level, const std::array<std::int64_t, max_dim>& idx,
                              const Level& L) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        const std::int64_t rel = idx[ua] - L.lo[ua];
        if (rel < 0 || rel >= L.n[ua]) return 0.0;
        flat = flat * static_cast<std::size_t>(L.n[ua]) + static_cast<std::size_t>(rel);
    }
    (void)level;
    return L.avg[flat];
}

double Pyramid::average(int level, const std::array<std::int64_t, max_dim>& idx) const {
    if (level < 0 || level > K_) throw resolution_error("pyramid: level out of range");
    return child_or_zero(level, idx, levels_[static_cast<std::size_t>(level)]);
}

double Pyramid::average(const DyadicCube& q) const { return average(q.level, q.idx); }

double Pyramid::step_value(const DyadicCube& q) const {
    if (q.level <= K_) return average(q.level, q.idx);
    const std::int64_t sh = q.level - K_;
    std::array<std::int64_t, max_dim> idx{};
    for (int a = 0; a < dim_; ++a)
        idx[static_cast<std::size_t>(a)] = floordiv(q.idx[static_cast<std::size_t>(a)], std::int64_t{1} << sh);
    return average(K_, idx);
}

double Pyramid::mass(int level, const std::array<std::int64_t, max_dim>& idx) const {
    const Level& L = levels_.at(static_cast<std::size_t>(level));
    const int nn = mu_.normal_dims;
    const int hd = dim_ - nn;
    const auto direct = [&]() {  // exact per-cell weight, used outside the tabulated margin
        if (nn == 0) return L.horizontal_cell;
        const double h = std::ldexp(1.0, -level);
        if (nn == 1) {
            const double a0 = static_cast<double>(idx[static_cast<std::size_t>(hd)]) * h;
            return L.horizontal_cell * weight_line_integral(a0, a0 + h, mu_.alpha);
        }
        std::array<double, 2 * max_dim> lohi{};
        for (int a = 0; a < nn; ++a) {
            const double a0 = static_cast<double>(idx[static_cast<std::size_t>(hd + a)]) * h;
            lohi[static_cast<std::size_t>(2 * a)] = a0;
            lohi[static_cast<std::size_t>(2 * a + 1)] = a0 + h;
        }
        return L.horizontal_cell * normal_box_integral(lohi, nn, mu_.alpha);
    };
    if (nn >= 3) return direct();  // tabulated only up to codimension two
    std::size_t flat = 0;
    for (int a = 0; a < nn; ++a) {
        const std::size_t ua = static_cast<std::size_t>(a);
        const std::int64_t rel = idx[static_cast<std::size_t>(hd + a)] - L.mlo[ua];
        if (rel < 0 || rel >= L.mn[ua]) return direct();
        flat = flat * static_cast<std::size_t>(L.mn[ua]) + static_cast<std::size_t>(rel);
    }
    return L.horizontal_cell * L.normal_mass[flat];
}

Pyramid build_pyramid(const BoundaryFunction& f, const WeightedMeasure& mu) {
    return Pyramid(f.dim, false, mu, f.level, f.lo, f.n, f.values);
}

double cell_average(const Pyramid& p, const DyadicCube& q) {
    if (q.dim != p.dim()) throw std::invalid_argument("cell_average: dimension mismatch");
    if (q.level > p.top_level())
        throw resolution_error("cell_average: cube finer than the resolved scale");
    if (q.level < 0) throw std::invalid_argument("cell_average: negative level");
    return p.average(q);
}

// ---- generators ------------------------------------------------------------

const char* generator_name(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::dyadic_step: return "dyadic_step";
        case GeneratorKind::hat_spline: return "hat_spline";
        case GeneratorKind::lacunary_sum: return "lacunary_sum";
        case GeneratorKind::smooth_bump: return "smooth_bump";
    }
    return "?";
}

GeneratorKind generator_from_name(const std::string& s) {
    if (s == "dyadic_step") return GeneratorKind::dyadic_step;
    if (s == "hat_spline") return GeneratorKind::hat_spline;
    if (s == "lacunary_sum") return GeneratorKind::lacunary_sum;
    if (s == "smooth_bump") return GeneratorKind::smooth_bump;
    throw std::invalid_argument("unknown generator: " + s);
}

double FunctionSample::smoothness_ceiling(double p) const {
    switch (kind) {
        case GeneratorKind::dyadic_step: return 1.0 / p;
        case GeneratorKind::hat_spline: return 1.0;
        case GeneratorKind::lacunary_sum: return lacunary_s0;
        case GeneratorKind::smooth_bump: return 1.0;
    }
    return 0.0;
}

namespace {

// quintic ramp: rho(0)=0, rho(1)=1, two vanishing derivatives at both ends,
// and rho(v) + rho(1-v) = 1
double quintic_ramp(double v) {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    return v * v * v * (10.0 + v * (-15.0 + 6.0 * v));
}

// exact integral of the one-axis plateau profile over [a,b]; the profile
// rises over [c0,c1], is 1 on [c1,c2], falls over [c2,c3]
double plateau_integral(double a, double b, double c0, double c1, double c2, double c3) {
    const double m = c1 - c0;
    auto piece = [&](double x) -> double {  // pointwise profile
        if (x <= c0 || x >= c3) return 0.0;
        if (x < c1) return quintic_ramp((x - c0) / m);
        if (x <= c2) return 1.0;
        return quintic_ramp((c3 - x) / m);
    };
    // integrate with Gauss-4 per monotone piece (exact: degree <= 5)
    double tot = 0.0;
    const double cuts[] = {c0, c1, c2, c3};
    double left = a;
    for (double c : cuts) {
        if (c > left && c < b) {
            tot += integrate(piece, left, c, 4);
            left = c;
        }
    }
    tot += integrate(piece, left, b, 4);
    return tot;
}

}  // namespace

FunctionSample sample_function(GeneratorKind kind, int d, int K, std::uint64_t seed,
                               int coarse_level, double lacunary_s0) {
    if (d < 1 || d > 2) throw std::invalid_argument("sample_function: d must be 1 or 2");
    if (K < 1) throw std::invalid_argument("sample_function: K must be >= 1");
    FunctionSample out;
    out.kind = kind;
    out.seed = seed;
    out.lacunary_s0 = lacunary_s0;

    BoundaryFunction& f = out.f;
    f.dim = d;
    f.level = K;
    const std::int64_t nK = std::int64_t{1} << K;
    for (int a = 0; a < d; ++a) {
        f.lo[static_cast<std::size_t>(a)] = 0;
        f.n[static_cast<std::size_t>(a)] = nK;
    }
    f.values.assign(f.cell_count(), 0.0);

    std::mt19937_64 eng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(kind) + 1);
    auto draw = [&]() { return 2.0 * uniform01(eng()) - 1.0; };
    const double hK = std::ldexp(1.0, -K);

    switch (kind) {
        case GeneratorKind::dyadic_step: {
            const int J = std::min(coarse_level, K);
            out.coarse_level = J;
            const std::int64_t nJ = std::int64_t{1} << J;
            std::vector<double> w(static_cast<std::size_t>(d == 1 ? nJ : nJ * nJ));
            for (double& v : w) v = draw();
            for (std::int64_t i = 0; i < nK; ++i) {
                const std::int64_t ci = i >> (K - J);
                if (d == 1) {
                    f.values[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(ci)];
                } else {
                    for (std::int64_t j = 0; j < nK; ++j)
                        f.values[static_cast<std::size_t>(i * nK + j)] =
                            w[static_cast<std::size_t>(ci * nJ + (j >> (K - J)))];
                }
            }
            break;
        }
        case GeneratorKind::hat_spline: {
            const int J = std::min(coarse_level, K);
            out.coarse_level = J;
            const std::int64_t nJ = std::int64_t{1} << J;
            // node values on the level-J lattice, pinned to 0 on the boundary
            // so the zero extension stays continuous
            if (d == 1) {
                std::vector<double> node(static_cast<std::size_t>(nJ + 1), 0.0);
                for (std::int64_t i = 1; i < nJ; ++i) node[static_cast<std::size_t>(i)] = draw();
                const std::int64_t mult = nK / nJ;
                for (std::int64_t i = 0; i < nK; ++i) {
                    const std::int64_t ci = i / mult;
                    const double vl = node[static_cast<std::size_t>(ci)],
                                 vr = node[static_cast<std::size_t>(ci + 1)];
                    const double t0 = static_cast<double>(i % mult) / static_cast<double>(mult);
                    const double t1 = t0 + 1.0 / static_cast<double>(mult);
                    // exact average of the linear interpolant over the cell
                    f.values[static_cast<std::size_t>(i)] =
                        vl + (vr - vl) * 0.5 * (t0 + t1);
                }
            } else {
                std::vector<double> node(static_cast<std::size_t>((nJ + 1) * (nJ + 1)), 0.0);
                for (std::int64_t i = 1; i < nJ; ++i)
                    for (std::int64_t j = 1; j < nJ; ++j)
                        node[static_cast<std::size_t>(i * (nJ + 1) + j)] = draw();
                const std::int64_t mult = nK / nJ;
                auto nd = [&](std::int64_t i, std::int64_t j) {
                    return node[static_cast<std::size_t>(i * (nJ + 1) + j)];
                };
                for (std::int64_t i = 0; i < nK; ++i)
                    for (std::int64_t j = 0; j < nK; ++j) {
                        const std::int64_t ci = i / mult, cj = j / mult;
                        const double u = (static_cast<double>(i % mult) + 0.5) / static_cast<double>(mult);
                        const double v = (static_cast<double>(j % mult) + 0.5) / static_cast<double>(mult);
                        // the average of a bilinear patch over an axis cell is
                        // its value at the cell center
                        f.values[static_cast<std::size_t>(i * nK + j)] =
                            nd(ci, cj) * (1 - u) * (1 - v) + nd(ci + 1, cj) * u * (1 - v) +
                            nd(ci, cj + 1) * (1 - u) * v + nd(ci + 1, cj + 1) * u * v;
                    }
            }
            break;
        }
        case GeneratorKind::lacunary_sum: {
            out.coarse_level = 0;
            // sum_j 2^{-j s0} eps_j prod_a sin(2^j pi x_a): vanishes on the
            // support boundary, so the zero extension adds no jump
            std::vector<double> acc(f.values.size(), 0.0);
            for (int j = 0; j < K; ++j) {
                const double eps = draw() >= 0.0 ? 1.0 : -1.0;
                const double amp = eps * std::pow(2.0, -j * lacunary_s0);
                const double om = std::ldexp(1.0, j) * 3.14159265358979323846;
                std::vector<double> fac(static_cast<std::size_t>(nK));
                for (std::int64_t i = 0; i < nK; ++i) {
                    const double a0 = static_cast<double>(i) * hK, b0 = a0 + hK;
                    fac[static_cast<std::size_t>(i)] =
                        (std::cos(om * a0) - std::cos(om * b0)) / (om * hK);
                }
                if (d == 1) {
                    for (std::int64_t i = 0; i < nK; ++i)
                        acc[static_cast<std::size_t>(i)] += amp * fac[static_cast<std::size_t>(i)];
                } else {
                    for (std::int64_t i = 0; i < nK; ++i)
                        for (std::int64_t j2 = 0; j2 < nK; ++j2)
                            acc[static_cast<std::size_t>(i * nK + j2)] +=
                                amp * fac[static_cast<std::size_t>(i)] * fac[static_cast<std::size_t>(j2)];
                }
            }
            f.values = std::move(acc);
            break;
        }
        case GeneratorKind::smooth_bump: {
            const int J = std::min(coarse_level, K - 2);
            if (J < 1) throw std::invalid_argument("smooth_bump: K must be >= 3");
            out.coarse_level = J;
            const std::int64_t nJ = std::int64_t{1} << J;
            const double w = std::ldexp(1.0, -J - 1), m = std::ldexp(1.0, -J - 2);
            const int count = 3;
            for (int b = 0; b < count; ++b) {
                const double amp = draw();
                std::array<double, max_dim> c{};
                for (int a = 0; a < d; ++a) {
                    const std::int64_t t =
                        1 + static_cast<std::int64_t>(uniform01(eng()) * static_cast<double>(nJ - 1));
                    c[static_cast<std::size_t>(a)] = static_cast<double>(std::min(t, nJ - 1)) / static_cast<double>(nJ);
                }
                std::vector<double> fac(static_cast<std::size_t>(nK));
                std::array<std::vector<double>, max_dim> facs;
                for (int a = 0; a < d; ++a) {
                    facs[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(nK), 0.0);
                    const double ca = c[static_cast<std::size_t>(a)];
                    for (std::int64_t i = 0; i < nK; ++i) {
                        const double a0 = static_cast<double>(i) * hK;
                        facs[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] =
                            plateau_integral(a0, a0 + hK, ca - w, ca - w + m, ca + w - m, ca + w) / hK;
                    }
                }
                if (d == 1) {
                    for (std::int64_t i = 0; i < nK; ++i)
                        f.values[static_cast<std::size_t>(i)] += amp * facs[0][static_cast<std::size_t>(i)];
                } else {
                    for (std::int64_t i = 0; i < nK; ++i)
                        for (std::int64_t j = 0; j < nK; ++j)
                            f.values[static_cast<std::size_t>(i * nK + j)] +=
                                amp * facs[0][static_cast<std::size_t>(i)] * facs[1][static_cast<std::size_t>(j)];
                }
            }
            break;
        }
    }
    return out;
}

// ---- serialization ---------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "binary format is little-endian; this build targets LE hosts");

void write_binary(const BoundaryFunction& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out.write("WBF1", 4);
    const std::uint32_t d = static_cast<std::uint32_t>(f.dim), k = static_cast<std::uint32_t>(f.level);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(&k), 4);
    for (int a = 0; a < f.dim; ++a) {
        out.write(reinterpret_cast<const char*>(&f.lo[static_cast<std::size_t>(a)]), 8);
        out.write(reinterpret_cast<const char*>(&f.n[static_cast<std::size_t>(a)]), 8);
    }
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write: " + path);
}

BoundaryFunction read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WBF1", 4) != 0) throw std::runtime_error("bad magic: " + path);
    std::uint32_t d = 0, k = 0;
    in.read(reinterpret_cast<char*>(&d), 4);
    in.read(reinterpret_cast<char*>(&k), 4);
    if (d < 1 || d > static_cast<std::uint32_t>(max_dim)) throw std::runtime_error("bad dim: " + path);
    BoundaryFunction f;
    f.dim = static_cast<int>(d);
    f.level = static_cast<int>(k);
    for (int a = 0; a < f.dim; ++a) {
        in.read(reinterpret_cast<char*>(&f.lo[static_cast<std::size_t>(a)]), 8);
        in.read(reinterpret_cast<char*>(&f.n[static_cast<std::size_t>(a)]), 8);
        if (f.n[static_cast<std::size_t>(a)] <= 0) throw std::runtime_error("bad extent: " + path);
    }
    f.values.assign(f.cell_count(), 0.0);
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("short read: " + path);
    return f;
}

void write_csv(const BoundaryFunction& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "dim,level\n" << f.dim << "," << f.level << "\n";
    out << "axis,lo,n\n";
    for (int a = 0; a < f.dim; ++a)
        out << a << "," << f.lo[static_cast<std::size_t>(a)] << "," << f.n[static_cast<std::size_t>(a)] << "\n";
    out << "values\n";
    char buf[64];
    for (double v : f.values) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

BoundaryFunction read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    std::string line;
    auto next = [&]() {
        if (!std::getline(in, line)) throw std::runtime_error("truncated csv: " + path);
        return line;
    };
    if (next() != "dim,level") throw std::runtime_error("bad csv header: " + path);
    BoundaryFunction f;
    {
        std::istringstream ss(next());
        char comma;
        ss >> f.dim >> comma >> f.level;
    }
    if (next() != "axis,lo,n") throw std::runtime_error("bad csv header: " + path);
    for (int a = 0; a < f.dim; ++a) {
        std::istringstream ss(next());
        int axis;
        char c1, c2;
        ss >> axis >> c1 >> f.lo[static_cast<std::size_t>(a)] >> c2 >> f.n[static_cast<std::size_t>(a)];
    }
    if (next() != "values") throw std::runtime_error("bad csv header: " + path);
    f.values.reserve(f.cell_count());
    while (std::getline(in, line))
        if (!line.empty()) f.values.push_back(std::stod(line));
    if (f.values.size() != f.cell_count()) throw std::runtime_error("csv value count mismatch: " + path);
    return f;
}

}  // namespace whitney
