#include "whitney/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "whitney/hardy.hpp"
#include "whitney/norms.hpp"
#include "whitney/trace.hpp"

namespace whitney {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();

constexpr const char* suite_names[] = {"sobolev",       "besov",       "triebel",
                                       "hardy",         "codim-sobolev", "codim-besov",
                                       "codim-triebel", "norm-equiv",  "sampling"};
}  // namespace

const char* suite_name(Suite s) { return suite_names[static_cast<int>(s)]; }

Suite suite_from_name(const std::string& s) {
    for (int i = 0; i < 9; ++i)
        if (s == suite_names[i]) return static_cast<Suite>(i);
    throw std::invalid_argument("unknown suite: " + s);
}

namespace {

bool is_codim_suite(Suite s) {
    return s == Suite::codim_sobolev || s == Suite::codim_besov || s == Suite::codim_triebel;
}

bool is_sobolev_route(Suite s) {
    // suites whose backward trace uses the inflated-Whitney-box averages;
    // the others use the measure-weighted tent averages
    return s == Suite::sobolev || s == Suite::codim_sobolev || s == Suite::hardy ||
           is_codim_suite(s);
}

// l^q exponent of the boundary Besov space each suite pairs with
double boundary_q(Suite s, const GridPoint& gp) {
    switch (s) {
        case Suite::besov:
        case Suite::codim_besov: return gp.q;
        case Suite::hardy: return 1.0;
        default: return gp.p;
    }
}

}  // namespace

Admissibility admissible(Suite suite, const GridPoint& gp, int d) {
    Admissibility r;
    auto fail = [&r](const char* why) {
        r.ok = false;
        r.reason = why;
        return r;
    };
    if (d < 1 || d + gp.n > max_dim) return fail("ambient dimension exceeds the supported limit");
    if (is_codim_suite(suite)) {
        if (gp.n < 2) return fail("codim suites need n >= 2");
    } else if (suite != Suite::sampling && suite != Suite::norm_equiv && gp.n != 1) {
        return fail("codim-1 suite with n != 1");
    }
    switch (suite) {
        case Suite::sobolev:
        case Suite::codim_sobolev:
            if (!sobolev_trace_admissible(gp.p, gp.alpha, gp.n))
                return fail("needs 1 <= p < inf and -n < alpha < p - n");
            r.trace_smoothness = trace_smoothness(1.0, gp.p, gp.alpha, gp.n);
            break;
        case Suite::besov:
        case Suite::triebel:
        case Suite::codim_besov:
        case Suite::codim_triebel:
            if (!(gp.q >= 1.0)) return fail("needs q >= 1");
            if (!besov_trace_admissible(gp.s, gp.p, gp.alpha, gp.n))
                return fail("needs 0 < s < 1, 1 <= p < inf and -n < alpha < sp - n");
            r.trace_smoothness = trace_smoothness(gp.s, gp.p, gp.alpha, gp.n);
            break;
        case Suite::hardy:
            if (gp.p != 1.0 || gp.q != 1.0)
                return fail("the Hardy pair is h^{1,1} against B^{-alpha}_{1,1}: p = q = 1");
            if (!(gp.alpha > -1.0 && gp.alpha < 0.0)) return fail("needs -1 < alpha < 0");
            r.trace_smoothness = -gp.alpha;
            break;
        case Suite::norm_equiv:
            if (!(gp.s > 0.0 && gp.s < 1.0 && gp.p >= 1.0 && gp.p < inf && gp.q >= 1.0))
                return fail("needs 0 < s < 1, 1 <= p < inf, q >= 1");
            r.trace_smoothness = gp.s;
            break;
        case Suite::sampling: break;
    }
    r.ok = true;
    return r;
}

// ---- interior perturbations -------------------------------------------------

namespace {

double blob_profile(double u, double* du) {
    if (du) *du = 0.0;
    if (u >= 1.0) return 0.0;
    if (u <= 0.5) return 1.0;
    if (du) *du = -2.0 * smooth_ramp_deriv(2.0 - 2.0 * u);
    return smooth_ramp(2.0 - 2.0 * u);
}

}  // namespace

PerturbedField::PerturbedField(const ExtensionField& base, std::uint64_t seed, int blobs)
    : base_(&base) {
    std::mt19937_64 rng(seed ^ 0x77f1345994533d24ull);
    const int d = base.boundary_dim();
    const int n = base.codim();
    const int K = base.top_level();
    const Pyramid::Level& L = base.boundary().level(K);
    for (int b = 0; b < blobs; ++b) {
        Blob bl;
        for (int a = 0; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            const double lo = std::ldexp(static_cast<double>(L.lo[ua]), -K);
            const double w = std::ldexp(static_cast<double>(L.n[ua]), -K);
            bl.center[ua] = lo + w * uniform01(rng());
        }
        const double dist = 0.4375 + 0.25 * uniform01(rng());
        const double side = uniform01(rng()) < 0.5 ? -1.0 : 1.0;
        bl.center[static_cast<std::size_t>(d)] = n == 1 ? dist : side * dist;
        bl.radius = 0.0625 * (1.0 + uniform01(rng()));
        const double mag = 0.2 + 0.3 * uniform01(rng());
        bl.amp = uniform01(rng()) < 0.5 ? -mag : mag;
        blobs_.push_back(bl);
    }
}

double PerturbedField::value(const std::array<double, max_dim>& x) const {
    double v = base_->value(x);
    const int D = dim();
    for (const Blob& b : blobs_) {
        double r2 = 0.0;
        for (int a = 0; a < D; ++a) {
            const double e = x[static_cast<std::size_t>(a)] - b.center[static_cast<std::size_t>(a)];
            r2 += e * e;
        }
        const double u = std::sqrt(r2) / b.radius;
        if (u < 1.0) v += b.amp * blob_profile(u, nullptr);
    }
    return v;
}

double PerturbedField::value_and_gradient(const std::array<double, max_dim>& x,
                                          std::array<double, max_dim>& grad) const {
    double v = base_->value_and_gradient(x, grad);
    const int D = dim();
    for (const Blob& b : blobs_) {
        double r2 = 0.0;
        for (int a = 0; a < D; ++a) {
            const double e = x[static_cast<std::size_t>(a)] - b.center[static_cast<std::size_t>(a)];
            r2 += e * e;
        }
        const double rho = std::sqrt(r2);
        const double u = rho / b.radius;
        if (u >= 1.0) continue;
        double du = 0.0;
        v += b.amp * blob_profile(u, &du);
        if (du != 0.0 && rho > 0.0) {
            const double f = b.amp * du / (rho * b.radius);
            for (int a = 0; a < D; ++a)
                grad[static_cast<std::size_t>(a)] +=
                    f * (x[static_cast<std::size_t>(a)] - b.center[static_cast<std::size_t>(a)]);
        }
    }
    return v;
}

std::array<double, max_dim> PerturbedField::gradient(const std::array<double, max_dim>& x) const {
    std::array<double, max_dim> g;
    value_and_gradient(x, g);
    return g;
}

// ---- pair verification -------------------------------------------------------

TraceResidual trace_residual(const BoundaryFunction& f, const BoundaryFunction& tr) {
    TraceResidual out;
    const int d = f.dim;
    std::array<std::int64_t, max_dim> it{};
    double loose = 0.0;
    bool any_loose = false;
    while (true) {
        bool interior = true;
        std::array<std::int64_t, max_dim> idx{};
        for (int a = 0; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            idx[ua] = f.lo[ua] + it[ua];
            if (it[ua] < 2 || it[ua] >= f.n[ua] - 2) interior = false;
        }
        if (interior) {
            const double fv = f.value_at_index(idx);
            const double diff = std::abs(fv - tr.value_at_index(idx));
            loose = std::max(loose, diff);
            any_loose = true;
            bool flat = true;
            std::array<std::int64_t, max_dim> nb = idx;
            std::array<int, max_dim> off{};
            while (flat) {
                for (int a = 0; a < d; ++a)
                    nb[static_cast<std::size_t>(a)] =
                        idx[static_cast<std::size_t>(a)] + off[static_cast<std::size_t>(a)] - 2;
                if (f.value_at_index(nb) != fv) flat = false;
                int a = 0;
                for (; a < d; ++a) {
                    if (++off[static_cast<std::size_t>(a)] < 5) break;
                    off[static_cast<std::size_t>(a)] = 0;
                }
                if (a == d) break;
            }
            if (flat) {
                if (!out.exact_set) out.value = 0.0;
                out.exact_set = true;
                out.value = std::max(out.value, diff);
            }
        }
        int a = 0;
        for (; a < d; ++a) {
            const std::size_t ua = static_cast<std::size_t>(a);
            if (++it[ua] < f.n[ua]) break;
            it[ua] = 0;
        }
        if (a == d) break;
    }
    if (!out.exact_set && any_loose) out.value = loose;
    return out;
}

namespace {

double forward_target_norm(const ExperimentConfig& cfg, const GridPoint& gp,
                           const ExtensionField& ef, const WeightedMeasure& mu,
                           Pyramid** pyr_out, std::vector<Pyramid>& store) {
    switch (cfg.suite) {
        case Suite::sobolev:
        case Suite::codim_sobolev:
            return sobolev_norm(ef, mu, gp.p, cfg.sobolev_subdiv).total;
        case Suite::besov:
        case Suite::triebel: {
            store.push_back(extension_pyramid(ef, mu));
            *pyr_out = &store.back();
            return cfg.suite == Suite::besov
                       ? besov_norm(store.back(), gp.s, gp.p, gp.q).total
                       : triebel_norm(store.back(), gp.s, gp.p, gp.q).total;
        }
        case Suite::codim_besov:
        case Suite::codim_triebel: {
            store.push_back(extension_pyramid_codim(ef, mu));
            const double q = cfg.suite == Suite::codim_besov ? gp.q : gp.p;
            return codim_seminorm(store.back(), gp.n, gp.s, gp.p, q).total;
        }
        case Suite::hardy: {
            Mollifier phi(ef.dim());
            return h11_norm(ef, phi, mu).value;
        }
        default: throw std::logic_error("forward_target_norm: not a pair suite");
    }
}

double backward_target_norm(const ExperimentConfig& cfg, const GridPoint& gp,
                            const PerturbedField& g, const WeightedMeasure& mu,
                            const BoundaryFunction& f, Pyramid** pyr_out,
                            std::vector<Pyramid>& store) {
    const int d = cfg.d;
    const int K = f.level;
    switch (cfg.suite) {
        case Suite::sobolev:
        case Suite::codim_sobolev: {
            std::array<std::int64_t, max_dim> lo0{}, n0{};
            for (int a = 0; a < d; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                const std::int64_t cells = std::int64_t{1} << K;
                std::int64_t lo = f.lo[ua] >= 0 ? f.lo[ua] / cells
                                                : -((-f.lo[ua] + cells - 1) / cells);
                std::int64_t hi = f.lo[ua] + f.n[ua];
                hi = hi >= 0 ? (hi + cells - 1) / cells : -((-hi) / cells);
                lo0[ua] = lo;
                n0[ua] = std::max<std::int64_t>(1, hi - lo);
            }
            return sobolev_norm_box(g, mu, gp.n, gp.p, K, lo0, n0, cfg.sobolev_subdiv).total;
        }
        case Suite::besov:
        case Suite::triebel: {
            store.push_back(sampled_pyramid(g, mu, d, gp.n, K, f.lo, f.n));
            *pyr_out = &store.back();
            return cfg.suite == Suite::besov
                       ? besov_norm(store.back(), gp.s, gp.p, gp.q).total
                       : triebel_norm(store.back(), gp.s, gp.p, gp.q).total;
        }
        case Suite::codim_besov:
        case Suite::codim_triebel: {
            store.push_back(sampled_pyramid(g, mu, d, gp.n, K, f.lo, f.n));
            const double q = cfg.suite == Suite::codim_besov ? gp.q : gp.p;
            return codim_seminorm(store.back(), gp.n, gp.s, gp.p, q).total;
        }
        case Suite::hardy: {
            Mollifier phi(g.dim());
            std::array<double, 2 * max_dim> hor{};
            for (int a = 0; a < d; ++a) {
                const std::size_t ua = static_cast<std::size_t>(a);
                hor[2 * ua] = std::floor(std::ldexp(static_cast<double>(f.lo[ua]), -K)) - 0.25;
                hor[2 * ua + 1] =
                    std::ceil(std::ldexp(static_cast<double>(f.lo[ua] + f.n[ua]), -K)) + 0.25;
            }
            return h11_norm(g, phi, mu, hor, K).value;
        }
        default: throw std::logic_error("backward_target_norm: not a pair suite");
    }
}

struct PairTask {
    GridPoint gp;
    double sigma = 0.0;
    GeneratorKind kind = GeneratorKind::dyadic_step;
    std::uint64_t seed = 0;
};

struct PairTaskResult {
    std::vector<ResultRow> rows;
    SeedStability st;
    double max_exact_residual = 0.0;
    bool exact_any = false;
};

PairTaskResult eval_pair_task(const ExperimentConfig& cfg, const PairTask& t) {
    PairTaskResult out;
    out.st.gp = t.gp;
    out.st.kind = t.kind;
    out.st.seed = t.seed;
    const double qx = boundary_q(cfg.suite, t.gp);
    std::vector<double> fwd, bwd;

    for (int K : cfg.k_levels) {
        FunctionSample smp = sample_function(t.kind, cfg.d, K, t.seed);
        const BoundaryFunction& f = smp.f;
        Pyramid pyr_x = build_pyramid(f, lebesgue(cfg.d));
        const double nx = besov_norm(pyr_x, t.sigma, t.gp.p, qx).total;

        ExtensionField ef = extend(f, t.gp.n);
        WeightedMeasure mu(cfg.d + t.gp.n, t.gp.n, t.gp.alpha);

        std::vector<Pyramid> store;
        store.reserve(2);
        Pyramid* fwd_pyr = nullptr;
        const double ny = forward_target_norm(cfg, t.gp, ef, mu, &fwd_pyr, store);

        // identity: trace the unperturbed extension back
        BoundaryFunction tr_f = is_sobolev_route(cfg.suite)
                                    ? whitney_trace(ef, K, cfg.trace_subdiv)
                                    : tent_trace(*fwd_pyr, K);
        TraceResidual res = trace_residual(f, tr_f);
        if (res.exact_set) {
            out.exact_any = true;
            out.max_exact_residual = std::max(out.max_exact_residual, res.value);
        }

        ResultRow row;
        row.suite = cfg.suite;
        row.gp = t.gp;
        row.K = K;
        row.seed = t.seed;
        row.kind = t.kind;
        row.direction = "forward";
        row.norm_x = nx;
        row.norm_y = ny;
        row.ratio = nx > 0.0 ? ny / nx : inf;
        row.residual = res.value;
        out.rows.push_back(row);
        fwd.push_back(row.ratio);

        // backward: perturbed field, trace, boundary norm
        PerturbedField g(ef, t.seed, cfg.blob_count);
        Pyramid* bwd_pyr = nullptr;
        const double ny2 = backward_target_norm(cfg, t.gp, g, mu, f, &bwd_pyr, store);
        BoundaryFunction tr_g =
            is_sobolev_route(cfg.suite)
                ? whitney_trace(g, cfg.d, t.gp.n, K, f.lo, f.n, cfg.trace_subdiv)
                : tent_trace(*bwd_pyr, K);
        Pyramid pyr_bx = build_pyramid(tr_g, lebesgue(cfg.d));
        const double nx2 = besov_norm(pyr_bx, t.sigma, t.gp.p, qx).total;

        row.direction = "backward";
        row.norm_x = nx2;
        row.norm_y = ny2;
        row.ratio = ny2 > 0.0 ? nx2 / ny2 : inf;
        row.residual = 0.0;
        out.rows.push_back(row);
        bwd.push_back(row.ratio);
    }

    auto drift = [](const std::vector<double>& v) {
        double lo = inf, hi = 0.0;
        for (double r : v) {
            if (!(r > 0.0) || std::isinf(r) || std::isnan(r)) return inf;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        return v.empty() ? 1.0 : hi / lo;
    };
    out.st.forward_drift = drift(fwd);
    out.st.backward_drift = drift(bwd);
    return out;
}

template <class Task, class Result, class Fn>
std::vector<Result> run_ordered(const std::vector<Task>& tasks, int threads, Fn&& fn) {
    std::vector<Result> results(tasks.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = fn(tasks[i]);
        return results;
    }
    for (std::size_t base = 0; base < tasks.size(); base += static_cast<std::size_t>(threads)) {
        const std::size_t end =
            std::min(tasks.size(), base + static_cast<std::size_t>(threads));
        std::vector<std::future<Result>> futs;
        for (std::size_t i = base; i < end; ++i)
            futs.push_back(std::async(std::launch::async, fn, tasks[i]));
        for (std::size_t i = base; i < end; ++i) results[i] = futs[i - base].get();
    }
    return results;
}

void require_runnable(const ExperimentConfig& cfg) {
    if (cfg.grid.empty()) throw std::invalid_argument("config: empty parameter grid");
    if (cfg.k_levels.empty()) throw std::invalid_argument("config: empty K range");
    if (cfg.kinds.empty()) throw std::invalid_argument("config: no generator kinds");
    if (cfg.seeds.empty()) throw std::invalid_argument("config: no seeds");
}

}  // namespace

PairReport run_pair(const ExperimentConfig& cfg) {
    if (cfg.suite == Suite::norm_equiv || cfg.suite == Suite::sampling)
        throw std::invalid_argument("run_pair: not a trace/extension suite");
    require_runnable(cfg);

    PairReport rep;
    std::vector<PairTask> tasks;
    for (const GridPoint& gp : cfg.grid) {
        Admissibility adm = admissible(cfg.suite, gp, cfg.d);
        if (!adm.ok) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "s=%g p=%g q=%g alpha=%g n=%d: %s", gp.s, gp.p, gp.q,
                          gp.alpha, gp.n, adm.reason.c_str());
            rep.skipped.push_back(buf);
            continue;
        }
        for (GeneratorKind kind : cfg.kinds)
            for (std::uint64_t seed : cfg.seeds)
                tasks.push_back({gp, adm.trace_smoothness, kind, seed});
    }

    auto results = run_ordered<PairTask, PairTaskResult>(
        tasks, cfg.threads, [&cfg](const PairTask& t) { return eval_pair_task(cfg, t); });

    for (const PairTaskResult& r : results) {
        rep.rows.insert(rep.rows.end(), r.rows.begin(), r.rows.end());
        rep.stability.push_back(r.st);
        rep.worst_forward_drift = std::max(rep.worst_forward_drift, r.st.forward_drift);
        rep.worst_backward_drift = std::max(rep.worst_backward_drift, r.st.backward_drift);
        if (r.exact_any)
            rep.max_identity_residual = std::max(rep.max_identity_residual, r.max_exact_residual);
        if (!(r.st.forward_drift <= cfg.ratio_threshold) ||
            !(r.st.backward_drift <= cfg.ratio_threshold))
            rep.pass = false;
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        const std::string base = cfg.out_dir + "/pair_" + suite_name(cfg.suite);
        write_rows_csv(rep.rows, base + ".csv");
        write_pair_json(rep, cfg, base + ".json");
    }
    return rep;
}

EquivReport run_norm_equiv(const ExperimentConfig& cfg) {
    if (cfg.d != 1)
        throw std::invalid_argument("run_norm_equiv: integral-form norms cover d = 1 only");
    require_runnable(cfg);

    EquivReport rep;
    const WeightedMeasure measures[2] = {lebesgue(1), WeightedMeasure(1, 1, 0.5)};
    for (const GridPoint& gp : cfg.grid) {
        Admissibility adm = admissible(Suite::norm_equiv, gp, cfg.d);
        if (!adm.ok) continue;
        for (const WeightedMeasure& m : measures) {
            for (GeneratorKind kind : cfg.kinds)
                for (std::uint64_t seed : cfg.seeds) {
                    std::vector<double> ratios;
                    for (int K : cfg.k_levels) {
                        FunctionSample smp = sample_function(kind, 1, K, seed);
                        Pyramid pyr = build_pyramid(smp.f, m);
                        const double dy = besov_norm(pyr, gp.s, gp.p, gp.q).total;
                        const double in = integral_besov_norm(smp.f, m, gp.s, gp.p, gp.q).total;
                        ResultRow row;
                        row.suite = Suite::norm_equiv;
                        row.gp = gp;
                        row.gp.alpha = m.alpha;
                        row.gp.n = m.normal_dims;
                        row.K = K;
                        row.seed = seed;
                        row.kind = kind;
                        row.direction = "equiv";
                        row.norm_x = dy;
                        row.norm_y = in;
                        row.ratio = in > 0.0 ? dy / in : (dy == 0.0 ? 1.0 : inf);
                        rep.rows.push_back(row);
                        ratios.push_back(row.ratio);
                    }
                    double lo = inf, hi = 0.0;
                    bool bad = false;
                    for (double r : ratios) {
                        if (!(r > 0.0) || std::isinf(r)) bad = true;
                        lo = std::min(lo, r);
                        hi = std::max(hi, r);
                    }
                    const double drift = bad ? inf : hi / lo;
                    rep.worst_drift = std::max(rep.worst_drift, drift);
                    if (!(drift <= cfg.bracket_threshold)) rep.pass = false;
                }
        }
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_rows_csv(rep.rows, cfg.out_dir + "/norm_equiv.csv");
        write_equiv_json(rep, cfg, cfg.out_dir + "/norm_equiv.json");
    }
    return rep;
}

SamplingReport run_sampling(const ExperimentConfig& cfg) {
    require_runnable(cfg);
    std::vector<double> lambdas = cfg.lambdas;
    if (lambdas.empty()) lambdas = {0.75, 0.5, 0.25};
    const int K = cfg.k_levels.front();
    const int d = cfg.d;

    SamplingReport rep;
    std::array<double, 2 * max_dim> unit{};
    for (int a = 0; a < d; ++a) {
        unit[static_cast<std::size_t>(2 * a)] = 0.0;
        unit[static_cast<std::size_t>(2 * a + 1)] = 1.0;
    }

    for (GeneratorKind kind : cfg.kinds)
        for (std::uint64_t seed : cfg.seeds) {
            FunctionSample smp = sample_function(kind, d, K, seed);
            Pyramid pyr = build_pyramid(smp.f, lebesgue(d));
            for (double lam : lambdas) {
                SamplingResult res = sampling_subcube(pyr, unit, d, lam);

                // aligned dense grid of competing subcubes
                const std::int64_t cells = std::int64_t{1} << K;
                const std::int64_t edge_c =
                    std::max<std::int64_t>(1, std::llround(lam * static_cast<double>(cells)));
                const std::int64_t slack = cells - edge_c;
                const std::int64_t step = std::max<std::int64_t>(1, slack / 16);
                double best_osc = 0.0;
                std::array<std::int64_t, max_dim> off{};
                bool done = false;
                while (!done) {
                    std::array<double, 2 * max_dim> sub{};
                    for (int a = 0; a < d; ++a) {
                        const std::size_t ua = static_cast<std::size_t>(a);
                        const double lo =
                            static_cast<double>(std::min(off[ua] * step, slack)) /
                            static_cast<double>(cells);
                        sub[2 * ua] = lo;
                        sub[2 * ua + 1] = lo + static_cast<double>(edge_c) /
                                                   static_cast<double>(cells);
                    }
                    best_osc = std::max(best_osc, mean_oscillation(pyr, sub));
                    int a = 0;
                    for (; a < d; ++a) {
                        const std::size_t ua = static_cast<std::size_t>(a);
                        if (off[ua] * step < slack) {
                            ++off[ua];
                            break;
                        }
                        off[ua] = 0;
                    }
                    if (a == d) done = true;
                }
                const double brute =
                    res.osc_q == 0.0 ? 1.0 : (best_osc > 0.0 ? res.osc_q / best_osc : inf);

                double max_step = 1.0;
                for (double sr : res.step_ratios) max_step = std::max(max_step, sr);
                const double bound = std::pow(max_step, res.steps);
                const double excess = res.constant - bound;
                rep.worst_excess = std::max(rep.worst_excess, excess);
                if (!(excess <= 1e-9 * std::max(1.0, bound))) rep.pass = false;

                ResultRow row;
                row.suite = Suite::sampling;
                row.gp.s = lam;
                row.gp.p = 0.0;
                row.gp.q = 0.0;
                row.gp.alpha = 0.0;
                row.gp.n = d;
                row.K = K;
                row.seed = seed;
                row.kind = kind;
                row.direction = "sampling";
                row.norm_x = res.constant;
                row.norm_y = brute;
                row.ratio = brute > 0.0 ? res.constant / brute : inf;
                row.residual = excess;
                rep.rows.push_back(row);
            }
        }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_rows_csv(rep.rows, cfg.out_dir + "/sampling.csv");
        write_sampling_json(rep, cfg, cfg.out_dir + "/sampling.json");
    }
    return rep;
}

// ---- serialization -----------------------------------------------------------

std::string rows_csv(const std::vector<ResultRow>& rows) {
    std::string out = "suite,s,p,q,alpha,n,K,seed,direction,norm_x,norm_y,ratio,residual\n";
    char buf[320];
    for (const ResultRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%d,%d,%llu,%s,%.17g,%.17g,%.17g,%.17g\n",
                      suite_name(r.suite), r.gp.s, r.gp.p, r.gp.q, r.gp.alpha, r.gp.n, r.K,
                      static_cast<unsigned long long>(r.seed), r.direction.c_str(), r.norm_x,
                      r.norm_y, r.ratio, r.residual);
        out += buf;
    }
    return out;
}

void write_rows_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << rows_csv(rows);
}

namespace {

nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["suite"] = suite_name(cfg.suite);
    j["d"] = cfg.d;
    j["grid"] = nlohmann::ordered_json::array();
    for (const GridPoint& g : cfg.grid)
        j["grid"].push_back({{"s", g.s}, {"p", g.p}, {"q", g.q}, {"alpha", g.alpha}, {"n", g.n}});
    j["k_levels"] = cfg.k_levels;
    j["kinds"] = nlohmann::ordered_json::array();
    for (GeneratorKind k : cfg.kinds) j["kinds"].push_back(generator_name(k));
    j["seeds"] = cfg.seeds;
    j["lambdas"] = cfg.lambdas;
    j["ratio_threshold"] = cfg.ratio_threshold;
    j["bracket_threshold"] = cfg.bracket_threshold;
    j["sobolev_subdiv"] = cfg.sobolev_subdiv;
    j["trace_subdiv"] = cfg.trace_subdiv;
    j["blob_count"] = cfg.blob_count;
    j["threads"] = cfg.threads;
    j["out_dir"] = cfg.out_dir;
    return j;
}

void dump_json(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << "\n";
}

}  // namespace

void write_pair_json(const PairReport& r, const ExperimentConfig& cfg, const std::string& path) {
    nlohmann::ordered_json j;
    j["config"] = config_json(cfg);
    j["pass"] = r.pass;
    j["rows"] = r.rows.size();
    j["worst_forward_drift"] = r.worst_forward_drift;
    j["worst_backward_drift"] = r.worst_backward_drift;
    j["max_identity_residual"] = r.max_identity_residual;
    j["skipped"] = r.skipped;
    j["stability"] = nlohmann::ordered_json::array();
    for (const SeedStability& s : r.stability)
        j["stability"].push_back({{"s", s.gp.s},
                                  {"p", s.gp.p},
                                  {"q", s.gp.q},
                                  {"alpha", s.gp.alpha},
                                  {"n", s.gp.n},
                                  {"kind", generator_name(s.kind)},
                                  {"seed", s.seed},
                                  {"forward_drift", s.forward_drift},
                                  {"backward_drift", s.backward_drift}});
    dump_json(j, path);
}

void write_equiv_json(const EquivReport& r, const ExperimentConfig& cfg, const std::string& path) {
    nlohmann::ordered_json j;
    j["config"] = config_json(cfg);
    j["pass"] = r.pass;
    j["rows"] = r.rows.size();
    j["worst_drift"] = r.worst_drift;
    dump_json(j, path);
}

void write_sampling_json(const SamplingReport& r, const ExperimentConfig& cfg,
                         const std::string& path) {
    nlohmann::ordered_json j;
    j["config"] = config_json(cfg);
    j["pass"] = r.pass;
    j["rows"] = r.rows.size();
    j["worst_excess"] = r.worst_excess;
    dump_json(j, path);
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("schema_version", 1) != 1)
        throw std::invalid_argument("config: unsupported schema_version");
    ExperimentConfig cfg;
    cfg.suite = suite_from_name(j.at("suite").get<std::string>());
    cfg.d = j.value("d", 1);
    if (j.contains("grid"))
        for (const auto& g : j["grid"]) {
            GridPoint gp;
            gp.s = g.value("s", 0.5);
            gp.p = g.value("p", 2.0);
            gp.q = g.value("q", 2.0);
            gp.alpha = g.value("alpha", 0.0);
            gp.n = g.value("n", 1);
            cfg.grid.push_back(gp);
        }
    cfg.k_levels = j.value("k_levels", std::vector<int>{});
    if (j.contains("kinds"))
        for (const auto& k : j["kinds"]) cfg.kinds.push_back(generator_from_name(k.get<std::string>()));
    cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    cfg.lambdas = j.value("lambdas", std::vector<double>{});
    cfg.ratio_threshold = j.value("ratio_threshold", 2.0);
    cfg.bracket_threshold = j.value("bracket_threshold", 1.5);
    cfg.sobolev_subdiv = j.value("sobolev_subdiv", 8);
    cfg.trace_subdiv = j.value("trace_subdiv", 16);
    cfg.blob_count = j.value("blob_count", 3);
    cfg.threads = j.value("threads", 1);
    cfg.out_dir = j.value("out_dir", std::string{});
    return cfg;
}

}  // namespace whitney
