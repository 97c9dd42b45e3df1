// command-line front end: generate samples, compute norms, run the
// verification suites, and emit CSV/JSON/SVG artifacts
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "whitney/hardy.hpp"
#include "whitney/harness.hpp"
#include "whitney/norms.hpp"
#include "whitney/trace.hpp"

using namespace whitney;

namespace {

struct SampleArgs {
    std::string kind = "hat_spline";
    int d = 1;
    int K = 6;
    std::uint64_t seed = 1;
};

void add_sample_args(CLI::App* cmd, SampleArgs& a) {
    cmd->add_option("--kind", a.kind, "generator: dyadic_step|hat_spline|lacunary_sum|smooth_bump");
    cmd->add_option("--d", a.d, "boundary dimension")->check(CLI::Range(1, 3));
    cmd->add_option("--K", a.K, "dyadic resolution level")->check(CLI::Range(1, 14));
    cmd->add_option("--seed", a.seed, "generator seed");
}

WeightedMeasure boundary_measure(int d, double malpha) {
    return malpha == 0.0 ? lebesgue(d) : WeightedMeasure(d, 1, malpha);
}

// ratio-vs-K polylines, forward in blue, backward in orange
void write_ratio_svg(const std::vector<ResultRow>& rows, const std::string& path) {
    std::map<std::string, std::vector<std::pair<int, double>>> groups;
    double ymin = 1e300, ymax = -1e300;
    int kmin = 1 << 20, kmax = 0;
    for (const ResultRow& r : rows) {
        if (!(r.ratio > 0.0) || std::isinf(r.ratio)) continue;
        char key[128];
        std::snprintf(key, sizeof key, "%.6g|%.6g|%.6g|%d|%s|%llu|%s", r.gp.p, r.gp.alpha, r.gp.s,
                      r.gp.n, generator_name(r.kind), (unsigned long long)r.seed,
                      r.direction.c_str());
        groups[key].push_back({r.K, r.ratio});
        ymin = std::min(ymin, r.ratio);
        ymax = std::max(ymax, r.ratio);
        kmin = std::min(kmin, r.K);
        kmax = std::max(kmax, r.K);
    }
    if (groups.empty()) return;
    if (ymax <= ymin) ymax = ymin + 1.0;
    if (kmax <= kmin) kmax = kmin + 1;
    const double W = 640, H = 400, mL = 70, mR = 20, mT = 20, mB = 40;
    auto px = [&](double k) { return mL + (k - kmin) / double(kmax - kmin) * (W - mL - mR); };
    auto py = [&](double y) { return H - mB - (y - ymin) / (ymax - ymin) * (H - mT - mB); };
    std::ofstream f(path, std::ios::binary);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    char buf[256];
    for (int i = 0; i <= 4; ++i) {
        const double y = ymin + (ymax - ymin) * i / 4.0;
        std::snprintf(buf, sizeof buf,
                      "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='#ddd'/>"
                      "<text x='%.1f' y='%.1f' font-size='11' text-anchor='end'>%.4g</text>\n",
                      mL, py(y), W - mR, py(y), mL - 6, py(y) + 4, y);
        f << buf;
    }
    for (int k = kmin; k <= kmax; ++k) {
        std::snprintf(buf, sizeof buf,
                      "<text x='%.1f' y='%.1f' font-size='11' text-anchor='middle'>K=%d</text>\n",
                      px(k), H - mB + 16, k);
        f << buf;
    }
    for (const auto& [key, pts] : groups) {
        const bool back = key.find("|backward") != std::string::npos;
        auto sorted = pts;
        std::sort(sorted.begin(), sorted.end());
        f << "<polyline fill='none' stroke='" << (back ? "#e08020" : "#3060c0")
          << "' stroke-width='1.3' points='";
        for (const auto& [k, y] : sorted) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(k), py(y));
            f << buf;
        }
        f << "'/>\n";
    }
    f << "<text x='" << mL << "' y='14' font-size='12'>norm ratio vs K (blue forward, orange "
         "backward)</text>\n</svg>\n";
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CLI::ValidationError("--config", "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json(ss.str());
}

void apply_overrides(ExperimentConfig& cfg, const std::string& out_dir, int threads,
                     std::uint64_t seed, bool seed_set) {
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (seed_set) cfg.seeds = {seed};
}

int finish_suite(bool pass, const std::vector<ResultRow>& rows, const std::string& out_dir,
                 bool plot) {
    if (plot && !out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_ratio_svg(rows, out_dir + "/ratios.svg");
    }
    return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadic norm laboratory for weighted half-space function spaces"};
    app.require_subcommand(1);

    SampleArgs sa;
    double s = 0.5, p = 2.0, q = 2.0, alpha = 0.0, malpha = 0.0;
    int n = 1, subdiv = 16;
    std::string space = "besov", route = "tent", config_path, out_dir;
    int threads = 0;
    std::uint64_t run_seed = 0;
    bool plot = false;

    auto* c_norm = app.add_subcommand("norm", "dyadic and integral norms of a generated sample");
    add_sample_args(c_norm, sa);
    c_norm->add_option("--s", s, "smoothness");
    c_norm->add_option("--p", p, "integrability");
    c_norm->add_option("--q", q, "summability (inf accepted)");
    c_norm->add_option("--malpha", malpha, "boundary weight exponent (0: Lebesgue)");
    c_norm->add_flag("--triebel", "print the Triebel-Lizorkin scale instead of Besov");
    c_norm->add_option("--out", out_dir, "write per-level CSV here");

    auto* c_ext = app.add_subcommand("extend", "extension-side norm of a generated sample");
    add_sample_args(c_ext, sa);
    c_ext->add_option("--s", s);
    c_ext->add_option("--p", p);
    c_ext->add_option("--q", q);
    c_ext->add_option("--alpha", alpha, "weight exponent of the target measure");
    c_ext->add_option("--n", n, "codimension")->check(CLI::Range(1, 3));
    c_ext->add_option("--space", space, "sobolev|besov|triebel|hardy");

    auto* c_tr = app.add_subcommand("trace", "extend then trace back; report the residual");
    add_sample_args(c_tr, sa);
    c_tr->add_option("--n", n, "codimension")->check(CLI::Range(1, 3));
    c_tr->add_option("--route", route, "whitney|tent");
    c_tr->add_option("--subdiv", subdiv, "quadrature panels for the whitney route");
    c_tr->add_option("--alpha", alpha, "tent-route measure weight");

    auto* c_pair = app.add_subcommand("verify-pair", "two-sided norm comparison across K");
    c_pair->add_option("--config", config_path, "experiment config JSON")->required();
    c_pair->add_option("--out", out_dir, "artifact directory");
    c_pair->add_option("--seed", run_seed, "replace the config seed list");
    c_pair->add_option("--threads", threads, "parallel tasks");
    c_pair->add_flag("--plot", plot, "write ratio-vs-K SVG");

    auto* c_eq = app.add_subcommand("norm-equiv", "dyadic vs integral Besov brackets");
    c_eq->add_option("--config", config_path)->required();
    c_eq->add_option("--out", out_dir);
    c_eq->add_option("--seed", run_seed);
    c_eq->add_option("--threads", threads);
    c_eq->add_flag("--plot", plot);

    auto* c_sm = app.add_subcommand("sampling", "oscillation-subcube constants");
    c_sm->add_option("--config", config_path)->required();
    c_sm->add_option("--out", out_dir);
    c_sm->add_option("--seed", run_seed);
    c_sm->add_option("--threads", threads);
    c_sm->add_flag("--plot", plot);

    auto* c_h = app.add_subcommand("hardy", "local Hardy norm of an extension");
    add_sample_args(c_h, sa);
    c_h->add_option("--alpha", alpha, "weight exponent, -1 < alpha < 0");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_norm->parsed()) {
            FunctionSample smp = sample_function(generator_from_name(sa.kind), sa.d, sa.K, sa.seed);
            WeightedMeasure m = boundary_measure(sa.d, malpha);
            Pyramid pyr = build_pyramid(smp.f, m);
            const bool tl = c_norm->count("--triebel") > 0;
            NormReport nb = tl ? triebel_norm(pyr, s, p, q) : besov_norm(pyr, s, p, q);
            std::printf("%s dyadic %s norm: %.12g\n", sa.kind.c_str(), tl ? "F" : "B", nb.total);
            if (sa.d == 1) {
                NormReport ib = integral_besov_norm(smp.f, m, s, p, q);
                std::printf("integral form:        %.12g  (ratio %.6f)\n", ib.total,
                            ib.total > 0 ? nb.total / ib.total : 0.0);
            }
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                std::ofstream f(out_dir + "/levels.csv", std::ios::binary);
                f << "level,energy\n";
                for (std::size_t k = 0; k < nb.per_level.size(); ++k)
                    f << k << "," << nb.per_level[k] << "\n";
            }
            return 0;
        }
        if (c_ext->parsed()) {
            GridPoint gp{s, p, q, alpha, n};
            std::string sname = n > 1 && space != "hardy" ? "codim-" + space : space;
            Suite suite = suite_from_name(sname);
            Admissibility adm = admissible(suite, gp, sa.d);
            if (!adm.ok) {
                std::fprintf(stderr, "inadmissible: %s\n", adm.reason.c_str());
                return 2;
            }
            FunctionSample smp = sample_function(generator_from_name(sa.kind), sa.d, sa.K, sa.seed);
            ExtensionField ef = extend(smp.f, n);
            WeightedMeasure mu(sa.d + n, n, alpha);
            double val = 0.0;
            if (space == "sobolev") {
                val = sobolev_norm(ef, mu, p, 8).total;
            } else if (space == "besov" || space == "triebel") {
                Pyramid pyr = n == 1 ? extension_pyramid(ef, mu) : extension_pyramid_codim(ef, mu);
                val = n == 1 ? (space == "besov" ? besov_norm(pyr, s, p, q).total
                                                 : triebel_norm(pyr, s, p, q).total)
                             : codim_seminorm(pyr, n, s, p, space == "besov" ? q : p).total;
            } else if (space == "hardy") {
                Mollifier phi(ef.dim());
                val = h11_norm(ef, phi, mu).value;
            } else {
                std::fprintf(stderr, "unknown space %s\n", space.c_str());
                return 2;
            }
            Pyramid pyr_x = build_pyramid(smp.f, lebesgue(sa.d));
            const double qx = space == "besov" ? q : (space == "hardy" ? 1.0 : p);
            const double bx = besov_norm(pyr_x, adm.trace_smoothness, p, qx).total;
            std::printf("extension %s norm: %.12g\nboundary norm:     %.12g\nratio:             %.6f\n",
                        space.c_str(), val, bx, bx > 0 ? val / bx : 0.0);
            return 0;
        }
        if (c_tr->parsed()) {
            FunctionSample smp = sample_function(generator_from_name(sa.kind), sa.d, sa.K, sa.seed);
            ExtensionField ef = extend(smp.f, n);
            BoundaryFunction tr;
            if (route == "whitney") {
                tr = whitney_trace(ef, sa.K, subdiv);
            } else if (route == "tent") {
                WeightedMeasure mu(sa.d + n, n, alpha);
                Pyramid pyr = n == 1 ? extension_pyramid(ef, mu) : extension_pyramid_codim(ef, mu);
                tr = tent_trace(pyr, sa.K);
            } else {
                std::fprintf(stderr, "unknown route %s\n", route.c_str());
                return 2;
            }
            TraceResidual res = trace_residual(smp.f, tr);
            std::printf("%s route, %s residual: %.3e\n", route.c_str(),
                        res.exact_set ? "locally-constant-cell" : "interior", res.value);
            return 0;
        }
        if (c_pair->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            apply_overrides(cfg, out_dir, threads, run_seed, c_pair->count("--seed") > 0);
            PairReport rep = run_pair(cfg);
            std::printf("suite=%s rows=%zu skipped=%zu fwd_drift=%.4f bwd_drift=%.4f "
                        "id_residual=%.3e pass=%s\n",
                        suite_name(cfg.suite), rep.rows.size(), rep.skipped.size(),
                        rep.worst_forward_drift, rep.worst_backward_drift,
                        rep.max_identity_residual, rep.pass ? "yes" : "NO");
            for (const std::string& sk : rep.skipped) std::printf("  skipped %s\n", sk.c_str());
            return finish_suite(rep.pass, rep.rows, cfg.out_dir, plot);
        }
        if (c_eq->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            apply_overrides(cfg, out_dir, threads, run_seed, c_eq->count("--seed") > 0);
            EquivReport rep = run_norm_equiv(cfg);
            std::printf("norm-equiv rows=%zu worst_drift=%.4f pass=%s\n", rep.rows.size(),
                        rep.worst_drift, rep.pass ? "yes" : "NO");
            return finish_suite(rep.pass, rep.rows, cfg.out_dir, plot);
        }
        if (c_sm->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            apply_overrides(cfg, out_dir, threads, run_seed, c_sm->count("--seed") > 0);
            SamplingReport rep = run_sampling(cfg);
            std::printf("sampling rows=%zu worst_excess=%.3e pass=%s\n", rep.rows.size(),
                        rep.worst_excess, rep.pass ? "yes" : "NO");
            return finish_suite(rep.pass, rep.rows, cfg.out_dir, plot);
        }
        if (c_h->parsed()) {
            if (!(alpha > -1.0 && alpha < 0.0)) {
                std::fprintf(stderr, "hardy needs -1 < alpha < 0\n");
                return 2;
            }
            FunctionSample smp = sample_function(generator_from_name(sa.kind), sa.d, sa.K, sa.seed);
            ExtensionField ef = extend(smp.f, 1);
            WeightedMeasure mu(sa.d + 1, 1, alpha);
            Mollifier phi(ef.dim());
            H11Result h = h11_norm(ef, phi, mu);
            Pyramid pyr_x = build_pyramid(smp.f, lebesgue(sa.d));
            const double bx = besov_norm(pyr_x, -alpha, 1.0, 1.0).total;
            std::printf("h^{1,1}: %.12g  (l1 part %.12g, flagged nodes %zu)\n", h.value, h.l1,
                        h.flagged_nodes);
            std::printf("B^{-alpha}_{1,1}: %.12g  ratio %.6f\n", bx, bx > 0 ? h.value / bx : 0.0);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
