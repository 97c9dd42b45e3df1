#pragma once

// Batch experiment runner: trace/extension pair verification per theorem
// suite, dyadic-versus-integral norm equivalence sweeps, and sampling-lemma
// subcube searches. Every emitted number is reproducible by calling the
// underlying module operations directly; reports are deterministic in the
// config (identical config + seeds => byte-identical CSV).

#include <cstdint>
#include <string>
#include <vector>

#include "whitney/extension.hpp"
#include "whitney/function.hpp"
#include "whitney/measure.hpp"

namespace whitney {

enum class Suite {
    sobolev,         // W^{1,p}(mu_alpha) <-> B^{1-(alpha+1)/p}_{p,p}
    besov,           // B^s_{p,q}(mu_alpha) <-> B^{s-(alpha+1)/p}_{p,q}
    triebel,         // F^s_{p,q}(mu_alpha) <-> B^{s-(alpha+1)/p}_{p,p}
    hardy,           // h^{1,1}(mu_alpha) <-> B^{-alpha}_{1,1}
    codim_sobolev,   // codim n: smoothness drop (alpha+n)/p
    codim_besov,
    codim_triebel,   // diagonal q = p (coincides with the Besov energy)
    norm_equiv,      // dyadic vs integral Besov on the boundary
    sampling         // oscillation-subcube constants
};

const char* suite_name(Suite s);
Suite suite_from_name(const std::string& s);

struct GridPoint {
    double s = 0.5;    // interior smoothness (ignored by sobolev/hardy)
    double p = 2.0;
    double q = 2.0;
    double alpha = 0.0;
    int n = 1;         // codimension
};

struct Admissibility {
    bool ok = false;
    double trace_smoothness = 0.0;  // boundary smoothness when ok
    std::string reason;             // violated inequality when not
};

// range checks exactly as the trace statements require
Admissibility admissible(Suite suite, const GridPoint& gp, int d);

struct ExperimentConfig {
    Suite suite = Suite::sobolev;
    int d = 1;
    std::vector<GridPoint> grid;
    std::vector<int> k_levels;
    std::vector<GeneratorKind> kinds;
    std::vector<std::uint64_t> seeds;
    std::vector<double> lambdas;    // sampling suite only
    double ratio_threshold = 2.0;   // per-seed max/min across k_levels
    double bracket_threshold = 1.5; // norm-equivalence drift
    int sobolev_subdiv = 8;         // quadrature density for W^{1,p} norms
    int trace_subdiv = 16;
    int blob_count = 3;
    int threads = 1;
    std::string out_dir;            // empty: no files written
};

// Smooth compactly supported perturbation of an extension field: quintic
// radial blobs at distance >= 5/16 from the boundary plane, so every trace
// at level >= 3 is untouched while the target-space norm changes.
class PerturbedField : public AmbientField {
  public:
    struct Blob {
        std::array<double, max_dim> center{};
        double radius = 0.0;
        double amp = 0.0;
    };

    PerturbedField(const ExtensionField& base, std::uint64_t seed, int blobs = 3);

    int dim() const override { return base_->dim(); }
    double value(const std::array<double, max_dim>& x) const override;
    std::array<double, max_dim> gradient(const std::array<double, max_dim>& x) const override;
    double value_and_gradient(const std::array<double, max_dim>& x,
                              std::array<double, max_dim>& grad) const override;
    const std::vector<Blob>& blobs() const { return blobs_; }
    const ExtensionField& base() const { return *base_; }

  private:
    const ExtensionField* base_;
    std::vector<Blob> blobs_;
};

// one CSV row; the fixed schema is
// suite,s,p,q,alpha,n,K,seed,direction,norm_x,norm_y,ratio,residual
struct ResultRow {
    Suite suite = Suite::sobolev;
    GridPoint gp;
    int K = 0;
    std::uint64_t seed = 0;
    GeneratorKind kind = GeneratorKind::dyadic_step;
    std::string direction;  // "forward" | "backward" | "equiv" | "sampling"
    double norm_x = 0.0;
    double norm_y = 0.0;
    double ratio = 0.0;
    double residual = 0.0;
};

struct SeedStability {
    GridPoint gp;
    GeneratorKind kind = GeneratorKind::dyadic_step;
    std::uint64_t seed = 0;
    double forward_drift = 1.0;   // max/min of the forward ratio across K
    double backward_drift = 1.0;
};

struct PairReport {
    std::vector<ResultRow> rows;
    std::vector<SeedStability> stability;
    std::vector<std::string> skipped;  // inadmissible grid points, with reason
    double worst_forward_drift = 1.0;
    double worst_backward_drift = 1.0;
    double max_identity_residual = 0.0;  // over locally constant interior cells
    bool pass = true;
};

// forward: ||E f||_Y / ||f||_X per (grid point, kind, seed, K); backward:
// ||R g||_X / ||g||_Y for g = E f plus interior blobs; identity residual of
// R(E f) against f. pass = every per-seed drift below ratio_threshold.
PairReport run_pair(const ExperimentConfig& cfg);

struct EquivReport {
    std::vector<ResultRow> rows;  // norm_x = dyadic, norm_y = integral
    double worst_drift = 1.0;     // per (point, measure, seed) across K
    bool pass = true;
};

// dyadic vs integral Besov quasinorm on the boundary, Lebesgue and one
// weighted doubling measure (min(1,|x|)^{1/2} dx)
EquivReport run_norm_equiv(const ExperimentConfig& cfg);

struct SamplingReport {
    std::vector<ResultRow> rows;  // s = lambda; norm_x = constructive C,
                                  // norm_y = brute-force grid optimum
    double worst_excess = 0.0;    // max of C - max_step^steps (should be <= 0)
    bool pass = true;
};

// constructive subcube constant vs a dense aligned-grid optimum, plus the
// iterated single-step bound
SamplingReport run_sampling(const ExperimentConfig& cfg);

// max |f - tr| over cells two in from the support edge; when cells exist whose
// +-2 index block is constant (step plateaus), only those count and exact_set
// is true -- box averages reproduce such cells with no quadrature error
struct TraceResidual {
    double value = 0.0;
    bool exact_set = false;
};
TraceResidual trace_residual(const BoundaryFunction& f, const BoundaryFunction& tr);

// deterministic serialization; write_summary_json emits the pass flag,
// thresholds, and per-suite aggregates of the rows
void write_rows_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::string rows_csv(const std::vector<ResultRow>& rows);
void write_pair_json(const PairReport& r, const ExperimentConfig& cfg, const std::string& path);
void write_equiv_json(const EquivReport& r, const ExperimentConfig& cfg, const std::string& path);
void write_sampling_json(const SamplingReport& r, const ExperimentConfig& cfg,
                         const std::string& path);

// config I/O (JSON; schema_version field checked)
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace whitney
