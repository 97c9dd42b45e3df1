#pragma once

// Function representation: boundary data as exact cell averages on the
// finest dyadic level K, and pyramids of measure-weighted averages over
// levels 0..K built bottom-up from the finest cells. The represented
// object is always the level-K step function; every norm below consumes
// only these averages.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "whitney/dyadic.hpp"
#include "whitney/measure.hpp"

namespace whitney {

// asked for data below the resolved scale (or above the stored tree)
struct resolution_error : std::runtime_error {
    explicit resolution_error(const std::string& what) : std::runtime_error(what) {}
};

struct BoundaryFunction {
    int dim = 1;    // d
    int level = 0;  // K
    std::array<std::int64_t, max_dim> lo{};  // first cell index per axis (level K)
    std::array<std::int64_t, max_dim> n{};   // cells per axis
    std::vector<double> values;              // row-major cell averages

    std::size_t cell_count() const {
        std::size_t c = 1;
        for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(n[a]);
        return c;
    }
    Box support() const;
    // cell value by level-K index; 0 outside the stored block
    double value_at_index(const std::array<std::int64_t, max_dim>& idx) const;
    double value_at_point(const std::array<double, max_dim>& x) const;
};

// ---- pyramid of weighted cell averages ----------------------------------

class Pyramid {
  public:
    // finest_values: row-major over [lo, lo+n) at level K
    Pyramid(int ambient_dim, bool half_space, const WeightedMeasure& mu, int K,
            std::array<std::int64_t, max_dim> lo, std::array<std::int64_t, max_dim> n,
            std::vector<double> finest_values);

    int dim() const { return dim_; }
    int top_level() const { return K_; }
    bool half_space() const { return half_space_; }
    const WeightedMeasure& measure() const { return mu_; }

    // average over any cube of level 0..K; cubes outside the stored block
    // are averages of the zero extension (0 if fully outside, partial sums
    // are already folded in during construction)
    double average(int level, const std::array<std::int64_t, max_dim>& idx) const;
    double average(const DyadicCube& q) const;

    // value of the represented level-K step function on a finer cube
    double step_value(const DyadicCube& q) const;

    // cube mass under the pyramid's measure (margin-tabulated)
    double mass(int level, const std::array<std::int64_t, max_dim>& idx) const;

    struct Level {
        std::array<std::int64_t, max_dim> lo{}, n{};
        std::vector<double> avg;
        // dense mass table over the normal-axis indices, incl. margin
        std::array<std::int64_t, max_dim> mlo{}, mn{};
        std::vector<double> normal_mass;
        double horizontal_cell = 1.0;  // product of horizontal cell sides

        std::size_t count() const {
            std::size_t c = 1;
            for (std::int64_t e : n)
                if (e > 0) c *= static_cast<std::size_t>(e);
            return c;
        }
    };
    const Level& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
    static constexpr int mass_margin = 8;

  private:
    double child_or_zero(int level, const std::array<std::int64_t, max_dim>& idx,
                         const Level& L) const;

    int dim_;
    bool half_space_;
    WeightedMeasure mu_;
    int K_;
    std::vector<Level> levels_;
};

Pyramid build_pyramid(const BoundaryFunction& f, const WeightedMeasure& mu);

// average over a cube of level <= K; throws resolution_error for finer cubes
double cell_average(const Pyramid& p, const DyadicCube& q);

// ---- deterministic sample families ---------------------------------------

enum class GeneratorKind { dyadic_step, hat_spline, lacunary_sum, smooth_bump };

const char* generator_name(GeneratorKind k);
GeneratorKind generator_from_name(const std::string& s);

struct FunctionSample {
    BoundaryFunction f;
    GeneratorKind kind = GeneratorKind::hat_spline;
    int coarse_level = 3;     // scale of the generated features
    double lacunary_s0 = 0.75;
    std::uint64_t seed = 0;

    // sup of smoothness s for which the family stays in B^s_{p,q} under
    // refinement: steps need s < 1/p, spline and bump families work for
    // every s < 1, lacunary sums for s < s0
    double smoothness_ceiling(double p) const;
};

// Deterministic seeded draw; support (0,1]^d, exact cell averages at level K.
FunctionSample sample_function(GeneratorKind kind, int d, int K, std::uint64_t seed,
                               int coarse_level = 3, double lacunary_s0 = 0.75);

// ---- serialization --------------------------------------------------------
// Binary layout (little-endian): magic "WBF1", u32 dim, u32 level,
// per axis i64 lo and i64 n, then f64 values row-major.

void write_binary(const BoundaryFunction& f, const std::string& path);
BoundaryFunction read_binary(const std::string& path);
void write_csv(const BoundaryFunction& f, const std::string& path);
BoundaryFunction read_csv(const std::string& path);

// uniform double in [0,1) from the top 53 bits (keeps draws identical
// across standard library implementations)
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1p-53;
}

}  // namespace whitney
