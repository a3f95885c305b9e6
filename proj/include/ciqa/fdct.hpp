#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ciqa::fdct {

struct CurveletConfig {
    int n_scales = 5;
    // Wedge count per scale over the full circle, coarse to fine.
    std::vector<int> angles_per_scale = {1, 32, 64, 64, 1};
    bool finest_is_wavelet = true;

    // Throws ConfigError on an unachievable configuration.
    void validate() const;
};

struct Panel {
    int rows = 0;
    int cols = 0;
    std::vector<std::complex<double>> data;
};

// Complex curvelet coefficients for one block: scales[j][w] is the
// panel of scale j (coarse to fine), orientation w.
struct CoefficientPyramid {
    std::vector<std::vector<Panel>> scales;

    std::size_t coefficient_count(int scale_index_1based) const;
    std::size_t total_coefficients() const;
};

// Precomputed frequency windows and wrap tables for one (config, grid
// size) pair. Construction is the expensive part; forward/inverse are
// cheap and the plan is immutable afterwards, so one plan can be shared
// read-only by any number of threads.
class CurveletPlan {
public:
    CurveletPlan(const CurveletConfig& cfg, int size);

    // Windowed-FFT analysis: FFT the block, multiply by each wedge
    // window, wrap the wedge onto its panel rectangle, inverse-FFT the
    // panel. The window family is a partition of unity in energy, and
    // wrapping is collision-free, so the transform is a tight frame.
    CoefficientPyramid forward(std::span<const double> block) const;

    // Exact adjoint of forward; reconstructs the input for this frame.
    std::vector<double> inverse(const CoefficientPyramid& pyr) const;

    // Max over the frequency grid of |sum of squared windows - 1|.
    double partition_deviation() const;

    // Test hook: multiplies one wedge's window weights, deliberately
    // breaking the tight-frame identities. Negative control only.
    void debug_scale_wedge(int wedge_index, double factor);

    int size() const { return size_; }
    const CurveletConfig& config() const { return cfg_; }

private:
    struct Wedge {
        int scale = 0;  // 0-based
        int orientation = 0;
        int rows = 0;
        int cols = 0;
        std::vector<std::int32_t> src;  // flat index into the N x N spectrum
        std::vector<std::int32_t> dst;  // flat index into the panel
        std::vector<double> weight;
    };

    void build_wedges();

    CurveletConfig cfg_;
    int size_;
    std::vector<Wedge> wedges_;
};

CoefficientPyramid forward(std::span<const double> block, const CurveletPlan& plan);
std::vector<double> inverse(const CoefficientPyramid& pyr, const CurveletPlan& plan);
double window_partition_check(const CurveletConfig& cfg, int size = 256);

// Debug container for cross-implementation comparison: "CPYR" magic,
// format version, scale/orientation header, panels as little-endian
// float64 (re, im) pairs.
void write_pyramid(const CoefficientPyramid& pyr, std::ostream& os);
CoefficientPyramid read_pyramid(std::istream& is);

}  // namespace ciqa::fdct
