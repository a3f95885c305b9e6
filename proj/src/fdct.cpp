#include "ciqa/fdct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ciqa/errors.hpp"
#include "ciqa/fft.hpp"
#include "ciqa/parallel.hpp"
#include "ciqa/serialize.hpp"

namespace ciqa::fdct {

namespace {

constexpr double kPi = std::numbers::pi;

// Meyer transition polynomial: smooth step with step(t) + step(1-t) = 1.
double meyer_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * t * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
}

// Complementary half-windows over a shared transition band. Adjacent
// windows pair a rise with a fall, so their squares sum to exactly 1.
double rise_window(double x) { return std::sin(kPi / 2.0 * meyer_step(x)); }
double fall_window(double x) { return std::cos(kPi / 2.0 * meyer_step(x)); }

// Dyadic radial cutoffs in normalized max-norm frequency (Nyquist at
// 1/2); transition band for cutoff c spans [2c/3, 4c/3], so consecutive
// bands touch without overlapping. The 0.6 anchor puts the second-finest
// ring on (0.1, 0.4), wide enough for the expected coefficient budget.
struct RadialBands {
    std::vector<double> lo;
    std::vector<double> hi;

    explicit RadialBands(int n_scales) {
        for (int j = 1; j < n_scales; ++j) {
            const double c = std::ldexp(0.6, j - n_scales);
            lo.push_back(2.0 * c / 3.0);
            hi.push_back(4.0 * c / 3.0);
        }
    }
};

double radial_window(const RadialBands& bands, int n_scales, int scale, double rho) {
    if (n_scales == 1) return 1.0;
    if (scale == 0) {
        if (rho <= bands.lo[0]) return 1.0;
        if (rho >= bands.hi[0]) return 0.0;
        return fall_window((rho - bands.lo[0]) / (bands.hi[0] - bands.lo[0]));
    }
    const double rl = bands.lo[scale - 1];
    const double rh = bands.hi[scale - 1];
    if (rho <= rl) return 0.0;
    double v = rho >= rh ? 1.0 : rise_window((rho - rl) / (rh - rl));
    if (scale < n_scales - 1) {
        const double fl = bands.lo[scale];
        const double fh = bands.hi[scale];
        if (rho >= fh) return 0.0;
        if (rho > fl) v *= fall_window((rho - fl) / (fh - fl));
    }
    return v;
}

// Angular bump centered at cell center u = 0, support |u| < 1 in units
// of the wedge spacing 2*pi/n_wedges.
double angular_window(double u) {
    const double a = std::abs(u);
    if (a >= 1.0) return 0.0;
    return fall_window(a);
}

}  // namespace

void CurveletConfig::validate() const {
    if (n_scales < 1) throw ConfigError("n_scales must be >= 1");
    if (static_cast<int>(angles_per_scale.size()) != n_scales)
        throw ConfigError("angles_per_scale must list one count per scale");
    if (angles_per_scale.front() != 1)
        throw ConfigError("coarse scale must have exactly one orientation");
    if (finest_is_wavelet && angles_per_scale.back() != 1)
        throw ConfigError("finest scale must have one orientation when finest_is_wavelet");
    for (int j = 1; j < n_scales; ++j) {
        const int a = angles_per_scale[j];
        const bool directional = j < n_scales - 1 || !finest_is_wavelet;
        if (!directional) continue;
        if (a == 1) continue;  // isotropic mid-scale is allowed
        if (a < 8 || a % 4 != 0)
            throw ConfigError("directional scales need a wedge count divisible by 4");
    }
}

std::size_t CoefficientPyramid::coefficient_count(int scale_index_1based) const {
    if (scale_index_1based < 1 || scale_index_1based > static_cast<int>(scales.size()))
        throw ScaleOutOfRange("scale index " + std::to_string(scale_index_1based));
    std::size_t n = 0;
    for (const auto& p : scales[scale_index_1based - 1]) n += p.data.size();
    return n;
}

std::size_t CoefficientPyramid::total_coefficients() const {
    std::size_t n = 0;
    for (const auto& s : scales)
        for (const auto& p : s) n += p.data.size();
    return n;
}

CurveletPlan::CurveletPlan(const CurveletConfig& cfg, int size)
    : cfg_(cfg), size_(size) {
    cfg_.validate();
    if (size < 8 || size % 2 != 0) throw ConfigError("grid size must be even and >= 8");
    build_wedges();
}

void CurveletPlan::build_wedges() {
    const int n = size_;
    const int n_scales = cfg_.n_scales;
    const RadialBands bands(n_scales);

    struct RawEntry {
        std::int32_t k1, k2;
        std::int32_t src;
        double weight;
    };
    std::vector<std::vector<RawEntry>> raw;
    std::vector<std::pair<int, int>> wedge_ids;  // (scale, orientation)
    std::vector<int> first_wedge(n_scales);
    for (int j = 0; j < n_scales; ++j) {
        first_wedge[j] = static_cast<int>(wedge_ids.size());
        for (int w = 0; w < cfg_.angles_per_scale[j]; ++w) wedge_ids.emplace_back(j, w);
    }
    raw.resize(wedge_ids.size());

    for (int a1 = 0; a1 < n; ++a1) {
        const int k1 = a1 < n / 2 ? a1 : a1 - n;
        for (int a2 = 0; a2 < n; ++a2) {
            const int k2 = a2 < n / 2 ? a2 : a2 - n;
            const std::int32_t src = static_cast<std::int32_t>(a1) * n + a2;
            const double rho = std::max(std::abs(k1), std::abs(k2)) / static_cast<double>(n);
            const double theta = std::atan2(static_cast<double>(k2), static_cast<double>(k1));
            for (int j = 0; j < n_scales; ++j) {
                const double phi = radial_window(bands, n_scales, j, rho);
                if (phi == 0.0) continue;
                const int n_w = cfg_.angles_per_scale[j];
                if (n_w == 1) {
                    raw[first_wedge[j]].push_back({k1, k2, src, phi});
                    continue;
                }
                const double spacing = 2.0 * kPi / n_w;
                double t = (theta + kPi) / spacing;
                int cell = std::min(static_cast<int>(t), n_w - 1);
                const double u = t - (cell + 0.5);
                const double v0 = angular_window(u);
                if (v0 > 0.0) raw[first_wedge[j] + cell].push_back({k1, k2, src, phi * v0});
                const int nb = (u >= 0.0 ? cell + 1 : cell + n_w - 1) % n_w;
                const double v1 = angular_window(1.0 - std::abs(u));
                if (v1 > 0.0) raw[first_wedge[j] + nb].push_back({k1, k2, src, phi * v1});
            }
        }
    }

    wedges_.reserve(wedge_ids.size());
    for (std::size_t wi = 0; wi < wedge_ids.size(); ++wi) {
        const auto [j, w] = wedge_ids[wi];
        auto& entries = raw[wi];
        if (entries.empty())
            throw ConfigError("empty wedge support; angle count not achievable at this size");

        const int n_w = cfg_.angles_per_scale[j];
        const bool directional = n_w > 1;
        double slope = 0.0;
        bool shear_rows = true;  // subtract round(slope*k1) from k2
        if (directional) {
            const double theta_c = -kPi + (w + 0.5) * 2.0 * kPi / n_w;
            const double c = std::cos(theta_c), s = std::sin(theta_c);
            if (std::abs(c) >= std::abs(s)) {
                slope = s / c;
                shear_rows = true;
            } else {
                slope = c / s;
                shear_rows = false;
            }
        }

        Wedge wedge;
        wedge.scale = j;
        wedge.orientation = w;
        std::vector<std::pair<std::int32_t, std::int32_t>> sheared(entries.size());
        std::int32_t min1 = std::numeric_limits<std::int32_t>::max(), max1 = std::numeric_limits<std::int32_t>::min();
        std::int32_t min2 = min1, max2 = max1;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            std::int32_t s1 = entries[i].k1, s2 = entries[i].k2;
            if (directional) {
                if (shear_rows)
                    s2 -= static_cast<std::int32_t>(std::llround(slope * entries[i].k1));
                else
                    s1 -= static_cast<std::int32_t>(std::llround(slope * entries[i].k2));
            }
            sheared[i] = {s1, s2};
            min1 = std::min(min1, s1); max1 = std::max(max1, s1);
            min2 = std::min(min2, s2); max2 = std::max(max2, s2);
        }
        wedge.rows = max1 - min1 + 1;
        wedge.cols = max2 - min2 + 1;

        wedge.src.resize(entries.size());
        wedge.dst.resize(entries.size());
        wedge.weight.resize(entries.size());
        std::vector<char> seen(static_cast<std::size_t>(wedge.rows) * wedge.cols, 0);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const std::int32_t d =
                (sheared[i].first - min1) * wedge.cols + (sheared[i].second - min2);
            // wrapping must stay collision-free or the frame is not tight
            if (seen[static_cast<std::size_t>(d)])
                throw ConfigError("internal: wrap collision in wedge table");
            seen[static_cast<std::size_t>(d)] = 1;
            wedge.src[i] = entries[i].src;
            wedge.dst[i] = d;
            wedge.weight[i] = entries[i].weight;
        }
        wedges_.push_back(std::move(wedge));
        entries.clear();
        entries.shrink_to_fit();
    }
}

CoefficientPyramid CurveletPlan::forward(std::span<const double> block) const {
    const std::size_t n2 = static_cast<std::size_t>(size_) * size_;
    if (block.size() != n2)
        throw ShapeError("block must be " + std::to_string(size_) + "x" + std::to_string(size_));

    std::vector<std::complex<double>> spectrum(n2);
    for (std::size_t i = 0; i < n2; ++i) spectrum[i] = block[i];
    const auto& fft = fft::default_fft2d();
    fft.forward(spectrum.data(), size_, size_);

    CoefficientPyramid pyr;
    pyr.scales.resize(cfg_.n_scales);
    for (int j = 0; j < cfg_.n_scales; ++j)
        pyr.scales[j].resize(cfg_.angles_per_scale[j]);

    const int n_wedges = static_cast<int>(wedges_.size());
#pragma omp parallel for schedule(dynamic) num_threads(par::effective_workers())
    for (int wi = 0; wi < n_wedges; ++wi) {
        const Wedge& w = wedges_[wi];
        Panel& panel = pyr.scales[w.scale][w.orientation];
        panel.rows = w.rows;
        panel.cols = w.cols;
        panel.data.assign(static_cast<std::size_t>(w.rows) * w.cols, {0.0, 0.0});
        for (std::size_t i = 0; i < w.src.size(); ++i)
            panel.data[w.dst[i]] = w.weight[i] * spectrum[w.src[i]];
        fft.inverse(panel.data.data(), w.rows, w.cols);
    }
    return pyr;
}

std::vector<double> CurveletPlan::inverse(const CoefficientPyramid& pyr) const {
    if (static_cast<int>(pyr.scales.size()) != cfg_.n_scales)
        throw ShapeError("pyramid scale count does not match the plan");
    for (const Wedge& w : wedges_) {
        const auto& sc = pyr.scales[w.scale];
        if (w.orientation >= static_cast<int>(sc.size()))
            throw ShapeError("pyramid orientation count does not match the plan");
        const Panel& p = sc[w.orientation];
        if (p.rows != w.rows || p.cols != w.cols ||
            p.data.size() != static_cast<std::size_t>(w.rows) * w.cols)
            throw ShapeError("panel dimensions do not match the plan");
    }

    const auto& fft = fft::default_fft2d();
    const int n_wedges = static_cast<int>(wedges_.size());
    std::vector<std::vector<std::complex<double>>> panel_spectra(n_wedges);
#pragma omp parallel for schedule(dynamic) num_threads(par::effective_workers())
    for (int wi = 0; wi < n_wedges; ++wi) {
        const Wedge& w = wedges_[wi];
        panel_spectra[wi] = pyr.scales[w.scale][w.orientation].data;
        fft.forward(panel_spectra[wi].data(), w.rows, w.cols);
    }

    // accumulate in fixed wedge order so results do not depend on threads
    const std::size_t n2 = static_cast<std::size_t>(size_) * size_;
    std::vector<std::complex<double>> spectrum(n2, {0.0, 0.0});
    for (int wi = 0; wi < n_wedges; ++wi) {
        const Wedge& w = wedges_[wi];
        const auto& ps = panel_spectra[wi];
        for (std::size_t i = 0; i < w.src.size(); ++i)
            spectrum[w.src[i]] += w.weight[i] * ps[w.dst[i]];
    }

    fft.inverse(spectrum.data(), size_, size_);
    std::vector<double> out(n2);
    for (std::size_t i = 0; i < n2; ++i) out[i] = spectrum[i].real();
    return out;
}

double CurveletPlan::partition_deviation() const {
    const std::size_t n2 = static_cast<std::size_t>(size_) * size_;
    std::vector<double> sums(n2, 0.0);
    for (const Wedge& w : wedges_)
        for (std::size_t i = 0; i < w.src.size(); ++i)
            sums[w.src[i]] += w.weight[i] * w.weight[i];
    double dev = 0.0;
    for (double s : sums) dev = std::max(dev, std::abs(s - 1.0));
    return dev;
}

void CurveletPlan::debug_scale_wedge(int wedge_index, double factor) {
    if (wedge_index < 0 || wedge_index >= static_cast<int>(wedges_.size()))
        throw ConfigError("wedge index out of range");
    for (double& w : wedges_[wedge_index].weight) w *= factor;
}

CoefficientPyramid forward(std::span<const double> block, const CurveletPlan& plan) {
    return plan.forward(block);
}

std::vector<double> inverse(const CoefficientPyramid& pyr, const CurveletPlan& plan) {
    return plan.inverse(pyr);
}

double window_partition_check(const CurveletConfig& cfg, int size) {
    return CurveletPlan(cfg, size).partition_deviation();
}

namespace {
constexpr std::uint32_t kPyramidMagic = 0x52595043;  // "CPYR"
constexpr std::uint32_t kPyramidVersion = 1;
}  // namespace

void write_pyramid(const CoefficientPyramid& pyr, std::ostream& os) {
    io::write_u32(os, kPyramidMagic);
    io::write_u32(os, kPyramidVersion);
    io::write_u32(os, static_cast<std::uint32_t>(pyr.scales.size()));
    for (const auto& scale : pyr.scales) {
        io::write_u32(os, static_cast<std::uint32_t>(scale.size()));
        for (const auto& p : scale) {
            io::write_u32(os, static_cast<std::uint32_t>(p.rows));
            io::write_u32(os, static_cast<std::uint32_t>(p.cols));
            for (const auto& c : p.data) {
                io::write_f64(os, c.real());
                io::write_f64(os, c.imag());
            }
        }
    }
    if (!os) throw IoError("failed writing pyramid container");
}

CoefficientPyramid read_pyramid(std::istream& is) {
    if (io::read_u32(is) != kPyramidMagic) throw VersionMismatch("not a pyramid container");
    if (io::read_u32(is) != kPyramidVersion) throw VersionMismatch("unsupported pyramid version");
    CoefficientPyramid pyr;
    pyr.scales.resize(io::read_u32(is));
    for (auto& scale : pyr.scales) {
        scale.resize(io::read_u32(is));
        for (auto& p : scale) {
            p.rows = static_cast<int>(io::read_u32(is));
            p.cols = static_cast<int>(io::read_u32(is));
            p.data.resize(static_cast<std::size_t>(p.rows) * p.cols);
            for (auto& c : p.data) {
                const double re = io::read_f64(is);
                const double im = io::read_f64(is);
                c = {re, im};
            }
        }
    }
    return pyr;
}

}  // namespace ciqa::fdct
