#include "ciqa/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ciqa/errors.hpp"

namespace ciqa::ref {

namespace {

void dft1d(const std::complex<double>* in, std::complex<double>* out, int n, int stride,
           bool inverse) {
    const double sign = inverse ? 1.0 : -1.0;
    for (int k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (int t = 0; t < n; ++t) {
            const double phase = sign * 2.0 * std::numbers::pi * k * t / n;
            acc += in[t * stride] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        out[k * stride] = acc;
    }
}

}  // namespace

void dft2d(std::complex<double>* data, int rows, int cols, bool inverse) {
    std::vector<std::complex<double>> tmp(std::max(rows, cols));
    for (int r = 0; r < rows; ++r) {
        dft1d(data + static_cast<std::size_t>(r) * cols, tmp.data(), cols, 1, inverse);
        std::copy(tmp.begin(), tmp.begin() + cols, data + static_cast<std::size_t>(r) * cols);
    }
    std::vector<std::complex<double>> col(rows), colout(rows);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) col[r] = data[static_cast<std::size_t>(r) * cols + c];
        dft1d(col.data(), colout.data(), rows, 1, inverse);
        for (int r = 0; r < rows; ++r) data[static_cast<std::size_t>(r) * cols + c] = colout[r];
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows) * cols);
    for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i) data[i] *= scale;
}

double percentile(std::vector<double> data, double p) {
    if (data.empty()) throw EmptyInput("reference percentile of empty data");
    std::sort(data.begin(), data.end());
    const double pos = p * static_cast<double>(data.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * data[lo] + w * data[hi];
}

double qcd(std::vector<double> data) {
    const double q1 = percentile(data, 0.25);
    const double q3 = percentile(data, 0.75);
    return (q3 - q1) / (q3 + q1);
}

double mad(std::vector<double> data) {
    const double med = percentile(data, 0.5);
    std::vector<double> dev;
    dev.reserve(data.size());
    for (double v : data) dev.push_back(std::abs(v - med));
    return percentile(dev, 0.5);
}

double rmad(std::vector<double> data) {
    const double med = percentile(data, 0.5);
    return mad(data) / med;
}

double bowley_skew(std::vector<double> data) {
    const double q1 = percentile(data, 0.25);
    const double q2 = percentile(data, 0.5);
    const double q3 = percentile(data, 0.75);
    return (q3 + q1 - 2.0 * q2) / (q3 - q1);
}

double moors_kurt(std::vector<double> data) {
    const double o1 = percentile(data, 0.125);
    const double o2 = percentile(data, 0.25);
    const double o3 = percentile(data, 0.375);
    const double o5 = percentile(data, 0.625);
    const double o6 = percentile(data, 0.75);
    const double o7 = percentile(data, 0.875);
    return ((o7 - o5) + (o3 - o1)) / (o6 - o2);
}

namespace {

// counting-based average ranks, quadratic on purpose
std::vector<double> counting_ranks(std::span<const double> v) {
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t smaller = 0, equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            smaller += v[j] < v[i];
            equal += v[j] == v[i];
        }
        ranks[i] = static_cast<double>(smaller) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return ranks;
}

}  // namespace

double srocc(std::span<const double> x, std::span<const double> y) {
    const auto rx = counting_ranks(x);
    const auto ry = counting_ranks(y);
    const auto n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += rx[i]; my += ry[i]; }
    mx /= n; my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double kendall_allpairs(std::span<const double> x, std::span<const double> y) {
    const auto n = x.size();
    long long concordant = 0, discordant = 0, xtie = 0, ytie = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0 && dy == 0) { ++xtie; ++ytie; }
            else if (dx == 0) ++xtie;
            else if (dy == 0) ++ytie;
            else if (dx * dy > 0) ++concordant;
            else ++discordant;
        }
    }
    const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
    const double den = std::sqrt(static_cast<double>(n0 - xtie)) *
                       std::sqrt(static_cast<double>(n0 - ytie));
    return static_cast<double>(concordant - discordant) / den;
}

double wilcoxon_exact_enum(std::span<const double> a, std::span<const double> b) {
    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) diff.push_back(a[i] - b[i]);
    const int n = static_cast<int>(diff.size());
    if (n == 0) throw AllZeroDifferences("reference wilcoxon with zero differences");

    std::vector<double> mag(n);
    for (int i = 0; i < n; ++i) mag[i] = std::abs(diff[i]);
    const auto ranks = counting_ranks(mag);

    double wplus = 0.0, total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += ranks[i];
        if (diff[i] > 0) wplus += ranks[i];
    }
    const double wmin = std::min(wplus, total - wplus);

    long long hits = 0;
    const long long assignments = 1LL << n;
    for (long long s = 0; s < assignments; ++s) {
        double w = 0.0;
        for (int i = 0; i < n; ++i)
            if (s & (1LL << i)) w += ranks[i];
        if (w <= wmin + 1e-9) ++hits;
    }
    return std::min(1.0, 2.0 * static_cast<double>(hits) / static_cast<double>(assignments));
}

feat::FeatureVector extract_image_serial(const GrayImage& img,
                                         const fdct::CurveletPlan& plan,
                                         BlockPolicy policy) {
    const auto set = fragment(img, policy);
    feat::FeatureVector mean{};
    for (const auto& block : set.blocks) {
        const auto row = feat::extract_block(std::span<const std::uint8_t>(block), plan);
        for (int k = 0; k < feat::kFeatureCount; ++k) mean[k] += row[k];
    }
    for (int k = 0; k < feat::kFeatureCount; ++k)
        mean[k] /= static_cast<double>(set.blocks.size());
    return mean;
}

}  // namespace ciqa::ref
