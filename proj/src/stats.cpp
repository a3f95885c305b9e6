#include "ciqa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ciqa/errors.hpp"

namespace ciqa::stats {

namespace {

// Percentile over data that is already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double p) {
    const auto n = sorted.size();
    if (n == 1) return sorted[0];
    const double idx = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(idx);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = idx - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> sorted_copy(std::span<const double> data) {
    if (data.empty()) throw EmptyInput("statistics require a non-empty sample");
    std::vector<double> s(data.begin(), data.end());
    std::sort(s.begin(), s.end());
    return s;
}

double median_sorted(std::span<const double> sorted) {
    return percentile_sorted(sorted, 0.5);
}

}  // namespace

double percentile(std::span<const double> data, double p) {
    const auto s = sorted_copy(data);
    return percentile_sorted(s, p);
}

OctileSet octiles(std::span<const double> data) {
    const auto s = sorted_copy(data);
    OctileSet out;
    for (int k = 1; k <= 7; ++k)
        out.oc[k - 1] = percentile_sorted(s, static_cast<double>(k) / 8.0);
    return out;
}

double qcd(std::span<const double> data) {
    const auto s = sorted_copy(data);
    const double q1 = percentile_sorted(s, 0.25);
    const double q3 = percentile_sorted(s, 0.75);
    if (q3 + q1 == 0.0) throw DegenerateScale("Q3+Q1 is zero");
    return (q3 - q1) / (q3 + q1);
}

double mad(std::span<const double> data) {
    const auto s = sorted_copy(data);
    const double med = median_sorted(s);
    std::vector<double> dev(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) dev[i] = std::abs(s[i] - med);
    std::sort(dev.begin(), dev.end());
    return median_sorted(dev);
}

double rmad(std::span<const double> data) {
    const auto s = sorted_copy(data);
    const double med = median_sorted(s);
    if (med == 0.0) throw DegenerateScale("median is zero");
    std::vector<double> dev(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) dev[i] = std::abs(s[i] - med);
    std::sort(dev.begin(), dev.end());
    return median_sorted(dev) / med;
}

double bowley_skew(const OctileSet& oc) {
    const double denom = oc.oc[5] - oc.oc[1];
    if (denom == 0.0) throw DegenerateScale("interquartile range is zero");
    return (oc.oc[5] + oc.oc[1] - 2.0 * oc.oc[3]) / denom;
}

double moors_kurt(const OctileSet& oc) {
    const double denom = oc.oc[5] - oc.oc[1];
    if (denom == 0.0) throw DegenerateScale("interquartile range is zero");
    return ((oc.oc[6] - oc.oc[4]) + (oc.oc[2] - oc.oc[0])) / denom;
}

}  // namespace ciqa::stats
