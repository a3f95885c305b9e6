#pragma once

#include <array>
#include <span>

namespace ciqa::stats {

// The seven octiles Oc1..Oc7; Oc2/Oc4/Oc6 are the quartiles Q1/Q2/Q3.
struct OctileSet {
    std::array<double, 7> oc{};

    double q1() const { return oc[1]; }
    double median() const { return oc[3]; }
    double q3() const { return oc[5]; }
    double iqr() const { return oc[5] - oc[1]; }
};

// Linear interpolation between closest ranks at fractional index (n-1)*p.
double percentile(std::span<const double> data, double p);

OctileSet octiles(std::span<const double> data);

// Quartile coefficient of dispersion (Q3-Q1)/(Q3+Q1).
double qcd(std::span<const double> data);

// Median absolute deviation from the median, divided by the median.
double rmad(std::span<const double> data);

// Median absolute deviation from the median.
double mad(std::span<const double> data);

// (Oc6 + Oc2 - 2*Oc4)/(Oc6 - Oc2), always in [-1, 1].
double bowley_skew(const OctileSet& oc);

// ((Oc7 - Oc5) + (Oc3 - Oc1))/(Oc6 - Oc2), always >= 0.
double moors_kurt(const OctileSet& oc);

}  // namespace ciqa::stats
