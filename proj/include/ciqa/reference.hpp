#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ciqa/fdct.hpp"
#include "ciqa/features.hpp"
#include "ciqa/image.hpp"

// Serial reference implementations kept for testing and benchmarking.
// Everything here is written the slow, obvious way, independent of the
// production code paths it checks.
namespace ciqa::ref {

// O(rows^2 * cols + rows * cols^2) direct DFT, unitary, in place.
void dft2d(std::complex<double>* data, int rows, int cols, bool inverse);

double percentile(std::vector<double> data, double p);
double qcd(std::vector<double> data);
double rmad(std::vector<double> data);
double mad(std::vector<double> data);
double bowley_skew(std::vector<double> data);
double moors_kurt(std::vector<double> data);

double srocc(std::span<const double> x, std::span<const double> y);

// All-pairs tau-b.
double kendall_allpairs(std::span<const double> x, std::span<const double> y);

// Two-sided signed-rank p-value by enumerating every sign assignment;
// feasible for n <= ~20.
double wilcoxon_exact_enum(std::span<const double> a, std::span<const double> b);

// Plain block loop, no OpenMP at the pooling level.
feat::FeatureVector extract_image_serial(const GrayImage& img,
                                         const fdct::CurveletPlan& plan,
                                         BlockPolicy policy = BlockPolicy::Flush);

}  // namespace ciqa::ref
