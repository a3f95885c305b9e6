#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ciqa/fdct.hpp"
#include "ciqa/image.hpp"

namespace ciqa::feat {

inline constexpr int kFeatureCount = 11;

// Magnitudes are clamped here before taking log10, so exact-zero
// coefficients stay finite.
inline constexpr double kLogClamp = 1e-30;

// Canonical feature order: d1,d2,d3 (scale-energy differences),
// qcd4,rmad4,area4 (orientation-energy dispersion at the second-finest
// scale), med5,iqr5,mad5,skew5,kurt5 (finest-scale log statistics).
using FeatureVector = std::array<double, kFeatureCount>;

const std::array<const char*, kFeatureCount>& feature_names();

// Mean energy per orientation at the second-finest scale, one value per
// wedge (64 in the default configuration).
struct Emo4Series {
    std::vector<double> values;
};

// scale is 1-based, coarse to fine.
double mean_log_energy(const fdct::CoefficientPyramid& pyr, int scale);

std::array<double, 3> mes_features(const fdct::CoefficientPyramid& pyr);
Emo4Series emo4(const fdct::CoefficientPyramid& pyr);
std::array<double, 3> oed4_features(const Emo4Series& series);
std::array<double, 5> sfs5_features(const fdct::CoefficientPyramid& pyr);

FeatureVector extract_block(std::span<const double> block, const fdct::CurveletPlan& plan);
FeatureVector extract_block(std::span<const std::uint8_t> block, const fdct::CurveletPlan& plan);

std::vector<FeatureVector> extract_image_blocks(const GrayImage& img,
                                                const fdct::CurveletPlan& plan,
                                                BlockPolicy policy = BlockPolicy::Flush);

// Unweighted componentwise mean of the per-block features.
FeatureVector extract_image(const GrayImage& img, const fdct::CurveletPlan& plan,
                            BlockPolicy policy = BlockPolicy::Flush);

// Eigenvalues of the sample covariance of the given feature rows,
// descending. Near-zero values flag redundant (linearly dependent)
// features.
std::vector<double> redundancy_check(const std::vector<std::vector<double>>& rows);

}  // namespace ciqa::feat
