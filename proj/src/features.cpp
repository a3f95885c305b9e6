#include "ciqa/features.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "ciqa/errors.hpp"
#include "ciqa/parallel.hpp"
#include "ciqa/stats.hpp"

namespace ciqa::feat {

namespace {

double clamped_log10(double magnitude) {
    return std::log10(std::max(magnitude, kLogClamp));
}

void require_standard_layout(const fdct::CoefficientPyramid& pyr) {
    if (pyr.scales.size() < 5)
        throw ShapeError("feature extraction needs the 5-scale pyramid");
}

}  // namespace

const std::array<const char*, kFeatureCount>& feature_names() {
    static const std::array<const char*, kFeatureCount> names = {
        "d1",   "d2",    "d3",   "qcd4",  "rmad4", "area4",
        "med5", "iqr5",  "mad5", "skew5", "kurt5"};
    return names;
}

double mean_log_energy(const fdct::CoefficientPyramid& pyr, int scale) {
    if (scale < 1 || scale > static_cast<int>(pyr.scales.size()))
        throw ScaleOutOfRange("scale " + std::to_string(scale));
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& panel : pyr.scales[scale - 1]) {
        for (const auto& c : panel.data) sum += clamped_log10(std::abs(c));
        count += panel.data.size();
    }
    return sum / static_cast<double>(count);
}

std::array<double, 3> mes_features(const fdct::CoefficientPyramid& pyr) {
    require_standard_layout(pyr);
    double e[4];
    for (int j = 0; j < 4; ++j) e[j] = mean_log_energy(pyr, j + 1);
    return {e[0] - e[1], e[1] - e[2], e[2] - e[3]};
}

Emo4Series emo4(const fdct::CoefficientPyramid& pyr) {
    require_standard_layout(pyr);
    const auto& panels = pyr.scales[3];
    Emo4Series series;
    series.values.reserve(panels.size());
    for (const auto& panel : panels) {
        double sum = 0.0;
        for (const auto& c : panel.data) sum += std::abs(c);
        series.values.push_back(sum / static_cast<double>(panel.data.size()));
    }
    return series;
}

std::array<double, 3> oed4_features(const Emo4Series& series) {
    double area = 0.0;
    for (double v : series.values) area += v;
    double q = 0.0, r = 0.0;
    try {
        q = stats::qcd(series.values);
    } catch (const DegenerateScale&) {
    }
    try {
        r = stats::rmad(series.values);
    } catch (const DegenerateScale&) {
    }
    return {q, r, area};
}

std::array<double, 5> sfs5_features(const fdct::CoefficientPyramid& pyr) {
    require_standard_layout(pyr);
    std::vector<double> e5;
    for (const auto& panel : pyr.scales[4])
        for (const auto& c : panel.data) e5.push_back(clamped_log10(std::abs(c)));

    const auto oc = stats::octiles(e5);
    double skew = 0.0, kurt = 0.0;
    try {
        skew = stats::bowley_skew(oc);
        kurt = stats::moors_kurt(oc);
    } catch (const DegenerateScale&) {
    }
    return {oc.median(), oc.iqr(), stats::mad(e5), skew, kurt};
}

FeatureVector extract_block(std::span<const double> block, const fdct::CurveletPlan& plan) {
    const auto pyr = plan.forward(block);
    const auto mes = mes_features(pyr);
    const auto oed = oed4_features(emo4(pyr));
    const auto sfs = sfs5_features(pyr);
    return {mes[0], mes[1], mes[2], oed[0], oed[1], oed[2],
            sfs[0], sfs[1], sfs[2], sfs[3], sfs[4]};
}

FeatureVector extract_block(std::span<const std::uint8_t> block, const fdct::CurveletPlan& plan) {
    std::vector<double> real(block.size());
    for (std::size_t i = 0; i < block.size(); ++i) real[i] = block[i];
    return extract_block(real, plan);
}

std::vector<FeatureVector> extract_image_blocks(const GrayImage& img,
                                                const fdct::CurveletPlan& plan,
                                                BlockPolicy policy) {
    const auto set = fragment(img, policy);
    std::vector<FeatureVector> rows(set.blocks.size());
    const int n = static_cast<int>(set.blocks.size());
#pragma omp parallel for schedule(dynamic) num_threads(par::effective_workers())
    for (int i = 0; i < n; ++i)
        rows[i] = extract_block(std::span<const std::uint8_t>(set.blocks[i]), plan);
    return rows;
}

FeatureVector extract_image(const GrayImage& img, const fdct::CurveletPlan& plan,
                            BlockPolicy policy) {
    const auto rows = extract_image_blocks(img, plan, policy);
    FeatureVector mean{};
    for (const auto& row : rows)
        for (int k = 0; k < kFeatureCount; ++k) mean[k] += row[k];
    for (int k = 0; k < kFeatureCount; ++k) mean[k] /= static_cast<double>(rows.size());
    return mean;
}

std::vector<double> redundancy_check(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 12)
        throw InsufficientSamples("redundancy check needs at least 12 samples");
    const auto n = rows.size();
    const auto m = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != m) throw LengthMismatch("feature rows differ in length");

    Eigen::MatrixXd x(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) x(i, j) = rows[i][j];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    std::vector<double> eig(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + m);
    std::sort(eig.rbegin(), eig.rend());
    return eig;
}

}  // namespace ciqa::feat
