#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ciqa/datasets.hpp"
#include "ciqa/eval.hpp"
#include "ciqa/fdct.hpp"
#include "ciqa/features.hpp"
#include "ciqa/image.hpp"
#include "ciqa/svm.hpp"

namespace ciqa::ts {

struct GridConfig {
    // C in {2^-1, 2^1, ..., 2^13}, gamma in {2^-8, 2^-6, ..., 2^0}.
    std::vector<double> c_grid = {0.5, 2.0, 8.0, 32.0, 128.0, 512.0, 2048.0, 8192.0};
    std::vector<double> gamma_grid = {1.0 / 256.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 1.0};
    double nu = 0.5;
    int cv_folds = 5;
    int cv_repeats = 5;

    void validate() const;
};

// Reference-image fold assignments: 40 repeats x 5 folds = 200 rounds by
// default. Degraded images follow their reference, so train and test
// never share content.
struct SplitPlan {
    int folds = 5;
    int repeats = 40;
    std::uint64_t seed = 0;
    std::vector<std::string> refs;               // sorted unique reference ids
    std::vector<std::vector<int>> fold_of_ref;   // [repeat][ref index] -> fold

    int rounds() const { return folds * repeats; }
};

SplitPlan make_split_plan(const data::DatasetManifest& manifest, int repeats, int folds,
                          std::uint64_t seed);

// Record indices for one round of the plan.
struct RoundPartition {
    std::vector<int> train_records;
    std::vector<int> test_records;
};

RoundPartition round_partition(const SplitPlan& plan, const data::DatasetManifest& manifest,
                               int round);

// Exhaustive (C, gamma) search scored by repeated stratified k-fold
// cross-validation: accuracy for classification, SROCC of out-of-fold
// predictions for regression. Ties break to smaller C, then smaller
// gamma.
std::pair<double, double> grid_search_svc(const std::vector<std::vector<double>>& x,
                                          const std::vector<int>& labels,
                                          const GridConfig& grid, std::uint64_t seed);
std::pair<double, double> grid_search_svr(const std::vector<std::vector<double>>& x,
                                          const std::vector<double>& targets,
                                          const GridConfig& grid, std::uint64_t seed);

struct TwoStageModel {
    svm::Standardizer standardizer;
    std::vector<std::string> classes;  // canonical order; p and q follow it
    svm::SvcModel classifier;
    std::vector<svm::SvrModel> regressors;
    bool lower_is_better = true;

    double svc_c = 0.0;
    double svc_gamma = 0.0;
    std::vector<std::pair<double, double>> svr_params;  // (C, gamma) per class
};

// Trains the classifier on all training images and one specialist
// regressor per declared class on that class's images, after fitting one
// shared standardizer on the training features.
TwoStageModel train_round(const std::vector<feat::FeatureVector>& features,
                          const data::DatasetManifest& manifest,
                          const std::vector<int>& train_records,
                          const std::vector<std::string>& classes, const GridConfig& grid,
                          std::uint64_t seed);

struct Prediction {
    double q = 0.0;                  // probability-weighted average p . q_vec
    std::vector<double> probs;       // classifier probabilities, classes order
    std::vector<double> regressions; // specialist outputs, classes order
    std::string hard_class;
};

Prediction predict_quality(const TwoStageModel& model, const feat::FeatureVector& features);
Prediction predict_quality(const TwoStageModel& model, const GrayImage& img,
                           const fdct::CurveletPlan& plan,
                           BlockPolicy policy = BlockPolicy::Flush);

void save_model(const TwoStageModel& model, const std::string& path);
TwoStageModel load_model(const std::string& path);

struct ProtocolOptions {
    int rounds = 0;  // 0 = every round of the plan
    std::uint64_t seed = 1;
    BlockPolicy block_policy = BlockPolicy::Flush;
    std::vector<std::string> classes = data::distortion_classes();
    std::string results_path;  // streamed CSV, resumable; empty = in-memory only
    bool save_models = false;
    std::string model_dir;
    std::ostream* log = nullptr;
};

// For every round: train on the round's 80% of references, then evaluate
// on the held-out 20% ("<train id>_holdout") and on every external test
// manifest in full. Correlations against a test set whose score polarity
// differs from training are sign-flipped so all reported values are
// comparable. Rows stream to results_path as rounds complete.
std::vector<eval::RoundResult> run_protocol(const data::DatasetManifest& train_manifest,
                                            const std::vector<data::DatasetManifest>& test_manifests,
                                            const SplitPlan& plan, const GridConfig& grid,
                                            const fdct::CurveletPlan& cplan,
                                            const ProtocolOptions& opt);

// Per-record image features for one manifest, parallel over records.
std::vector<feat::FeatureVector> extract_manifest_features(
    const data::DatasetManifest& manifest, const fdct::CurveletPlan& plan,
    BlockPolicy policy);

}  // namespace ciqa::ts
