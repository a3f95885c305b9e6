#include "ciqa/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ciqa/errors.hpp"
#include "ciqa/parallel.hpp"
#include "ciqa/serialize.hpp"

namespace ciqa::ts {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

void GridConfig::validate() const {
    if (c_grid.empty() || gamma_grid.empty()) throw SchemaError("empty hyperparameter grid");
    for (double c : c_grid)
        if (!(c > 0)) throw SchemaError("C grid values must be positive");
    for (double g : gamma_grid)
        if (!(g > 0)) throw SchemaError("gamma grid values must be positive");
    if (!(nu > 0 && nu < 1)) throw SchemaError("nu must lie in (0,1)");
    if (cv_folds < 2) throw SchemaError("cv_folds must be >= 2");
    if (cv_repeats < 1) throw SchemaError("cv_repeats must be >= 1");
}

SplitPlan make_split_plan(const data::DatasetManifest& manifest, int repeats, int folds,
                          std::uint64_t seed) {
    if (repeats < 1 || folds < 2) throw SchemaError("need repeats >= 1 and folds >= 2");
    SplitPlan plan;
    plan.folds = folds;
    plan.repeats = repeats;
    plan.seed = seed;
    plan.refs = manifest.reference_ids();
    const int n = static_cast<int>(plan.refs.size());
    if (n < folds)
        throw TooFewReferences("manifest has " + std::to_string(n) +
                               " reference images; need at least " + std::to_string(folds));

    std::mt19937_64 rng(seed);
    plan.fold_of_ref.resize(repeats);
    for (int r = 0; r < repeats; ++r) {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        // first n % folds folds take the extra reference
        std::vector<int>& assign = plan.fold_of_ref[r];
        assign.assign(n, 0);
        const int base = n / folds, extra = n % folds;
        int pos = 0;
        for (int f = 0; f < folds; ++f) {
            const int size = base + (f < extra ? 1 : 0);
            for (int i = 0; i < size; ++i) assign[perm[pos++]] = f;
        }
    }
    return plan;
}

RoundPartition round_partition(const SplitPlan& plan, const data::DatasetManifest& manifest,
                               int round) {
    if (round < 0 || round >= plan.rounds())
        throw SchemaError("round " + std::to_string(round) + " outside the plan");
    const int repeat = round / plan.folds;
    const int fold = round % plan.folds;

    std::map<std::string, int> ref_index;
    for (std::size_t i = 0; i < plan.refs.size(); ++i) ref_index[plan.refs[i]] = static_cast<int>(i);

    RoundPartition part;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        auto it = ref_index.find(manifest.records[i].reference_id);
        if (it == ref_index.end())
            throw SchemaError("record references unknown id " +
                              manifest.records[i].reference_id);
        const bool in_test = plan.fold_of_ref[repeat][it->second] == fold;
        (in_test ? part.test_records : part.train_records).push_back(static_cast<int>(i));
    }
    return part;
}

namespace {

struct FoldAssignment {
    std::vector<int> fold_of;  // per sample
};

// Stratified fold deal: per class, shuffled then dealt round-robin.
FoldAssignment stratified_folds(const std::vector<int>& labels, int folds,
                                std::mt19937_64& rng) {
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));
    FoldAssignment fa;
    fa.fold_of.assign(labels.size(), 0);
    for (auto& [cls, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i = 0; i < idx.size(); ++i)
            fa.fold_of[idx[i]] = static_cast<int>(i % folds);
    }
    return fa;
}

FoldAssignment plain_folds(std::size_t n, int folds, std::mt19937_64& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    FoldAssignment fa;
    fa.fold_of.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) fa.fold_of[idx[i]] = static_cast<int>(i % folds);
    return fa;
}

template <typename Score>
std::pair<double, double> grid_search_impl(const GridConfig& grid, Score score_cell) {
    grid.validate();
    const int nc = static_cast<int>(grid.c_grid.size());
    const int ng = static_cast<int>(grid.gamma_grid.size());
    std::vector<double> scores(static_cast<std::size_t>(nc) * ng);

    const int cells = nc * ng;
#pragma omp parallel for schedule(dynamic) num_threads(par::effective_workers())
    for (int cell = 0; cell < cells; ++cell)
        scores[cell] = score_cell(grid.c_grid[cell / ng], grid.gamma_grid[cell % ng]);

    int best = 0;
    for (int cell = 1; cell < cells; ++cell)
        if (scores[cell] > scores[best]) best = cell;
    return {grid.c_grid[best / ng], grid.gamma_grid[best % ng]};
}

}  // namespace

std::pair<double, double> grid_search_svc(const std::vector<std::vector<double>>& x,
                                          const std::vector<int>& labels,
                                          const GridConfig& grid, std::uint64_t seed) {
    if (x.size() != labels.size()) throw DimensionMismatch("label count");
    std::map<int, int> counts;
    for (int y : labels) ++counts[y];
    if (counts.size() < 2) throw SingleClass("grid search needs >= 2 classes");
    for (const auto& [cls, count] : counts)
        if (count < grid.cv_folds)
            throw TooFewSamples("class " + std::to_string(cls) + " has " +
                                std::to_string(count) + " samples; need >= cv_folds");

    // fold layouts are fixed up front and shared by every grid cell
    std::vector<FoldAssignment> layouts;
    std::mt19937_64 rng(seed);
    for (int r = 0; r < grid.cv_repeats; ++r)
        layouts.push_back(stratified_folds(labels, grid.cv_folds, rng));

    return grid_search_impl(grid, [&](double c, double gamma) {
        double total = 0.0;
        for (const auto& layout : layouts) {
            int hits = 0;
            for (int f = 0; f < grid.cv_folds; ++f) {
                std::vector<std::vector<double>> xtr;
                std::vector<int> ytr, test_idx;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (layout.fold_of[i] == f)
                        test_idx.push_back(static_cast<int>(i));
                    else {
                        xtr.push_back(x[i]);
                        ytr.push_back(labels[i]);
                    }
                }
                const auto model = svm::train_svc(xtr, ytr, c, gamma);
                for (int i : test_idx)
                    hits += svm::predict_class(model, x[i]) == labels[i];
            }
            total += static_cast<double>(hits) / static_cast<double>(x.size());
        }
        return total / grid.cv_repeats;
    });
}

std::pair<double, double> grid_search_svr(const std::vector<std::vector<double>>& x,
                                          const std::vector<double>& targets,
                                          const GridConfig& grid, std::uint64_t seed) {
    if (x.size() != targets.size()) throw DimensionMismatch("target count");
    if (static_cast<int>(x.size()) < std::max(grid.cv_folds, 3))
        throw TooFewSamples("regression grid search needs >= cv_folds samples");

    std::vector<FoldAssignment> layouts;
    std::mt19937_64 rng(seed);
    for (int r = 0; r < grid.cv_repeats; ++r)
        layouts.push_back(plain_folds(x.size(), grid.cv_folds, rng));

    return grid_search_impl(grid, [&](double c, double gamma) {
        double total = 0.0;
        for (const auto& layout : layouts) {
            std::vector<double> oof(x.size(), 0.0);
            for (int f = 0; f < grid.cv_folds; ++f) {
                std::vector<std::vector<double>> xtr;
                std::vector<double> ytr;
                std::vector<int> test_idx;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (layout.fold_of[i] == f)
                        test_idx.push_back(static_cast<int>(i));
                    else {
                        xtr.push_back(x[i]);
                        ytr.push_back(targets[i]);
                    }
                }
                const auto model = svm::train_svr(xtr, ytr, c, gamma, grid.nu);
                for (int i : test_idx) oof[i] = svm::predict(model, x[i]);
            }
            try {
                total += eval::srocc(oof, targets);
            } catch (const DegenerateVariance&) {
                // constant out-of-fold predictions carry no ranking signal
            }
        }
        return total / grid.cv_repeats;
    });
}

TwoStageModel train_round(const std::vector<feat::FeatureVector>& features,
                          const data::DatasetManifest& manifest,
                          const std::vector<int>& train_records,
                          const std::vector<std::string>& classes, const GridConfig& grid,
                          std::uint64_t seed) {
    if (features.size() != manifest.records.size())
        throw DimensionMismatch("one feature vector per manifest record required");
    if (classes.size() < 2) throw MissingClass("need at least two declared classes");

    std::map<std::string, int> class_index;
    for (std::size_t k = 0; k < classes.size(); ++k) class_index[classes[k]] = static_cast<int>(k);

    std::vector<std::vector<double>> xtr;
    std::vector<int> ytr;
    std::vector<double> scores;
    for (int i : train_records) {
        const auto& rec = manifest.records[i];
        auto it = class_index.find(rec.distortion);
        if (it == class_index.end())
            throw MissingClass("training record of undeclared class " + rec.distortion);
        xtr.emplace_back(features[i].begin(), features[i].end());
        ytr.push_back(it->second);
        scores.push_back(rec.score);
    }

    std::map<int, int> counts;
    for (int y : ytr) ++counts[y];
    for (std::size_t k = 0; k < classes.size(); ++k)
        if (counts.find(static_cast<int>(k)) == counts.end())
            throw MissingClass("training partition has no " + classes[k] + " images");

    TwoStageModel model;
    model.classes = classes;
    model.lower_is_better = manifest.lower_is_better();
    model.standardizer = svm::fit_standardizer(xtr);
    model.standardizer.apply_inplace(xtr);

    auto [svc_c, svc_gamma] = grid_search_svc(xtr, ytr, grid, mix_seed(seed, 0));
    model.svc_c = svc_c;
    model.svc_gamma = svc_gamma;
    model.classifier = svm::train_svc(xtr, ytr, svc_c, svc_gamma);

    model.regressors.resize(classes.size());
    model.svr_params.resize(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k) {
        std::vector<std::vector<double>> xk;
        std::vector<double> yk;
        for (std::size_t i = 0; i < xtr.size(); ++i) {
            if (ytr[i] == static_cast<int>(k)) {
                xk.push_back(xtr[i]);
                yk.push_back(scores[i]);
            }
        }
        auto [c, gamma] = grid_search_svr(xk, yk, grid, mix_seed(seed, 1 + k));
        model.svr_params[k] = {c, gamma};
        model.regressors[k] = svm::train_svr(xk, yk, c, gamma, grid.nu);
    }
    return model;
}

Prediction predict_quality(const TwoStageModel& model, const feat::FeatureVector& features) {
    const auto x = model.standardizer.apply(features);
    Prediction out;
    out.probs = svm::predict_proba(model.classifier, x);
    out.regressions.reserve(model.regressors.size());
    for (const auto& reg : model.regressors) out.regressions.push_back(svm::predict(reg, x));
    out.q = 0.0;
    for (std::size_t k = 0; k < out.probs.size(); ++k)
        out.q += out.probs[k] * out.regressions[k];
    const auto best = std::max_element(out.probs.begin(), out.probs.end());
    out.hard_class = model.classes[best - out.probs.begin()];
    return out;
}

Prediction predict_quality(const TwoStageModel& model, const GrayImage& img,
                           const fdct::CurveletPlan& plan, BlockPolicy policy) {
    return predict_quality(model, feat::extract_image(img, plan, policy));
}

namespace {
constexpr std::uint32_t kModelMagic = 0x4d514943;  // "CIQM"
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void save_model(const TwoStageModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write model " + path);
    io::write_u32(os, kModelMagic);
    io::write_u32(os, kModelVersion);
    io::write_u8(os, 1);  // model type: two-stage
    io::write_u32(os, static_cast<std::uint32_t>(model.classes.size()));
    for (const auto& c : model.classes) io::write_string(os, c);
    io::write_u8(os, model.lower_is_better ? 1 : 0);
    io::write_f64(os, model.svc_c);
    io::write_f64(os, model.svc_gamma);
    svm::write_standardizer(os, model.standardizer);
    svm::write_svc(os, model.classifier);
    io::write_u32(os, static_cast<std::uint32_t>(model.regressors.size()));
    for (std::size_t k = 0; k < model.regressors.size(); ++k) {
        io::write_f64(os, model.svr_params[k].first);
        io::write_f64(os, model.svr_params[k].second);
        svm::write_svr(os, model.regressors[k]);
    }
    if (!os) throw IoError("failed writing model " + path);
}

TwoStageModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MissingFile("cannot open model " + path);
    if (io::read_u32(is) != kModelMagic) throw VersionMismatch(path + " is not a model file");
    if (io::read_u32(is) != kModelVersion)
        throw VersionMismatch(path + " uses an unsupported model format version");
    if (io::read_u8(is) != 1) throw VersionMismatch(path + " holds an unknown model type");

    TwoStageModel model;
    model.classes.resize(io::read_u32(is));
    for (auto& c : model.classes) c = io::read_string(is);
    model.lower_is_better = io::read_u8(is) != 0;
    model.svc_c = io::read_f64(is);
    model.svc_gamma = io::read_f64(is);
    model.standardizer = svm::read_standardizer(is);
    model.classifier = svm::read_svc(is);
    const auto n = io::read_u32(is);
    model.regressors.resize(n);
    model.svr_params.resize(n);
    for (std::uint32_t k = 0; k < n; ++k) {
        model.svr_params[k].first = io::read_f64(is);
        model.svr_params[k].second = io::read_f64(is);
        model.regressors[k] = svm::read_svr(is);
    }
    return model;
}

std::vector<feat::FeatureVector> extract_manifest_features(
    const data::DatasetManifest& manifest, const fdct::CurveletPlan& plan,
    BlockPolicy policy) {
    const int n = static_cast<int>(manifest.records.size());
    std::vector<feat::FeatureVector> features(n);
    std::vector<std::string> failures(n);
#pragma omp parallel for schedule(dynamic) num_threads(par::effective_workers())
    for (int i = 0; i < n; ++i) {
        try {
            const auto img = load_gray(manifest.records[i].image_path);
            features[i] = feat::extract_image(img, plan, policy);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    }
    for (int i = 0; i < n; ++i)
        if (!failures[i].empty())
            throw DecodeError(manifest.records[i].image_path + ": " + failures[i]);
    return features;
}

namespace {

data::DatasetManifest filter_classes(const data::DatasetManifest& m,
                                     const std::vector<std::string>& classes) {
    data::DatasetManifest out;
    out.dataset_id = m.dataset_id;
    for (const auto& r : m.records)
        if (std::find(classes.begin(), classes.end(), r.distortion) != classes.end())
            out.records.push_back(r);
    if (out.records.empty())
        throw MissingClass(m.dataset_id + " holds no image of the declared classes");
    return out;
}

struct SetEval {
    std::string name;
    const data::DatasetManifest* manifest;
    const std::vector<feat::FeatureVector>* features;
    std::vector<int> record_indices;  // records to evaluate on
    bool flip_correlations;
};

eval::RoundResult evaluate_set(const TwoStageModel& model, const SetEval& se, int round,
                               const std::vector<std::string>& classes) {
    std::vector<double> q, score;
    std::vector<std::string> hard, truth;
    std::map<std::string, std::vector<double>> q_by_class, score_by_class;
    for (int i : se.record_indices) {
        const auto& rec = se.manifest->records[i];
        const auto pred = predict_quality(model, (*se.features)[i]);
        q.push_back(pred.q);
        score.push_back(rec.score);
        hard.push_back(pred.hard_class);
        truth.push_back(rec.distortion);
        q_by_class[rec.distortion].push_back(pred.q);
        score_by_class[rec.distortion].push_back(rec.score);
    }

    const double flip = se.flip_correlations ? -1.0 : 1.0;
    eval::RoundResult r;
    r.round = round;
    r.test_set = se.name;
    try {
        r.srocc = flip * eval::srocc(q, score);
        r.krocc = flip * eval::krocc(q, score);
    } catch (const Error&) {
        r.srocc = std::nan("");
        r.krocc = std::nan("");
    }
    r.accuracy = eval::accuracy(hard, truth);
    for (const auto& cls : classes) {
        auto it = q_by_class.find(cls);
        if (it == q_by_class.end() || it->second.size() < 3) continue;
        try {
            r.per_class_srocc[cls] = flip * eval::srocc(it->second, score_by_class[cls]);
            r.per_class_krocc[cls] = flip * eval::krocc(it->second, score_by_class[cls]);
        } catch (const Error&) {
            r.per_class_srocc.erase(cls);
            r.per_class_krocc.erase(cls);
        }
    }
    return r;
}

}  // namespace

std::vector<eval::RoundResult> run_protocol(const data::DatasetManifest& train_manifest,
                                            const std::vector<data::DatasetManifest>& test_manifests,
                                            const SplitPlan& plan, const GridConfig& grid,
                                            const fdct::CurveletPlan& cplan,
                                            const ProtocolOptions& opt) {
    grid.validate();
    const auto train = filter_classes(train_manifest, opt.classes);
    for (const auto& cls : opt.classes) {
        const auto counts = train.class_counts();
        if (counts.find(cls) == counts.end())
            throw MissingClass("training manifest has no " + cls + " images");
    }
    std::vector<data::DatasetManifest> tests;
    for (const auto& t : test_manifests) tests.push_back(filter_classes(t, opt.classes));

    const int n_rounds = opt.rounds > 0 ? std::min(opt.rounds, plan.rounds()) : plan.rounds();
    const int rows_per_round = 1 + static_cast<int>(tests.size());

    // resume: rounds already complete in the results file are kept as-is
    std::map<int, std::vector<eval::RoundResult>> done;
    const bool streaming = !opt.results_path.empty();
    if (streaming && std::filesystem::exists(opt.results_path)) {
        for (const auto& row : eval::read_results_csv(opt.results_path))
            done[row.round].push_back(row);
        for (auto it = done.begin(); it != done.end();) {
            if (static_cast<int>(it->second.size()) != rows_per_round)
                it = done.erase(it);
            else
                ++it;
        }
    }

    std::ofstream results;
    if (streaming) {
        const bool fresh = done.empty();
        results.open(opt.results_path, fresh ? std::ios::trunc : std::ios::app);
        if (!results) throw IoError("cannot open results file " + opt.results_path);
        if (fresh) {
            eval::write_results_csv_header(results);
            results.flush();
        }
    }

    if (opt.log) *opt.log << "extracting features: " << train.dataset_id << " ("
                          << train.records.size() << " images)\n";
    const auto train_features = extract_manifest_features(train, cplan, opt.block_policy);
    std::vector<std::vector<feat::FeatureVector>> test_features;
    for (const auto& t : tests) {
        if (opt.log) *opt.log << "extracting features: " << t.dataset_id << " ("
                              << t.records.size() << " images)\n";
        test_features.push_back(extract_manifest_features(t, cplan, opt.block_policy));
    }

    if (opt.save_models && !opt.model_dir.empty())
        std::filesystem::create_directories(opt.model_dir);

    std::vector<eval::RoundResult> all_rows;
    for (int round = 0; round < n_rounds; ++round) {
        if (auto it = done.find(round); it != done.end()) {
            all_rows.insert(all_rows.end(), it->second.begin(), it->second.end());
            continue;
        }

        const auto part = round_partition(plan, train, round);
        // no-leakage assertion: train and test reference sets are disjoint
        {
            std::set<std::string> train_refs, test_refs;
            for (int i : part.train_records) train_refs.insert(train.records[i].reference_id);
            for (int i : part.test_records) test_refs.insert(train.records[i].reference_id);
            for (const auto& ref : test_refs)
                if (train_refs.count(ref))
                    throw SchemaError("reference " + ref + " leaked between train and test");
        }

        const auto model = train_round(train_features, train, part.train_records,
                                       opt.classes, grid, mix_seed(plan.seed, round));

        std::vector<eval::RoundResult> round_rows;
        SetEval holdout{train.dataset_id + "_holdout", &train, &train_features,
                        part.test_records, false};
        round_rows.push_back(evaluate_set(model, holdout, round, opt.classes));
        for (std::size_t t = 0; t < tests.size(); ++t) {
            SetEval se{tests[t].dataset_id, &tests[t], &test_features[t], {},
                       tests[t].lower_is_better() != train.lower_is_better()};
            se.record_indices.resize(tests[t].records.size());
            std::iota(se.record_indices.begin(), se.record_indices.end(), 0);
            round_rows.push_back(evaluate_set(model, se, round, opt.classes));
        }

        if (streaming) {
            for (const auto& row : round_rows) eval::write_results_csv_row(results, row);
            results.flush();
        }
        if (opt.save_models && !opt.model_dir.empty())
            save_model(model, (std::filesystem::path(opt.model_dir) /
                               ("round_" + std::to_string(round) + ".ciqm"))
                                  .string());
        if (opt.log)
            *opt.log << "round " << round << ": holdout srocc "
                     << round_rows.front().srocc << ", accuracy "
                     << round_rows.front().accuracy << "\n";

        all_rows.insert(all_rows.end(), round_rows.begin(), round_rows.end());
    }
    return all_rows;
}

}  // namespace ciqa::ts
