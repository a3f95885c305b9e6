#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ciqa/datasets.hpp"
#include "ciqa/errors.hpp"
#include "ciqa/eval.hpp"
#include "ciqa/fdct.hpp"
#include "ciqa/features.hpp"
#include "ciqa/image.hpp"
#include "ciqa/parallel.hpp"
#include "ciqa/reference.hpp"
#include "ciqa/run_config.hpp"
#include "ciqa/stats.hpp"
#include "ciqa/svm.hpp"
#include "ciqa/two_stage.hpp"

namespace fs = std::filesystem;
using namespace ciqa;

namespace {

constexpr int kExitSelftest = 7;

const fdct::CurveletPlan& block_plan() {
    static const fdct::CurveletPlan plan(fdct::CurveletConfig{}, kBlockSize);
    return plan;
}

std::vector<std::string> collect_images(const std::string& input) {
    std::vector<std::string> files;
    if (fs::is_directory(input)) {
        for (const auto& entry : fs::directory_iterator(input)) {
            if (!entry.is_regular_file()) continue;
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
            if (ext == ".png" || ext == ".bmp" || ext == ".jpg" || ext == ".jpeg")
                files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
    } else if (fs::exists(input)) {
        files.push_back(input);
    } else {
        throw MissingFile("no such input: " + input);
    }
    if (files.empty()) throw SchemaError("no image inputs under " + input);
    return files;
}

int cmd_extract(const std::string& input, const std::string& out,
                const std::string& policy_name, const std::string& dump_pyramid) {
    const auto policy = parse_block_policy(policy_name);
    const auto files = collect_images(input);

    if (!dump_pyramid.empty()) {
        const auto img = load_gray(files.front());
        const auto set = fragment(img, policy);
        std::vector<double> block(set.blocks.front().size());
        for (std::size_t i = 0; i < block.size(); ++i) block[i] = set.blocks.front()[i];
        const auto pyr = block_plan().forward(block);
        std::ofstream os(dump_pyramid, std::ios::binary);
        if (!os) throw IoError("cannot write " + dump_pyramid);
        fdct::write_pyramid(pyr, os);
        std::cout << "pyramid of " << files.front() << " block 0 -> " << dump_pyramid << "\n";
    }

    std::ofstream os(out);
    if (!os) throw IoError("cannot write " + out);
    os << "image";
    for (const auto* name : feat::feature_names()) os << ',' << name;
    os << "\n" << std::setprecision(17);
    for (const auto& file : files) {
        const auto img = load_gray(file);
        const auto f = feat::extract_image(img, block_plan(), policy);
        os << file;
        for (double v : f) os << ',' << v;
        os << "\n";
    }
    if (!os) throw IoError("failed writing " + out);
    std::cout << files.size() << " image(s) -> " << out << "\n";
    return 0;
}

RunConfig resolve_config(std::uint64_t seed, int rounds, int repeats, int folds,
                         const std::string& classes_csv, const std::string& config_path) {
    RunConfig cfg;
    cfg.seed = seed;
    cfg.rounds = rounds;
    cfg.repeats = repeats;
    cfg.folds = folds;
    if (!classes_csv.empty()) {
        cfg.classes.clear();
        std::stringstream ss(classes_csv);
        std::string c;
        while (std::getline(ss, c, ',')) cfg.classes.push_back(c);
    }
    // the config file, when given, has the last word
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    cfg.rounds = std::min(cfg.rounds, cfg.repeats * cfg.folds);
    cfg.validate();
    if (cfg.workers > 0) par::set_workers(cfg.workers);
    return cfg;
}

int cmd_train(const std::string& manifest_path, const std::string& out_dir,
              const RunConfig& cfg, bool save_models, const std::string& policy_name,
              const std::vector<std::string>& test_specs) {
    const auto manifest = data::load_manifest(manifest_path);
    std::vector<data::DatasetManifest> tests;
    for (const auto& spec : test_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw SchemaError("--test expects name=manifest.csv, got '" + spec + "'");
        auto m = data::load_manifest(spec.substr(eq + 1));
        m.dataset_id = spec.substr(0, eq);
        tests.push_back(std::move(m));
    }

    fs::create_directories(out_dir);
    const auto plan = ts::make_split_plan(manifest, cfg.repeats, cfg.folds, cfg.seed);

    ts::ProtocolOptions opt;
    opt.rounds = cfg.rounds;
    opt.seed = cfg.seed;
    opt.block_policy = parse_block_policy(policy_name);
    opt.classes = cfg.classes;
    opt.results_path = (fs::path(out_dir) / "results.csv").string();
    opt.save_models = save_models;
    opt.model_dir = (fs::path(out_dir) / "models").string();
    opt.log = &std::cout;

    const auto rows = ts::run_protocol(manifest, tests, plan, cfg.grid, block_plan(), opt);

    // mean summary per test set
    std::map<std::string, std::vector<const eval::RoundResult*>> by_set;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (by_set.find(r.test_set) == by_set.end()) order.push_back(r.test_set);
        by_set[r.test_set].push_back(&r);
    }
    std::cout << "\nmean over " << by_set[order.front()].size() << " round(s):\n";
    for (const auto& name : order) {
        double s = 0, k = 0, a = 0;
        for (const auto* r : by_set[name]) {
            s += r->srocc;
            k += r->krocc;
            a += r->accuracy;
        }
        const double n = static_cast<double>(by_set[name].size());
        std::printf("  %-24s srocc %.4f  krocc %.4f  accuracy %.4f\n", name.c_str(),
                    s / n, k / n, a / n);
    }
    std::cout << "results: " << opt.results_path << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& image_path,
                const std::string& policy_name) {
    const auto model = ts::load_model(model_path);
    const auto img = load_gray(image_path);
    const auto pred =
        ts::predict_quality(model, img, block_plan(), parse_block_policy(policy_name));

    std::cout << std::setprecision(6);
    std::cout << "Q: " << pred.q << "\n";
    std::cout << "class: " << pred.hard_class << "\n";
    std::cout << "p:";
    for (std::size_t k = 0; k < model.classes.size(); ++k)
        std::cout << ' ' << model.classes[k] << '=' << pred.probs[k];
    std::cout << "\nq:";
    for (std::size_t k = 0; k < model.classes.size(); ++k)
        std::cout << ' ' << model.classes[k] << '=' << pred.regressions[k];
    std::cout << "\n";
    return 0;
}

int cmd_evaluate(const std::string& results_path, const std::string& baseline_path,
                 const std::string& out_csv) {
    const auto rows = eval::read_results_csv(results_path);
    if (rows.empty()) throw SchemaError(results_path + " holds no rounds");

    std::map<std::string, std::vector<const eval::RoundResult*>> by_set;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (by_set.find(r.test_set) == by_set.end()) order.push_back(r.test_set);
        by_set[r.test_set].push_back(&r);
    }
    for (const auto& name : order) {
        double s = 0, k = 0, a = 0;
        for (const auto* r : by_set[name]) {
            s += r->srocc;
            k += r->krocc;
            a += r->accuracy;
        }
        const double n = static_cast<double>(by_set[name].size());
        std::printf("%-24s rounds %3d  srocc %.4f  krocc %.4f  accuracy %.4f\n",
                    name.c_str(), static_cast<int>(n), s / n, k / n, a / n);
    }

    if (!baseline_path.empty()) {
        const auto baseline = eval::read_results_csv(baseline_path);
        const auto cmp = eval::compare_models(rows, baseline);
        std::cout << "\npaired Wilcoxon comparison (results vs baseline):\n";
        eval::write_comparison_text(std::cout, cmp, "results", "baseline");
        if (!out_csv.empty()) {
            std::ofstream os(out_csv);
            if (!os) throw IoError("cannot write " + out_csv);
            eval::write_comparison_csv(os, cmp);
            std::cout << "comparison table: " << out_csv << "\n";
        }
    }
    return 0;
}

int cmd_synth(const std::string& out_dir, int bases, int size, std::uint64_t seed,
              std::vector<double> wn_sigmas, std::vector<double> gblur_sigmas) {
    data::SyntheticSpec spec;
    spec.n_bases = bases;
    spec.base_size = size;
    spec.seed = seed;
    if (!wn_sigmas.empty()) spec.wn_sigmas = std::move(wn_sigmas);
    if (!gblur_sigmas.empty()) spec.gblur_sigmas = std::move(gblur_sigmas);
    const auto m = data::build_synthetic_manifest(spec, out_dir);
    std::cout << m.records.size() << " degraded images under " << out_dir << "\n";
    std::cout << "manifest: " << (fs::path(out_dir) / "manifest.csv").string() << "\n";
    return 0;
}

// --- selftest ---------------------------------------------------------

struct GroupResult {
    std::string name;
    bool ok = true;
    std::string detail;
};

GroupResult selftest_fdct_roundtrip(const fdct::CurveletPlan& plan) {
    GroupResult g{"fdct-roundtrip", true, ""};
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(0.0, 255.0);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(256 * 256);
        for (auto& v : x) v = uni(rng);
        const auto rec = plan.inverse(plan.forward(x));
        double num = 0, den = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            num += (rec[i] - x[i]) * (rec[i] - x[i]);
            den += x[i] * x[i];
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    g.ok = worst <= 1e-6;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max relative L2 error %.2e", worst);
    g.detail = buf;
    return g;
}

GroupResult selftest_tight_frame(const fdct::CurveletPlan& plan) {
    GroupResult g{"tight-frame", true, ""};
    const double dev = plan.partition_deviation();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(256 * 256);
        for (auto& v : x) v = uni(rng);
        double ex = 0;
        for (double v : x) ex += v * v;
        double ec = 0;
        const auto pyr = plan.forward(x);
        for (const auto& scale : pyr.scales)
            for (const auto& panel : scale)
                for (const auto& c : panel.data) ec += std::norm(c);
        worst = std::max(worst, std::abs(ec / ex - 1.0));
    }
    g.ok = dev <= 1e-10 && worst <= 1e-9;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "partition deviation %.2e, Parseval error %.2e", dev,
                  worst);
    g.detail = buf;
    return g;
}

GroupResult selftest_robust_stats() {
    GroupResult g{"robust-stats", true, ""};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.1, 50.0);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> data(4 + rep % 60);
        for (auto& v : data) v = uni(rng);
        const auto oc = stats::octiles(data);
        worst = std::max(worst, std::abs(stats::qcd(data) - ref::qcd(data)));
        worst = std::max(worst, std::abs(stats::rmad(data) - ref::rmad(data)));
        worst = std::max(worst, std::abs(stats::mad(data) - ref::mad(data)));
        worst = std::max(worst, std::abs(stats::bowley_skew(oc) - ref::bowley_skew(data)));
        worst = std::max(worst, std::abs(stats::moors_kurt(oc) - ref::moors_kurt(data)));
    }
    g.ok = worst <= 1e-12;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max deviation from brute force %.2e", worst);
    g.detail = buf;
    return g;
}

GroupResult selftest_correlations() {
    GroupResult g{"rank-correlations", true, ""};
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> levels(0, 7);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 5 + rep % 50;
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = levels(rng);
        for (auto& v : y) v = levels(rng);
        try {
            worst = std::max(worst, std::abs(eval::srocc(x, y) - ref::srocc(x, y)));
            worst = std::max(worst, std::abs(eval::krocc(x, y) - ref::kendall_allpairs(x, y)));
        } catch (const DegenerateVariance&) {
        }
    }
    g.ok = worst <= 1e-12;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max deviation from brute force %.2e", worst);
    g.detail = buf;
    return g;
}

GroupResult selftest_wilcoxon() {
    GroupResult g{"wilcoxon", true, ""};
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> levels(0, 5);
    double worst_exact = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 4 + rep % 9;
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = levels(rng);
        for (auto& v : b) v = levels(rng);
        try {
            const auto out = eval::wilcoxon_paired(a, b);
            worst_exact =
                std::max(worst_exact, std::abs(out.p_value - ref::wilcoxon_exact_enum(a, b)));
        } catch (const AllZeroDifferences&) {
        }
    }
    g.ok = worst_exact <= 1e-12;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "max deviation from sign enumeration %.2e", worst_exact);
    g.detail = buf;
    return g;
}

int cmd_selftest(bool perturb_window) {
    const auto t0 = std::chrono::steady_clock::now();
    fdct::CurveletPlan plan(fdct::CurveletConfig{}, 256);
    if (perturb_window) plan.debug_scale_wedge(40, 1.001);

    std::vector<GroupResult> groups;
    groups.push_back(selftest_fdct_roundtrip(plan));
    groups.push_back(selftest_tight_frame(plan));
    groups.push_back(selftest_robust_stats());
    groups.push_back(selftest_correlations());
    groups.push_back(selftest_wilcoxon());

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    GroupResult timing{"runtime", true, ""};
    timing.ok = secs < 300.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f s (budget 300 s)", secs);
    timing.detail = buf;
    groups.push_back(timing);

    bool all_ok = true;
    for (const auto& gr : groups) {
        std::printf("[%s] %-18s %s\n", gr.ok ? "PASS" : "FAIL", gr.name.c_str(),
                    gr.detail.c_str());
        all_ok = all_ok && gr.ok;
    }
    return all_ok ? 0 : kExitSelftest;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curviqa: no-reference image quality assessment in the curvelet domain"};
    app.require_subcommand(1);

    int workers = 0;
    if (const char* env = std::getenv("CURVIQA_WORKERS")) workers = std::atoi(env);
    app.add_option("--workers", workers, "worker threads (0 = all cores)")
        ->envname("CURVIQA_WORKERS");

    // extract
    auto* extract = app.add_subcommand("extract", "compute feature vectors for images");
    std::string ex_input, ex_out, ex_policy = "flush", ex_dump;
    extract->add_option("--input", ex_input, "image file or directory")->required();
    extract->add_option("--out", ex_out, "output feature CSV")->required();
    extract->add_option("--block-policy", ex_policy, "flush or grid");
    extract->add_option("--dump-pyramid", ex_dump,
                        "write the first block's coefficient pyramid to this file");

    // train
    auto* train = app.add_subcommand("train", "run the reference-split training protocol");
    std::string tr_manifest, tr_out, tr_policy = "flush", tr_classes, tr_config;
    std::uint64_t tr_seed = 1;
    int tr_rounds = 200, tr_repeats = 40, tr_folds = 5;
    bool tr_save_models = false;
    std::vector<std::string> tr_tests;
    train->add_option("--manifest", tr_manifest, "training manifest CSV")->required();
    train->add_option("--out", tr_out, "output directory")->required();
    train->add_option("--rounds", tr_rounds, "rounds to run (<= repeats*folds)");
    train->add_option("--seed", tr_seed, "split/search seed");
    train->add_option("--repeats", tr_repeats, "plan repeats");
    train->add_option("--folds", tr_folds, "plan folds");
    train->add_option("--classes", tr_classes, "comma list of distortion classes");
    train->add_option("--config,--grid", tr_config, "key=value config file (overrides flags)");
    train->add_option("--block-policy", tr_policy, "flush or grid");
    train->add_option("--test", tr_tests, "external test set as name=manifest.csv")
        ->take_all();
    train->add_flag("--save-models", tr_save_models, "write per-round model files");

    // predict
    auto* predict = app.add_subcommand("predict", "predict quality of one image");
    std::string pr_model, pr_image, pr_policy = "flush";
    predict->add_option("--model", pr_model, "model file")->required();
    predict->add_option("--image", pr_image, "image file")->required();
    predict->add_option("--block-policy", pr_policy, "flush or grid");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "summarize results, compare models");
    std::string ev_results, ev_baseline, ev_csv;
    evaluate->add_option("--results", ev_results, "results CSV")->required();
    evaluate->add_option("--baseline", ev_baseline, "baseline results CSV to compare");
    evaluate->add_option("--out-csv", ev_csv, "write the comparison table as CSV");

    // benchmark
    auto* benchmark = app.add_subcommand(
        "benchmark", "train + evaluate on external sets, report mean tables");
    std::string bm_manifest, bm_out, bm_policy = "flush", bm_classes, bm_config, bm_baseline;
    std::uint64_t bm_seed = 1;
    int bm_rounds = 200, bm_repeats = 40, bm_folds = 5;
    std::vector<std::string> bm_tests;
    benchmark->add_option("--train-manifest", bm_manifest, "training manifest CSV")
        ->required();
    benchmark->add_option("--out", bm_out, "output directory")->required();
    benchmark->add_option("--test", bm_tests, "external test set as name=manifest.csv")
        ->take_all();
    benchmark->add_option("--rounds", bm_rounds, "rounds to run");
    benchmark->add_option("--seed", bm_seed, "split/search seed");
    benchmark->add_option("--repeats", bm_repeats, "plan repeats");
    benchmark->add_option("--folds", bm_folds, "plan folds");
    benchmark->add_option("--classes", bm_classes, "comma list of distortion classes");
    benchmark->add_option("--config,--grid", bm_config, "key=value config file (overrides flags)");
    benchmark->add_option("--block-policy", bm_policy, "flush or grid");
    benchmark->add_option("--baseline", bm_baseline,
                          "baseline results CSV for the significance table");

    // selftest
    auto* selftest = app.add_subcommand("selftest", "run the embedded property suite");
    bool st_perturb = false;
    selftest->add_flag("--perturb-window", st_perturb,
                       "negative control: break the window tables first");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic degraded dataset");
    std::string sy_out;
    int sy_bases = 5, sy_size = 256;
    std::uint64_t sy_seed = 20180704;
    std::vector<double> sy_wn, sy_gblur;
    synth->add_option("--out", sy_out, "output directory")->required();
    synth->add_option("--bases", sy_bases, "number of base images");
    synth->add_option("--size", sy_size, "base image size");
    synth->add_option("--seed", sy_seed, "generator seed");
    synth->add_option("--wn-sigmas", sy_wn, "white-noise severity ladder")->take_all();
    synth->add_option("--gblur-sigmas", sy_gblur, "blur severity ladder")->take_all();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (workers > 0) par::set_workers(workers);
        if (*extract) return cmd_extract(ex_input, ex_out, ex_policy, ex_dump);
        if (*train) {
            const auto cfg = resolve_config(tr_seed, tr_rounds, tr_repeats, tr_folds,
                                            tr_classes, tr_config);
            return cmd_train(tr_manifest, tr_out, cfg, tr_save_models, tr_policy, tr_tests);
        }
        if (*predict) return cmd_predict(pr_model, pr_image, pr_policy);
        if (*evaluate) return cmd_evaluate(ev_results, ev_baseline, ev_csv);
        if (*benchmark) {
            const auto cfg = resolve_config(bm_seed, bm_rounds, bm_repeats, bm_folds,
                                            bm_classes, bm_config);
            const int rc = cmd_train(bm_manifest, bm_out, cfg, false, bm_policy, bm_tests);
            if (rc != 0) return rc;
            if (!bm_baseline.empty())
                return cmd_evaluate((fs::path(bm_out) / "results.csv").string(), bm_baseline,
                                    (fs::path(bm_out) / "comparison.csv").string());
            return 0;
        }
        if (*selftest) return cmd_selftest(st_perturb);
        if (*synth) return cmd_synth(sy_out, sy_bases, sy_size, sy_seed, sy_wn, sy_gblur);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
