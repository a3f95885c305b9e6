#include "ciqa/datasets.hpp"

#include <cmath>
#include <fstream>

#include "ciqa/errors.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ciqa;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    os << text;
}

}  // namespace

TEST_CASE("manifest validation") {
    testutil::TempDir dir("manifest");
    save_png(testutil::random_gray_image(256, 256, 1), dir.file("img.png"));

    const std::string header =
        "image_path,reference_id,distortion,score,score_min,score_max,polarity\n";

    write_file(dir.file("good.csv"),
               header + "img.png,ref1,wn,30,0,100,lower_better\n" +
                   "img.png,ref1,gblur,55,0,100,lower_better\n");
    const auto m = data::load_manifest(dir.file("good.csv"));
    CHECK(m.dataset_id == "good");
    REQUIRE(m.records.size() == 2);
    CHECK(m.records[0].image_path == dir.file("img.png"));
    CHECK(m.lower_is_better());
    CHECK(m.class_counts().at("wn") == 1);
    CHECK(m.reference_ids() == std::vector<std::string>{"ref1"});

    write_file(dir.file("badheader.csv"), "path,ref\n");
    CHECK_THROWS_AS(data::load_manifest(dir.file("badheader.csv")), SchemaError);

    write_file(dir.file("badclass.csv"), header + "img.png,r,salt,10,0,100,lower_better\n");
    CHECK_THROWS_AS(data::load_manifest(dir.file("badclass.csv")), SchemaError);

    write_file(dir.file("badscore.csv"), header + "img.png,r,wn,101,0,100,lower_better\n");
    CHECK_THROWS_AS(data::load_manifest(dir.file("badscore.csv")), ScoreOutOfRange);

    write_file(dir.file("missing.csv"), header + "nope.png,r,wn,10,0,100,lower_better\n");
    CHECK_THROWS_AS(data::load_manifest(dir.file("missing.csv")), MissingFile);

    write_file(dir.file("mixed.csv"), header + "img.png,r,wn,10,0,100,lower_better\n" +
                                          "img.png,r,wn,10,0,100,higher_better\n");
    CHECK_THROWS_AS(data::load_manifest(dir.file("mixed.csv")), SchemaError);

    // malformed rows carry their line number
    write_file(dir.file("badnum.csv"), header + "img.png,r,wn,10,0,100,lower_better\n" +
                                           "img.png,r,wn,x,0,100,lower_better\n");
    try {
        data::load_manifest(dir.file("badnum.csv"));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("white noise degradation") {
    GrayImage mid;
    mid.width = mid.height = 256;
    mid.pixels.assign(256 * 256, 128);

    const auto a = data::degrade_wn(mid, 10.0, 42);
    const auto b = data::degrade_wn(mid, 10.0, 42);
    CHECK(a.pixels == b.pixels);
    const auto c = data::degrade_wn(mid, 10.0, 43);
    CHECK(a.pixels != c.pixels);

    double mean = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i)
        mean += static_cast<double>(a.pixels[i]) - mid.pixels[i];
    mean /= a.pixels.size();
    double var = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - mid.pixels[i] - mean;
        var += d * d;
    }
    var /= a.pixels.size();
    CHECK(std::sqrt(var) == doctest::Approx(10.0).epsilon(0.05));

    // vanishing sigma leaves the image untouched
    const auto d = data::degrade_wn(mid, 1e-9, 7);
    CHECK(d.pixels == mid.pixels);
}

TEST_CASE("gaussian blur degradation") {
    GrayImage flat;
    flat.width = flat.height = 256;
    flat.pixels.assign(256 * 256, 77);
    CHECK(data::degrade_gblur(flat, 2.0).pixels == flat.pixels);

    const auto base = data::make_base_images(1, 256, 5).front();
    auto variance = [](const GrayImage& img) {
        double mean = 0;
        for (auto p : img.pixels) mean += p;
        mean /= img.pixels.size();
        double var = 0;
        for (auto p : img.pixels) var += (p - mean) * (p - mean);
        return var / img.pixels.size();
    };
    const double v0 = variance(base);
    const double v1 = variance(data::degrade_gblur(base, 0.8));
    const double v2 = variance(data::degrade_gblur(base, 2.4));
    CHECK(v1 < v0);
    CHECK(v2 < v1);
}

TEST_CASE("synthetic manifest generation") {
    testutil::TempDir dir("synth");
    data::SyntheticSpec spec;
    spec.n_bases = 5;
    spec.base_size = 256;
    spec.seed = 99;

    const auto m = data::build_synthetic_manifest(spec, dir.path().string());
    CHECK(m.records.size() == 5 * 2 * 4);
    CHECK(m.class_counts().at("wn") == 20);
    CHECK(m.class_counts().at("gblur") == 20);
    CHECK(m.reference_ids().size() == 5);
    CHECK(m.lower_is_better());

    // pseudo-scores strictly monotone in severity within each (base, class)
    std::map<std::pair<std::string, std::string>, std::vector<double>> ladders;
    for (const auto& r : m.records)
        ladders[{r.reference_id, r.distortion}].push_back(r.score);
    for (const auto& [key, scores] : ladders) {
        REQUIRE(scores.size() == 4);
        for (std::size_t i = 1; i < scores.size(); ++i) CHECK(scores[i] > scores[i - 1]);
    }

    // deterministic regeneration, byte for byte
    testutil::TempDir dir2("synth2");
    data::build_synthetic_manifest(spec, dir2.path().string());
    for (const auto& name : {"base0_wn_0.png", "base3_gblur_2.png"}) {
        std::ifstream f1(dir.file(name), std::ios::binary);
        std::ifstream f2(dir2.file(name), std::ios::binary);
        REQUIRE(f1.good());
        REQUIRE(f2.good());
        const std::string b1((std::istreambuf_iterator<char>(f1)), {});
        const std::string b2((std::istreambuf_iterator<char>(f2)), {});
        CHECK(b1 == b2);
    }

    spec.wn_sigmas = {1.0};
    CHECK_THROWS_AS(data::build_synthetic_manifest(spec, dir.path().string()), SchemaError);
}
