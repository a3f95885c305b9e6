#include "ciqa/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "ciqa/errors.hpp"
#include "ciqa/fft.hpp"

namespace ciqa::data {

namespace fs = std::filesystem;

const std::vector<std::string>& distortion_classes() {
    static const std::vector<std::string> classes = {"jp2k", "jpeg", "wn", "gblur"};
    return classes;
}

bool DatasetManifest::lower_is_better() const {
    return records.empty() ? true : records.front().lower_is_better;
}

std::map<std::string, int> DatasetManifest::class_counts() const {
    std::map<std::string, int> counts;
    for (const auto& r : records) ++counts[r.distortion];
    return counts;
}

std::vector<std::string> DatasetManifest::reference_ids() const {
    std::set<std::string> ids;
    for (const auto& r : records) ids.insert(r.reference_id);
    return {ids.begin(), ids.end()};
}

namespace {

constexpr const char* kHeader =
    "image_path,reference_id,distortion,score,score_min,score_max,polarity";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || !std::isfinite(v))
        throw SchemaError(where + ": bad number '" + s + "'");
    return v;
}

}  // namespace

DatasetManifest load_manifest(const std::string& path, bool check_files) {
    std::ifstream is(path);
    if (!is) throw MissingFile("cannot open manifest " + path);
    const fs::path base_dir = fs::path(path).parent_path();

    std::string line;
    if (!std::getline(is, line)) throw SchemaError(path + ": empty manifest");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw SchemaError(path + ":1: header must be exactly '" + kHeader + "'");

    DatasetManifest m;
    m.dataset_id = fs::path(path).stem().string();

    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const auto fields = split_csv(line);
        if (fields.size() != 7) throw SchemaError(where + ": expected 7 fields");

        ManifestRecord r;
        fs::path img = fields[0];
        if (img.is_relative()) img = base_dir / img;
        r.image_path = img.string();
        r.reference_id = fields[1];
        r.distortion = fields[2];
        r.score = parse_double(fields[3], where);
        r.score_min = parse_double(fields[4], where);
        r.score_max = parse_double(fields[5], where);
        if (fields[6] == "lower_better") {
            r.lower_is_better = true;
        } else if (fields[6] == "higher_better") {
            r.lower_is_better = false;
        } else {
            throw SchemaError(where + ": polarity must be lower_better or higher_better");
        }

        const auto& classes = distortion_classes();
        if (std::find(classes.begin(), classes.end(), r.distortion) == classes.end())
            throw SchemaError(where + ": unknown distortion '" + r.distortion + "'");
        if (r.reference_id.empty()) throw SchemaError(where + ": empty reference_id");
        if (r.score < r.score_min || r.score > r.score_max)
            throw ScoreOutOfRange(where + ": score " + std::to_string(r.score) +
                                  " outside [" + std::to_string(r.score_min) + ", " +
                                  std::to_string(r.score_max) + "]");
        if (check_files && !fs::exists(r.image_path))
            throw MissingFile(where + ": no such image " + r.image_path);

        m.records.push_back(std::move(r));
    }
    if (m.records.empty()) throw SchemaError(path + ": manifest has no records");
    for (const auto& r : m.records)
        if (r.lower_is_better != m.records.front().lower_is_better)
            throw SchemaError(path + ": mixed score polarity in one manifest");
    return m;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write manifest " + path);
    os << kHeader << "\n" << std::setprecision(17);
    for (const auto& r : m.records)
        os << r.image_path << ',' << r.reference_id << ',' << r.distortion << ','
           << r.score << ',' << r.score_min << ',' << r.score_max << ','
           << (r.lower_is_better ? "lower_better" : "higher_better") << "\n";
    if (!os) throw IoError("failed writing manifest " + path);
}

GrayImage degrade_wn(const GrayImage& img, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    GrayImage out = img;
    for (auto& p : out.pixels) {
        const double v = std::round(static_cast<double>(p) + noise(rng));
        p = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    return out;
}

GrayImage degrade_gblur(const GrayImage& img, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& w : kernel) w /= sum;

    auto reflect = [](int i, int n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
        return i;
    };

    const int w = img.width, h = img.height;
    std::vector<double> horiz(static_cast<std::size_t>(w) * h);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * img.at(r, reflect(c + i, w));
            horiz[static_cast<std::size_t>(r) * w + c] = acc;
        }
    }
    GrayImage out;
    out.width = w;
    out.height = h;
    out.pixels.resize(horiz.size());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * horiz[static_cast<std::size_t>(reflect(r + i, h)) * w + c];
            out.pixels[static_cast<std::size_t>(r) * w + c] =
                static_cast<std::uint8_t>(std::clamp(std::round(acc), 0.0, 255.0));
        }
    }
    return out;
}

std::vector<GrayImage> make_base_images(int count, int size, std::uint64_t seed) {
    std::vector<GrayImage> bases;
    bases.reserve(count);
    const auto& fft = fft::default_fft2d();

    for (int b = 0; b < count; ++b) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(b) * 0x9e3779b97f4a7c15ull);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> uni(0.0, 1.0);

        // 1/f^a random field shaped in the spectrum
        const double alpha = 1.0 + uni(rng);
        std::vector<std::complex<double>> spec(static_cast<std::size_t>(size) * size);
        for (auto& v : spec) v = {gauss(rng), gauss(rng)};
        for (int a1 = 0; a1 < size; ++a1) {
            const int k1 = a1 < size / 2 ? a1 : a1 - size;
            for (int a2 = 0; a2 < size; ++a2) {
                const int k2 = a2 < size / 2 ? a2 : a2 - size;
                const double f = std::sqrt(static_cast<double>(k1) * k1 +
                                           static_cast<double>(k2) * k2);
                spec[static_cast<std::size_t>(a1) * size + a2] *=
                    1.0 / std::pow(1.0 + f, alpha);
            }
        }
        fft.inverse(spec.data(), size, size);
        std::vector<double> field(spec.size());
        for (std::size_t i = 0; i < spec.size(); ++i) field[i] = spec[i].real();

        // soft geometric structure on top: a few filled disks and a ramp
        const int n_disks = 3 + static_cast<int>(uni(rng) * 4);
        const double ramp = (uni(rng) - 0.5) * 0.8;
        std::vector<double> extra(field.size(), 0.0);
        for (int d = 0; d < n_disks; ++d) {
            const double cx = uni(rng) * size, cy = uni(rng) * size;
            const double rad = size * (0.05 + 0.2 * uni(rng));
            const double amp = (uni(rng) - 0.5) * 2.0;
            for (int r = 0; r < size; ++r)
                for (int c = 0; c < size; ++c) {
                    const double dist = std::hypot(r - cy, c - cx);
                    if (dist < rad)
                        extra[static_cast<std::size_t>(r) * size + c] +=
                            amp * (1.0 - dist / rad);
                }
        }
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c)
                extra[static_cast<std::size_t>(r) * size + c] +=
                    ramp * (static_cast<double>(c) / size - 0.5);

        double fmin = field[0], fmax = field[0];
        for (double v : field) { fmin = std::min(fmin, v); fmax = std::max(fmax, v); }
        const double fscale = fmax > fmin ? 1.0 / (fmax - fmin) : 1.0;
        double emin = extra[0], emax = extra[0];
        for (double v : extra) { emin = std::min(emin, v); emax = std::max(emax, v); }
        const double escale = emax > emin ? 1.0 / (emax - emin) : 1.0;

        GrayImage img;
        img.width = size;
        img.height = size;
        img.pixels.resize(field.size());
        for (std::size_t i = 0; i < field.size(); ++i) {
            const double mixed = 0.65 * (field[i] - fmin) * fscale +
                                 0.35 * (extra[i] - emin) * escale;
            // keep headroom so additive noise rarely clips
            img.pixels[i] = static_cast<std::uint8_t>(std::round(20.0 + 215.0 * mixed));
        }
        bases.push_back(std::move(img));
    }
    return bases;
}

DatasetManifest build_synthetic_manifest(const SyntheticSpec& spec,
                                         const std::string& out_dir) {
    if (spec.n_bases < 1) throw SchemaError("synthetic spec needs at least one base");
    if (spec.wn_sigmas.size() < 2 || spec.gblur_sigmas.size() < 2)
        throw SchemaError("synthetic spec needs at least 2 severity levels per class");
    for (double s : spec.wn_sigmas)
        if (!(s > 0)) throw SchemaError("wn sigma must be positive");
    for (double s : spec.gblur_sigmas)
        if (!(s > 0)) throw SchemaError("gblur sigma must be positive");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

    const auto bases = make_base_images(spec.n_bases, spec.base_size, spec.seed);

    DatasetManifest m;
    m.dataset_id = "synthetic";
    auto pseudo_score = [&](std::size_t level, std::size_t n_levels) {
        // strictly monotone in severity; lower score = better quality
        return spec.score_min + (spec.score_max - spec.score_min) *
                                    static_cast<double>(level + 1) /
                                    static_cast<double>(n_levels + 1);
    };

    for (int b = 0; b < spec.n_bases; ++b) {
        const std::string ref = "base" + std::to_string(b);
        for (std::size_t i = 0; i < spec.wn_sigmas.size(); ++i) {
            const auto img = degrade_wn(bases[b], spec.wn_sigmas[i],
                                        spec.seed ^ (static_cast<std::uint64_t>(b) << 24 | i));
            const std::string name = ref + "_wn_" + std::to_string(i) + ".png";
            save_png(img, (fs::path(out_dir) / name).string());
            m.records.push_back({name, ref, "wn", pseudo_score(i, spec.wn_sigmas.size()),
                                 spec.score_min, spec.score_max, true});
        }
        for (std::size_t i = 0; i < spec.gblur_sigmas.size(); ++i) {
            const auto img = degrade_gblur(bases[b], spec.gblur_sigmas[i]);
            const std::string name = ref + "_gblur_" + std::to_string(i) + ".png";
            save_png(img, (fs::path(out_dir) / name).string());
            m.records.push_back({name, ref, "gblur",
                                 pseudo_score(i, spec.gblur_sigmas.size()), spec.score_min,
                                 spec.score_max, true});
        }
    }

    const std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();
    write_manifest(m, manifest_path);
    return load_manifest(manifest_path);
}

}  // namespace ciqa::data
