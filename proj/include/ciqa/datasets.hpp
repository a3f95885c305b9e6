#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ciqa/image.hpp"

namespace ciqa::data {

const std::vector<std::string>& distortion_classes();  // jp2k, jpeg, wn, gblur

struct ManifestRecord {
    std::string image_path;  // resolved against the manifest's directory
    std::string reference_id;
    std::string distortion;
    double score = 0.0;
    double score_min = 0.0;
    double score_max = 0.0;
    bool lower_is_better = true;
};

struct DatasetManifest {
    std::string dataset_id;
    std::vector<ManifestRecord> records;

    bool lower_is_better() const;  // polarity is uniform per manifest
    std::map<std::string, int> class_counts() const;
    std::vector<std::string> reference_ids() const;  // sorted, unique
};

// CSV schema (exact header):
//   image_path,reference_id,distortion,score,score_min,score_max,polarity
// polarity is lower_better or higher_better. Every referenced file must
// exist; malformed rows are reported with their line number.
DatasetManifest load_manifest(const std::string& path, bool check_files = true);

void write_manifest(const DatasetManifest& m, const std::string& path);

// Seeded additive Gaussian noise, clamped to [0,255] and rounded.
GrayImage degrade_wn(const GrayImage& img, double sigma, std::uint64_t seed);

// Separable Gaussian blur, kernel radius ceil(3*sigma), reflected
// borders, normalized weights.
GrayImage degrade_gblur(const GrayImage& img, double sigma);

struct SyntheticSpec {
    int n_bases = 5;
    int base_size = 256;
    std::vector<double> wn_sigmas = {4.0, 9.0, 18.0, 36.0};
    std::vector<double> gblur_sigmas = {0.8, 1.6, 3.2, 6.4};
    std::uint64_t seed = 20180704;
    double score_min = 0.0;
    double score_max = 100.0;  // pseudo-DMOS, lower is better
};

// Procedural grayscale sources with natural-image-like spectra (1/f^a
// noise fields plus soft geometric structure).
std::vector<GrayImage> make_base_images(int count, int size, std::uint64_t seed);

// Generates the degraded images under out_dir, writes out_dir/manifest.csv,
// and returns the loaded manifest. Pseudo-scores grow strictly with
// severity within each (base, class) ladder.
DatasetManifest build_synthetic_manifest(const SyntheticSpec& spec,
                                         const std::string& out_dir);

}  // namespace ciqa::data
