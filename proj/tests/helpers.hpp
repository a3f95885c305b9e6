#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ciqa/image.hpp"

namespace testutil {

inline std::vector<double> random_block(int size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 255.0);
    std::vector<double> block(static_cast<std::size_t>(size) * size);
    for (auto& v : block) v = uni(rng);
    return block;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed,
                                         double lo = -10.0, double hi = 10.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = uni(rng);
    return v;
}

// integer-valued draws so ties actually happen
inline std::vector<double> random_tied_vector(std::size_t n, std::uint64_t seed,
                                              int levels = 8) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> uni(0, levels - 1);
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(uni(rng));
    return v;
}

inline ciqa::GrayImage random_gray_image(int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> uni(0, 255);
    ciqa::GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(uni(rng));
    return img;
}

// unique temp directory, removed when the object dies
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("ciqa_test_" + tag + "_" + std::to_string(counter_++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

}  // namespace testutil
