#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ciqa {

inline constexpr int kBlockSize = 256;

// 8-bit grayscale image, row-major, at least one analysis block in each
// dimension.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
};

// How fragment() covers an image whose dimensions are not multiples of
// the block size: Flush adds an extra right/bottom-aligned tile row or
// column (total coverage, mild overlap); Grid keeps only aligned tiles.
enum class BlockPolicy { Flush, Grid };

struct BlockSet {
    // Each block is kBlockSize x kBlockSize, row-major.
    std::vector<std::vector<std::uint8_t>> blocks;
    std::vector<std::pair<int, int>> origins;  // (row, col) anchors
};

// Decodes PNG/BMP/JPEG. Color inputs are converted by BT.601 luma
// (0.299 R + 0.587 G + 0.114 B), rounded half-up; already-gray inputs
// pass through unchanged. Throws DecodeError / TooSmall.
GrayImage load_gray(const std::string& path);

BlockSet fragment(const GrayImage& img, BlockPolicy policy = BlockPolicy::Flush);

void save_png(const GrayImage& img, const std::string& path);

BlockPolicy parse_block_policy(const std::string& name);

}  // namespace ciqa
