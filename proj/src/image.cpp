#include "ciqa/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <filesystem>

#include "ciqa/errors.hpp"

namespace ciqa {

namespace {

std::uint8_t luma601(double r, double g, double b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<std::uint8_t>(std::floor(y + 0.5));
}

std::vector<int> tile_anchors(int extent, BlockPolicy policy) {
    std::vector<int> anchors;
    for (int a = 0; a + kBlockSize <= extent; a += kBlockSize) anchors.push_back(a);
    if (policy == BlockPolicy::Flush && extent % kBlockSize != 0)
        anchors.push_back(extent - kBlockSize);
    return anchors;
}

}  // namespace

GrayImage load_gray(const std::string& path) {
    if (!std::filesystem::exists(path)) throw DecodeError("no such file: " + path);
    cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (raw.empty()) throw DecodeError("cannot decode " + path);

    if (raw.depth() == CV_16U) {
        cv::Mat tmp;
        raw.convertTo(tmp, CV_8U, 255.0 / 65535.0);
        raw = tmp;
    } else if (raw.depth() != CV_8U) {
        throw DecodeError("unsupported sample depth in " + path);
    }

    if (raw.rows < kBlockSize || raw.cols < kBlockSize)
        throw TooSmall(path + " is " + std::to_string(raw.cols) + "x" +
                       std::to_string(raw.rows) + "; need at least " +
                       std::to_string(kBlockSize) + " in each dimension");

    GrayImage img;
    img.width = raw.cols;
    img.height = raw.rows;
    img.pixels.resize(static_cast<std::size_t>(raw.cols) * raw.rows);

    const int ch = raw.channels();
    for (int r = 0; r < raw.rows; ++r) {
        const std::uint8_t* row = raw.ptr<std::uint8_t>(r);
        for (int c = 0; c < raw.cols; ++c) {
            std::uint8_t v;
            if (ch == 1) {
                v = row[c];
            } else if (ch == 3 || ch == 4) {
                // OpenCV decodes in BGR(A) order
                const std::uint8_t* px = row + static_cast<std::size_t>(c) * ch;
                v = luma601(px[2], px[1], px[0]);
            } else {
                throw DecodeError("unsupported channel count in " + path);
            }
            img.pixels[static_cast<std::size_t>(r) * raw.cols + c] = v;
        }
    }
    return img;
}

BlockSet fragment(const GrayImage& img, BlockPolicy policy) {
    const auto rows = tile_anchors(img.height, policy);
    const auto cols = tile_anchors(img.width, policy);
    BlockSet out;
    out.blocks.reserve(rows.size() * cols.size());
    out.origins.reserve(rows.size() * cols.size());
    for (int r0 : rows) {
        for (int c0 : cols) {
            std::vector<std::uint8_t> block(static_cast<std::size_t>(kBlockSize) * kBlockSize);
            for (int r = 0; r < kBlockSize; ++r) {
                const auto* src = img.pixels.data() +
                                  static_cast<std::size_t>(r0 + r) * img.width + c0;
                std::copy(src, src + kBlockSize,
                          block.begin() + static_cast<std::size_t>(r) * kBlockSize);
            }
            out.blocks.push_back(std::move(block));
            out.origins.emplace_back(r0, c0);
        }
    }
    return out;
}

void save_png(const GrayImage& img, const std::string& path) {
    cv::Mat m(img.height, img.width, CV_8UC1, const_cast<std::uint8_t*>(img.pixels.data()));
    if (!cv::imwrite(path, m)) throw IoError("cannot write " + path);
}

BlockPolicy parse_block_policy(const std::string& name) {
    if (name == "flush") return BlockPolicy::Flush;
    if (name == "grid") return BlockPolicy::Grid;
    throw SchemaError("unknown block policy '" + name + "' (expected flush or grid)");
}

}  // namespace ciqa
