// Copyright 2026-present the raven project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "raven/image.hpp"

#include "raven/types.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

namespace raven {

namespace {

void check_valid(const RgbImage& img, const char* role) {
    if (img.width < 1 || img.height < 1) {
        throw Error(std::string(role) + " image has zero dimension");
    }
    if (img.pixels.size() != static_cast<size_t>(3) * img.width * img.height) {
        throw Error(std::string(role) + " image pixel buffer has wrong length");
    }
}

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) {
            std::fclose(f);
        }
    }
};

} // namespace

RgbImage make_image(int width, int height, uint8_t r, uint8_t g, uint8_t b) {
    if (width < 1 || height < 1) {
        throw Error("image dimensions must be >= 1");
    }
    RgbImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<size_t>(3) * width * height);
    for (size_t i = 0; i + 2 < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

RgbImage resize_nearest(const RgbImage& src, int new_width, int new_height) {
    check_valid(src, "source");
    if (new_width < 1 || new_height < 1) {
        throw Error("target dimensions must be >= 1");
    }
    RgbImage dst;
    dst.width = new_width;
    dst.height = new_height;
    dst.pixels.resize(static_cast<size_t>(3) * new_width * new_height);

    std::vector<int> col(static_cast<size_t>(new_width));
    for (int x = 0; x < new_width; ++x) {
        int sx = static_cast<int>((x + 0.5) * src.width / new_width);
        col[static_cast<size_t>(x)] = std::min(sx, src.width - 1);
    }
    for (int y = 0; y < new_height; ++y) {
        int sy = static_cast<int>((y + 0.5) * src.height / new_height);
        sy = std::min(sy, src.height - 1);
        for (int x = 0; x < new_width; ++x) {
            std::memcpy(dst.at(x, y), src.at(col[static_cast<size_t>(x)], sy), 3);
        }
    }
    return dst;
}

RgbImage concat_images(const RgbImage& query, const std::optional<RgbImage>& retrieved) {
    check_valid(query, "query");
    const RgbImage& right_src = retrieved ? *retrieved : query;
    check_valid(right_src, "retrieved");

    int scaled_w = static_cast<int>(std::llround(
        static_cast<double>(right_src.width) * query.height / right_src.height));
    scaled_w = std::max(1, scaled_w);
    RgbImage right = (scaled_w == right_src.width && query.height == right_src.height)
                         ? right_src
                         : resize_nearest(right_src, scaled_w, query.height);

    RgbImage out;
    out.width = query.width + right.width;
    out.height = query.height;
    out.pixels.resize(static_cast<size_t>(3) * out.width * out.height);
    for (int y = 0; y < out.height; ++y) {
        std::memcpy(out.at(0, y), query.at(0, y), static_cast<size_t>(3) * query.width);
        std::memcpy(out.at(query.width, y), right.at(0, y), static_cast<size_t>(3) * right.width);
    }
    return out;
}

RgbImage read_png(const std::filesystem::path& path) {
    std::unique_ptr<FILE, FileCloser> file(std::fopen(path.string().c_str(), "rb"));
    if (!file) {
        throw Error("cannot open " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        throw Error("png_create_read_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("png_create_info_struct failed");
    }
    RgbImage img;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("failed to decode " + path.string());
    }
    png_init_io(png, file.get());
    png_read_info(png, info);

    png_uint_32 width = png_get_image_width(png, info);
    png_uint_32 height = png_get_image_height(png, info);
    png_byte color_type = png_get_color_type(png, info);
    png_byte bit_depth = png_get_bit_depth(png, info);

    // Normalize every input to 8-bit RGB.
    if (bit_depth == 16) {
        png_set_strip_16(png);
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.pixels.resize(static_cast<size_t>(3) * width * height);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) {
        row_ptrs[y] = img.pixels.data() + static_cast<size_t>(3) * width * y;
    }
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    check_valid(image, "output");
    std::unique_ptr<FILE, FileCloser> file(std::fopen(path.string().c_str(), "wb"));
    if (!file) {
        throw Error("cannot write " + path.string());
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        throw Error("png_create_write_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("failed to encode " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> row_ptrs(static_cast<size_t>(image.height));
    for (int y = 0; y < image.height; ++y) {
        row_ptrs[static_cast<size_t>(y)] = const_cast<png_bytep>(
            image.pixels.data() + static_cast<size_t>(3) * image.width * y);
    }
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace raven
