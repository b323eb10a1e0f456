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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace raven {

/// Row-major 8-bit RGB raster.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels; // 3 * width * height

    uint8_t* at(int x, int y) { return pixels.data() + 3 * (static_cast<size_t>(y) * width + x); }
    const uint8_t* at(int x, int y) const {
        return pixels.data() + 3 * (static_cast<size_t>(y) * width + x);
    }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

RgbImage make_image(int width, int height, uint8_t r = 0, uint8_t g = 0, uint8_t b = 0);

/// Nearest-neighbor resampling with center-aligned mapping:
/// src index = floor((dst + 0.5) * src_extent / dst_extent).
RgbImage resize_nearest(const RgbImage& src, int new_width, int new_height);

/// Horizontal concatenation: `retrieved` (or a duplicate of `query` when
/// absent) is rescaled to the query's height preserving aspect ratio, then
/// placed to the right of the query.
RgbImage concat_images(const RgbImage& query, const std::optional<RgbImage>& retrieved);

RgbImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);

} // namespace raven
