/********************************************************************************
* Copyright 2026 The anpr Authors. All Rights Reserved.
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*    http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
********************************************************************************/

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anpr/error.hpp"

namespace anpr {

struct Rgb
{
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct GrayTag {};
struct BinaryTag {};
struct RgbTag {};
struct UnitTag {};

/// Row-major raster of width x height samples. The tag keeps gray and binary
/// rasters (both byte-backed) from being mixed up.
template <typename T, typename Tag>
class Raster
{
public:
    using value_type = T;

    Raster() = default;

    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height)
    {
        ANPR_CHECK(width >= 1 && height >= 1,
                   "raster dimensions must be at least 1x1, got " + std::to_string(width) + "x" +
                       std::to_string(height));
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        ANPR_CHECK(width >= 1 && height >= 1, "raster dimensions must be at least 1x1");
        ANPR_CHECK(data_.size() == static_cast<std::size_t>(width) * height,
                   "raster buffer size does not match its dimensions");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    const T& operator()(int x, int y) const noexcept
    {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }

    bool contains(int x, int y) const noexcept
    {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using GrayImage = Raster<std::uint8_t, GrayTag>;
/// Foreground = 1, background = 0.
using BinaryImage = Raster<std::uint8_t, BinaryTag>;
using RgbImage = Raster<Rgb, RgbTag>;
/// Real-valued raster with intensities in [0, 1].
using UnitImage = Raster<double, UnitTag>;

inline std::size_t count_foreground(const BinaryImage& img)
{
    std::size_t n = 0;
    for (auto v : img.pixels()) n += v != 0;
    return n;
}

}   // anpr
