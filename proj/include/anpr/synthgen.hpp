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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "anpr/charnet.hpp"
#include "anpr/contours.hpp"
#include "anpr/image.hpp"

namespace anpr {

/// One binary mask per character of kAlphabet, all the same size.
class GlyphSet
{
public:
    GlyphSet(int width, int height, std::vector<BinaryImage> masks);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const BinaryImage& at(char c) const;

private:
    int width_, height_;
    std::vector<BinaryImage> masks_;
};

/// Stroke-drawn sans glyphs, 30x48 nominal. Zero is slashed to keep it apart
/// from O.
const GlyphSet& builtin_glyphs();

/// Replaces glyphs with images found in `dir` (named "<char>.png", ".pgm", ...),
/// binarized with Otsu, cropped to the ink, and resized to the nominal size.
GlyphSet load_glyph_overrides(const GlyphSet& base, const std::filesystem::path& dir);

inline constexpr std::uint8_t kPaperLevel = 224;
inline constexpr std::uint8_t kInkLevel = 32;

/// Dark glyph on a light side x side field; the glyph box is side * 3/4 tall,
/// centered, aspect preserved.
GrayImage render_glyph(char c, const GlyphSet& glyphs, int side);

struct AugmentParams
{
    double rotation = 0;             ///< degrees, counter-clockwise
    double perspective_jitter = 0;   ///< max corner displacement, fraction of size
    double blur_sigma = 0;
    double exposure_gain = 1;
    double shadow_strength = 0;
    double noise_prob = 0;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const AugmentParams&, const AugmentParams&) = default;
};

/// Rotation, corner jitter, Gaussian blur, exposure, shadow ramp, salt and
/// pepper noise, in that order. Geometric steps fill with the border mean.
GrayImage augment(const GrayImage& img, const AugmentParams& p);

/// Ranges augmentation parameters are drawn from (uniformly).
struct AugmentRanges
{
    double max_rotation = 15;
    double max_jitter = 0.15;
    double max_blur = 1.5;
    double min_gain = 0.6;
    double max_gain = 1.6;
    double max_shadow = 0.5;
    double max_noise = 0.02;

    void validate() const;
};

/// Parameters of sample `index` of a dataset seeded with `seed`.
AugmentParams draw_params(const AugmentRanges& ranges, std::uint64_t seed, std::uint64_t index);

/// Turns an augmented glyph raster into a classifier input the same way the
/// recognizer treats a plate character: Otsu, largest component, normalize.
UnitImage glyph_to_sample(const GrayImage& img, int side = 32);

inline constexpr int kDefaultPerClass = 60;
inline constexpr int kRenderSide = 64;

/// Sample i has class i % 36 and is drawn with draw_params(ranges, seed, i).
std::vector<LabeledSample> generate_dataset(const GlyphSet& glyphs, int per_class,
                                            const AugmentRanges& ranges, std::uint64_t seed);

/// Writes <dir>/<C>/<C>_<nnnnn>.pgm per sample plus <dir>/manifest.csv
/// (path,label,seed,rotation,jitter,blur,gain,shadow,noise). Returns the count.
std::size_t write_dataset(const std::filesystem::path& dir, const GlyphSet& glyphs, int per_class,
                          const AugmentRanges& ranges, std::uint64_t seed);

/// Loads a tree written by write_dataset, in manifest order.
std::vector<LabeledSample> read_dataset(const std::filesystem::path& dir);

enum class PlateLayout { single, two_line };

struct PlateStyle
{
    int glyph_height = 60;
    int spacing = 8;
    int margin_x = 20;
    int margin_y = 12;
    int line_gap = 12;
    /// Plates are at least this many times wider than tall.
    double min_aspect = 4.0;
    /// Dark 2 px frame inset by 4 px.
    bool border = false;
    std::uint8_t field = 220;
    std::uint8_t ink = 30;
};

struct ComposedPlate
{
    GrayImage image;
    std::vector<BoundingBox> boxes;   ///< per character, reading order
};

/// Two-line plates put the first half (rounded down) of the text on top.
ComposedPlate compose_plate(std::string_view text, const GlyphSet& glyphs,
                            PlateLayout layout = PlateLayout::single, const PlateStyle& style = {});

}   // anpr
