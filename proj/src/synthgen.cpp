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


#include "anpr/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "anpr/imageio.hpp"
#include "anpr/imgproc.hpp"
#include "anpr/rng.hpp"

namespace anpr {

namespace {

struct Point
{
    double x, y;
};
using Stroke = std::vector<Point>;

// Strokes on a 6 x 10 grid, y down.
const std::array<std::vector<Stroke>, kNumClasses>& stroke_table()
{
    static const std::array<std::vector<Stroke>, kNumClasses> table = {{
        // 0-9
        {{{1.5, 0}, {4.5, 0}, {5.6, 1.5}, {5.6, 8.5}, {4.5, 10}, {1.5, 10}, {0.4, 8.5}, {0.4, 1.5}, {1.5, 0}},
         {{4.6, 2}, {1.4, 8}}},
        {{{1.2, 2.2}, {3.5, 0}, {3.5, 10}}, {{1.2, 10}, {5.8, 10}}},
        {{{0, 2}, {1.5, 0}, {4.5, 0}, {6, 1.5}, {6, 3.5}, {0, 10}, {6, 10}}},
        {{{0, 1}, {1, 0}, {5, 0}, {6, 1}, {6, 4}, {5, 5}, {2, 5}}, {{5, 5}, {6, 6}, {6, 9}, {5, 10}, {1, 10}, {0, 9}}},
        {{{4.5, 10}, {4.5, 0}, {0, 7}, {6, 7}}},
        {{{6, 0}, {0.5, 0}, {0, 4.5}, {4.5, 4.5}, {6, 6}, {6, 8.5}, {4.5, 10}, {0, 10}}},
        {{{5, 0}, {2, 0}, {0, 2.5}, {0, 8.5}, {1.5, 10}, {4.5, 10}, {6, 8.5}, {6, 6}, {4.5, 4.5}, {0, 4.5}}},
        {{{0, 0}, {6, 0}, {2.5, 10}}},
        {{{1, 0}, {5, 0}, {5.7, 0.8}, {5.7, 3.8}, {5, 4.6}, {1, 4.6}, {0.3, 3.8}, {0.3, 0.8}, {1, 0}},
         {{1, 4.6}, {5, 4.6}, {6, 5.6}, {6, 9}, {5, 10}, {1, 10}, {0, 9}, {0, 5.6}, {1, 4.6}}},
        {{{6, 5.5}, {1.5, 5.5}, {0, 4}, {0, 1.5}, {1.5, 0}, {4.5, 0}, {6, 1.5}, {6, 7.5}, {3.5, 10}, {1, 10}}},
        // A-Z
        {{{0, 10}, {3, 0}, {6, 10}}, {{1, 6.5}, {5, 6.5}}},
        {{{0, 0}, {0, 10}, {4.5, 10}, {6, 8.5}, {6, 6.5}, {4.5, 5}, {0, 5}},
         {{0, 0}, {4, 0}, {5.5, 1.3}, {5.5, 3.7}, {4, 5}}},
        {{{6, 1.5}, {4.5, 0}, {1.5, 0}, {0, 1.5}, {0, 8.5}, {1.5, 10}, {4.5, 10}, {6, 8.5}}},
        {{{0, 0}, {3.5, 0}, {6, 2.5}, {6, 7.5}, {3.5, 10}, {0, 10}, {0, 0}}},
        {{{6, 0}, {0, 0}, {0, 10}, {6, 10}}, {{0, 5}, {4.5, 5}}},
        {{{6, 0}, {0, 0}, {0, 10}}, {{0, 5}, {4.5, 5}}},
        {{{6, 1.5}, {4.5, 0}, {1.5, 0}, {0, 1.5}, {0, 8.5}, {1.5, 10}, {4.5, 10}, {6, 8.5}, {6, 5.5}, {3.5, 5.5}}},
        {{{0, 0}, {0, 10}}, {{6, 0}, {6, 10}}, {{0, 5}, {6, 5}}},
        {{{3, 0}, {3, 10}}, {{1, 0}, {5, 0}}, {{1, 10}, {5, 10}}},
        {{{2, 0}, {6, 0}}, {{5, 0}, {5, 8.5}, {3.5, 10}, {1.5, 10}, {0, 8.5}, {0, 7}}},
        {{{0, 0}, {0, 10}}, {{6, 0}, {0, 6}}, {{2, 4.5}, {6, 10}}},
        {{{0, 0}, {0, 10}, {6, 10}}},
        {{{0, 10}, {0, 0}, {3, 6}, {6, 0}, {6, 10}}},
        {{{0, 10}, {0, 0}, {6, 10}, {6, 0}}},
        {{{2, 0}, {4, 0}, {6, 2}, {6, 8}, {4, 10}, {2, 10}, {0, 8}, {0, 2}, {2, 0}}},
        {{{0, 10}, {0, 0}, {4.5, 0}, {6, 1.5}, {6, 4}, {4.5, 5.5}, {0, 5.5}}},
        {{{2, 0}, {4, 0}, {6, 2}, {6, 8}, {4, 10}, {2, 10}, {0, 8}, {0, 2}, {2, 0}}, {{3.5, 7}, {6, 10}}},
        {{{0, 10}, {0, 0}, {4.5, 0}, {6, 1.5}, {6, 4}, {4.5, 5.5}, {0, 5.5}}, {{3, 5.5}, {6, 10}}},
        {{{6, 1.5}, {4.5, 0}, {1.5, 0}, {0, 1.5}, {0, 3.5}, {1.5, 5}, {4.5, 5}, {6, 6.5}, {6, 8.5}, {4.5, 10},
          {1.5, 10}, {0, 8.5}}},
        {{{0, 0}, {6, 0}}, {{3, 0}, {3, 10}}},
        {{{0, 0}, {0, 8.5}, {1.5, 10}, {4.5, 10}, {6, 8.5}, {6, 0}}},
        {{{0, 0}, {3, 10}, {6, 0}}},
        {{{0, 0}, {1.5, 10}, {3, 4}, {4.5, 10}, {6, 0}}},
        {{{0, 0}, {6, 10}}, {{6, 0}, {0, 10}}},
        {{{0, 0}, {3, 5}, {6, 0}}, {{3, 5}, {3, 10}}},
        {{{0, 0}, {6, 0}, {0, 10}, {6, 10}}},
    }};
    return table;
}

double segment_distance(Point p, Point a, Point b)
{
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

BinaryImage draw_strokes(const std::vector<Stroke>& strokes, int w, int h, double thickness)
{
    const double r = thickness / 2;
    const double sx = (w - thickness) / 6.0, sy = (h - thickness) / 10.0;
    BinaryImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Point p{x + 0.5, y + 0.5};
            for (const auto& s : strokes) {
                for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                    const Point a{r + s[i].x * sx, r + s[i].y * sy};
                    const Point b{r + s[i + 1].x * sx, r + s[i + 1].y * sy};
                    if (segment_distance(p, a, b) <= r) {
                        out(x, y) = 1;
                        goto next;
                    }
                }
            }
        next:;
        }
    }
    return out;
}

int glyph_index(char c)
{
    const int i = class_index(c);
    ANPR_CHECK(i >= 0, std::string("unsupported character '") + c + "'");
    return i;
}

GrayImage mask_to_gray(const BinaryImage& m)
{
    GrayImage g(m.width(), m.height());
    for (std::size_t i = 0; i < m.size(); ++i) g.pixels()[i] = m.pixels()[i] ? 255 : 0;
    return g;
}

// Glyph scaled to w x h, drawn into `dst` at (x0, y0) as ink over the field.
void stamp_glyph(GrayImage& dst, const BinaryImage& mask, int x0, int y0, int w, int h, std::uint8_t field,
                 std::uint8_t ink)
{
    const GrayImage cov = resize_bilinear(mask_to_gray(mask), w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!dst.contains(x0 + x, y0 + y)) continue;
            const double a = cov(x, y) / 255.0;
            dst(x0 + x, y0 + y) = to_pixel(field - a * (field - ink));
        }
    }
}

// Bounding box of pixels darker than `field` inside the given cell.
BoundingBox ink_box(const GrayImage& img, int x0, int y0, int w, int h, std::uint8_t field)
{
    int minx = x0 + w, miny = y0 + h, maxx = x0 - 1, maxy = y0 - 1;
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
            if (img(x, y) < field) {
                minx = std::min(minx, x);
                maxx = std::max(maxx, x);
                miny = std::min(miny, y);
                maxy = std::max(maxy, y);
            }
        }
    }
    ANPR_CHECK(maxx >= minx, "glyph rendered without ink");
    return {minx, miny, maxx - minx + 1, maxy - miny + 1};
}

}   // namespace

GlyphSet::GlyphSet(int width, int height, std::vector<BinaryImage> masks)
    : width_(width), height_(height), masks_(std::move(masks))
{
    ANPR_CHECK(masks_.size() == kNumClasses, "a glyph set needs all 36 characters");
    for (std::size_t i = 0; i < masks_.size(); ++i) {
        ANPR_CHECK(masks_[i].width() == width && masks_[i].height() == height,
                   std::string("glyph '") + kAlphabet[i] + "' has the wrong size");
        ANPR_CHECK(count_foreground(masks_[i]) > 0, std::string("glyph '") + kAlphabet[i] + "' is empty");
    }
}

const BinaryImage& GlyphSet::at(char c) const
{
    return masks_[glyph_index(c)];
}

const GlyphSet& builtin_glyphs()
{
    static const GlyphSet set = [] {
        constexpr int w = 30, h = 48;
        std::vector<BinaryImage> masks;
        for (const auto& strokes : stroke_table()) masks.push_back(draw_strokes(strokes, w, h, 5.5));
        return GlyphSet(w, h, std::move(masks));
    }();
    return set;
}

GlyphSet load_glyph_overrides(const GlyphSet& base, const std::filesystem::path& dir)
{
    ANPR_CHECK(std::filesystem::is_directory(dir), "glyph directory not found: " + dir.string());
    std::vector<BinaryImage> masks;
    for (char c : kAlphabet) {
        BinaryImage mask = base.at(c);
        for (const char* ext : {".png", ".pgm", ".jpg", ".jpeg", ".ppm"}) {
            const auto path = dir / (std::string(1, c) + ext);
            if (!std::filesystem::exists(path)) continue;
            const GrayImage gray = to_grayscale(read_image(path));
            const BinaryImage ink = otsu_threshold(gray).image;
            const auto comps = label_components(ink);
            ANPR_CHECK(!comps.empty(), "glyph image has no ink: " + path.string());
            int x0 = ink.width(), y0 = ink.height(), x1 = 0, y1 = 0;
            for (const auto& k : comps) {
                x0 = std::min(x0, k.bbox.x);
                y0 = std::min(y0, k.bbox.y);
                x1 = std::max(x1, k.bbox.right());
                y1 = std::max(y1, k.bbox.bottom());
            }
            GrayImage crop(x1 - x0, y1 - y0);
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) crop(x - x0, y - y0) = ink(x, y) ? 255 : 0;
            }
            const GrayImage scaled = resize_bilinear(crop, base.width(), base.height());
            mask = BinaryImage(base.width(), base.height());
            for (std::size_t i = 0; i < mask.size(); ++i) mask.pixels()[i] = scaled.pixels()[i] >= 128;
            break;
        }
        masks.push_back(std::move(mask));
    }
    return GlyphSet(base.width(), base.height(), std::move(masks));
}

GrayImage render_glyph(char c, const GlyphSet& glyphs, int side)
{
    const BinaryImage& mask = glyphs.at(c);
    ANPR_CHECK(side >= 8, "glyph side must be at least 8");
    const int gh = std::max(1, side * 3 / 4);
    const int gw = std::max(1, static_cast<int>(std::lround(double(gh) * glyphs.width() / glyphs.height())));
    GrayImage out(side, side, kPaperLevel);
    stamp_glyph(out, mask, (side - gw) / 2, (side - gh) / 2, gw, gh, kPaperLevel, kInkLevel);
    return out;
}

void AugmentParams::validate() const
{
    ANPR_CHECK(std::isfinite(rotation), "rotation must be finite");
    ANPR_CHECK(perspective_jitter >= 0 && perspective_jitter <= 0.3, "perspective jitter must lie in [0, 0.3]");
    ANPR_CHECK(blur_sigma >= 0, "blur sigma must be non-negative");
    ANPR_CHECK(exposure_gain > 0, "exposure gain must be positive");
    ANPR_CHECK(shadow_strength >= 0 && shadow_strength <= 1, "shadow strength must lie in [0, 1]");
    ANPR_CHECK(noise_prob >= 0 && noise_prob <= 1, "noise probability must lie in [0, 1]");
}

GrayImage augment(const GrayImage& img, const AugmentParams& p)
{
    p.validate();
    Rng rng(p.seed);
    const int w = img.width(), h = img.height();
    GrayImage out = img;

    if (p.rotation != 0) {
        out = warp_perspective(out, rotation_homography(p.rotation, (w - 1) / 2.0, (h - 1) / 2.0), w, h, border_mean(out));
    }
    if (p.perspective_jitter > 0) {
        const std::array<std::array<double, 2>, 4> from = {{{0, 0}, {double(w), 0}, {double(w), double(h)}, {0, double(h)}}};
        auto to = from;
        for (auto& pt : to) {
            pt[0] += rng.uniform(-1, 1) * p.perspective_jitter * w;
            pt[1] += rng.uniform(-1, 1) * p.perspective_jitter * h;
        }
        out = warp_perspective(out, homography_from_points(from, to), w, h, border_mean(out));
    }
    if (p.blur_sigma > 0) out = gaussian_blur(out, p.blur_sigma);
    if (p.exposure_gain != 1) {
        for (auto& v : out.pixels()) v = to_pixel(p.exposure_gain * v);
    }
    if (p.shadow_strength > 0) {
        const double theta = rng.uniform(0, 2 * std::numbers::pi);
        const double dx = std::cos(theta), dy = std::sin(theta);
        // Project pixel centers on the direction; 0 at the first corner, 1 at the last.
        const double lo = std::min(0.0, dx * w) + std::min(0.0, dy * h);
        const double hi = std::max(0.0, dx * w) + std::max(0.0, dy * h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double t = ((x + 0.5) * dx + (y + 0.5) * dy - lo) / (hi - lo);
                out(x, y) = to_pixel(out(x, y) * (1 - p.shadow_strength * t));
            }
        }
    }
    if (p.noise_prob > 0) {
        for (auto& v : out.pixels()) {
            if (rng.chance(p.noise_prob)) v = rng.chance(0.5) ? 255 : 0;
        }
    }
    return out;
}

void AugmentRanges::validate() const
{
    ANPR_CHECK(max_rotation >= 0, "rotation range must be non-negative");
    ANPR_CHECK(max_jitter >= 0 && max_jitter <= 0.3, "jitter range must lie in [0, 0.3]");
    ANPR_CHECK(max_blur >= 0, "blur range must be non-negative");
    ANPR_CHECK(min_gain > 0 && min_gain <= max_gain, "gain range must be positive and ordered");
    ANPR_CHECK(max_shadow >= 0 && max_shadow <= 1, "shadow range must lie in [0, 1]");
    ANPR_CHECK(max_noise >= 0 && max_noise <= 1, "noise range must lie in [0, 1]");
}

AugmentParams draw_params(const AugmentRanges& r, std::uint64_t seed, std::uint64_t index)
{
    r.validate();
    const std::uint64_t s = mix_seed(seed, index);
    Rng rng(s);
    AugmentParams p;
    p.rotation = rng.uniform(-r.max_rotation, r.max_rotation);
    p.perspective_jitter = rng.uniform(0, r.max_jitter);
    p.blur_sigma = rng.uniform(0, r.max_blur);
    p.exposure_gain = rng.uniform(r.min_gain, r.max_gain);
    p.shadow_strength = rng.uniform(0, r.max_shadow);
    p.noise_prob = rng.uniform(0, r.max_noise);
    p.seed = rng.next();
    return p;
}

UnitImage glyph_to_sample(const GrayImage& img, int side)
{
    BinaryImage ink;
    try {
        ink = otsu_threshold(img).image;
    } catch (const Error&) {
        return UnitImage(side, side);   // flat raster: nothing to segment
    }
    const auto regions = find_regions(ink, ContourMode::external);
    if (regions.components.empty()) return UnitImage(side, side);
    const auto best = std::max_element(regions.components.begin(), regions.components.end(),
                                       [](const Component& a, const Component& b) { return a.area < b.area; });
    const BinaryImage mask = extract_component(regions, *best);
    return crop_and_normalize(mask, {0, 0, mask.width(), mask.height()}, side);
}

std::vector<LabeledSample> generate_dataset(const GlyphSet& glyphs, int per_class, const AugmentRanges& ranges,
                                            std::uint64_t seed)
{
    ANPR_CHECK(per_class >= 1, "per-class count must be at least 1");
    ranges.validate();
    const std::size_t n = std::size_t(per_class) * kNumClasses;
    std::vector<LabeledSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % kNumClasses);
        const GrayImage raw = augment(render_glyph(kAlphabet[label], glyphs, kRenderSide), draw_params(ranges, seed, i));
        out.push_back({glyph_to_sample(raw), label});
    }
    return out;
}

namespace {

GrayImage unit_to_gray(const UnitImage& u)
{
    GrayImage g(u.width(), u.height());
    for (std::size_t i = 0; i < u.size(); ++i) g.pixels()[i] = to_pixel(u.pixels()[i] * 255.0);
    return g;
}

}   // namespace

std::size_t write_dataset(const std::filesystem::path& dir, const GlyphSet& glyphs, int per_class,
                          const AugmentRanges& ranges, std::uint64_t seed)
{
    namespace fs = std::filesystem;
    const auto samples = generate_dataset(glyphs, per_class, ranges, seed);
    fs::create_directories(dir);
    std::string manifest = "path,label,seed,rotation,jitter,blur,gain,shadow,noise\n";
    char buf[256];
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const char c = kAlphabet[samples[i].label];
        std::snprintf(buf, sizeof buf, "%c/%c_%05zu.pgm", c, c, i / kNumClasses);
        const std::string rel = buf;
        fs::create_directories(dir / std::string(1, c));
        write_pgm(dir / rel, unit_to_gray(samples[i].image));
        const AugmentParams p = draw_params(ranges, seed, i);
        std::snprintf(buf, sizeof buf, "%s,%c,%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", rel.c_str(), c,
                      static_cast<unsigned long long>(p.seed), p.rotation, p.perspective_jitter, p.blur_sigma,
                      p.exposure_gain, p.shadow_strength, p.noise_prob);
        manifest += buf;
    }
    write_file(dir / "manifest.csv", manifest);
    return samples.size();
}

std::vector<LabeledSample> read_dataset(const std::filesystem::path& dir)
{
    const std::string text = read_file(dir / "manifest.csv");
    std::istringstream in(text);
    std::string line;
    ANPR_CHECK(std::getline(in, line) && line.rfind("path,label", 0) == 0,
               "manifest.csv lacks the path,label header");
    std::vector<LabeledSample> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        ANPR_CHECK(c1 != std::string::npos && c2 == c1 + 2,
                   "manifest.csv line " + std::to_string(lineno) + ": expected path,label,...");
        const int label = class_index(line[c1 + 1]);
        ANPR_CHECK(label >= 0, "manifest.csv line " + std::to_string(lineno) + ": bad label");
        const GrayImage g = read_pgm(dir / line.substr(0, c1));
        UnitImage u(g.width(), g.height());
        for (std::size_t i = 0; i < g.size(); ++i) u.pixels()[i] = g.pixels()[i] / 255.0;
        out.push_back({std::move(u), label});
    }
    ANPR_CHECK(!out.empty(), "dataset is empty: " + dir.string());
    return out;
}

ComposedPlate compose_plate(std::string_view text, const GlyphSet& glyphs, PlateLayout layout,
                            const PlateStyle& st)
{
    ANPR_CHECK(!text.empty() && text.size() <= 12, "plate text must have 1 to 12 characters");
    for (char c : text) glyph_index(c);
    ANPR_CHECK(st.glyph_height >= 8 && st.spacing >= 0 && st.margin_x >= 0 && st.margin_y >= 0 &&
                   st.line_gap >= 0,
               "invalid plate style");

    const int gh = st.glyph_height;
    const int gw = static_cast<int>(std::lround(double(gh) * glyphs.width() / glyphs.height()));
    std::vector<std::string_view> lines;
    if (layout == PlateLayout::two_line && text.size() >= 2) {
        lines = {text.substr(0, text.size() / 2), text.substr(text.size() / 2)};
    } else {
        lines = {text};
    }
    auto line_width = [&](std::string_view s) { return int(s.size()) * gw + (int(s.size()) - 1) * st.spacing; };
    int content_w = 0;
    for (auto s : lines) content_w = std::max(content_w, line_width(s));
    const int nl = static_cast<int>(lines.size());
    const int height = 2 * st.margin_y + nl * gh + (nl - 1) * st.line_gap;
    const double aspect = nl == 1 ? st.min_aspect : st.min_aspect / 2;
    const int width = std::max(content_w + 2 * st.margin_x, static_cast<int>(std::ceil(aspect * height)));

    ComposedPlate out{GrayImage(width, height, st.field), {}};
    if (st.border) {
        constexpr int inset = 4, t = 2;
        for (int y = inset; y < height - inset; ++y) {
            for (int x = inset; x < width - inset; ++x) {
                const bool edge = x < inset + t || x >= width - inset - t || y < inset + t || y >= height - inset - t;
                if (edge) out.image(x, y) = st.ink;
            }
        }
    }
    for (int l = 0; l < nl; ++l) {
        const int y0 = st.margin_y + l * (gh + st.line_gap);
        int x0 = (width - line_width(lines[l])) / 2;
        for (char c : lines[l]) {
            stamp_glyph(out.image, glyphs.at(c), x0, y0, gw, gh, st.field, st.ink);
            out.boxes.push_back(ink_box(out.image, x0, y0, gw, gh, st.field));
            x0 += gw + st.spacing;
        }
    }
    return out;
}

}   // anpr
