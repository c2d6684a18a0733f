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

#include "anpr/contours.hpp"

#include <algorithm>
#include <numeric>

namespace anpr {

namespace {

// Per-label statistics over `mask` (the pixels the label map covers).
std::vector<Component> measure(const LabelMap& lm, const BinaryImage& mask, bool hole)
{
    std::vector<Component> comps(lm.count);
    std::vector<int> x0(lm.count, INT32_MAX), y0(lm.count, INT32_MAX), x1(lm.count, -1),
        y1(lm.count, -1);
    const int w = lm.width, h = lm.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int l = lm(x, y);
            if (!l) continue;
            auto& c = comps[l - 1];
            ++c.area;
            x0[l - 1] = std::min(x0[l - 1], x);
            y0[l - 1] = std::min(y0[l - 1], y);
            x1[l - 1] = std::max(x1[l - 1], x);
            y1[l - 1] = std::max(y1[l - 1], y);
            const bool boundary = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !mask(x - 1, y) ||
                                  !mask(x + 1, y) || !mask(x, y - 1) || !mask(x, y + 1);
            c.perimeter += boundary;
        }
    }
    for (int i = 0; i < lm.count; ++i) {
        comps[i].label = i + 1;
        comps[i].hole = hole;
        comps[i].bbox = {x0[i], y0[i], x1[i] - x0[i] + 1, y1[i] - y0[i] + 1};
    }
    return comps;
}

}   // namespace

std::vector<Component> label_components(const BinaryImage& img, int connectivity)
{
    return measure(label_pixels(img, connectivity), img, false);
}

Regions find_regions(const BinaryImage& img, ContourMode mode, int connectivity)
{
    Regions r;
    r.foreground = label_pixels(img, connectivity);
    r.components = measure(r.foreground, img, false);
    if (mode != ContourMode::all) return r;

    BinaryImage background(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) background.pixels()[i] = !img.pixels()[i];
    const LabelMap bg = label_pixels(background, connectivity == 8 ? 4 : 8);

    // Drop regions reaching the border; renumber the enclosed ones.
    std::vector<char> outer(bg.count + 1, 0);
    const int w = img.width(), h = img.height();
    for (int x = 0; x < w; ++x) outer[bg(x, 0)] = outer[bg(x, h - 1)] = 1;
    for (int y = 0; y < h; ++y) outer[bg(0, y)] = outer[bg(w - 1, y)] = 1;
    std::vector<int> remap(bg.count + 1, 0);
    r.holes = {w, h, 0, std::vector<int>(img.size(), 0)};
    for (int l = 1; l <= bg.count; ++l) {
        if (!outer[l]) remap[l] = ++r.holes.count;
    }
    BinaryImage hole_mask(w, h);
    for (std::size_t i = 0; i < img.size(); ++i) {
        r.holes.labels[i] = remap[bg.labels[i]];
        hole_mask.pixels()[i] = r.holes.labels[i] != 0;
    }
    for (auto c : measure(r.holes, hole_mask, true)) r.components.push_back(c);
    return r;
}

BinaryImage extract_component(const Regions& regions, const Component& c)
{
    const LabelMap& lm = c.hole ? regions.holes : regions.foreground;
    BinaryImage out(c.bbox.w, c.bbox.h);
    for (int y = 0; y < c.bbox.h; ++y) {
        for (int x = 0; x < c.bbox.w; ++x) out(x, y) = lm(c.bbox.x + x, c.bbox.y + y) == c.label;
    }
    return out;
}

std::vector<Component> filter_candidates(const std::vector<Component>& comps, int plate_w,
                                         int plate_h, const GeometryBounds& bounds)
{
    ANPR_CHECK(plate_w >= 1 && plate_h >= 1, "plate dimensions must be positive");
    const double plate_area = double(plate_w) * plate_h;
    const double plate_perimeter = 2.0 * (plate_w + plate_h);
    std::vector<Component> out;
    for (const auto& c : comps) {
        const double w = c.bbox.w, h = c.bbox.h;
        if (bounds.area.accepts(c.area / plate_area) &&
            bounds.perimeter.accepts(c.perimeter / plate_perimeter) &&
            bounds.aspect.accepts(w / h) && bounds.width.accepts(w / plate_w) &&
            bounds.height.accepts(h / plate_h)) {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<CharCandidate> order_characters(const std::vector<Component>& cands)
{
    const int n = static_cast<int>(cands.size());
    if (n == 0) return {};

    std::vector<int> heights(n);
    for (int i = 0; i < n; ++i) heights[i] = cands[i].bbox.h;
    std::sort(heights.begin(), heights.end());
    const double median =
        n % 2 ? heights[n / 2] : 0.5 * (heights[n / 2 - 1] + heights[n / 2]);
    const double limit = 0.5 * median;

    // Single linkage: sort by center and cut where the gap exceeds the limit.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return cands[a].bbox.center_y() < cands[b].bbox.center_y();
    });
    std::vector<std::vector<int>> rows{{idx[0]}};
    for (int k = 1; k < n; ++k) {
        const double gap = cands[idx[k]].bbox.center_y() - cands[idx[k - 1]].bbox.center_y();
        if (gap > limit) rows.emplace_back();
        rows.back().push_back(idx[k]);
    }
    // Rows already ascend by mean center, since clusters of sorted values are disjoint ranges.

    std::vector<CharCandidate> out;
    out.reserve(n);
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        auto& row = rows[r];
        std::sort(row.begin(), row.end(), [&](int a, int b) {
            const auto &ba = cands[a].bbox, &bb = cands[b].bbox;
            if (ba.x != bb.x) return ba.x < bb.x;
            if (ba.y != bb.y) return ba.y < bb.y;
            if (cands[a].area != cands[b].area) return cands[a].area > cands[b].area;
            return a < b;
        });
        for (int i : row) {
            out.push_back({cands[i].bbox, r, static_cast<int>(out.size()), i});
        }
    }
    return out;
}

UnitImage crop_and_normalize(const BinaryImage& img, const BoundingBox& box, int side)
{
    ANPR_CHECK(side >= 8, "normalization side must be at least 8");
    ANPR_CHECK(box.w >= 1 && box.h >= 1 && box.x >= 0 && box.y >= 0 &&
                   box.right() <= img.width() && box.bottom() <= img.height(),
               "character box lies outside the image");

    GrayImage crop(box.w, box.h);
    for (int y = 0; y < box.h; ++y) {
        for (int x = 0; x < box.w; ++x) crop(x, y) = img(box.x + x, box.y + y) ? 255 : 0;
    }
    const int longer = std::max(box.w, box.h);
    const int new_w = std::max(1, static_cast<int>(std::lround(double(box.w) * side / longer)));
    const int new_h = std::max(1, static_cast<int>(std::lround(double(box.h) * side / longer)));
    const GrayImage scaled = resize_bilinear(crop, new_w, new_h);

    UnitImage out(side, side, 0.0);
    const int ox = (side - new_w) / 2, oy = (side - new_h) / 2;
    for (int y = 0; y < new_h; ++y) {
        for (int x = 0; x < new_w; ++x) out(ox + x, oy + y) = scaled(x, y) / 255.0;
    }
    return out;
}

std::string format_candidates_csv(const std::vector<CharCandidate>& cands)
{
    std::string out = "x,y,w,h,row,order\n";
    for (const auto& c : cands) {
        out += std::to_string(c.bbox.x) + "," + std::to_string(c.bbox.y) + "," +
               std::to_string(c.bbox.w) + "," + std::to_string(c.bbox.h) + "," +
               std::to_string(c.row) + "," + std::to_string(c.order) + "\n";
    }
    return out;
}

}   // anpr
