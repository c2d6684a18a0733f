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

#include <string>
#include <vector>

#include "anpr/config.hpp"
#include "anpr/image.hpp"
#include "anpr/imgproc.hpp"

namespace anpr {

struct BoundingBox
{
    int x = 0, y = 0, w = 1, h = 1;

    int right() const noexcept { return x + w; }
    int bottom() const noexcept { return y + h; }
    double center_x() const noexcept { return x + w / 2.0; }
    double center_y() const noexcept { return y + h / 2.0; }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Component
{
    int label = 0;
    int area = 0;
    /// Pixels of the component 4-adjacent to background or the image border.
    int perimeter = 0;
    BoundingBox bbox;
    /// Enclosed background region (reported only in ContourMode::all).
    bool hole = false;
};

/// Components in label order (raster order of first pixel).
std::vector<Component> label_components(const BinaryImage& img, int connectivity = 8);

/// Labeled regions plus the maps needed to cut individual masks out again.
struct Regions
{
    LabelMap foreground;
    LabelMap holes;
    std::vector<Component> components;
};

/// Foreground components; with ContourMode::all also background regions that
/// do not touch the image border, 4-connected (the dual of 8-connected ink).
Regions find_regions(const BinaryImage& img, ContourMode mode, int connectivity = 8);

/// The component's own pixels, cropped to its bounding box.
BinaryImage extract_component(const Regions& regions, const Component& c);

/// Keeps exactly the components satisfying every enabled bound; order preserved.
std::vector<Component> filter_candidates(const std::vector<Component>& comps, int plate_w,
                                         int plate_h, const GeometryBounds& bounds);

struct CharCandidate
{
    BoundingBox bbox;
    int row = 0;
    int order = 0;
    /// Index into the list given to order_characters.
    int source = 0;
};

/// Reading order: rows by single-linkage clustering of vertical centers
/// (|dy| <= 0.5 x median height), top to bottom; left to right within a row,
/// ties by y then larger area first.
std::vector<CharCandidate> order_characters(const std::vector<Component>& cands);

/// Scales the box contents so the longer side equals `side`, centers them on a
/// side x side background, and maps ink to 1.0.
UnitImage crop_and_normalize(const BinaryImage& img, const BoundingBox& box, int side = 32);

/// "x,y,w,h,row,order" rows with header.
std::string format_candidates_csv(const std::vector<CharCandidate>& cands);

}   // anpr
