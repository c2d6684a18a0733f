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

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "anpr/imgproc.hpp"

namespace anpr {

/// Closed interval bound; a disabled bound accepts everything ("none").
struct Bound
{
    double min = 0;
    double max = 0;
    bool enabled = false;

    static Bound none() { return {}; }
    static Bound between(double lo, double hi) { return {lo, hi, true}; }

    bool accepts(double v) const noexcept { return !enabled || (v >= min && v <= max); }
    friend bool operator==(const Bound&, const Bound&) = default;
};

/// Character-candidate geometry. Area is a fraction of the plate area,
/// perimeter of the plate perimeter, width/height of the plate width/height;
/// aspect is the absolute w/h ratio.
struct GeometryBounds
{
    Bound area = Bound::between(0.005, 0.20);
    Bound perimeter = Bound::none();
    Bound aspect = Bound::between(0.10, 1.20);
    Bound width = Bound::between(0.02, 0.30);
    Bound height = Bound::between(0.35, 0.95);
    friend bool operator==(const GeometryBounds&, const GeometryBounds&) = default;
};

enum class Binarization { otsu, adaptive, canny };
enum class ContourMode { external, all };

/// Every tunable of the recognition pipeline.
struct PipelineConfig
{
    int bilateral_diameter = 9;
    double bilateral_sigma_color = 70;
    double bilateral_sigma_space = 70;
    double canny_low = 30;
    double canny_high = 130;
    Binarization binarization = Binarization::otsu;
    int adaptive_block = 11;
    int adaptive_c = 2;
    StructuringElement h_line_kernel{10, 1};
    int h_line_iterations = 8;
    StructuringElement v_line_kernel{1, 20};
    int v_line_iterations = 8;
    int blob_min_size = 50;
    ContourMode contour_mode = ContourMode::external;
    GeometryBounds bounds;
    int char_side = 32;
    double conf_thresh = 0.5;
    double iou_thresh = 0.45;

    /// Throws Error naming the first violated constraint.
    void validate() const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Flat "key = value" settings, the on-disk and command-line representation.
using Settings = std::map<std::string, std::string, std::less<>>;

/// Parses "key = value" lines; '#' starts a comment. Throws on malformed lines
/// and duplicate keys.
Settings parse_settings(std::string_view text);

/// Keys understood by apply_settings, in dump order.
const std::vector<std::string>& pipeline_keys();

/// Overlays `s` onto `cfg`; keys outside pipeline_keys() are ignored so the
/// same map can carry other tool settings.
PipelineConfig apply_settings(PipelineConfig cfg, const Settings& s);

/// Renders each pipeline key with its current value.
Settings to_settings(const PipelineConfig& cfg);

/// Human-readable description of a pipeline key, or empty.
std::string_view describe_key(std::string_view key);

std::string format_number(double v);

std::string_view to_string(Binarization b);
std::string_view to_string(ContourMode m);

}   // anpr
