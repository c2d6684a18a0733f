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

#include "anpr/config.hpp"

#include <charconv>
#include <cmath>

namespace anpr {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.push_back(trim(s.substr(start, p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

double parse_double(std::string_view key, std::string_view v)
{
    double d = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, d);
    ANPR_CHECK(ec == std::errc{} && ptr == end && std::isfinite(d),
               "setting '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
    return d;
}

int parse_int(std::string_view key, std::string_view v)
{
    int i = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, i);
    ANPR_CHECK(ec == std::errc{} && ptr == end,
               "setting '" + std::string(key) + "': expected an integer, got '" + std::string(v) + "'");
    return i;
}

std::vector<double> numbers(std::string_view key, std::string_view v, std::size_t count)
{
    const auto parts = split(v, ',');
    ANPR_CHECK(parts.size() == count, "setting '" + std::string(key) + "': expected " +
                                          std::to_string(count) + " comma-separated values");
    std::vector<double> out;
    for (auto p : parts) out.push_back(parse_double(key, p));
    return out;
}

std::vector<int> integers(std::string_view key, std::string_view v, std::size_t count)
{
    const auto parts = split(v, ',');
    ANPR_CHECK(parts.size() == count, "setting '" + std::string(key) + "': expected " +
                                          std::to_string(count) + " comma-separated integers");
    std::vector<int> out;
    for (auto p : parts) out.push_back(parse_int(key, p));
    return out;
}

Bound parse_bound(std::string_view key, std::string_view v)
{
    if (v == "none" || v == "None") return Bound::none();
    const auto n = numbers(key, v, 2);
    return Bound::between(n[0], n[1]);
}

std::string format_bound(const Bound& b)
{
    return b.enabled ? format_number(b.min) + "," + format_number(b.max) : "none";
}

struct KeyInfo
{
    const char* key;
    const char* description;
};

// Table order; names follow the tuning-parameter rows.
constexpr KeyInfo kKeys[] = {
    {"bilateral", "bilateral filter kernel: diameter, sigma_color, sigma_space"},
    {"canny", "canny edge minima and maxima gradient"},
    {"binarization", "otsu | adaptive | canny"},
    {"adaptive", "adaptive threshold block size and offset"},
    {"h_line_kernel", "horizontal line size tuple (width,height)"},
    {"h_line_iterations", "horizontal line morphology iterations"},
    {"v_line_kernel", "vertical line size tuple (width,height)"},
    {"v_line_iterations", "vertical line morphology iterations"},
    {"blob_min_size", "blob size: components smaller than this are removed"},
    {"contour_mode", "contour marking: external | all"},
    {"area", "min,max area of a character contour (fraction of plate area) or none"},
    {"perimeter", "min,max perimeter of a character contour (fraction of plate perimeter) or none"},
    {"aspect_ratio", "min,max aspect ratio w/h of a character contour or none"},
    {"width", "min,max width of a character contour (fraction of plate width) or none"},
    {"height", "min,max height of a character contour (fraction of plate height) or none"},
    {"char_side", "side of the normalized character raster"},
    {"conf_thresh", "detector confidence threshold"},
    {"iou_thresh", "non-maximum suppression IoU threshold"},
};

}   // namespace

std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string_view to_string(Binarization b)
{
    switch (b) {
    case Binarization::otsu: return "otsu";
    case Binarization::adaptive: return "adaptive";
    case Binarization::canny: return "canny";
    }
    return "otsu";
}

std::string_view to_string(ContourMode m)
{
    return m == ContourMode::all ? "all" : "external";
}

void PipelineConfig::validate() const
{
    ANPR_CHECK(bilateral_diameter >= 1 && bilateral_diameter % 2 == 1,
               "bilateral diameter must be odd and positive");
    ANPR_CHECK(bilateral_sigma_color > 0 && bilateral_sigma_space > 0,
               "bilateral sigmas must be positive");
    ANPR_CHECK(canny_low >= 0 && canny_low < canny_high, "canny requires 0 <= low < high");
    ANPR_CHECK(adaptive_block >= 3 && adaptive_block % 2 == 1,
               "adaptive block must be odd and at least 3");
    ANPR_CHECK(h_line_kernel.width >= 1 && h_line_kernel.height >= 1 && v_line_kernel.width >= 1 &&
                   v_line_kernel.height >= 1,
               "line kernels must be at least 1x1");
    ANPR_CHECK(h_line_iterations >= 0 && v_line_iterations >= 0,
               "line iterations must be non-negative");
    ANPR_CHECK(blob_min_size >= 0, "blob_min_size must be non-negative");
    for (const Bound* b : {&bounds.area, &bounds.perimeter, &bounds.aspect, &bounds.width,
                           &bounds.height}) {
        ANPR_CHECK(!b->enabled || b->min <= b->max, "geometric bound has min > max");
    }
    ANPR_CHECK(char_side >= 8, "char_side must be at least 8");
    ANPR_CHECK(conf_thresh >= 0 && conf_thresh <= 1, "conf_thresh must lie in [0,1]");
    ANPR_CHECK(iou_thresh >= 0 && iou_thresh <= 1, "iou_thresh must lie in [0,1]");
}

Settings parse_settings(std::string_view text)
{
    Settings s;
    int lineno = 0;
    for (auto line : split(text, '\n')) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        ANPR_CHECK(eq != std::string_view::npos,
                   "config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        ANPR_CHECK(!key.empty(), "config line " + std::to_string(lineno) + ": empty key");
        ANPR_CHECK(!s.contains(key),
                   "config line " + std::to_string(lineno) + ": duplicate key '" + std::string(key) + "'");
        s.emplace(std::string(key), std::string(value));
    }
    return s;
}

const std::vector<std::string>& pipeline_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& info : kKeys) k.emplace_back(info.key);
        return k;
    }();
    return keys;
}

std::string_view describe_key(std::string_view key)
{
    for (const auto& info : kKeys) {
        if (key == info.key) return info.description;
    }
    return {};
}

PipelineConfig apply_settings(PipelineConfig cfg, const Settings& s)
{
    for (const auto& [key, v] : s) {
        if (key == "bilateral") {
            const auto n = numbers(key, v, 3);
            cfg.bilateral_diameter = static_cast<int>(n[0]);
            ANPR_CHECK(cfg.bilateral_diameter == n[0], "bilateral diameter must be an integer");
            cfg.bilateral_sigma_color = n[1];
            cfg.bilateral_sigma_space = n[2];
        } else if (key == "canny") {
            const auto n = numbers(key, v, 2);
            cfg.canny_low = n[0];
            cfg.canny_high = n[1];
        } else if (key == "binarization") {
            if (v == "otsu") {
                cfg.binarization = Binarization::otsu;
            } else if (v == "adaptive") {
                cfg.binarization = Binarization::adaptive;
            } else if (v == "canny") {
                cfg.binarization = Binarization::canny;
            } else {
                throw Error("setting 'binarization': expected otsu, adaptive or canny");
            }
        } else if (key == "adaptive") {
            const auto n = integers(key, v, 2);
            cfg.adaptive_block = n[0];
            cfg.adaptive_c = n[1];
        } else if (key == "h_line_kernel" || key == "v_line_kernel") {
            const auto n = integers(key, v, 2);
            (key[0] == 'h' ? cfg.h_line_kernel : cfg.v_line_kernel) = StructuringElement(n[0], n[1]);
        } else if (key == "h_line_iterations") {
            cfg.h_line_iterations = parse_int(key, v);
        } else if (key == "v_line_iterations") {
            cfg.v_line_iterations = parse_int(key, v);
        } else if (key == "blob_min_size") {
            cfg.blob_min_size = parse_int(key, v);
        } else if (key == "contour_mode") {
            ANPR_CHECK(v == "external" || v == "all",
                       "setting 'contour_mode': expected external or all");
            cfg.contour_mode = v == "all" ? ContourMode::all : ContourMode::external;
        } else if (key == "area") {
            cfg.bounds.area = parse_bound(key, v);
        } else if (key == "perimeter") {
            cfg.bounds.perimeter = parse_bound(key, v);
        } else if (key == "aspect_ratio") {
            cfg.bounds.aspect = parse_bound(key, v);
        } else if (key == "width") {
            cfg.bounds.width = parse_bound(key, v);
        } else if (key == "height") {
            cfg.bounds.height = parse_bound(key, v);
        } else if (key == "char_side") {
            cfg.char_side = parse_int(key, v);
        } else if (key == "conf_thresh") {
            cfg.conf_thresh = parse_double(key, v);
        } else if (key == "iou_thresh") {
            cfg.iou_thresh = parse_double(key, v);
        }
    }
    cfg.validate();
    return cfg;
}

Settings to_settings(const PipelineConfig& cfg)
{
    auto pair = [](int a, int b) { return std::to_string(a) + "," + std::to_string(b); };
    Settings s;
    s["bilateral"] = std::to_string(cfg.bilateral_diameter) + "," +
                     format_number(cfg.bilateral_sigma_color) + "," +
                     format_number(cfg.bilateral_sigma_space);
    s["canny"] = format_number(cfg.canny_low) + "," + format_number(cfg.canny_high);
    s["binarization"] = std::string(to_string(cfg.binarization));
    s["adaptive"] = pair(cfg.adaptive_block, cfg.adaptive_c);
    s["h_line_kernel"] = pair(cfg.h_line_kernel.width, cfg.h_line_kernel.height);
    s["h_line_iterations"] = std::to_string(cfg.h_line_iterations);
    s["v_line_kernel"] = pair(cfg.v_line_kernel.width, cfg.v_line_kernel.height);
    s["v_line_iterations"] = std::to_string(cfg.v_line_iterations);
    s["blob_min_size"] = std::to_string(cfg.blob_min_size);
    s["contour_mode"] = std::string(to_string(cfg.contour_mode));
    s["area"] = format_bound(cfg.bounds.area);
    s["perimeter"] = format_bound(cfg.bounds.perimeter);
    s["aspect_ratio"] = format_bound(cfg.bounds.aspect);
    s["width"] = format_bound(cfg.bounds.width);
    s["height"] = format_bound(cfg.bounds.height);
    s["char_side"] = std::to_string(cfg.char_side);
    s["conf_thresh"] = format_number(cfg.conf_thresh);
    s["iou_thresh"] = format_number(cfg.iou_thresh);
    return s;
}

}   // anpr
