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


#include "anpr/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <variant>

#include "anpr/imageio.hpp"
#include "anpr/imgproc.hpp"

namespace anpr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool inside(const BoundingBox& a, const BoundingBox& b)
{
    return a.x >= b.x && a.y >= b.y && a.right() <= b.right() && a.bottom() <= b.bottom() && !(a == b);
}

}   // namespace

BinaryImage preprocess_plate(const GrayImage& crop, const PipelineConfig& cfg)
{
    cfg.validate();
    ANPR_CHECK(crop.width() >= kMinCropWidth && crop.height() >= kMinCropHeight,
               "plate crop " + std::to_string(crop.width()) + "x" + std::to_string(crop.height()) +
                   " is smaller than the 20x10 minimum");
    const GrayImage smooth =
        bilateral_filter(crop, cfg.bilateral_diameter, cfg.bilateral_sigma_color, cfg.bilateral_sigma_space);
    BinaryImage bin;
    switch (cfg.binarization) {
    case Binarization::otsu:
        try {
            bin = otsu_threshold(smooth, true).image;
        } catch (const Error&) {
            bin = BinaryImage(crop.width(), crop.height());   // flat crop: no ink
        }
        break;
    case Binarization::adaptive:
        bin = adaptive_threshold(smooth, cfg.adaptive_block, cfg.adaptive_c);
        break;
    case Binarization::canny:
        bin = canny(smooth, cfg.canny_low, cfg.canny_high);
        break;
    }
    bin = remove_lines(bin, cfg.h_line_kernel, cfg.v_line_kernel, cfg.h_line_iterations, cfg.v_line_iterations);
    return remove_small_blobs(bin, cfg.blob_min_size);
}

BinaryImage preprocess_plate(const RgbImage& crop, const PipelineConfig& cfg)
{
    return preprocess_plate(to_grayscale(crop), cfg);
}

double PlateResult::mean_prob() const noexcept
{
    if (probs.empty()) return 0;
    double s = 0;
    for (const auto& p : probs) s += *std::max_element(p.begin(), p.end());
    return s / double(probs.size());
}

PlateResult recognize_plate(const GrayImage& crop, const PipelineConfig& cfg, const CharModel& model)
{
    ANPR_CHECK(model.arch().input_side == cfg.char_side,
               "model input side " + std::to_string(model.arch().input_side) + " differs from char_side " +
                   std::to_string(cfg.char_side));
    PlateResult r;
    r.region = {0, 0, crop.width(), crop.height()};

    auto t = Clock::now();
    const BinaryImage bin = preprocess_plate(crop, cfg);
    r.timings.preprocess_ms = ms_since(t);

    t = Clock::now();
    const Regions regions = find_regions(bin, cfg.contour_mode);
    auto cands = filter_candidates(regions.components, crop.width(), crop.height(), cfg.bounds);
    // Drop candidates nested inside another one (holes, specks inside a loop).
    std::vector<Component> kept;
    for (const auto& c : cands) {
        const bool nested = std::any_of(cands.begin(), cands.end(),
                                        [&](const Component& o) { return inside(c.bbox, o.bbox); });
        if (!nested) kept.push_back(c);
    }
    const auto ordered = order_characters(kept);
    r.timings.segment_ms = ms_since(t);

    t = Clock::now();
    for (const auto& oc : ordered) {
        const BinaryImage mask = extract_component(regions, kept[oc.source]);
        const UnitImage x = crop_and_normalize(mask, {0, 0, mask.width(), mask.height()}, cfg.char_side);
        const Prediction p = model_forward(model, x);
        r.text += p.label;
        r.boxes.push_back(oc.bbox);
        r.probs.push_back(p.probs);
    }
    r.timings.classify_ms = ms_since(t);
    r.unread = r.text.empty();
    return r;
}

PlateResult recognize_plate(const RgbImage& crop, const PipelineConfig& cfg, const CharModel& model)
{
    return recognize_plate(to_grayscale(crop), cfg, model);
}

BoundingBox box_to_region(const darknet::Box& b, int img_w, int img_h)
{
    const int x0 = std::clamp(static_cast<int>(std::floor((b.cx - b.w / 2) * img_w)), 0, img_w);
    const int y0 = std::clamp(static_cast<int>(std::floor((b.cy - b.h / 2) * img_h)), 0, img_h);
    const int x1 = std::clamp(static_cast<int>(std::ceil((b.cx + b.w / 2) * img_w)), 0, img_w);
    const int y1 = std::clamp(static_cast<int>(std::ceil((b.cy + b.h / 2) * img_h)), 0, img_h);
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

GrayImage crop_region(const GrayImage& img, const BoundingBox& r)
{
    ANPR_CHECK(r.w >= 1 && r.h >= 1 && r.x >= 0 && r.y >= 0 && r.right() <= img.width() &&
                   r.bottom() <= img.height(),
               "crop region lies outside the image");
    GrayImage out(r.w, r.h);
    for (int y = 0; y < r.h; ++y) {
        for (int x = 0; x < r.w; ++x) out(x, y) = img(r.x + x, r.y + y);
    }
    return out;
}

std::vector<PlateResult> process_image(const RgbImage& img, const darknet::Network* detector,
                                       const PipelineConfig& cfg, const CharModel& model, std::string_view source)
{
    const GrayImage gray = to_grayscale(img);
    if (!detector) {
        PlateResult r = recognize_plate(gray, cfg, model);
        r.source = source;
        return {std::move(r)};
    }

    const auto t = Clock::now();
    const auto& spec = detector->spec();
    const auto lb = darknet::letterbox(img, spec.width, spec.height);
    const auto outputs = darknet::forward(*detector, lb.tensor);
    std::vector<darknet::Detection> dets;
    std::size_t k = 0;
    for (const auto& layer : spec.layers) {
        if (const auto* y = std::get_if<darknet::YoloSpec>(&layer)) {
            auto d = darknet::decode_detections(outputs.at(k++), *y, spec.width, spec.height,
                                                static_cast<float>(cfg.conf_thresh));
            dets.insert(dets.end(), d.begin(), d.end());
        }
    }
    dets = darknet::nms(dets, static_cast<float>(cfg.iou_thresh));
    const double detect_ms = ms_since(t);

    std::vector<PlateResult> out;
    for (const auto& d : dets) {
        const auto box = darknet::clamp_unit(lb.transform.to_source(d.box));
        const BoundingBox region = box_to_region(box, img.width(), img.height());
        if (region.w < kMinCropWidth || region.h < kMinCropHeight) continue;
        PlateResult r = recognize_plate(crop_region(gray, region), cfg, model);
        r.region = region;
        r.score = d.score;
        r.source = source;
        r.timings.detect_ms = detect_ms;
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::mutex g_results_mutex;

std::string csv_safe(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        if (c == ',' || c == '\n' || c == '\r') c = '_';
    }
    return out;
}

}   // namespace

std::filesystem::path persist_result(const PlateResult& r, const GrayImage& crop, const std::filesystem::path& out_dir)
{
    namespace fs = std::filesystem;
    ANPR_CHECK(fs::is_directory(out_dir), "output directory does not exist: " + out_dir.string());
    for (char c : r.text) {
        ANPR_CHECK(class_index(c) >= 0, "plate text may only contain 0-9 and A-Z");
    }

    fs::path path;
    std::FILE* fp = nullptr;
    for (int n = 1; !fp; ++n) {
        const std::string stem = r.text.empty() ? "UNREAD_" + std::to_string(n)
                                 : n == 1       ? r.text
                                                : r.text + "_" + std::to_string(n);
        path = out_dir / (stem + ".png");
        fp = std::fopen(path.c_str(), "wbx");
        if (!fp && errno != EEXIST) {
            throw Error("cannot create " + path.string() + ": " + std::strerror(errno));
        }
    }
    try {
        write_png(fp, crop);
    } catch (...) {
        std::fclose(fp);
        throw;
    }
    ANPR_CHECK(std::fclose(fp) == 0, "cannot write " + path.string());

    char row[128];
    std::snprintf(row, sizeof row, ",%.4f,%.3f\n", r.mean_prob(), r.timings.total_ms());
    const std::string line = csv_safe(r.source) + "," + path.filename().string() + "," + r.text + row;

    const std::lock_guard lock(g_results_mutex);
    const fs::path csv = out_dir / "results.csv";
    std::FILE* out = std::fopen(csv.c_str(), "ab");
    ANPR_CHECK(out, "cannot open " + csv.string() + ": " + std::strerror(errno));
    std::fseek(out, 0, SEEK_END);
    bool ok = true;
    if (std::ftell(out) == 0) {
        ok = std::fprintf(out, "%.*s\n", int(kResultsHeader.size()), kResultsHeader.data()) > 0;
    }
    ok = ok && std::fputs(line.c_str(), out) >= 0;
    ok = (std::fclose(out) == 0) && ok;
    ANPR_CHECK(ok, "cannot append to " + csv.string());
    return path;
}

double character_accuracy(std::string_view predicted, std::string_view truth)
{
    ANPR_CHECK(!truth.empty(), "truth label must not be empty");
    std::vector<int> prev(truth.size() + 1, 0), cur(truth.size() + 1, 0);
    for (char p : predicted) {
        for (std::size_t j = 1; j <= truth.size(); ++j) {
            cur[j] = p == truth[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return std::min(1.0, double(prev.back()) / double(truth.size()));
}

AccuracyReport evaluate_batch(const std::vector<EvalPair>& pairs)
{
    AccuracyReport r;
    for (const auto& p : pairs) {
        r.rows.push_back({p.source, p.predicted, p.truth, character_accuracy(p.predicted, p.truth), p.seconds});
        r.mean_accuracy += r.rows.back().accuracy;
        r.mean_seconds += p.seconds;
    }
    if (!r.rows.empty()) {
        r.mean_accuracy /= double(r.rows.size());
        r.mean_seconds /= double(r.rows.size());
    }
    return r;
}

std::string format_report(const AccuracyReport& r)
{
    const std::vector<std::string> head = {"#", "Source", "Predicted label", "True label", "Character accuracy",
                                           "Processing time (s)"};
    std::vector<std::vector<std::string>> cells;
    char buf[64];
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        std::vector<std::string> c = {std::to_string(i + 1), row.source, row.predicted, row.truth};
        std::snprintf(buf, sizeof buf, "%.1f%%", row.accuracy * 100);
        c.push_back(buf);
        std::snprintf(buf, sizeof buf, "%.3f", row.seconds);
        c.push_back(buf);
        cells.push_back(std::move(c));
    }
    std::vector<std::size_t> width(head.size());
    for (std::size_t k = 0; k < head.size(); ++k) {
        width[k] = head[k].size();
        for (const auto& c : cells) width[k] = std::max(width[k], c[k].size());
    }
    auto emit = [&](const std::vector<std::string>& c) {
        std::string line;
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (k) line += "  ";
            line += c[k];
            if (k + 1 < c.size()) line.append(width[k] - c[k].size(), ' ');
        }
        return line + "\n";
    };
    std::string out = emit(head);
    for (const auto& c : cells) out += emit(c);
    std::snprintf(buf, sizeof buf, "%.1f%%", r.mean_accuracy * 100);
    out += "Mean character accuracy: " + std::string(buf) + "\n";
    std::snprintf(buf, sizeof buf, "%.4f", r.mean_seconds);
    out += "Mean processing time (s): " + std::string(buf) + "\n";
    return out;
}

std::string format_report_csv(const AccuracyReport& r)
{
    std::string out = "source,predicted,truth,character_accuracy,seconds\n";
    char buf[64];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", row.accuracy, row.seconds);
        out += csv_safe(row.source) + "," + row.predicted + "," + row.truth + buf;
    }
    return out;
}

std::array<int, kAmbiguityGroups.size()> count_ambiguities(const AccuracyReport& r)
{
    std::array<int, kAmbiguityGroups.size()> counts{};
    for (const auto& row : r.rows) {
        if (row.predicted.size() != row.truth.size()) continue;
        for (std::size_t i = 0; i < row.truth.size(); ++i) {
            const char p = row.predicted[i], t = row.truth[i];
            if (p == t) continue;
            for (std::size_t g = 0; g < kAmbiguityGroups.size(); ++g) {
                const auto& grp = kAmbiguityGroups[g];
                if (grp.find(p) != std::string_view::npos && grp.find(t) != std::string_view::npos) ++counts[g];
            }
        }
    }
    return counts;
}

}   // anpr
