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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "anpr/charnet.hpp"
#include "anpr/config.hpp"
#include "anpr/contours.hpp"
#include "anpr/darknet.hpp"
#include "anpr/image.hpp"

namespace anpr {

inline constexpr int kMinCropWidth = 20;
inline constexpr int kMinCropHeight = 10;

/// grayscale -> bilateral -> binarize (ink = foreground) -> remove_lines ->
/// remove_small_blobs. Throws if the crop is smaller than 20x10.
BinaryImage preprocess_plate(const GrayImage& crop, const PipelineConfig& cfg);
BinaryImage preprocess_plate(const RgbImage& crop, const PipelineConfig& cfg);

struct StageTimings
{
    double detect_ms = 0;
    double preprocess_ms = 0;
    double segment_ms = 0;
    double classify_ms = 0;

    double total_ms() const noexcept { return detect_ms + preprocess_ms + segment_ms + classify_ms; }
};

struct PlateResult
{
    std::string text;
    std::vector<BoundingBox> boxes;   ///< crop coordinates, reading order
    std::vector<std::array<double, kNumClasses>> probs;
    StageTimings timings;
    std::string source;
    /// Plate region in the source image (the whole image in bypass mode).
    BoundingBox region;
    float score = 1;   ///< detector score; 1 in bypass mode
    /// Set when no character survived segmentation.
    bool unread = false;

    /// Mean of the winning probability per character; 0 when unread.
    double mean_prob() const noexcept;
};

PlateResult recognize_plate(const GrayImage& crop, const PipelineConfig& cfg, const CharModel& model);
PlateResult recognize_plate(const RgbImage& crop, const PipelineConfig& cfg, const CharModel& model);

/// Null detector = bypass: the whole image is one plate. Otherwise plates are
/// recognized in descending detector score; boxes whose crop would be smaller
/// than the minimum are skipped.
std::vector<PlateResult> process_image(const RgbImage& img, const darknet::Network* detector,
                                       const PipelineConfig& cfg, const CharModel& model,
                                       std::string_view source = {});

/// Normalized source box to a pixel region, rounded outward and clipped.
BoundingBox box_to_region(const darknet::Box& b, int img_w, int img_h);

GrayImage crop_region(const GrayImage& img, const BoundingBox& r);

inline constexpr std::string_view kResultsHeader = "source,file,text,mean_prob,total_ms";

/// Saves the crop as <TEXT>.png (UNREAD_<n>.png when empty), adding _2, _3, ...
/// on collision without ever replacing a file, and appends a row to
/// out_dir/results.csv. Safe to call from several threads.
std::filesystem::path persist_result(const PlateResult& r, const GrayImage& crop,
                                     const std::filesystem::path& out_dir);

/// LCS(predicted, truth) / |truth|, at most 1. Throws on an empty truth.
double character_accuracy(std::string_view predicted, std::string_view truth);

struct EvalPair
{
    std::string source, predicted, truth;
    double seconds = 0;
};

struct AccuracyRow
{
    std::string source, predicted, truth;
    double accuracy = 0;
    double seconds = 0;
};

struct AccuracyReport
{
    std::vector<AccuracyRow> rows;
    double mean_accuracy = 0;
    double mean_seconds = 0;
};

AccuracyReport evaluate_batch(const std::vector<EvalPair>& pairs);

/// Aligned table: index, source, predicted, truth, accuracy (%), time (s),
/// followed by the means.
std::string format_report(const AccuracyReport& r);
/// source,predicted,truth,character_accuracy,seconds
std::string format_report_csv(const AccuracyReport& r);

/// Visually confusable groups whose substitutions are tallied separately.
inline constexpr std::array<std::string_view, 2> kAmbiguityGroups = {"08BD", "GC6"};

/// Substitutions inside each ambiguity group, counted at aligned positions of
/// equal-length predicted/truth pairs.
std::array<int, kAmbiguityGroups.size()> count_ambiguities(const AccuracyReport& r);

}   // anpr
