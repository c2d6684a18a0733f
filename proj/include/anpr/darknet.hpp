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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "anpr/image.hpp"

namespace anpr::darknet {

enum class Activation { linear, leaky };

struct ConvSpec
{
    int filters = 1;
    int size = 1;
    int stride = 1;
    bool pad = false;   ///< when set, padding = size / 2
    int padding = 0;    ///< explicit padding, used when `pad` is clear
    bool batch_normalize = false;
    Activation activation = Activation::linear;

    int effective_padding() const noexcept { return pad ? size / 2 : padding; }
    friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct ShortcutSpec
{
    int from = -1;   ///< negative = relative to this layer, otherwise absolute
    Activation activation = Activation::linear;
    friend bool operator==(const ShortcutSpec&, const ShortcutSpec&) = default;
};

struct RouteSpec
{
    std::vector<int> layers;   ///< negative = relative, otherwise absolute
    friend bool operator==(const RouteSpec&, const RouteSpec&) = default;
};

struct UpsampleSpec
{
    int stride = 2;
    friend bool operator==(const UpsampleSpec&, const UpsampleSpec&) = default;
};

struct Anchor
{
    float w = 0, h = 0;   ///< network-input pixels
    friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct YoloSpec
{
    std::vector<int> mask;
    std::vector<Anchor> anchors;
    int classes = 1;
    friend bool operator==(const YoloSpec&, const YoloSpec&) = default;
};

using LayerSpec = std::variant<ConvSpec, ShortcutSpec, RouteSpec, UpsampleSpec, YoloSpec>;

struct NetworkSpec
{
    int channels = 0, height = 0, width = 0;
    std::vector<LayerSpec> layers;
    /// Unknown keys skipped while parsing ("section line N: key").
    std::vector<std::string> warnings;

    friend bool operator==(const NetworkSpec& a, const NetworkSpec& b)
    {
        return a.channels == b.channels && a.height == b.height && a.width == b.width &&
               a.layers == b.layers;
    }
};

/// Resolves a route/shortcut reference made from layer `index`.
inline int resolve_index(int ref, int index) noexcept
{
    return ref < 0 ? index + ref : ref;
}

struct Shape
{
    int c = 0, h = 0, w = 0;
    std::size_t count() const noexcept { return static_cast<std::size_t>(c) * h * w; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Output shape of every layer; throws on any dimension mismatch.
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

NetworkSpec parse_cfg(std::string_view text);
NetworkSpec read_cfg(const std::filesystem::path& path);

/// Canonical cfg text; parse_cfg(render_cfg(s)) == s.
std::string render_cfg(const NetworkSpec& spec);

/// Channel-major, row-major activations.
struct Tensor
{
    int c = 0, h = 0, w = 0;
    std::vector<float> values;

    Tensor() = default;
    Tensor(int c_, int h_, int w_, float fill = 0.f)
        : c(c_), h(h_), w(w_), values(static_cast<std::size_t>(c_) * h_ * w_, fill)
    {}

    float& at(int ch, int y, int x) noexcept
    {
        return values[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    float at(int ch, int y, int x) const noexcept
    {
        return values[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    Shape shape() const noexcept { return {c, h, w}; }
};

/// Convolution parameters with batch norm folded in:
/// out = scale[f] * (kernels[f] . window) + shift[f].
struct ConvWeights
{
    std::vector<float> kernels;   ///< filters x (channels * size * size)
    std::vector<float> scale;
    std::vector<float> shift;
};

struct WeightsHeader
{
    std::int32_t major = 0, minor = 2, revision = 0;
    std::uint64_t seen = 0;
};

/// Loaded, immutable network. Safe to share between concurrent forward calls.
class Network
{
public:
    Network(NetworkSpec spec, WeightsHeader header, std::vector<ConvWeights> conv);

    const NetworkSpec& spec() const noexcept { return spec_; }
    const std::vector<Shape>& shapes() const noexcept { return shapes_; }
    const WeightsHeader& header() const noexcept { return header_; }
    /// Weights per layer index; empty for non-convolutional layers.
    const std::vector<ConvWeights>& conv_weights() const noexcept { return conv_; }

private:
    NetworkSpec spec_;
    std::vector<Shape> shapes_;
    WeightsHeader header_;
    std::vector<ConvWeights> conv_;
};

inline constexpr float kBatchNormEpsilon = 1e-6f;
inline constexpr float kLeakySlope = 0.1f;

/// Number of bytes a .weights stream must have for `spec` under `header`.
std::size_t expected_weights_size(const NetworkSpec& spec, const WeightsHeader& header);

Network load_weights(const NetworkSpec& spec, std::string_view bytes);
Network load_network(const std::filesystem::path& cfg, const std::filesystem::path& weights);

/// Raw outputs of each yolo layer, in layer order.
std::vector<Tensor> forward(const Network& net, const Tensor& input);

struct Box
{
    float cx = 0, cy = 0, w = 0, h = 0;
    friend bool operator==(const Box&, const Box&) = default;
};

struct Detection
{
    Box box;
    float score = 0;
    int class_id = 0;
    friend bool operator==(const Detection&, const Detection&) = default;
};

inline float logistic(float x) noexcept
{
    return 1.f / (1.f + std::exp(-x));
}

/// Boxes normalized to the network input; score = objectness * class probability.
std::vector<Detection> decode_detections(const Tensor& yolo_out, const YoloSpec& layer, int net_w,
                                         int net_h, float conf_thresh = 0.5f);

float iou(const Box& a, const Box& b) noexcept;

/// Greedy suppression: highest score first (ties: smaller cx, then cy, then
/// input order); drops same-class boxes with IoU strictly above the threshold.
std::vector<Detection> nms(const std::vector<Detection>& dets, float iou_thresh = 0.45f);

/// Aspect-preserving fit into the network input, centered, padded with 0.5.
struct Letterbox
{
    int src_w = 0, src_h = 0;
    int net_w = 0, net_h = 0;
    int new_w = 0, new_h = 0;
    int off_x = 0, off_y = 0;

    static Letterbox fit(int src_w, int src_h, int net_w, int net_h);

    /// Network-normalized box to source-normalized box (unclamped).
    Box to_source(const Box& b) const noexcept;
    /// Source-normalized box to network-normalized box.
    Box to_network(const Box& b) const noexcept;
};

struct LetterboxResult
{
    Tensor tensor;
    Letterbox transform;
};

LetterboxResult letterbox(const RgbImage& img, int net_w, int net_h);
LetterboxResult letterbox(const GrayImage& img, int net_w, int net_h);

/// Clamps a normalized box to the unit square.
Box clamp_unit(const Box& b) noexcept;

}   // anpr::darknet
