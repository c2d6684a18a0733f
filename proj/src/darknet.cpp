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

#include "anpr/darknet.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <map>
#include <numeric>
#include <set>

#include "anpr/gemm.hpp"
#include "anpr/imageio.hpp"
#include "anpr/imgproc.hpp"

namespace anpr::darknet {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry
{
    std::string value;
    int line = 0;
};

struct Section
{
    std::string name;
    int line = 0;
    std::map<std::string, Entry, std::less<>> entries;
};

// Keys Darknet reads for training only; accepted silently.
const std::set<std::string, std::less<>> kTrainingKeys = {
    "batch", "subdivisions", "momentum", "decay", "angle", "saturation", "exposure", "hue",
    "learning_rate", "burn_in", "max_batches", "policy", "steps", "scales", "mosaic", "jitter",
    "ignore_thresh", "truth_thresh", "random", "num", "scale_x_y", "iou_thresh", "cls_normalizer",
    "iou_normalizer", "iou_loss", "nms_kind", "beta_nms", "max_delta", "label_smooth_eps",
    "counters_per_class", "power", "max_chart_loss", "letter_box", "flip", "blur", "gaussian_noise",
    "resize", "objectness_smooth", "new_coords", "track_history_size", "sim_thresh",
    "dets_for_track", "dets_for_show", "track_ciou_norm", "embedding_layer",
};

class SectionReader
{
public:
    SectionReader(const Section& s, std::vector<std::string>& warnings)
        : s_(s), warnings_(warnings)
    {}

    bool has(std::string_view key) const { return s_.entries.contains(key); }

    int integer(std::string_view key, int fallback)
    {
        used_.insert(std::string(key));
        auto it = s_.entries.find(key);
        if (it == s_.entries.end()) return fallback;
        return parse_int(key, it->second);
    }

    std::string text(std::string_view key, std::string fallback)
    {
        used_.insert(std::string(key));
        auto it = s_.entries.find(key);
        return it == s_.entries.end() ? fallback : it->second.value;
    }

    std::vector<int> int_list(std::string_view key)
    {
        used_.insert(std::string(key));
        std::vector<int> out;
        auto it = s_.entries.find(key);
        if (it == s_.entries.end()) return out;
        for (auto part : split(it->second.value)) out.push_back(parse_int(key, {std::string(part), it->second.line}));
        return out;
    }

    std::vector<float> float_list(std::string_view key)
    {
        used_.insert(std::string(key));
        std::vector<float> out;
        auto it = s_.entries.find(key);
        if (it == s_.entries.end()) return out;
        for (auto part : split(it->second.value)) {
            float v = 0;
            const auto* end = part.data() + part.size();
            auto [ptr, ec] = std::from_chars(part.data(), end, v);
            if (ec != std::errc{} || ptr != end) fail(key, it->second.line, "expected numbers");
            out.push_back(v);
        }
        return out;
    }

    Activation activation()
    {
        const auto a = text("activation", "linear");
        if (a == "linear") return Activation::linear;
        if (a == "leaky") return Activation::leaky;
        throw Error("cfg line " + std::to_string(s_.entries.find("activation")->second.line) +
                    ": unsupported activation '" + a + "'");
    }

    void finish()
    {
        for (const auto& [key, e] : s_.entries) {
            if (used_.contains(key) || kTrainingKeys.contains(key)) continue;
            warnings_.push_back("[" + s_.name + "] line " + std::to_string(e.line) +
                                ": ignored unknown key '" + key + "'");
        }
    }

private:
    static std::vector<std::string_view> split(std::string_view v)
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (start <= v.size()) {
            const auto p = v.find(',', start);
            const auto part = trim(v.substr(start, p == std::string_view::npos ? v.npos : p - start));
            if (!part.empty()) out.push_back(part);
            if (p == std::string_view::npos) break;
            start = p + 1;
        }
        return out;
    }

    [[noreturn]] static void fail(std::string_view key, int line, const std::string& what)
    {
        throw Error("cfg line " + std::to_string(line) + ": key '" + std::string(key) + "': " + what);
    }

    static int parse_int(std::string_view key, const Entry& e)
    {
        int v = 0;
        const auto s = trim(e.value);
        const auto* end = s.data() + s.size();
        auto [ptr, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc{} || ptr != end || s.empty()) fail(key, e.line, "expected an integer");
        return v;
    }

    const Section& s_;
    std::vector<std::string>& warnings_;
    std::set<std::string, std::less<>> used_;
};

std::vector<Section> split_sections(std::string_view text)
{
    std::vector<Section> sections;
    int lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        auto line = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty() || line[0] == ';') continue;
        if (line.front() == '[') {
            ANPR_CHECK(line.back() == ']' && line.size() > 2,
                       "cfg line " + std::to_string(lineno) + ": malformed section header");
            sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), lineno, {}});
            continue;
        }
        ANPR_CHECK(!sections.empty(),
                   "cfg line " + std::to_string(lineno) + ": key=value before the first section");
        const auto eq = line.find('=');
        ANPR_CHECK(eq != std::string_view::npos && !trim(line.substr(0, eq)).empty(),
                   "cfg line " + std::to_string(lineno) + ": malformed key=value '" +
                       std::string(line) + "'");
        auto key = std::string(trim(line.substr(0, eq)));
        ANPR_CHECK(!sections.back().entries.contains(key),
                   "cfg line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        sections.back().entries.emplace(std::move(key),
                                        Entry{std::string(trim(line.substr(eq + 1))), lineno});
    }
    return sections;
}

void check_reference(int ref, int index, int line)
{
    const int abs = resolve_index(ref, index);
    ANPR_CHECK(abs >= 0 && abs < index,
               "cfg line " + std::to_string(line) + ": layer " + std::to_string(index) +
                   " references layer " + std::to_string(ref) + " which is not an earlier layer");
}

std::string activation_name(Activation a)
{
    return a == Activation::leaky ? "leaky" : "linear";
}

}   // namespace

NetworkSpec parse_cfg(std::string_view text)
{
    const auto sections = split_sections(text);
    ANPR_CHECK(!sections.empty(), "cfg has no sections");
    ANPR_CHECK(sections[0].name == "net" || sections[0].name == "network",
               "cfg line " + std::to_string(sections[0].line) +
                   ": first section must be [net], got [" + sections[0].name + "]");

    NetworkSpec spec;
    {
        SectionReader rd(sections[0], spec.warnings);
        for (const char* key : {"width", "height", "channels"}) {
            ANPR_CHECK(rd.has(key), std::string("cfg [net] section is missing '") + key + "'");
        }
        spec.width = rd.integer("width", 0);
        spec.height = rd.integer("height", 0);
        spec.channels = rd.integer("channels", 0);
        ANPR_CHECK(spec.width >= 1 && spec.height >= 1 && spec.channels >= 1,
                   "cfg [net] dimensions must be positive");
        rd.finish();
    }

    for (std::size_t si = 1; si < sections.size(); ++si) {
        const Section& sec = sections[si];
        const int index = static_cast<int>(spec.layers.size());
        SectionReader rd(sec, spec.warnings);
        const std::string where = "cfg line " + std::to_string(sec.line) + ": ";
        if (sec.name == "convolutional" || sec.name == "conv") {
            ConvSpec c;
            c.filters = rd.integer("filters", 1);
            c.size = rd.integer("size", 1);
            c.stride = rd.integer("stride", 1);
            c.pad = rd.integer("pad", 0) != 0;
            c.padding = rd.integer("padding", 0);
            c.batch_normalize = rd.integer("batch_normalize", 0) != 0;
            c.activation = rd.activation();
            ANPR_CHECK(c.filters >= 1 && c.size >= 1 && c.stride >= 1 && c.padding >= 0,
                       where + "convolutional parameters must be positive");
            spec.layers.emplace_back(c);
        } else if (sec.name == "shortcut") {
            ShortcutSpec s;
            ANPR_CHECK(rd.has("from"), where + "shortcut requires 'from'");
            s.from = rd.integer("from", -1);
            s.activation = rd.activation();
            check_reference(s.from, index, sec.line);
            spec.layers.emplace_back(s);
        } else if (sec.name == "route") {
            RouteSpec r;
            r.layers = rd.int_list("layers");
            ANPR_CHECK(!r.layers.empty(), where + "route requires 'layers'");
            for (int ref : r.layers) check_reference(ref, index, sec.line);
            spec.layers.emplace_back(r);
        } else if (sec.name == "upsample") {
            UpsampleSpec u;
            u.stride = rd.integer("stride", 2);
            ANPR_CHECK(u.stride >= 1, where + "upsample stride must be positive");
            spec.layers.emplace_back(u);
        } else if (sec.name == "yolo") {
            YoloSpec y;
            y.classes = rd.integer("classes", 1);
            const auto raw = rd.float_list("anchors");
            ANPR_CHECK(raw.size() % 2 == 0 && !raw.empty(), where + "anchors must be w,h pairs");
            for (std::size_t i = 0; i < raw.size(); i += 2) y.anchors.push_back({raw[i], raw[i + 1]});
            y.mask = rd.int_list("mask");
            if (!rd.has("mask")) {
                y.mask.resize(y.anchors.size());
                std::iota(y.mask.begin(), y.mask.end(), 0);
            }
            ANPR_CHECK(y.classes >= 1, where + "yolo classes must be at least 1");
            ANPR_CHECK(!y.mask.empty(), where + "yolo mask must not be empty");
            for (int m : y.mask) {
                ANPR_CHECK(m >= 0 && m < static_cast<int>(y.anchors.size()),
                           where + "yolo mask index out of range");
            }
            spec.layers.emplace_back(y);
        } else {
            throw Error(where + "unknown section [" + sec.name + "]");
        }
        rd.finish();
    }
    return spec;
}

NetworkSpec read_cfg(const std::filesystem::path& path)
{
    try {
        return parse_cfg(read_file(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string render_cfg(const NetworkSpec& spec)
{
    std::string out = "[net]\nwidth=" + std::to_string(spec.width) +
                      "\nheight=" + std::to_string(spec.height) +
                      "\nchannels=" + std::to_string(spec.channels) + "\n";
    auto join = [](const auto& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    for (const auto& layer : spec.layers) {
        out += "\n";
        if (const auto* c = std::get_if<ConvSpec>(&layer)) {
            out += "[convolutional]\nbatch_normalize=" + std::to_string(int(c->batch_normalize)) +
                   "\nfilters=" + std::to_string(c->filters) + "\nsize=" + std::to_string(c->size) +
                   "\nstride=" + std::to_string(c->stride) + "\npad=" + std::to_string(int(c->pad)) +
                   "\npadding=" + std::to_string(c->padding) +
                   "\nactivation=" + activation_name(c->activation) + "\n";
        } else if (const auto* s = std::get_if<ShortcutSpec>(&layer)) {
            out += "[shortcut]\nfrom=" + std::to_string(s->from) +
                   "\nactivation=" + activation_name(s->activation) + "\n";
        } else if (const auto* r = std::get_if<RouteSpec>(&layer)) {
            out += "[route]\nlayers=" + join(r->layers) + "\n";
        } else if (const auto* u = std::get_if<UpsampleSpec>(&layer)) {
            out += "[upsample]\nstride=" + std::to_string(u->stride) + "\n";
        } else if (const auto* y = std::get_if<YoloSpec>(&layer)) {
            std::string anchors;
            for (std::size_t i = 0; i < y->anchors.size(); ++i) {
                char buf[64];
                auto end = std::to_chars(buf, buf + sizeof buf, y->anchors[i].w).ptr;
                *end++ = ',';
                end = std::to_chars(end, buf + sizeof buf, y->anchors[i].h).ptr;
                anchors += (i ? "," : "") + std::string(buf, end);
            }
            out += "[yolo]\nmask=" + join(y->mask) + "\nanchors=" + anchors +
                   "\nclasses=" + std::to_string(y->classes) +
                   "\nnum=" + std::to_string(y->anchors.size()) + "\n";
        }
    }
    return out;
}

std::vector<Shape> infer_shapes(const NetworkSpec& spec)
{
    std::vector<Shape> shapes;
    Shape in{spec.channels, spec.height, spec.width};
    for (int i = 0; i < static_cast<int>(spec.layers.size()); ++i) {
        const auto& layer = spec.layers[i];
        const std::string where = "layer " + std::to_string(i) + ": ";
        Shape out;
        if (const auto* c = std::get_if<ConvSpec>(&layer)) {
            const int pad = c->effective_padding();
            const int oh = (in.h + 2 * pad - c->size) / c->stride + 1;
            const int ow = (in.w + 2 * pad - c->size) / c->stride + 1;
            ANPR_CHECK(in.h + 2 * pad >= c->size && in.w + 2 * pad >= c->size && oh >= 1 && ow >= 1,
                       where + "convolution kernel larger than its padded input");
            out = {c->filters, oh, ow};
        } else if (const auto* s = std::get_if<ShortcutSpec>(&layer)) {
            const int from = resolve_index(s->from, i);
            ANPR_CHECK(from >= 0 && from < i, where + "shortcut reference out of range");
            ANPR_CHECK(shapes[from] == in, where + "shortcut operands differ in shape");
            out = in;
        } else if (const auto* r = std::get_if<RouteSpec>(&layer)) {
            for (std::size_t k = 0; k < r->layers.size(); ++k) {
                const int src = resolve_index(r->layers[k], i);
                ANPR_CHECK(src >= 0 && src < i, where + "route reference out of range");
                const Shape& s = shapes[src];
                if (k == 0) {
                    out = s;
                } else {
                    ANPR_CHECK(s.h == out.h && s.w == out.w,
                               where + "route inputs differ in spatial size");
                    out.c += s.c;
                }
            }
        } else if (const auto* u = std::get_if<UpsampleSpec>(&layer)) {
            out = {in.c, in.h * u->stride, in.w * u->stride};
        } else if (const auto* y = std::get_if<YoloSpec>(&layer)) {
            const int expect = static_cast<int>(y->mask.size()) * (5 + y->classes);
            ANPR_CHECK(in.c == expect, where + "yolo expects " + std::to_string(expect) +
                                           " channels, got " + std::to_string(in.c));
            out = in;
        }
        shapes.push_back(out);
        in = out;
    }
    return shapes;
}

Network::Network(NetworkSpec spec, WeightsHeader header, std::vector<ConvWeights> conv)
    : spec_(std::move(spec)), shapes_(infer_shapes(spec_)), header_(header), conv_(std::move(conv))
{
    ANPR_CHECK(conv_.size() == spec_.layers.size(), "one weight slot per layer required");
}

namespace {

bool wide_seen(const WeightsHeader& h)
{
    return h.major * 10 + h.minor >= 2 && h.major < 1000 && h.minor < 1000;
}

class ByteReader
{
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T scalar(const char* what)
    {
        ANPR_CHECK(bytes_.size() - pos_ >= sizeof(T),
                   std::string("weights stream truncated while reading ") + what);
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));   // little-endian host
        pos_ += sizeof(T);
        return v;
    }

    std::vector<float> floats(std::size_t n, const std::string& what)
    {
        ANPR_CHECK((bytes_.size() - pos_) / sizeof(float) >= n,
                   "weights stream truncated while reading " + what);
        std::vector<float> v(n);
        std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(float));
        pos_ += n * sizeof(float);
        for (float f : v) ANPR_CHECK(std::isfinite(f), "non-finite value in " + what);
        return v;
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

static_assert(std::endian::native == std::endian::little, "weights loader assumes little-endian");

}   // namespace

std::size_t expected_weights_size(const NetworkSpec& spec, const WeightsHeader& header)
{
    const auto shapes = infer_shapes(spec);
    std::size_t floats = 0;
    int in_c = spec.channels;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (const auto* c = std::get_if<ConvSpec>(&spec.layers[i])) {
            floats += static_cast<std::size_t>(c->filters) * (c->batch_normalize ? 4 : 1);
            floats += static_cast<std::size_t>(c->filters) * in_c * c->size * c->size;
        }
        in_c = shapes[i].c;
    }
    return 3 * sizeof(std::int32_t) + (wide_seen(header) ? 8 : 4) + floats * sizeof(float);
}

Network load_weights(const NetworkSpec& spec, std::string_view bytes)
{
    const auto shapes = infer_shapes(spec);
    ByteReader rd(bytes);
    WeightsHeader header;
    header.major = rd.scalar<std::int32_t>("header");
    header.minor = rd.scalar<std::int32_t>("header");
    header.revision = rd.scalar<std::int32_t>("header");
    header.seen = wide_seen(header) ? rd.scalar<std::uint64_t>("header")
                                    : rd.scalar<std::uint32_t>("header");

    std::vector<ConvWeights> weights(spec.layers.size());
    int in_c = spec.channels;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        if (const auto* c = std::get_if<ConvSpec>(&spec.layers[i])) {
            const std::string tag = "layer " + std::to_string(i);
            const auto n = static_cast<std::size_t>(c->filters);
            auto& w = weights[i];
            if (c->batch_normalize) {
                const auto beta = rd.floats(n, tag + " biases");
                const auto gamma = rd.floats(n, tag + " scales");
                const auto mean = rd.floats(n, tag + " rolling mean");
                const auto var = rd.floats(n, tag + " rolling variance");
                w.scale.resize(n);
                w.shift.resize(n);
                for (std::size_t f = 0; f < n; ++f) {
                    const float s = gamma[f] / std::sqrt(var[f] + kBatchNormEpsilon);
                    w.scale[f] = s;
                    w.shift[f] = beta[f] - s * mean[f];
                    ANPR_CHECK(std::isfinite(s) && std::isfinite(w.shift[f]),
                               tag + ": batch norm folding produced a non-finite value");
                }
            } else {
                w.shift = rd.floats(n, tag + " biases");
                w.scale.assign(n, 1.f);
            }
            w.kernels = rd.floats(n * in_c * c->size * c->size, tag + " weights");
        }
        in_c = shapes[i].c;
    }
    ANPR_CHECK(rd.remaining() == 0, "weights stream has " + std::to_string(rd.remaining()) +
                                        " trailing bytes; model/weights mismatch");
    return Network(spec, header, std::move(weights));
}

Network load_network(const std::filesystem::path& cfg, const std::filesystem::path& weights)
{
    const NetworkSpec spec = read_cfg(cfg);
    try {
        return load_weights(spec, read_file(weights));
    } catch (const Error& e) {
        throw Error(weights.string() + ": " + e.what());
    }
}

namespace {

void activate(Tensor& t, Activation a)
{
    if (a != Activation::leaky) return;
    for (float& v : t.values) v = v > 0 ? v : kLeakySlope * v;
}

Tensor convolve(const Tensor& in, const ConvSpec& c, const ConvWeights& w, const Shape& out_shape)
{
    Tensor out(out_shape.c, out_shape.h, out_shape.w);
    const int pad = c.effective_padding();
    const int k = in.c * c.size * c.size;
    const int n = out.h * out.w;
    const float* col = in.values.data();
    std::vector<float> scratch;
    if (!(c.size == 1 && c.stride == 1 && pad == 0)) {
        scratch.resize(static_cast<std::size_t>(k) * n);
        im2col(in.values.data(), in.c, in.h, in.w, c.size, c.stride, pad, scratch.data());
        col = scratch.data();
    }
    gemm_nn(c.filters, n, k, w.kernels.data(), col, out.values.data(), false);
    for (int f = 0; f < c.filters; ++f) {
        float* row = out.values.data() + static_cast<std::size_t>(f) * n;
        for (int p = 0; p < n; ++p) row[p] = w.scale[f] * row[p] + w.shift[f];
    }
    activate(out, c.activation);
    return out;
}

}   // namespace

std::vector<Tensor> forward(const Network& net, const Tensor& input)
{
    const NetworkSpec& spec = net.spec();
    ANPR_CHECK(input.c == spec.channels && input.h == spec.height && input.w == spec.width,
               "input tensor " + std::to_string(input.c) + "x" + std::to_string(input.h) + "x" +
                   std::to_string(input.w) + " does not match network input " +
                   std::to_string(spec.channels) + "x" + std::to_string(spec.height) + "x" +
                   std::to_string(spec.width));
    ANPR_CHECK(input.values.size() == input.shape().count(), "tensor buffer size mismatch");

    std::vector<Tensor> outputs(spec.layers.size());
    std::vector<Tensor> yolo;
    const Tensor* in = &input;
    for (int i = 0; i < static_cast<int>(spec.layers.size()); ++i) {
        const auto& layer = spec.layers[i];
        const Shape& shape = net.shapes()[i];
        Tensor out;
        if (const auto* c = std::get_if<ConvSpec>(&layer)) {
            out = convolve(*in, *c, net.conv_weights()[i], shape);
        } else if (const auto* s = std::get_if<ShortcutSpec>(&layer)) {
            const Tensor& other = outputs[resolve_index(s->from, i)];
            ANPR_CHECK(other.shape() == in->shape(), "shortcut shape mismatch at layer " + std::to_string(i));
            out = *in;
            for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += other.values[k];
            activate(out, s->activation);
        } else if (const auto* r = std::get_if<RouteSpec>(&layer)) {
            out = Tensor(shape.c, shape.h, shape.w);
            auto dst = out.values.begin();
            for (int ref : r->layers) {
                const Tensor& src = outputs[resolve_index(ref, i)];
                dst = std::copy(src.values.begin(), src.values.end(), dst);
            }
        } else if (const auto* u = std::get_if<UpsampleSpec>(&layer)) {
            out = Tensor(shape.c, shape.h, shape.w);
            for (int ch = 0; ch < out.c; ++ch) {
                for (int y = 0; y < out.h; ++y) {
                    for (int x = 0; x < out.w; ++x) {
                        out.at(ch, y, x) = in->at(ch, y / u->stride, x / u->stride);
                    }
                }
            }
        } else {
            out = *in;
            yolo.push_back(out);
        }
        ANPR_CHECK(out.shape() == shape, "dimension mismatch at layer " + std::to_string(i));
        outputs[i] = std::move(out);
        in = &outputs[i];
    }
    return yolo;
}

std::vector<Detection> decode_detections(const Tensor& out, const YoloSpec& layer, int net_w,
                                         int net_h, float conf_thresh)
{
    const int per_anchor = 5 + layer.classes;
    const int expect = static_cast<int>(layer.mask.size()) * per_anchor;
    ANPR_CHECK(out.c == expect, "yolo output has " + std::to_string(out.c) +
                                    " channels, expected " + std::to_string(expect));
    std::vector<Detection> dets;
    for (std::size_t a = 0; a < layer.mask.size(); ++a) {
        const Anchor& anchor = layer.anchors.at(layer.mask[a]);
        const int base = static_cast<int>(a) * per_anchor;
        for (int i = 0; i < out.h; ++i) {
            for (int j = 0; j < out.w; ++j) {
                const float obj = logistic(out.at(base + 4, i, j));
                Box box{(logistic(out.at(base + 0, i, j)) + j) / out.w,
                        (logistic(out.at(base + 1, i, j)) + i) / out.h,
                        anchor.w * std::exp(out.at(base + 2, i, j)) / net_w,
                        anchor.h * std::exp(out.at(base + 3, i, j)) / net_h};
                for (int k = 0; k < layer.classes; ++k) {
                    const float score = obj * logistic(out.at(base + 5 + k, i, j));
                    if (score >= conf_thresh && score > 0) dets.push_back({box, score, k});
                }
            }
        }
    }
    return dets;
}

float iou(const Box& a, const Box& b) noexcept
{
    const float ix = std::min(a.cx + a.w / 2, b.cx + b.w / 2) - std::max(a.cx - a.w / 2, b.cx - b.w / 2);
    const float iy = std::min(a.cy + a.h / 2, b.cy + b.h / 2) - std::max(a.cy - a.h / 2, b.cy - b.h / 2);
    if (ix <= 0 || iy <= 0) return 0.f;
    const float inter = ix * iy;
    const float uni = a.w * a.h + b.w * b.h - inter;
    return uni > 0 ? inter / uni : 0.f;
}

std::vector<Detection> nms(const std::vector<Detection>& dets, float iou_thresh)
{
    ANPR_CHECK(iou_thresh >= 0 && iou_thresh <= 1, "iou threshold must lie in [0,1]");
    std::vector<int> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto &da = dets[a], &db = dets[b];
        if (da.score != db.score) return da.score > db.score;
        if (da.box.cx != db.box.cx) return da.box.cx < db.box.cx;
        if (da.box.cy != db.box.cy) return da.box.cy < db.box.cy;
        return a < b;
    });
    std::vector<char> removed(dets.size(), 0);
    std::vector<Detection> kept;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (removed[order[k]]) continue;
        const Detection& d = dets[order[k]];
        kept.push_back(d);
        for (std::size_t m = k + 1; m < order.size(); ++m) {
            const Detection& o = dets[order[m]];
            if (!removed[order[m]] && o.class_id == d.class_id && iou(d.box, o.box) > iou_thresh) {
                removed[order[m]] = 1;
            }
        }
    }
    return kept;
}

Letterbox Letterbox::fit(int src_w, int src_h, int net_w, int net_h)
{
    ANPR_CHECK(src_w >= 1 && src_h >= 1 && net_w >= 1 && net_h >= 1,
               "letterbox dimensions must be positive");
    const double scale = std::min(double(net_w) / src_w, double(net_h) / src_h);
    Letterbox t{src_w, src_h, net_w, net_h};
    t.new_w = std::clamp(static_cast<int>(std::lround(src_w * scale)), 1, net_w);
    t.new_h = std::clamp(static_cast<int>(std::lround(src_h * scale)), 1, net_h);
    t.off_x = (net_w - t.new_w) / 2;
    t.off_y = (net_h - t.new_h) / 2;
    return t;
}

Box Letterbox::to_source(const Box& b) const noexcept
{
    return {static_cast<float>((double(b.cx) * net_w - off_x) / new_w),
            static_cast<float>((double(b.cy) * net_h - off_y) / new_h),
            static_cast<float>(double(b.w) * net_w / new_w),
            static_cast<float>(double(b.h) * net_h / new_h)};
}

Box Letterbox::to_network(const Box& b) const noexcept
{
    return {static_cast<float>((double(b.cx) * new_w + off_x) / net_w),
            static_cast<float>((double(b.cy) * new_h + off_y) / net_h),
            static_cast<float>(double(b.w) * new_w / net_w),
            static_cast<float>(double(b.h) * new_h / net_h)};
}

LetterboxResult letterbox(const RgbImage& img, int net_w, int net_h)
{
    const Letterbox t = Letterbox::fit(img.width(), img.height(), net_w, net_h);
    Tensor tensor(3, net_h, net_w, 0.5f);
    for (int ch = 0; ch < 3; ++ch) {
        GrayImage plane(img.width(), img.height());
        for (std::size_t i = 0; i < img.size(); ++i) {
            const Rgb& p = img.pixels()[i];
            plane.pixels()[i] = ch == 0 ? p.r : ch == 1 ? p.g : p.b;
        }
        const GrayImage scaled = resize_bilinear(plane, t.new_w, t.new_h);
        for (int y = 0; y < t.new_h; ++y) {
            for (int x = 0; x < t.new_w; ++x) {
                tensor.at(ch, t.off_y + y, t.off_x + x) = scaled(x, y) / 255.f;
            }
        }
    }
    return {std::move(tensor), t};
}

LetterboxResult letterbox(const GrayImage& img, int net_w, int net_h)
{
    return letterbox(to_rgb(img), net_w, net_h);
}

Box clamp_unit(const Box& b) noexcept
{
    const float x0 = std::clamp(b.cx - b.w / 2, 0.f, 1.f), x1 = std::clamp(b.cx + b.w / 2, 0.f, 1.f);
    const float y0 = std::clamp(b.cy - b.h / 2, 0.f, 1.f), y1 = std::clamp(b.cy + b.h / 2, 0.f, 1.f);
    return {(x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0};
}

}   // anpr::darknet
