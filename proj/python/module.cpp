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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstring>

#include "anpr/charnet.hpp"
#include "anpr/config.hpp"
#include "anpr/contours.hpp"
#include "anpr/darknet.hpp"
#include "anpr/imgproc.hpp"
#include "anpr/pipeline.hpp"
#include "anpr/synthgen.hpp"

namespace py = pybind11;
using namespace anpr;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_gray(const U8Array& a)
{
    if (a.ndim() == 3 && a.shape(2) == 3) {
        RgbImage rgb(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
        std::memcpy(rgb.pixels().data(), a.data(), rgb.size() * 3);
        return to_grayscale(rgb);
    }
    if (a.ndim() != 2) throw py::value_error("expected an (H, W) or (H, W, 3) uint8 array");
    GrayImage g(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(g.pixels().data(), a.data(), g.size());
    return g;
}

BinaryImage to_binary(const py::array& a)
{
    const auto u = U8Array::ensure(a);
    if (!u || u.ndim() != 2) throw py::value_error("expected an (H, W) boolean array");
    BinaryImage b(static_cast<int>(u.shape(1)), static_cast<int>(u.shape(0)));
    const auto* src = u.data();
    for (std::size_t i = 0; i < b.size(); ++i) b.pixels()[i] = src[i] != 0;
    return b;
}

U8Array from_gray(const GrayImage& g)
{
    U8Array out({g.height(), g.width()});
    std::memcpy(out.mutable_data(), g.pixels().data(), g.size());
    return out;
}

py::array_t<bool> from_binary(const BinaryImage& b)
{
    py::array_t<bool> out({b.height(), b.width()});
    auto* dst = out.mutable_data();
    for (std::size_t i = 0; i < b.size(); ++i) dst[i] = b.pixels()[i] != 0;
    return out;
}

F64Array from_unit(const UnitImage& u)
{
    F64Array out({u.height(), u.width()});
    std::copy(u.pixels().begin(), u.pixels().end(), out.mutable_data());
    return out;
}

UnitImage to_unit(const F64Array& a)
{
    if (a.ndim() != 2) throw py::value_error("expected an (H, W) float array");
    UnitImage u(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + u.size(), u.pixels().begin());
    return u;
}

py::tuple box_tuple(const BoundingBox& b)
{
    return py::make_tuple(b.x, b.y, b.w, b.h);
}

PipelineConfig config_from(const std::optional<std::map<std::string, std::string>>& s)
{
    if (!s) return PipelineConfig{};
    Settings settings(s->begin(), s->end());
    return apply_settings(PipelineConfig{}, settings);
}

py::dict result_dict(const PlateResult& r)
{
    py::list boxes, probs;
    for (const auto& b : r.boxes) boxes.append(box_tuple(b));
    for (const auto& p : r.probs) probs.append(py::array_t<double>(kNumClasses, p.data()));
    py::dict t;
    t["detect_ms"] = r.timings.detect_ms;
    t["preprocess_ms"] = r.timings.preprocess_ms;
    t["segment_ms"] = r.timings.segment_ms;
    t["classify_ms"] = r.timings.classify_ms;
    py::dict d;
    d["text"] = r.text;
    d["boxes"] = boxes;
    d["probs"] = probs;
    d["unread"] = r.unread;
    d["mean_prob"] = r.mean_prob();
    d["timings"] = t;
    return d;
}

std::vector<LabeledSample> samples_from(const F64Array& images, const py::array_t<int>& labels)
{
    if (images.ndim() != 3) throw py::value_error("images must be (N, side, side)");
    const auto n = images.shape(0);
    if (labels.ndim() != 1 || labels.shape(0) != n) throw py::value_error("labels must be (N,)");
    const int h = static_cast<int>(images.shape(1)), w = static_cast<int>(images.shape(2));
    std::vector<LabeledSample> out;
    for (py::ssize_t i = 0; i < n; ++i) {
        UnitImage u(w, h);
        std::copy_n(images.data() + i * w * h, u.size(), u.pixels().begin());
        out.push_back({std::move(u), labels.at(i)});
    }
    return out;
}

}   // namespace

PYBIND11_MODULE(_anpr, m)
{
    m.doc() = "Number plate recognition: preprocessing, segmentation, classification";

    py::register_exception<Error>(m, "AnprError", PyExc_RuntimeError);

    m.def("to_grayscale", [](const U8Array& a) { return from_gray(to_gray(a)); });
    m.def("bilateral_filter",
          [](const U8Array& a, int d, double sc, double ss) { return from_gray(bilateral_filter(to_gray(a), d, sc, ss)); },
          py::arg("image"), py::arg("diameter") = 9, py::arg("sigma_color") = 70.0, py::arg("sigma_space") = 70.0);
    m.def("canny", [](const U8Array& a, double lo, double hi) { return from_binary(canny(to_gray(a), lo, hi)); },
          py::arg("image"), py::arg("low") = 30.0, py::arg("high") = 130.0);
    m.def("otsu_threshold",
          [](const U8Array& a, bool invert) {
              const auto r = otsu_threshold(to_gray(a), invert);
              return py::make_tuple(r.threshold, from_binary(r.image));
          },
          py::arg("image"), py::arg("invert") = true);
    m.def("adaptive_threshold",
          [](const U8Array& a, int block, int c) { return from_binary(adaptive_threshold(to_gray(a), block, c)); },
          py::arg("image"), py::arg("block") = 11, py::arg("c") = 2);
    m.def("remove_lines",
          [](const py::array& a, std::pair<int, int> hk, std::pair<int, int> vk, int it) {
              return from_binary(remove_lines(to_binary(a), {hk.first, hk.second}, {vk.first, vk.second}, it));
          },
          py::arg("image"), py::arg("h_kernel") = std::pair{10, 1}, py::arg("v_kernel") = std::pair{1, 20},
          py::arg("iterations") = 8);
    m.def("remove_small_blobs",
          [](const py::array& a, int min_size) { return from_binary(remove_small_blobs(to_binary(a), min_size)); },
          py::arg("image"), py::arg("min_size") = 50);
    m.def("resize_bilinear",
          [](const U8Array& a, int w, int h) { return from_gray(resize_bilinear(to_gray(a), w, h)); },
          py::arg("image"), py::arg("width"), py::arg("height"));
    m.def("label_components",
          [](const py::array& a, int conn) {
              py::list out;
              for (const auto& c : label_components(to_binary(a), conn)) {
                  py::dict d;
                  d["label"] = c.label;
                  d["area"] = c.area;
                  d["perimeter"] = c.perimeter;
                  d["bbox"] = box_tuple(c.bbox);
                  out.append(d);
              }
              return out;
          },
          py::arg("image"), py::arg("connectivity") = 8);

    m.def("default_settings", [] {
        const Settings s = to_settings(PipelineConfig{});
        return std::map<std::string, std::string>(s.begin(), s.end());
    });
    m.def("preprocess_plate",
          [](const U8Array& a, std::optional<std::map<std::string, std::string>> s) {
              return from_binary(preprocess_plate(to_gray(a), config_from(s)));
          },
          py::arg("image"), py::arg("settings") = py::none());

    py::class_<CharModel>(m, "CharModel")
        .def(py::init([](int side, int conv1, int conv2, int hidden) { return CharModel({side, conv1, conv2, hidden}); }),
             py::arg("input_side") = 32, py::arg("conv1") = 16, py::arg("conv2") = 32, py::arg("hidden") = 128)
        .def_static("he_init", [](std::uint64_t seed) { return CharModel::he_init({}, seed); }, py::arg("seed"))
        .def_static("load", [](const std::string& path) { return read_model(path); }, py::arg("path"))
        .def("save", [](const CharModel& mdl, const std::string& path) { write_model(path, mdl); }, py::arg("path"))
        .def_property_readonly("input_side", [](const CharModel& mdl) { return mdl.arch().input_side; })
        .def_property_readonly("parameter_count", [](const CharModel& mdl) { return mdl.params().size(); })
        .def("predict",
             [](const CharModel& mdl, const F64Array& x) {
                 const Prediction p = model_forward(mdl, to_unit(x));
                 return py::make_tuple(std::string(1, p.label), py::array_t<double>(kNumClasses, p.probs.data()));
             },
             py::arg("image"))
        .def("__eq__", [](const CharModel& a, const CharModel& b) { return a == b; });

    m.def("train",
          [](const F64Array& images, const py::array_t<int>& labels, int epochs, double lr, double momentum,
             int batch_size, std::uint64_t seed) {
              const auto data = samples_from(images, labels);
              TrainConfig cfg;
              cfg.epochs = epochs;
              cfg.learning_rate = lr;
              cfg.momentum = momentum;
              cfg.batch_size = batch_size;
              cfg.seed = seed;
              Architecture arch;
              arch.input_side = data.front().image.width();
              TrainResult r;
              {
                  py::gil_scoped_release release;
                  r = train(CharModel(arch), data, cfg);
              }
              py::list log;
              for (const auto& e : r.log) log.append(py::make_tuple(e.epoch, e.loss, e.accuracy));
              return py::make_tuple(std::move(r.model), log);
          },
          py::arg("images"), py::arg("labels"), py::arg("epochs") = 15, py::arg("lr") = 0.01,
          py::arg("momentum") = 0.9, py::arg("batch_size") = 32, py::arg("seed") = 1);
    m.def("accuracy",
          [](const CharModel& mdl, const F64Array& images, const py::array_t<int>& labels) {
              return accuracy(mdl, samples_from(images, labels));
          },
          py::arg("model"), py::arg("images"), py::arg("labels"));

    m.attr("ALPHABET") = std::string(kAlphabet);
    m.def("render_glyph", [](char c, int side) { return from_gray(render_glyph(c, builtin_glyphs(), side)); },
          py::arg("char"), py::arg("side") = 64);
    m.def("augment",
          [](const U8Array& a, double rot, double jitter, double blur, double gain, double shadow, double noise,
             std::uint64_t seed) {
              return from_gray(augment(to_gray(a), {rot, jitter, blur, gain, shadow, noise, seed}));
          },
          py::arg("image"), py::arg("rotation") = 0.0, py::arg("perspective_jitter") = 0.0,
          py::arg("blur_sigma") = 0.0, py::arg("exposure_gain") = 1.0, py::arg("shadow_strength") = 0.0,
          py::arg("noise_prob") = 0.0, py::arg("seed") = 0);
    m.def("generate_dataset",
          [](int per_class, std::uint64_t seed) {
              const auto data = generate_dataset(builtin_glyphs(), per_class, AugmentRanges{}, seed);
              const int side = data.front().image.width();
              py::array_t<double> images({static_cast<py::ssize_t>(data.size()), py::ssize_t(side), py::ssize_t(side)});
              py::array_t<int> labels(static_cast<py::ssize_t>(data.size()));
              for (std::size_t i = 0; i < data.size(); ++i) {
                  std::copy(data[i].image.pixels().begin(), data[i].image.pixels().end(),
                            images.mutable_data() + i * side * side);
                  labels.mutable_at(i) = data[i].label;
              }
              return py::make_tuple(images, labels);
          },
          py::arg("per_class") = kDefaultPerClass, py::arg("seed") = 1);
    m.def("compose_plate",
          [](const std::string& text, bool two_line, bool border) {
              PlateStyle st;
              st.border = border;
              const auto p = compose_plate(text, builtin_glyphs(), two_line ? PlateLayout::two_line : PlateLayout::single, st);
              py::list boxes;
              for (const auto& b : p.boxes) boxes.append(box_tuple(b));
              return py::make_tuple(from_gray(p.image), boxes);
          },
          py::arg("text"), py::arg("two_line") = false, py::arg("border") = false);

    m.def("recognize_plate",
          [](const U8Array& a, const CharModel& mdl, std::optional<std::map<std::string, std::string>> s) {
              const GrayImage g = to_gray(a);
              const PipelineConfig cfg = config_from(s);
              PlateResult r;
              {
                  py::gil_scoped_release release;
                  r = recognize_plate(g, cfg, mdl);
              }
              return result_dict(r);
          },
          py::arg("image"), py::arg("model"), py::arg("settings") = py::none());

    m.def("character_accuracy", &character_accuracy, py::arg("predicted"), py::arg("truth"));
    m.def("evaluate_batch",
          [](const std::vector<std::tuple<std::string, std::string, std::string, double>>& rows) {
              std::vector<EvalPair> pairs;
              for (const auto& [src, pred, truth, sec] : rows) pairs.push_back({src, pred, truth, sec});
              const AccuracyReport r = evaluate_batch(pairs);
              py::list out;
              for (const auto& row : r.rows) out.append(py::make_tuple(row.source, row.predicted, row.truth, row.accuracy, row.seconds));
              py::dict d;
              d["rows"] = out;
              d["mean_accuracy"] = r.mean_accuracy;
              d["mean_seconds"] = r.mean_seconds;
              d["table"] = format_report(r);
              return d;
          },
          py::arg("rows"));

    m.def("nms",
          [](const std::vector<std::tuple<float, float, float, float, float, int>>& dets, float thresh) {
              std::vector<darknet::Detection> in;
              for (const auto& [cx, cy, w, h, s, c] : dets) in.push_back({{cx, cy, w, h}, s, c});
              std::vector<std::tuple<float, float, float, float, float, int>> out;
              for (const auto& d : darknet::nms(in, thresh)) out.emplace_back(d.box.cx, d.box.cy, d.box.w, d.box.h, d.score, d.class_id);
              return out;
          },
          py::arg("detections"), py::arg("iou_thresh") = 0.45f);
    m.def("parse_cfg",
          [](const std::string& text) {
              const auto spec = darknet::parse_cfg(text);
              py::dict d;
              d["channels"] = spec.channels;
              d["height"] = spec.height;
              d["width"] = spec.width;
              d["layers"] = spec.layers.size();
              d["warnings"] = spec.warnings;
              return d;
          },
          py::arg("text"));
}
