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


#include <cmath>
#include <cstring>

#include "anpr/darknet.hpp"
#include "anpr/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace anpr;
using namespace anpr::darknet;

namespace {

template <typename T>
void put(std::string& s, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    s.append(buf, sizeof(T));
}

std::string header_bytes()
{
    std::string s;
    put<std::int32_t>(s, 0);
    put<std::int32_t>(s, 2);
    put<std::int32_t>(s, 0);
    put<std::uint64_t>(s, 12345);
    return s;
}

std::string float_bytes(const std::vector<float>& v)
{
    std::string s;
    for (float f : v) put(s, f);
    return s;
}

Tensor random_tensor(Rng& rng, int c, int h, int w)
{
    Tensor t(c, h, w);
    for (auto& v : t.values) v = static_cast<float>(rng.uniform(-1, 1));
    return t;
}

std::vector<float> random_floats(Rng& rng, std::size_t n, double lo = -1, double hi = 1)
{
    std::vector<float> v(n);
    for (auto& f : v) f = static_cast<float>(rng.uniform(lo, hi));
    return v;
}

// "[net]" header followed by the given layer sections.
std::string cfg(int c, int h, int w, const std::string& body)
{
    return "[net]\nwidth=" + std::to_string(w) + "\nheight=" + std::to_string(h) + "\nchannels=" + std::to_string(c) +
           "\n" + body;
}

const char* kYolo1 = "[yolo]\nmask=0\nanchors=10,14\nclasses=1\n";

}   // namespace

TEST_CASE("parse_cfg")
{
    SUBCASE("minimal network")
    {
        const NetworkSpec s = parse_cfg(cfg(3, 8, 8, "[convolutional]\nfilters=4\nsize=3\nstride=1\npad=1\nactivation=leaky\n"));
        REQUIRE(s.layers.size() == 1);
        const auto& c = std::get<ConvSpec>(s.layers[0]);
        CHECK(c.filters == 4);
        CHECK(c.effective_padding() == 1);
        CHECK(c.activation == Activation::leaky);
        CHECK(infer_shapes(s)[0] == Shape{4, 8, 8});
    }
    SUBCASE("comments, blanks and unknown keys")
    {
        const NetworkSpec s = parse_cfg("# top\n[net]\nwidth=4\nheight=4\nchannels=1\nbatch=64\nfrobnicate=1\n\n; note\n[upsample]\nstride=2\n");
        CHECK(s.layers.size() == 1);
        REQUIRE(s.warnings.size() == 1);
        CHECK(s.warnings[0].find("frobnicate") != std::string::npos);
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_WITH_AS(parse_cfg(cfg(1, 4, 4, "[maxpool]\nsize=2\n")), doctest::Contains("maxpool"), Error);
        CHECK_THROWS_AS(parse_cfg(cfg(1, 4, 4, "[route]\nlayers=2\n")), Error);
        CHECK_THROWS_AS(parse_cfg(cfg(1, 4, 4, "[upsample]\n[route]\nlayers=-1,1\n")), Error);
        CHECK_THROWS_AS(parse_cfg("[convolutional]\nfilters=1\n"), Error);
        CHECK_THROWS_AS(parse_cfg("[net]\nwidth=4\nheight=4\n"), Error);
        CHECK_THROWS_AS(parse_cfg(cfg(1, 4, 4, "[shortcut]\nfrom=-1\n")), Error);
        CHECK_THROWS_AS(parse_cfg(""), Error);
    }
    SUBCASE("shape errors")
    {
        CHECK_THROWS_AS(infer_shapes(parse_cfg(cfg(1, 4, 4, kYolo1))), Error);
        CHECK_THROWS_AS(infer_shapes(parse_cfg(cfg(1, 2, 2, "[convolutional]\nfilters=1\nsize=5\n"))), Error);
    }
}

TEST_CASE("render_cfg round-trip")
{
    const std::string text = cfg(3, 16, 16,
                                 "[convolutional]\nbatch_normalize=1\nfilters=8\nsize=3\nstride=2\npad=1\nactivation=leaky\n"
                                 "[convolutional]\nfilters=8\nsize=1\nstride=1\nactivation=linear\n"
                                 "[shortcut]\nfrom=-2\nactivation=linear\n"
                                 "[convolutional]\nfilters=12\nsize=1\npadding=0\n"
                                 "[yolo]\nmask=0,1\nanchors=10,14,23,27,37,58\nclasses=1\n"
                                 "[route]\nlayers=-3\n"
                                 "[upsample]\nstride=2\n"
                                 "[route]\nlayers=-1,-8\n");
    // Layer -8 would be before the first layer.
    CHECK_THROWS_AS(parse_cfg(text), Error);
    const std::string ok = cfg(3, 16, 16,
                               "[convolutional]\nbatch_normalize=1\nfilters=8\nsize=3\nstride=2\npad=1\nactivation=leaky\n"
                               "[convolutional]\nfilters=8\nsize=1\nstride=1\nactivation=linear\n"
                               "[shortcut]\nfrom=-2\nactivation=linear\n"
                               "[convolutional]\nfilters=12\nsize=1\npadding=0\n"
                               "[yolo]\nmask=0,1\nanchors=10,14,23,27,37,58\nclasses=1\n"
                               "[route]\nlayers=-3\n"
                               "[upsample]\nstride=2\n"
                               "[route]\nlayers=0,2\n");
    const NetworkSpec s = parse_cfg(ok);
    CHECK(s.layers.size() == 8);
    CHECK(parse_cfg(render_cfg(s)) == s);
    CHECK(render_cfg(parse_cfg(render_cfg(s))) == render_cfg(s));
    const auto shapes = infer_shapes(s);
    CHECK(shapes[6] == Shape{8, 16, 16});
    CHECK(shapes[7] == Shape{16, 8, 8});
}

TEST_CASE("weights stream size")
{
    const NetworkSpec s = parse_cfg(cfg(3, 8, 8,
                                        "[convolutional]\nbatch_normalize=1\nfilters=4\nsize=3\npad=1\nactivation=leaky\n"
                                        "[convolutional]\nfilters=6\nsize=1\nactivation=linear\n") +
                                    kYolo1);
    // (4*4 + 4*3*9) + (6 + 6*4) floats after a 20-byte header.
    const std::size_t floats = 4 * 4 + 4 * 3 * 9 + 6 + 6 * 4;
    CHECK(expected_weights_size(s, {}) == 20 + 4 * floats);
    CHECK(expected_weights_size(s, {0, 1, 0, 0}) == 16 + 4 * floats);

    Rng rng(2);
    std::vector<float> w = random_floats(rng, floats, 0.1, 1.0);
    const std::string good = header_bytes() + float_bytes(w);
    const Network net = load_weights(s, good);
    CHECK(net.header().seen == 12345);
    CHECK_THROWS_WITH_AS(load_weights(s, good.substr(0, good.size() - 4)), doctest::Contains("truncat"), Error);
    CHECK_THROWS_WITH_AS(load_weights(s, good + std::string(4, '\0')), doctest::Contains("trailing"), Error);
    CHECK_THROWS_AS(load_weights(s, good.substr(0, 10)), Error);

    std::string narrow;
    put<std::int32_t>(narrow, 0);
    put<std::int32_t>(narrow, 1);
    put<std::int32_t>(narrow, 0);
    put<std::uint32_t>(narrow, 7);
    CHECK(load_weights(s, narrow + float_bytes(w)).header().seen == 7);
}

TEST_CASE("forward examples")
{
    SUBCASE("1x1 conv: 2 * 1 + 3 = 5")
    {
        const NetworkSpec s = parse_cfg(cfg(1, 1, 1, "[convolutional]\nfilters=6\nsize=1\nactivation=linear\n") + kYolo1);
        const Network net = load_weights(s, header_bytes() + float_bytes({3, 3, 3, 3, 3, 3, 2, 2, 2, 2, 2, 2}));
        const auto out = forward(net, Tensor(1, 1, 1, 1.f));
        REQUIRE(out.size() == 1);
        for (float v : out[0].values) CHECK(v == 5.f);
    }
    SUBCASE("upsample duplicates into blocks")
    {
        const NetworkSpec s = parse_cfg(cfg(6, 2, 2, "[upsample]\nstride=2\n") + kYolo1);
        const Network net = load_weights(s, header_bytes());
        Rng rng(4);
        const Tensor in = random_tensor(rng, 6, 2, 2);
        const auto out = forward(net, in);
        REQUIRE(out[0].shape() == Shape{6, 4, 4});
        for (int c = 0; c < 6; ++c) {
            for (int y = 0; y < 4; ++y) {
                for (int x = 0; x < 4; ++x) CHECK(out[0].at(c, y, x) == in.at(c, y / 2, x / 2));
            }
        }
    }
    SUBCASE("shortcut with a zero tensor is the identity")
    {
        const NetworkSpec a = parse_cfg(cfg(2, 3, 3, "[convolutional]\nfilters=6\nsize=3\npad=1\n") + kYolo1);
        const NetworkSpec b = parse_cfg(cfg(2, 3, 3,
                                            "[convolutional]\nfilters=6\nsize=3\npad=1\n"
                                            "[convolutional]\nfilters=6\nsize=1\n"
                                            "[shortcut]\nfrom=-2\n") +
                                        kYolo1);
        Rng rng(6);
        const auto wa = random_floats(rng, 6 + 6 * 2 * 9);
        const Network na = load_weights(a, header_bytes() + float_bytes(wa));
        const Network nb = load_weights(b, header_bytes() + float_bytes(wa) + float_bytes(std::vector<float>(6 + 36, 0.f)));
        const Tensor in = random_tensor(rng, 2, 3, 3);
        CHECK(forward(na, in)[0].values == forward(nb, in)[0].values);
    }
    SUBCASE("input shape is checked")
    {
        const NetworkSpec s = parse_cfg(cfg(6, 2, 2, "[upsample]\n") + kYolo1);
        CHECK_THROWS_AS(forward(load_weights(s, header_bytes()), Tensor(6, 3, 2)), Error);
    }
}

TEST_CASE("convolution matches the direct oracle")
{
    Rng rng(10);
    for (int t = 0; t < 20; ++t) {
        const int c = 1 + int(rng.below(3)), h = 3 + int(rng.below(8)), w = 3 + int(rng.below(8));
        const int k = 1 + 2 * int(rng.below(2)), stride = 1 + int(rng.below(2));
        const bool bn = rng.chance(0.5), leaky = rng.chance(0.5);
        const std::string conv = "[convolutional]\nbatch_normalize=" + std::to_string(int(bn)) +
                                 "\nfilters=6\nsize=" + std::to_string(k) + "\nstride=" + std::to_string(stride) +
                                 "\npad=1\nactivation=" + (leaky ? "leaky" : "linear") + "\n";
        const NetworkSpec s = parse_cfg(cfg(c, h, w, conv) + kYolo1);
        const auto bias = random_floats(rng, 6);
        const auto gamma = random_floats(rng, 6, 0.5, 1.5);
        const auto mean = random_floats(rng, 6);
        const auto var = random_floats(rng, 6, 0.2, 2.0);
        const auto kern = random_floats(rng, std::size_t(6) * c * k * k);
        std::string bytes = header_bytes() + float_bytes(bias);
        if (bn) bytes += float_bytes(gamma) + float_bytes(mean) + float_bytes(var);
        bytes += float_bytes(kern);
        const Network net = load_weights(s, bytes);
        const Tensor in = random_tensor(rng, c, h, w);

        std::vector<double> din(in.values.begin(), in.values.end()), dk(kern.begin(), kern.end());
        int oh = 0, ow = 0;
        const auto raw = oracle::conv2d(din, c, h, w, dk, std::vector<double>(6, 0.0), 6, k, stride, k / 2, oh, ow);
        const auto out = forward(net, in)[0];
        REQUIRE(out.shape() == Shape{6, oh, ow});
        for (int f = 0; f < 6; ++f) {
            for (int i = 0; i < oh * ow; ++i) {
                double v = raw[std::size_t(f) * oh * ow + i];
                if (bn) v = gamma[f] * (v - mean[f]) / std::sqrt(double(var[f]) + 1e-6) + bias[f];
                else v += bias[f];
                if (leaky && v < 0) v *= 0.1;
                CHECK(out.values[std::size_t(f) * oh * ow + i] == doctest::Approx(v).epsilon(1e-5).scale(1));
            }
        }
    }
}

TEST_CASE("convolution is additive and translation-equivariant")
{
    Rng rng(14);
    const NetworkSpec s = parse_cfg(cfg(2, 12, 12, "[convolutional]\nfilters=6\nsize=3\nstride=1\npad=1\n") + kYolo1);
    std::vector<float> w = random_floats(rng, 6 + 6 * 2 * 9);
    std::fill(w.begin(), w.begin() + 6, 0.f);
    const Network net = load_weights(s, header_bytes() + float_bytes(w));
    for (int t = 0; t < 10; ++t) {
        const Tensor a = random_tensor(rng, 2, 12, 12), b = random_tensor(rng, 2, 12, 12);
        Tensor sum = a;
        for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += b.values[i];
        const auto fa = forward(net, a)[0], fb = forward(net, b)[0], fs = forward(net, sum)[0];
        for (std::size_t i = 0; i < fs.values.size(); ++i) {
            CHECK(fs.values[i] == doctest::Approx(fa.values[i] + fb.values[i]).epsilon(1e-6).scale(1));
        }

        Tensor shifted(2, 12, 12);
        for (int c = 0; c < 2; ++c) {
            for (int y = 0; y < 12; ++y) {
                for (int x = 1; x < 12; ++x) shifted.at(c, y, x) = a.at(c, y, x - 1);
            }
        }
        const auto fsh = forward(net, shifted)[0];
        for (int f = 0; f < 6; ++f) {
            for (int y = 1; y < 11; ++y) {
                for (int x = 2; x < 11; ++x) CHECK(fsh.at(f, y, x) == doctest::Approx(fa.at(f, y, x - 1)).epsilon(1e-5));
            }
        }
    }

    // Stride 2: shifting the input by 2 shifts the output by 1.
    const NetworkSpec s2 = parse_cfg(cfg(1, 12, 12, "[convolutional]\nfilters=6\nsize=3\nstride=2\npad=1\n") + kYolo1);
    const Network n2 = load_weights(s2, header_bytes() + float_bytes(random_floats(rng, 6 + 6 * 9)));
    const Tensor a = random_tensor(rng, 1, 12, 12);
    Tensor sh(1, 12, 12);
    for (int y = 0; y < 12; ++y) {
        for (int x = 2; x < 12; ++x) sh.at(0, y, x) = a.at(0, y, x - 2);
    }
    const auto fa = forward(n2, a)[0], fsh = forward(n2, sh)[0];
    for (int f = 0; f < 6; ++f) {
        for (int y = 1; y < 5; ++y) {
            for (int x = 2; x < 6; ++x) CHECK(fsh.at(f, y, x) == doctest::Approx(fa.at(f, y, x - 1)).epsilon(1e-5));
        }
    }
}

TEST_CASE("decode_detections")
{
    YoloSpec layer;
    layer.anchors = {{10, 14}, {116, 90}};
    layer.mask = {1};
    layer.classes = 2;
    Tensor out(7, 13, 13, 0.f);
    for (int y = 0; y < 13; ++y) {
        for (int x = 0; x < 13; ++x) out.at(4, y, x) = -1e9f;
    }
    out.at(4, 0, 0) = 20.f;
    out.at(5, 0, 0) = 20.f;
    out.at(6, 0, 0) = -20.f;
    const auto dets = decode_detections(out, layer, 416, 416, 0.5f);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].box.cx == doctest::Approx(0.5 / 13));
    CHECK(dets[0].box.cy == doctest::Approx(0.5 / 13));
    CHECK(dets[0].box.w == 116.f / 416);
    CHECK(dets[0].box.h == 90.f / 416);
    CHECK(dets[0].class_id == 0);
    CHECK(dets[0].score <= 1.f);
    // Cells with objectness at -inf score exactly 0 and never pass; the live
    // cell's second class survives a tiny threshold.
    CHECK(decode_detections(out, layer, 416, 416, 1e-30f).size() == 2);
    CHECK_THROWS_AS(decode_detections(Tensor(6, 13, 13), layer, 416, 416), Error);

    Rng rng(3);
    const Tensor r = random_tensor(rng, 7, 5, 5);
    for (const auto& d : decode_detections(r, layer, 160, 160, 0.f)) {
        CHECK(d.score >= 0.f);
        CHECK(d.score <= 1.f);
    }
}

TEST_CASE("nms")
{
    const Detection a{{0.5f, 0.5f, 0.2f, 0.2f}, 0.9f, 0};
    CHECK(nms({a}) == std::vector<Detection>{a});

    Detection b = a;
    b.score = 0.8f;
    CHECK(nms({b, a}) == std::vector<Detection>{a});
    b.class_id = 1;
    CHECK(nms({b, a}).size() == 2);

    // IoU of [0,2] and [1,3] is exactly 1/3.
    const Detection p{{1, 0.5f, 2, 1}, 0.9f, 0}, q{{2, 0.5f, 2, 1}, 0.8f, 0};
    CHECK(iou(p.box, q.box) == 1.f / 3);
    CHECK(nms({p, q}, 1.f / 3).size() == 2);
    CHECK(nms({p, q}, 0.3f).size() == 1);
    CHECK_THROWS_AS(nms({p}, 1.5f), Error);

    Rng rng(20);
    for (int t = 0; t < 300; ++t) {
        std::vector<Detection> d;
        const int n = int(rng.below(9));
        for (int i = 0; i < n; ++i) {
            // Coarse grid values so exact ties and exact-threshold overlaps occur.
            d.push_back({{float(rng.below(5)) / 4, float(rng.below(5)) / 4, 0.25f + float(rng.below(4)) / 4,
                          0.25f + float(rng.below(4)) / 4},
                         float(1 + rng.below(4)) / 4, int(rng.below(2))});
        }
        const float th = float(rng.below(5)) / 8;
        const auto got = nms(d, th);
        CHECK(got == oracle::nms(d, th));
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (i) CHECK(got[i].score <= got[i - 1].score);
            for (std::size_t j = 0; j < i; ++j) {
                if (got[i].class_id == got[j].class_id) CHECK(iou(got[i].box, got[j].box) <= th);
            }
        }
    }
}

TEST_CASE("letterbox")
{
    SUBCASE("square to square is a pure resize")
    {
        const auto r = letterbox(GrayImage(8, 8, 255), 4, 4);
        CHECK(r.transform.off_x == 0);
        CHECK(r.transform.off_y == 0);
        for (float v : r.tensor.values) CHECK(v == 1.f);
    }
    SUBCASE("2:1 into square pads a quarter top and bottom")
    {
        const auto r = letterbox(RgbImage(16, 8), 8, 8);
        CHECK(r.tensor.c == 3);
        CHECK(r.transform.new_h == 4);
        CHECK(r.transform.off_y == 2);
        for (int c = 0; c < 3; ++c) {
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) CHECK(r.tensor.at(c, y, x) == ((y < 2 || y >= 6) ? 0.5f : 0.f));
            }
        }
    }
    SUBCASE("box mapping round-trips and matches hand arithmetic")
    {
        const Letterbox t = Letterbox::fit(400, 100, 416, 416);
        CHECK(t.new_w == 416);
        CHECK(t.new_h == 104);
        CHECK(t.off_y == 156);
        const Box src = t.to_source({0.5f, 0.5f, 0.5f, 0.125f});
        CHECK(src.cx == doctest::Approx(0.5));
        CHECK(src.cy == doctest::Approx((208.0 - 156) / 104));
        CHECK(src.h == doctest::Approx(52.0 / 104));
        Rng rng(1);
        for (int i = 0; i < 100; ++i) {
            const Box b{float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.01, 0.2)),
                        float(rng.uniform(0.01, 0.2))};
            const Box back = t.to_source(t.to_network(b));
            CHECK(std::abs(back.cx - b.cx) * 400 <= 0.5);
            CHECK(std::abs(back.cy - b.cy) * 100 <= 0.5);
            CHECK(std::abs(back.w - b.w) * 400 <= 0.5);
            CHECK(std::abs(back.h - b.h) * 100 <= 0.5);
        }
    }
    SUBCASE("clamp_unit")
    {
        const Box c = clamp_unit({0.05f, 0.5f, 0.3f, 2.f});
        CHECK(c.cx - c.w / 2 >= 0.f);
        CHECK(c.cy + c.h / 2 <= 1.f);
    }
}
