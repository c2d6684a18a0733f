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


#include <algorithm>
#include <numeric>

#include "anpr/contours.hpp"
#include "anpr/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace anpr;

namespace {

Component comp(int x, int y, int w, int h)
{
    Component c;
    c.bbox = {x, y, w, h};
    c.area = w * h;
    return c;
}

BinaryImage random_binary(Rng& rng, int w, int h, double p)
{
    BinaryImage b(w, h);
    for (auto& v : b.pixels()) v = rng.chance(p);
    return b;
}

}   // namespace

TEST_CASE("label_components basics")
{
    CHECK(label_components(BinaryImage(8, 8)).empty());

    BinaryImage one(5, 5);
    one(2, 3) = 1;
    const auto c1 = label_components(one);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].area == 1);
    CHECK(c1[0].bbox == BoundingBox{2, 3, 1, 1});
    CHECK(c1[0].perimeter == 1);

    BinaryImage diag(4, 4);
    diag(1, 1) = 1;
    diag(2, 2) = 1;
    CHECK(label_components(diag, 8).size() == 1);
    CHECK(label_components(diag, 4).size() == 2);
    CHECK_THROWS_AS(label_components(diag, 6), Error);
}

TEST_CASE("label_components matches flood fill")
{
    Rng rng(12);
    for (int t = 0; t < 200; ++t) {
        const BinaryImage b = random_binary(rng, 1 + int(rng.below(30)), 1 + int(rng.below(30)), rng.uniform(0.1, 0.7));
        for (int conn : {4, 8}) {
            const auto comps = label_components(b, conn);
            std::vector<int> areas;
            int total = 0;
            for (const auto& c : comps) {
                areas.push_back(c.area);
                total += c.area;
                CHECK(c.area <= c.bbox.w * c.bbox.h);
                CHECK(c.perimeter <= c.area);
            }
            CHECK(areas == oracle::flood_fill_areas(b, conn));
            CHECK(total == static_cast<int>(count_foreground(b)));
        }
    }
}

TEST_CASE("find_regions reports holes only in all mode")
{
    BinaryImage ring(7, 7);
    for (int i = 1; i < 6; ++i) ring(i, 1) = ring(i, 5) = ring(1, i) = ring(5, i) = 1;
    const Regions ext = find_regions(ring, ContourMode::external);
    CHECK(ext.components.size() == 1);
    const Regions all = find_regions(ring, ContourMode::all);
    REQUIRE(all.components.size() == 2);
    CHECK(std::count_if(all.components.begin(), all.components.end(), [](const Component& c) { return c.hole; }) == 1);
    for (const auto& c : all.components) {
        if (c.hole) {
            CHECK(c.area == 9);
            CHECK(c.bbox == BoundingBox{2, 2, 3, 3});
            const BinaryImage m = extract_component(all, c);
            CHECK(count_foreground(m) == 9);
        }
    }
}

TEST_CASE("extract_component keeps only its own pixels")
{
    BinaryImage b(10, 10);
    for (int y = 0; y < 8; ++y) b(2, y) = 1;   // tall bar
    b(3, 4) = 0;
    b(4, 4) = 1;                               // separate dot inside the bar's bbox row range
    for (int x = 2; x < 6; ++x) b(x, 9) = 1;
    const Regions r = find_regions(b, ContourMode::external, 4);
    REQUIRE(r.components.size() == 3);
    const BinaryImage bar = extract_component(r, r.components[0]);
    CHECK(bar.width() == 1);
    CHECK(bar.height() == 8);
    CHECK(count_foreground(bar) == 8);
}

TEST_CASE("filter_candidates")
{
    const GeometryBounds bounds;
    CHECK(filter_candidates({}, 200, 50, bounds).empty());
    CHECK(filter_candidates({comp(0, 0, 200, 50)}, 200, 50, bounds).empty());

    std::vector<Component> glyphs;
    for (int i = 0; i < 10; ++i) glyphs.push_back(comp(10 + 19 * i, 10, 15, 30));
    for (auto& g : glyphs) g.area = 200;
    CHECK(filter_candidates(glyphs, 200, 50, bounds).size() == 10);

    GeometryBounds open;
    open.area = open.aspect = open.width = open.height = Bound::none();
    CHECK(filter_candidates({comp(0, 0, 200, 50)}, 200, 50, open).size() == 1);
    CHECK_THROWS_AS(filter_candidates({}, 0, 50, bounds), Error);

    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
        std::vector<Component> in;
        for (int i = 0; i < 20; ++i) {
            Component c = comp(int(rng.below(150)), int(rng.below(30)), 1 + int(rng.below(50)), 1 + int(rng.below(50)));
            c.area = 1 + int(rng.below(c.bbox.w * c.bbox.h));
            c.label = i + 1;
            in.push_back(c);
        }
        const auto out = filter_candidates(in, 200, 50, bounds);
        int last = 0;
        for (const auto& c : out) {
            CHECK(c.label > last);
            last = c.label;
            const double pa = 200.0 * 50;
            CHECK(bounds.area.accepts(c.area / pa));
            CHECK(bounds.width.accepts(c.bbox.w / 200.0));
            CHECK(bounds.height.accepts(c.bbox.h / 50.0));
            CHECK(bounds.aspect.accepts(double(c.bbox.w) / c.bbox.h));
        }
        // Everything dropped violates at least one bound.
        CHECK(out.size() == static_cast<std::size_t>(std::count_if(in.begin(), in.end(), [&](const Component& c) {
                  return bounds.area.accepts(c.area / 10000.0) && bounds.width.accepts(c.bbox.w / 200.0) &&
                         bounds.height.accepts(c.bbox.h / 50.0) && bounds.aspect.accepts(double(c.bbox.w) / c.bbox.h);
              })));
    }
}

TEST_CASE("order_characters")
{
    CHECK(order_characters({}).empty());

    const auto one = order_characters({comp(5, 5, 4, 8)});
    REQUIRE(one.size() == 1);
    CHECK(one[0].row == 0);
    CHECK(one[0].order == 0);

    const auto line = order_characters({comp(30, 0, 5, 10), comp(10, 0, 5, 10), comp(20, 0, 5, 10)});
    REQUIRE(line.size() == 3);
    CHECK(line[0].bbox.x == 10);
    CHECK(line[1].bbox.x == 20);
    CHECK(line[2].bbox.x == 30);
    CHECK(line[0].source == 1);

    const auto rows = order_characters({comp(40, 50, 10, 20), comp(5, 52, 10, 20), comp(30, 5, 10, 20), comp(8, 3, 10, 20)});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].bbox.x == 8);
    CHECK(rows[1].bbox.x == 30);
    CHECK(rows[2].bbox.x == 5);
    CHECK(rows[3].bbox.x == 40);
    CHECK(rows[0].row == 0);
    CHECK(rows[2].row == 1);

    Rng rng(31);
    for (int t = 0; t < 100; ++t) {
        std::vector<Component> in;
        const int n = 1 + int(rng.below(12));
        for (int i = 0; i < n; ++i) in.push_back(comp(int(rng.below(200)), int(rng.below(100)), 3 + int(rng.below(10)), 5 + int(rng.below(20))));
        const auto out = order_characters(in);
        REQUIRE(out.size() == in.size());
        std::vector<int> src;
        for (std::size_t i = 0; i < out.size(); ++i) {
            src.push_back(out[i].source);
            CHECK(out[i].order == static_cast<int>(i));
            CHECK(out[i].bbox == in[out[i].source].bbox);
            if (i > 0) {
                CHECK(out[i].row >= out[i - 1].row);
                if (out[i].row == out[i - 1].row) CHECK(out[i].bbox.x >= out[i - 1].bbox.x);
            }
        }
        std::sort(src.begin(), src.end());
        std::vector<int> want(n);
        std::iota(want.begin(), want.end(), 0);
        CHECK(src == want);

        auto shifted = in;
        const int dx = int(rng.below(50));
        for (auto& c : shifted) c.bbox.x += dx;
        const auto out2 = order_characters(shifted);
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out2[i].source == out[i].source);
            CHECK(out2[i].row == out[i].row);
        }
    }
}

TEST_CASE("crop_and_normalize")
{
    SUBCASE("full-size box is a rescale to [0,1]")
    {
        Rng rng(1);
        BinaryImage b = random_binary(rng, 32, 32, 0.4);
        const UnitImage u = crop_and_normalize(b, {0, 0, 32, 32}, 32);
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) CHECK(u(x, y) == double(b(x, y)));
        }
    }
    SUBCASE("tall glyph is centered with 8 px pads")
    {
        BinaryImage b(20, 40);
        for (int y = 4; y < 36; ++y) {
            for (int x = 2; x < 18; ++x) b(x, y) = 1;
        }
        const UnitImage u = crop_and_normalize(b, {2, 4, 16, 32}, 32);
        CHECK(u.width() == 32);
        CHECK(u.height() == 32);
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) CHECK(u(x, y) == ((x >= 8 && x < 24) ? 1.0 : 0.0));
        }
    }
    SUBCASE("bad arguments")
    {
        BinaryImage b(10, 10);
        CHECK_THROWS_AS(crop_and_normalize(b, {5, 5, 6, 2}, 32), Error);
        CHECK_THROWS_AS(crop_and_normalize(b, {0, 0, 2, 2}, 4), Error);
    }
    SUBCASE("range and aspect")
    {
        Rng rng(77);
        for (int t = 0; t < 50; ++t) {
            const int w = 1 + int(rng.below(40)), h = 1 + int(rng.below(40));
            BinaryImage b(w, h, 1);
            const int side = 8 + int(rng.below(40));
            const UnitImage u = crop_and_normalize(b, {0, 0, w, h}, side);
            CHECK(u.width() == side);
            CHECK(u.height() == side);
            int iw = 0, ih = 0;
            for (int x = 0; x < side; ++x) iw += u(x, side / 2) > 0 ? 1 : 0;
            for (int y = 0; y < side; ++y) ih += u(side / 2, y) > 0 ? 1 : 0;
            for (double v : u.pixels()) CHECK((v >= 0.0 && v <= 1.0));
            const double want = double(w) / h;
            // Ink extent ratio within one pixel of the source ratio.
            if (w >= h) CHECK(std::abs(ih - side / want) <= 1.0);
            else CHECK(std::abs(iw - side * want) <= 1.0);
        }
    }
}

TEST_CASE("format_candidates_csv")
{
    const auto c = order_characters({comp(3, 4, 5, 6)});
    CHECK(format_candidates_csv(c) == "x,y,w,h,row,order\n3,4,5,6,0,0\n");
}
