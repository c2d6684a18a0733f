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
#include <cmath>

#include "anpr/contours.hpp"
#include "anpr/imageio.hpp"
#include "anpr/imgproc.hpp"
#include "anpr/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace anpr;

namespace {

GrayImage random_gray(Rng& rng, int w, int h, int levels = 256)
{
    GrayImage g(w, h);
    for (auto& v : g.pixels()) v = static_cast<std::uint8_t>(rng.below(levels) * (255 / std::max(1, levels - 1)));
    return g;
}

BinaryImage random_binary(Rng& rng, int w, int h, double p)
{
    BinaryImage b(w, h);
    for (auto& v : b.pixels()) v = rng.chance(p);
    return b;
}

bool subset(const BinaryImage& a, const BinaryImage& b)
{
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.pixels()[i] && !b.pixels()[i]) return false;
    }
    return true;
}

void fill_rect(BinaryImage& b, int x0, int y0, int w, int h)
{
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) b(x, y) = 1;
    }
}

}   // namespace

TEST_CASE("to_grayscale uses BT.601 luma")
{
    RgbImage img(3, 1);
    img(0, 0) = {255, 255, 255};
    img(1, 0) = {0, 0, 0};
    img(2, 0) = {255, 0, 0};
    const GrayImage g = to_grayscale(img);
    CHECK(g(0, 0) == 255);
    CHECK(g(1, 0) == 0);
    CHECK(g(2, 0) == 76);
}

TEST_CASE("bilateral_filter")
{
    SUBCASE("constant image is a fixed point")
    {
        const GrayImage g(17, 9, 100);
        CHECK(bilateral_filter(g, 9, 70, 70) == g);
    }
    SUBCASE("1x1 image is unchanged")
    {
        const GrayImage g(1, 1, 42);
        CHECK(bilateral_filter(g, 9, 70, 70) == g);
    }
    SUBCASE("impulse matches the direct evaluation")
    {
        GrayImage g(3, 3, 0);
        g(1, 1) = 200;
        const auto got = bilateral_filter(g, 3, 70, 70);
        const auto want = oracle::bilateral(g, 3, 70, 70);
        CHECK(std::abs(int(got(1, 1)) - int(want(1, 1))) <= 1);
    }
    SUBCASE("random images stay within one level of the oracle and inside the window range")
    {
        Rng rng(3);
        for (int t = 0; t < 5; ++t) {
            const GrayImage g = random_gray(rng, 19, 13);
            const int d = 2 * static_cast<int>(rng.below(4)) + 1;
            const auto got = bilateral_filter(g, d, 30, 5);
            const auto want = oracle::bilateral(g, d, 30, 5);
            for (int y = 0; y < g.height(); ++y) {
                for (int x = 0; x < g.width(); ++x) {
                    CHECK(std::abs(int(got(x, y)) - int(want(x, y))) <= 1);
                    int lo = 255, hi = 0;
                    for (int dy = -d / 2; dy <= d / 2; ++dy) {
                        for (int dx = -d / 2; dx <= d / 2; ++dx) {
                            if (!g.contains(x + dx, y + dy)) continue;
                            lo = std::min<int>(lo, g(x + dx, y + dy));
                            hi = std::max<int>(hi, g(x + dx, y + dy));
                        }
                    }
                    CHECK(got(x, y) >= lo);
                    CHECK(got(x, y) <= hi);
                }
            }
        }
    }
    SUBCASE("bad parameters are rejected")
    {
        const GrayImage g(4, 4);
        CHECK_THROWS_AS(bilateral_filter(g, 4, 70, 70), Error);
        CHECK_THROWS_AS(bilateral_filter(g, 0, 70, 70), Error);
        CHECK_THROWS_AS(bilateral_filter(g, 3, 0, 70), Error);
    }
}

TEST_CASE("canny")
{
    SUBCASE("constant image has no edges")
    {
        CHECK(count_foreground(canny(GrayImage(16, 16, 77), 30, 130)) == 0);
    }
    SUBCASE("step edge gives one column (golden)")
    {
        const GrayImage step = read_pgm(ANPR_TEST_DATA "/step16.pgm");
        const BinaryImage want = read_pbm(ANPR_TEST_DATA "/step16_canny.pbm");
        CHECK(canny(step, 30, 130) == want);
    }
    SUBCASE("gentle ramp stays below the low threshold")
    {
        // Sobel magnitude of a slope-s ramp is 8s; s = 2 gives 16 < 30.
        GrayImage ramp(32, 8);
        for (int y = 0; y < 8; ++y) {
            for (int x = 0; x < 32; ++x) ramp(x, y) = static_cast<std::uint8_t>(2 * x);
        }
        const auto mag = gradient_magnitude(ramp);
        CHECK(mag[8 * 32 / 2 + 10] == doctest::Approx(16));
        CHECK(count_foreground(canny(ramp, 30, 130)) == 0);
    }
    SUBCASE("low must be below high")
    {
        CHECK_THROWS_AS(canny(GrayImage(4, 4), 130, 130), Error);
        CHECK_THROWS_AS(canny(GrayImage(4, 4), 140, 130), Error);
    }
    SUBCASE("edge pixels are above low and linked to a strong pixel")
    {
        Rng rng(11);
        for (int t = 0; t < 10; ++t) {
            const GrayImage g = gaussian_blur(random_gray(rng, 24, 24), 1.5);
            const double low = 20, high = 60;
            const BinaryImage e = canny(g, low, high);
            const auto mag = gradient_magnitude(g);
            // Every edge component must contain a strong pixel.
            const LabelMap lm = label_pixels(e, 8);
            std::vector<char> has_strong(lm.count + 1, 0);
            for (int y = 0; y < 24; ++y) {
                for (int x = 0; x < 24; ++x) {
                    if (!e(x, y)) continue;
                    CHECK(e(x, y) == 1);
                    CHECK(mag[y * 24 + x] >= low);
                    if (mag[y * 24 + x] >= high) has_strong[lm(x, y)] = 1;
                }
            }
            for (int k = 1; k <= lm.count; ++k) CHECK(has_strong[k]);
        }
    }
}

TEST_CASE("otsu_threshold")
{
    SUBCASE("two-level image splits exactly")
    {
        GrayImage g(8, 8, 10);
        for (int y = 4; y < 8; ++y) {
            for (int x = 0; x < 8; ++x) g(x, y) = 200;
        }
        const auto r = otsu_threshold(g);
        CHECK(r.threshold == oracle::otsu(g));
        for (int y = 0; y < 8; ++y) {
            for (int x = 0; x < 8; ++x) CHECK(r.image(x, y) == (y < 4));
        }
        const auto up = otsu_threshold(g, false);
        for (int x = 0; x < 8; ++x) CHECK(up.image(x, 7) == 1);
    }
    SUBCASE("constant image is degenerate")
    {
        CHECK_THROWS_WITH_AS(otsu_threshold(GrayImage(5, 5, 128)), doctest::Contains("degenerate"), Error);
    }
    SUBCASE("0/255 tie picks the smallest threshold")
    {
        GrayImage g(2, 1);
        g(0, 0) = 0;
        g(1, 0) = 255;
        CHECK(otsu_threshold(g).threshold == 1);
        CHECK(oracle::otsu(g) == 1);
    }
    SUBCASE("random images match the exhaustive maximizer")
    {
        Rng rng(5);
        for (int t = 0; t < 50; ++t) {
            const GrayImage g = random_gray(rng, 9, 7, 2 + static_cast<int>(rng.below(8)));
            const int want = oracle::otsu(g);
            if (want < 0) continue;
            CHECK(otsu_threshold(g).threshold == want);
        }
    }
}

TEST_CASE("adaptive_threshold")
{
    CHECK(count_foreground(adaptive_threshold(GrayImage(20, 20, 90), 11, 2)) == 0);
    CHECK(count_foreground(adaptive_threshold(GrayImage(20, 20, 255), 11, -256)) == 400);
    CHECK_THROWS_AS(adaptive_threshold(GrayImage(5, 5), 10, 2), Error);
    CHECK_THROWS_AS(adaptive_threshold(GrayImage(5, 5), 1, 2), Error);

    GrayImage g(21, 21, 255);
    for (int y = 9; y < 12; ++y) {
        for (int x = 9; x < 12; ++x) g(x, y) = 0;
    }
    const BinaryImage b = adaptive_threshold(g, 11, 2);
    for (int y = 0; y < 21; ++y) {
        for (int x = 0; x < 21; ++x) {
            double sum = 0;
            int n = 0;
            for (int yy = std::max(0, y - 5); yy <= std::min(20, y + 5); ++yy) {
                for (int xx = std::max(0, x - 5); xx <= std::min(20, x + 5); ++xx) {
                    sum += g(xx, yy);
                    ++n;
                }
            }
            CHECK(b(x, y) == (g(x, y) < sum / n - 2));
        }
    }
    CHECK(b(10, 10) == 1);
    CHECK(count_foreground(b) == 9);
}

TEST_CASE("remove_lines")
{
    const StructuringElement hk(10, 1), vk(1, 20);
    CHECK(count_foreground(remove_lines(BinaryImage(50, 30), hk, vk, 8)) == 0);

    SUBCASE("thin horizontal run is removed")
    {
        BinaryImage b(60, 10);
        fill_rect(b, 5, 4, 40, 1);
        CHECK(count_foreground(remove_lines(b, hk, vk, 1)) == 0);
        // Eight iterations need a run of at least 8 * 9 + 1 pixels.
        BinaryImage longer(120, 10);
        fill_rect(longer, 5, 4, 100, 1);
        CHECK(count_foreground(remove_lines(longer, hk, vk, 8)) == 0);
        CHECK(remove_lines(b, hk, vk, 8) == b);
    }
    SUBCASE("thick block survives")
    {
        BinaryImage b(40, 30);
        fill_rect(b, 10, 10, 12, 8);
        CHECK(remove_lines(b, hk, vk, 1) == b);
        CHECK(remove_lines(b, hk, vk, 8) == b);
    }
    SUBCASE("line touching a glyph only loses the line")
    {
        BinaryImage b(120, 40);
        fill_rect(b, 0, 2, 120, 2);     // frame edge
        fill_rect(b, 50, 10, 10, 25);   // glyph stroke
        const BinaryImage out = remove_lines(b, hk, vk, 8);
        CHECK(count_foreground(out) == 250);
    }
    SUBCASE("anti-extensive and idempotent")
    {
        Rng rng(8);
        for (int t = 0; t < 20; ++t) {
            BinaryImage b = random_binary(rng, 64, 48, 0.05);
            fill_rect(b, 0, int(rng.below(40)), 64, 1 + int(rng.below(3)));
            fill_rect(b, int(rng.below(60)), 0, 1 + int(rng.below(3)), 48);
            fill_rect(b, 20, 20, 8, 12);
            const int it = 1 + int(rng.below(3));
            const BinaryImage once = remove_lines(b, hk, vk, it);
            CHECK(subset(once, b));
            CHECK(remove_lines(once, hk, vk, it) == once);
        }
    }
}

TEST_CASE("remove_small_blobs")
{
    CHECK(count_foreground(remove_small_blobs(BinaryImage(10, 10), 50)) == 0);

    BinaryImage b(40, 20);
    fill_rect(b, 1, 1, 7, 7);   // 49
    b(1, 8) = 0;
    fill_rect(b, 20, 1, 10, 5);   // 50
    const BinaryImage out = remove_small_blobs(b, 50);
    CHECK(count_foreground(out) == 50);
    CHECK(out(20, 1) == 1);
    CHECK(out(1, 1) == 0);
    CHECK(remove_small_blobs(b, 0) == b);

    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        const BinaryImage r = random_binary(rng, 32, 32, 0.3 + 0.1 * (t % 4));
        const int m = 1 + static_cast<int>(rng.below(30));
        const BinaryImage once = remove_small_blobs(r, m);
        CHECK(subset(once, r));
        CHECK(remove_small_blobs(once, m) == once);
        for (int a : oracle::flood_fill_areas(once, 8)) CHECK(a >= m);
    }
}

TEST_CASE("resize_bilinear")
{
    Rng rng(2);
    const GrayImage g = random_gray(rng, 7, 5);
    CHECK(resize_bilinear(g, 7, 5) == g);
    CHECK(resize_bilinear(GrayImage(3, 3, 9), 11, 2) == GrayImage(11, 2, 9));

    GrayImage two(2, 1);
    two(0, 0) = 0;
    two(1, 0) = 255;
    const GrayImage four = resize_bilinear(two, 4, 1);
    // Sources at -0.25, 0.25, 0.75, 1.25 -> 0, 63.75, 191.25, 255.
    CHECK(four(0, 0) == 0);
    CHECK(four(1, 0) == 64);
    CHECK(four(2, 0) == 191);
    CHECK(four(3, 0) == 255);

    for (int t = 0; t < 20; ++t) {
        const GrayImage r = random_gray(rng, 1 + int(rng.below(12)), 1 + int(rng.below(12)));
        const auto [lo, hi] = std::minmax_element(r.pixels().begin(), r.pixels().end());
        const GrayImage s = resize_bilinear(r, 1 + int(rng.below(20)), 1 + int(rng.below(20)));
        for (auto v : s.pixels()) {
            CHECK(v >= *lo);
            CHECK(v <= *hi);
        }
    }
}

TEST_CASE("warp_perspective")
{
    Rng rng(4);
    const GrayImage g = random_gray(rng, 9, 6);
    CHECK(warp_perspective(g, kIdentityHomography, 9, 6, 0) == g);

    SUBCASE("translation shifts content and fills the vacated column")
    {
        const Homography t{1, 0, 1, 0, 1, 0, 0, 0, 1};
        const GrayImage w = warp_perspective(g, t, 9, 6, 7);
        for (int y = 0; y < 6; ++y) {
            CHECK(w(0, y) == 7);
            for (int x = 1; x < 9; ++x) CHECK(w(x, y) == g(x - 1, y));
        }
    }
    SUBCASE("quarter turn permutes a 2x2")
    {
        GrayImage s(2, 2);
        s(0, 0) = 1;
        s(1, 0) = 2;
        s(0, 1) = 3;
        s(1, 1) = 4;
        const GrayImage r = warp_perspective(s, rotation_homography(90, 0.5, 0.5), 2, 2, 0);
        // Counter-clockwise: the right column becomes the top row.
        CHECK(r(0, 0) == 2);
        CHECK(r(1, 0) == 4);
        CHECK(r(0, 1) == 1);
        CHECK(r(1, 1) == 3);
    }
    SUBCASE("singular homography is rejected")
    {
        CHECK_THROWS_AS(warp_perspective(g, Homography{1, 2, 0, 2, 4, 0, 0, 0, 1}, 4, 4, 0), Error);
    }
    SUBCASE("output stays within the source range plus fill")
    {
        for (int t = 0; t < 10; ++t) {
            const GrayImage r = random_gray(rng, 12, 10);
            const auto [lo, hi] = std::minmax_element(r.pixels().begin(), r.pixels().end());
            const std::uint8_t fill = 128;
            const GrayImage w = warp_perspective(r, rotation_homography(rng.uniform(-40, 40), 6, 5), 12, 10, fill);
            for (auto v : w.pixels()) CHECK(((v >= *lo && v <= *hi) || v == fill));
        }
    }
    SUBCASE("homography from points reproduces the corners")
    {
        const std::array<std::array<double, 2>, 4> from = {{{0, 0}, {10, 0}, {10, 5}, {0, 5}}};
        const std::array<std::array<double, 2>, 4> to = {{{1, 2}, {11, 1}, {9, 7}, {0, 6}}};
        const Homography h = homography_from_points(from, to);
        for (int i = 0; i < 4; ++i) {
            const auto p = apply_homography(h, from[i][0], from[i][1]);
            CHECK(p[0] == doctest::Approx(to[i][0]).epsilon(1e-9));
            CHECK(p[1] == doctest::Approx(to[i][1]).epsilon(1e-9));
        }
        const Homography id = multiply_homography(h, invert_homography(h));
        for (int i = 0; i < 9; ++i) CHECK(id[i] / id[8] == doctest::Approx(kIdentityHomography[i]).epsilon(1e-9));
    }
}

TEST_CASE("morphology primitives")
{
    BinaryImage b(9, 9);
    b(4, 4) = 1;
    const BinaryImage d = dilate(b, {3, 1});
    CHECK(count_foreground(d) == 3);
    CHECK(d(3, 4) == 1);
    CHECK(d(5, 4) == 1);
    CHECK(erode(d, {3, 1}) == b);
    CHECK(count_foreground(morph_open(b, {2, 2})) == 0);
    CHECK_THROWS_AS(StructuringElement(0, 3), Error);
}

TEST_CASE("gaussian_blur keeps constants and sums")
{
    CHECK(gaussian_blur(GrayImage(10, 10, 50), 1.2) == GrayImage(10, 10, 50));
    Rng rng(6);
    const GrayImage g = random_gray(rng, 8, 8);
    CHECK(gaussian_blur(g, 0) == g);
}
