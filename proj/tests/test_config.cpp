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


#include <filesystem>

#include <unistd.h>

#include "anpr/config.hpp"
#include "anpr/imageio.hpp"
#include "anpr/rng.hpp"
#include "doctest.h"

using namespace anpr;
namespace fs = std::filesystem;

namespace {

std::string dump(const Settings& s)
{
    std::string out;
    for (const auto& k : pipeline_keys()) out += k + " = " + s.at(k) + "\n";
    return out;
}

fs::path scratch(const char* name)
{
    const fs::path p = fs::temp_directory_path() / ("anpr_test_config_" + std::to_string(::getpid())) / name;
    fs::create_directories(p.parent_path());
    return p;
}

}   // namespace

TEST_CASE("defaults")
{
    const Settings s = to_settings(PipelineConfig{});
    CHECK(s.at("bilateral") == "9,70,70");
    CHECK(s.at("canny") == "30,130");
    CHECK(s.at("h_line_kernel") == "10,1");
    CHECK(s.at("v_line_kernel") == "1,20");
    CHECK(s.at("h_line_iterations") == "8");
    CHECK(s.at("v_line_iterations") == "8");
    CHECK(s.at("blob_min_size") == "50");
    CHECK(s.at("contour_mode") == "external");
    CHECK(s.at("binarization") == "otsu");
    CHECK(s.at("perimeter") == "none");
    CHECK(s.size() == pipeline_keys().size());
    for (const auto& k : pipeline_keys()) CHECK(!describe_key(k).empty());
    CHECK_NOTHROW(PipelineConfig{}.validate());
}

TEST_CASE("settings round-trip")
{
    PipelineConfig cfg;
    cfg.bilateral_sigma_color = 12.5;
    cfg.binarization = Binarization::adaptive;
    cfg.contour_mode = ContourMode::all;
    cfg.bounds.perimeter = Bound::between(0.01, 0.4);
    cfg.bounds.width = Bound::none();
    cfg.h_line_kernel = {7, 2};
    cfg.conf_thresh = 0.1 + 0.2;   // not exactly representable as a short decimal
    const std::string text = dump(to_settings(cfg));
    const PipelineConfig back = apply_settings(PipelineConfig{}, parse_settings(text));
    CHECK(back == cfg);
    CHECK(dump(to_settings(back)) == text);

    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        PipelineConfig r;
        r.bilateral_diameter = 1 + 2 * int(rng.below(6));
        r.canny_low = rng.uniform(0, 100);
        r.canny_high = r.canny_low + rng.uniform(1, 100);
        r.blob_min_size = int(rng.below(200));
        r.iou_thresh = rng.uniform(0, 1);
        r.bounds.area = Bound::between(rng.uniform(0, 0.1), rng.uniform(0.1, 1));
        CHECK(apply_settings(PipelineConfig{}, parse_settings(dump(to_settings(r)))) == r);
    }
}

TEST_CASE("parse_settings")
{
    const Settings s = parse_settings("# comment\n\n  canny = 10, 20  # trailing\nfoo=bar\n");
    CHECK(s.at("canny") == "10, 20");
    CHECK(s.at("foo") == "bar");
    CHECK_THROWS_AS(parse_settings("canny 10\n"), Error);
    CHECK_THROWS_AS(parse_settings("a = 1\na = 2\n"), Error);
    CHECK_THROWS_AS(parse_settings(" = 3\n"), Error);

    const PipelineConfig c = apply_settings(PipelineConfig{}, s);
    CHECK(c.canny_low == 10);
    CHECK(c.canny_high == 20);
}

TEST_CASE("apply_settings rejects bad values")
{
    CHECK_THROWS_AS(apply_settings(PipelineConfig{}, {{"canny", "130,30"}}), Error);
    CHECK_THROWS_AS(apply_settings(PipelineConfig{}, {{"bilateral", "8,70,70"}}), Error);
    CHECK_THROWS_AS(apply_settings(PipelineConfig{}, {{"blob_min_size", "x"}}), Error);
    CHECK_THROWS_AS(apply_settings(PipelineConfig{}, {{"h_line_kernel", "10"}}), Error);
    CHECK_THROWS_AS(apply_settings(PipelineConfig{}, {{"binarization", "sauvola"}}), Error);
    CHECK_THROWS_AS(apply_settings(PipelineConfig{}, {{"area", "0.5,0.1"}}), Error);
    CHECK_NOTHROW(apply_settings(PipelineConfig{}, {{"epochs", "3"}}));
}

TEST_CASE("netpbm")
{
    const GrayImage g = parse_pgm("P2\n# c\n3 2\n255\n0 1 2\n253 254 255\n");
    CHECK(g.width() == 3);
    CHECK(g(2, 1) == 255);
    CHECK(parse_pgm(format_pgm(g)) == g);
    CHECK(parse_pgm(format_pgm(g, true)) == g);
    CHECK_THROWS_AS(parse_pgm("P2\n3 2\n255\n0 1 2\n"), Error);
    CHECK_THROWS_AS(parse_pgm("P5\n2 1\n255\nx"), Error);
    CHECK_THROWS_AS(parse_pgm("P7\n"), Error);

    const BinaryImage b = parse_pbm("P1\n3 1\n101\n");
    CHECK(b(0, 0) == 1);
    CHECK(b(1, 0) == 0);
    CHECK(parse_pbm(format_pbm(b)) == b);

    // Lower maxval is rescaled to the full 8-bit range.
    const GrayImage h = parse_pgm("P2\n2 1\n15\n0 15\n");
    CHECK(h(0, 0) == 0);
    CHECK(h(1, 0) == 255);
}

TEST_CASE("png round-trip through the file system")
{
    Rng rng(8);
    GrayImage g(13, 7);
    for (auto& v : g.pixels()) v = static_cast<std::uint8_t>(rng.below(256));
    const fs::path p = scratch("g.png");
    write_png(p, g);
    const RgbImage back = read_image(p);
    REQUIRE(back.width() == 13);
    for (int y = 0; y < 7; ++y) {
        for (int x = 0; x < 13; ++x) CHECK(back(x, y) == Rgb{g(x, y), g(x, y), g(x, y)});
    }
    write_file(scratch("junk.png"), "not an image");
    CHECK_THROWS_AS(read_image(scratch("junk.png")), Error);
    CHECK_THROWS_AS(read_image(scratch("missing.png")), Error);
    fs::remove_all(p.parent_path());
}
