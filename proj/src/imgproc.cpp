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

#include "anpr/imgproc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numbers>
#include <numeric>

namespace anpr {

namespace {

int clampi(int v, int lo, int hi) noexcept
{
    return std::min(std::max(v, lo), hi);
}

}   // namespace

GrayImage to_grayscale(const RgbImage& img)
{
    GrayImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto& p = src[i];
        dst[i] = to_pixel(0.299 * p.r + 0.587 * p.g + 0.114 * p.b);
    }
    return out;
}

RgbImage to_rgb(const GrayImage& img)
{
    RgbImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = Rgb{src[i], src[i], src[i]};
    }
    return out;
}

GrayImage bilateral_filter(const GrayImage& img, int diameter, double sigma_color,
                           double sigma_space)
{
    ANPR_CHECK(diameter >= 1 && diameter % 2 == 1,
               "bilateral diameter must be odd and positive, got " + std::to_string(diameter));
    ANPR_CHECK(sigma_color > 0 && sigma_space > 0, "bilateral sigmas must be positive");

    const int r = diameter / 2;
    std::vector<double> spatial(static_cast<std::size_t>(diameter) * diameter);
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            spatial[(dy + r) * diameter + (dx + r)] =
                std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_space * sigma_space));
        }
    }
    std::array<double, 256> range{};
    for (int k = 0; k < 256; ++k) {
        range[k] = std::exp(-(double(k) * k) / (2.0 * sigma_color * sigma_color));
    }

    const int w = img.width(), h = img.height();
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            const int center = img(x, y);
            double num = 0, den = 0;
            for (int yy = y0; yy <= y1; ++yy) {
                const double* srow = &spatial[(yy - y + r) * diameter];
                for (int xx = x0; xx <= x1; ++xx) {
                    const int v = img(xx, yy);
                    const double wgt = srow[xx - x + r] * range[std::abs(v - center)];
                    num += wgt * v;
                    den += wgt;
                }
            }
            out(x, y) = to_pixel(num / den);
        }
    }
    return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma)
{
    if (sigma <= 0) return img;

    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * r + 1);
    for (int i = -r; i <= r; ++i) k[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    const double sum = std::accumulate(k.begin(), k.end(), 0.0);
    for (auto& v : k) v /= sum;

    const int w = img.width(), h = img.height();
    std::vector<double> tmp(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * img(clampi(x + i, 0, w - 1), y);
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0;
            for (int i = -r; i <= r; ++i) {
                acc += k[i + r] * tmp[static_cast<std::size_t>(clampi(y + i, 0, h - 1)) * w + x];
            }
            out(x, y) = to_pixel(acc);
        }
    }
    return out;
}

namespace {

struct Gradients
{
    std::vector<double> gx, gy, mag;
};

Gradients sobel(const GrayImage& img)
{
    const int w = img.width(), h = img.height();
    Gradients g;
    g.gx.resize(img.size());
    g.gy.resize(img.size());
    g.mag.resize(img.size());
    auto px = [&](int x, int y) { return double(img(clampi(x, 0, w - 1), clampi(y, 0, h - 1))); };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
            const auto i = static_cast<std::size_t>(y) * w + x;
            g.gx[i] = gx;
            g.gy[i] = gy;
            g.mag[i] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return g;
}

}   // namespace

std::vector<double> gradient_magnitude(const GrayImage& img)
{
    return sobel(img).mag;
}

BinaryImage canny(const GrayImage& img, double low, double high)
{
    ANPR_CHECK(low >= 0 && low < high, "canny thresholds require 0 <= low < high");

    const int w = img.width(), h = img.height();
    const Gradients g = sobel(img);
    auto mag = [&](int x, int y) {
        return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0
                                                   : g.mag[static_cast<std::size_t>(y) * w + x];
    };

    // 0 = suppressed, 1 = weak, 2 = strong
    std::vector<std::uint8_t> cls(img.size(), 0);
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>(y) * w + x;
            const double m = g.mag[i];
            if (m < low || m == 0) continue;

            double deg = std::atan2(g.gy[i], g.gx[i]) * 180.0 / std::numbers::pi;
            if (deg < 0) deg += 180.0;
            int dx, dy;
            if (deg < 22.5 || deg >= 157.5) {
                dx = 1, dy = 0;
            } else if (deg < 67.5) {
                dx = 1, dy = 1;
            } else if (deg < 112.5) {
                dx = 0, dy = 1;
            } else {
                dx = -1, dy = 1;
            }
            // Asymmetric comparison keeps exactly one pixel of a plateau pair.
            if (!(m > mag(x - dx, y - dy) && m >= mag(x + dx, y + dy))) continue;

            if (m >= high) {
                cls[i] = 2;
                stack.push_back(static_cast<int>(i));
            } else {
                cls[i] = 1;
            }
        }
    }

    BinaryImage out(w, h);
    auto dst = out.pixels();
    for (int i : stack) dst[i] = 1;
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % w, y = i / w;
        for (int ny = y - 1; ny <= y + 1; ++ny) {
            for (int nx = x - 1; nx <= x + 1; ++nx) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const int j = ny * w + nx;
                if (cls[j] == 1 && !dst[j]) {
                    dst[j] = 1;
                    stack.push_back(j);
                }
            }
        }
    }
    return out;
}

namespace {

// Between-class variance is proportional to D^2 / P with
// D = n1*S0 - n0*S1 and P = n0*n1; scores are compared exactly.
struct OtsuScore
{
    unsigned __int128 d2 = 0;
    std::uint64_t p = 0;
};

struct U192
{
    std::uint64_t w[3];
};

U192 mul(unsigned __int128 a, std::uint64_t b)
{
    const auto lo = static_cast<std::uint64_t>(a);
    const auto hi = static_cast<std::uint64_t>(a >> 64);
    const unsigned __int128 p0 = static_cast<unsigned __int128>(lo) * b;
    const unsigned __int128 p1 = static_cast<unsigned __int128>(hi) * b + (p0 >> 64);
    return {{static_cast<std::uint64_t>(p0), static_cast<std::uint64_t>(p1),
             static_cast<std::uint64_t>(p1 >> 64)}};
}

bool greater(const OtsuScore& a, const OtsuScore& b)
{
    if (a.p == 0) return false;
    if (b.p == 0) return a.d2 > 0;
    const U192 l = mul(a.d2, b.p);
    const U192 r = mul(b.d2, a.p);
    for (int k = 2; k >= 0; --k) {
        if (l.w[k] != r.w[k]) return l.w[k] > r.w[k];
    }
    return false;
}

}   // namespace

OtsuResult otsu_threshold(const GrayImage& img, bool invert)
{
    ANPR_CHECK(img.size() < (std::size_t{1} << 28), "image too large for exact Otsu scoring");

    std::array<std::uint64_t, 256> hist{};
    for (auto v : img.pixels()) ++hist[v];
    std::uint64_t total_sum = 0;
    for (int v = 0; v < 256; ++v) total_sum += hist[v] * v;
    const std::uint64_t n = img.size();

    int best_t = 0;
    OtsuScore best;
    std::uint64_t n0 = 0, s0 = 0;
    for (int t = 1; t < 256; ++t) {
        n0 += hist[t - 1];
        s0 += hist[t - 1] * (t - 1);
        const std::uint64_t n1 = n - n0, s1 = total_sum - s0;
        const __int128 d = static_cast<__int128>(n1) * s0 - static_cast<__int128>(n0) * s1;
        const auto ad = static_cast<unsigned __int128>(d < 0 ? -d : d);
        OtsuScore score{ad * ad, n0 * n1};
        if (greater(score, best)) {
            best = score;
            best_t = t;
        }
    }
    ANPR_CHECK(best.d2 > 0, "degenerate histogram: Otsu needs at least two distinct intensities");

    OtsuResult r{best_t, BinaryImage(img.width(), img.height())};
    auto src = img.pixels();
    auto dst = r.image.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = invert ? (src[i] < best_t) : (src[i] >= best_t);
    }
    return r;
}

BinaryImage adaptive_threshold(const GrayImage& img, int block, int c)
{
    ANPR_CHECK(block >= 3 && block % 2 == 1,
               "adaptive block must be odd and at least 3, got " + std::to_string(block));

    const int w = img.width(), h = img.height();
    std::vector<std::int64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    auto at = [&](int x, int y) -> std::int64_t& {
        return integral[static_cast<std::size_t>(y) * (w + 1) + x];
    };
    for (int y = 0; y < h; ++y) {
        std::int64_t row = 0;
        for (int x = 0; x < w; ++x) {
            row += img(x, y);
            at(x + 1, y + 1) = at(x + 1, y) + row;
        }
    }

    const int r = block / 2;
    BinaryImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
            const std::int64_t sum = at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
            const std::int64_t count = static_cast<std::int64_t>(x1 - x0) * (y1 - y0);
            // v < sum/count - c, without division
            out(x, y) = std::int64_t(img(x, y)) * count < sum - std::int64_t(c) * count;
        }
    }
    return out;
}

namespace {

// One pass of a 1-D window operation along rows (horizontal) or columns.
// The window covering pixel p spans [p - before, p + after], clipped to the image.
// Erosion requires every in-bounds sample set; dilation any.
BinaryImage window_pass(const BinaryImage& img, int before, int after, bool horizontal, bool erode)
{
    const int w = img.width(), h = img.height();
    const int len = horizontal ? w : h;
    const int lines = horizontal ? h : w;
    BinaryImage out(w, h);
    std::vector<int> prefix(len + 1);
    for (int l = 0; l < lines; ++l) {
        auto px = [&](int p) -> std::uint8_t& {
            return horizontal ? out(p, l) : out(l, p);
        };
        auto in = [&](int p) { return horizontal ? img(p, l) : img(l, p); };
        prefix[0] = 0;
        for (int p = 0; p < len; ++p) prefix[p + 1] = prefix[p] + (in(p) != 0);
        for (int p = 0; p < len; ++p) {
            const int a = std::max(0, p - before), b = std::min(len - 1, p + after);
            const int ones = prefix[b + 1] - prefix[a];
            px(p) = erode ? (ones == b - a + 1) : (ones > 0);
        }
    }
    return out;
}

BinaryImage morph(const BinaryImage& img, StructuringElement se, bool erode_op)
{
    // Anchor at (w/2, h/2). Erosion samples [p - anchor, p - anchor + size - 1];
    // dilation uses the reflected element.
    const int ax = se.width / 2, ay = se.height / 2;
    BinaryImage out = img;
    if (se.width > 1) {
        out = erode_op ? window_pass(out, ax, se.width - 1 - ax, true, true)
                       : window_pass(out, se.width - 1 - ax, ax, true, false);
    }
    if (se.height > 1) {
        out = erode_op ? window_pass(out, ay, se.height - 1 - ay, false, true)
                       : window_pass(out, se.height - 1 - ay, ay, false, false);
    }
    return out;
}

}   // namespace

BinaryImage erode(const BinaryImage& img, StructuringElement se, int iterations)
{
    BinaryImage out = img;
    for (int i = 0; i < iterations; ++i) out = morph(out, se, true);
    return out;
}

BinaryImage dilate(const BinaryImage& img, StructuringElement se, int iterations)
{
    BinaryImage out = img;
    for (int i = 0; i < iterations; ++i) out = morph(out, se, false);
    return out;
}

BinaryImage morph_open(const BinaryImage& img, StructuringElement se, int iterations)
{
    return dilate(erode(img, se, iterations), se, iterations);
}

LabelMap label_pixels(const BinaryImage& img, int connectivity)
{
    ANPR_CHECK(connectivity == 4 || connectivity == 8, "connectivity must be 4 or 8");

    const int w = img.width(), h = img.height();
    LabelMap lm{w, h, 0, std::vector<int>(img.size(), 0)};

    // Two-pass union-find over provisional labels.
    std::vector<int> parent{0};
    auto find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!img(x, y)) continue;
            int neigh[4];
            int nn = 0;
            if (x > 0 && img(x - 1, y)) neigh[nn++] = lm.labels[y * w + x - 1];
            if (y > 0 && img(x, y - 1)) neigh[nn++] = lm.labels[(y - 1) * w + x];
            if (connectivity == 8 && y > 0) {
                if (x > 0 && img(x - 1, y - 1)) neigh[nn++] = lm.labels[(y - 1) * w + x - 1];
                if (x + 1 < w && img(x + 1, y - 1)) neigh[nn++] = lm.labels[(y - 1) * w + x + 1];
            }
            int& cur = lm.labels[static_cast<std::size_t>(y) * w + x];
            if (nn == 0) {
                cur = static_cast<int>(parent.size());
                parent.push_back(cur);
                continue;
            }
            cur = neigh[0];
            for (int k = 1; k < nn; ++k) unite(cur, neigh[k]);
        }
    }

    // Compact roots into 1..count in raster order of first appearance.
    std::vector<int> remap(parent.size(), 0);
    for (auto& l : lm.labels) {
        if (l == 0) continue;
        const int root = find(l);
        if (remap[root] == 0) remap[root] = ++lm.count;
        l = remap[root];
    }
    return lm;
}

BinaryImage remove_lines(const BinaryImage& img, StructuringElement h_kernel,
                         StructuringElement v_kernel, int h_iterations, int v_iterations)
{
    ANPR_CHECK(h_iterations >= 0 && v_iterations >= 0, "line iterations must be non-negative");

    BinaryImage out = img;
    auto subtract_thin = [&](const BinaryImage& mask, bool horizontal) {
        const LabelMap lm = label_pixels(mask, 8);
        if (lm.count == 0) return;
        std::vector<int> lo(lm.count + 1, INT32_MAX), hi(lm.count + 1, -1);
        for (int y = 0; y < lm.height; ++y) {
            for (int x = 0; x < lm.width; ++x) {
                const int l = lm(x, y);
                if (!l) continue;
                const int c = horizontal ? y : x;
                lo[l] = std::min(lo[l], c);
                hi[l] = std::max(hi[l], c);
            }
        }
        for (int y = 0; y < lm.height; ++y) {
            for (int x = 0; x < lm.width; ++x) {
                const int l = lm(x, y);
                if (l && hi[l] - lo[l] + 1 <= kMaxLineThickness) out(x, y) = 0;
            }
        }
    };
    // Both masks come from the unmodified input.
    subtract_thin(morph_open(img, h_kernel, h_iterations), true);
    subtract_thin(morph_open(img, v_kernel, v_iterations), false);
    return out;
}

BinaryImage remove_small_blobs(const BinaryImage& img, int min_size)
{
    ANPR_CHECK(min_size >= 0, "min_size must be non-negative");
    if (min_size == 0) return img;

    const LabelMap lm = label_pixels(img, 8);
    std::vector<int> area(lm.count + 1, 0);
    for (int l : lm.labels) ++area[l];
    BinaryImage out(img.width(), img.height());
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const int l = lm.labels[i];
        dst[i] = l != 0 && area[l] >= min_size;
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h)
{
    ANPR_CHECK(out_w >= 1 && out_h >= 1, "resize target must be at least 1x1");
    const int w = img.width(), h = img.height();
    if (w == out_w && h == out_h) return img;

    struct Tap
    {
        int i0, i1;
        double f;
    };
    auto taps = [](int in, int out) {
        std::vector<Tap> t(out);
        const double scale = double(in) / out;
        for (int d = 0; d < out; ++d) {
            double s = (d + 0.5) * scale - 0.5;
            s = std::clamp(s, 0.0, double(in - 1));
            const int i0 = static_cast<int>(std::floor(s));
            t[d] = {i0, std::min(i0 + 1, in - 1), s - i0};
        }
        return t;
    };
    const auto tx = taps(w, out_w);
    const auto ty = taps(h, out_h);

    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const Tap& a = ty[y];
        for (int x = 0; x < out_w; ++x) {
            const Tap& b = tx[x];
            const double top = img(b.i0, a.i0) * (1 - b.f) + img(b.i1, a.i0) * b.f;
            const double bot = img(b.i0, a.i1) * (1 - b.f) + img(b.i1, a.i1) * b.f;
            out(x, y) = to_pixel(top * (1 - a.f) + bot * a.f);
        }
    }
    return out;
}

Homography invert_homography(const Homography& m)
{
    const double a = m[0], b = m[1], c = m[2];
    const double d = m[3], e = m[4], f = m[5];
    const double g = m[6], h = m[7], i = m[8];
    const double A = e * i - f * h, B = -(d * i - f * g), C = d * h - e * g;
    const double det = a * A + b * B + c * C;
    double scale = 0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    ANPR_CHECK(scale > 0 && std::abs(det) > 1e-12 * scale * scale * scale,
               "homography is singular");
    const double inv = 1.0 / det;
    return {A * inv,
            -(b * i - c * h) * inv,
            (b * f - c * e) * inv,
            B * inv,
            (a * i - c * g) * inv,
            -(a * f - c * d) * inv,
            C * inv,
            -(a * h - b * g) * inv,
            (a * e - b * d) * inv};
}

Homography multiply_homography(const Homography& a, const Homography& b)
{
    Homography r{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += a[i * 3 + k] * b[k * 3 + j];
            r[i * 3 + j] = s;
        }
    }
    return r;
}

std::array<double, 2> apply_homography(const Homography& m, double x, double y)
{
    const double w = m[6] * x + m[7] * y + m[8];
    return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
}

GrayImage warp_perspective(const GrayImage& img, const Homography& h, int out_w, int out_h,
                           std::uint8_t fill)
{
    ANPR_CHECK(out_w >= 1 && out_h >= 1, "warp target must be at least 1x1");
    const Homography inv = invert_homography(h);
    const int w = img.width(), hh = img.height();
    constexpr double eps = 1e-6;

    GrayImage out(out_w, out_h, fill);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            auto [sx, sy] = apply_homography(inv, x, y);
            if (!(sx >= -eps && sy >= -eps && sx <= w - 1 + eps && sy <= hh - 1 + eps)) continue;
            sx = std::clamp(sx, 0.0, double(w - 1));
            sy = std::clamp(sy, 0.0, double(hh - 1));
            // Snap near-integer coordinates so exact mappings stay exact.
            if (std::abs(sx - std::round(sx)) < eps) sx = std::round(sx);
            if (std::abs(sy - std::round(sy)) < eps) sy = std::round(sy);
            const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
            const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, hh - 1);
            const double fx = sx - x0, fy = sy - y0;
            const double top = img(x0, y0) * (1 - fx) + img(x1, y0) * fx;
            const double bot = img(x0, y1) * (1 - fx) + img(x1, y1) * fx;
            out(x, y) = to_pixel(top * (1 - fy) + bot * fy);
        }
    }
    return out;
}

Homography homography_from_points(const std::array<std::array<double, 2>, 4>& from,
                                  const std::array<std::array<double, 2>, 4>& to)
{
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    for (int i = 0; i < 4; ++i) {
        const double x = from[i][0], y = from[i][1], u = to[i][0], v = to[i][1];
        a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
        a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
        b(2 * i) = u;
        b(2 * i + 1) = v;
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
    ANPR_CHECK(lu.isInvertible(), "degenerate point correspondence for homography");
    const Eigen::Matrix<double, 8, 1> s = lu.solve(b);
    return {s(0), s(1), s(2), s(3), s(4), s(5), s(6), s(7), 1.0};
}

Homography rotation_homography(double degrees, double cx, double cy)
{
    const double t = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(t), s = std::sin(t);
    // y grows downward, so a positive angle turns content counter-clockwise on screen.
    return {c, s, cx - c * cx - s * cy, -s, c, cy + s * cx - c * cy, 0, 0, 1};
}

std::uint8_t border_mean(const GrayImage& img)
{
    const int w = img.width(), h = img.height();
    std::uint64_t sum = 0, n = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
                sum += img(x, y);
                ++n;
            }
        }
    }
    return to_pixel(double(sum) / double(n));
}

}   // anpr
