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
#include <cmath>
#include <cstdint>
#include <vector>

#include "anpr/image.hpp"

namespace anpr {

/// Round half up and clamp to the 8-bit range. Every stage that produces
/// integer pixels from real arithmetic goes through here.
inline std::uint8_t to_pixel(double v) noexcept
{
    const double r = std::floor(v + 0.5);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

/// All-ones rectangular structuring element.
struct StructuringElement
{
    int width = 1;
    int height = 1;

    StructuringElement() = default;
    StructuringElement(int w, int h) : width(w), height(h)
    {
        ANPR_CHECK(w >= 1 && h >= 1, "structuring element must be at least 1x1");
    }
    friend bool operator==(const StructuringElement&, const StructuringElement&) = default;
};

/// Row-major 3x3 projective transform mapping source to destination coordinates.
using Homography = std::array<double, 9>;

constexpr Homography kIdentityHomography{1, 0, 0, 0, 1, 0, 0, 0, 1};

// Color and filtering

/// BT.601 luma.
GrayImage to_grayscale(const RgbImage& img);

/// Replicates the gray channel into all three.
RgbImage to_rgb(const GrayImage& img);

/// Edge-preserving smoothing over a diameter x diameter window. The window is
/// clipped at the borders and the weights renormalized.
GrayImage bilateral_filter(const GrayImage& img, int diameter, double sigma_color,
                           double sigma_space);

/// Separable Gaussian blur, replicated borders, kernel radius ceil(3 sigma).
/// sigma <= 0 returns the input unchanged.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

// Edges

/// L2 magnitude of the 3x3 Sobel gradient with replicated borders.
std::vector<double> gradient_magnitude(const GrayImage& img);

/// Canny edge map: Sobel, L2 magnitude, 4-direction non-maximum suppression and
/// 8-connected hysteresis. No internal smoothing.
BinaryImage canny(const GrayImage& img, double low, double high);

// Thresholding

struct OtsuResult
{
    int threshold = 0;
    BinaryImage image;
};

/// Global threshold maximizing between-class variance, class 0 = pixels < t.
/// The smallest maximizing t wins. With `invert` the foreground is the dark
/// class (pixels < t), otherwise pixels >= t. Throws on a single-valued image.
OtsuResult otsu_threshold(const GrayImage& img, bool invert = true);

/// Foreground iff the pixel is darker than its clipped block x block mean minus c.
BinaryImage adaptive_threshold(const GrayImage& img, int block = 11, int c = 2);

// Morphology

BinaryImage erode(const BinaryImage& img, StructuringElement se, int iterations = 1);
BinaryImage dilate(const BinaryImage& img, StructuringElement se, int iterations = 1);

/// `iterations` erosions followed by as many dilations (reflected element).
BinaryImage morph_open(const BinaryImage& img, StructuringElement se, int iterations = 1);

/// Subtracts thin horizontal and vertical lines. Each kernel's opening marks
/// line candidates; candidate components at most kMaxLineThickness thick
/// across the line direction are erased from the input.
BinaryImage remove_lines(const BinaryImage& img, StructuringElement h_kernel,
                         StructuringElement v_kernel, int h_iterations, int v_iterations);

inline BinaryImage remove_lines(const BinaryImage& img, StructuringElement h_kernel,
                                StructuringElement v_kernel, int iterations)
{
    return remove_lines(img, h_kernel, v_kernel, iterations, iterations);
}

inline constexpr int kMaxLineThickness = 3;

/// Erases every 8-connected foreground component with area < min_size.
BinaryImage remove_small_blobs(const BinaryImage& img, int min_size);

// Labeling

/// Dense label map, 0 = background, components numbered 1..count in raster
/// order of their first pixel.
struct LabelMap
{
    int width = 0;
    int height = 0;
    int count = 0;
    std::vector<int> labels;

    int operator()(int x, int y) const noexcept
    {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

LabelMap label_pixels(const BinaryImage& img, int connectivity = 8);

// Geometry

/// Bilinear resampling with half-pixel-centered coordinates, clamped borders.
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

/// Inverse-mapped projective warp; samples outside the source take `fill`.
GrayImage warp_perspective(const GrayImage& img, const Homography& h, int out_w, int out_h,
                           std::uint8_t fill);

Homography invert_homography(const Homography& h);
Homography multiply_homography(const Homography& a, const Homography& b);

/// Maps (x, y) through h, with the projective divide.
std::array<double, 2> apply_homography(const Homography& h, double x, double y);

/// Homography taking the four `from` points onto the four `to` points.
Homography homography_from_points(const std::array<std::array<double, 2>, 4>& from,
                                  const std::array<std::array<double, 2>, 4>& to);

/// Rotation by `degrees` (counter-clockwise on screen) about (cx, cy).
Homography rotation_homography(double degrees, double cx, double cy);

/// Mean of the outermost ring of pixels, rounded.
std::uint8_t border_mean(const GrayImage& img);

}   // anpr
