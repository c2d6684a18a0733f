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

#include <algorithm>
#include <cstddef>

namespace anpr {

// Dense row-major kernels. Loop orders keep the innermost loop contiguous so
// the compiler can vectorize it; blocking over k keeps a panel of B in cache.

/// C[m x n] (+)= A[m x k] * B[k x n]
template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate)
{
    if (!accumulate) std::fill(c, c + static_cast<std::size_t>(m) * n, T(0));
    constexpr int kBlock = 128;
    for (int k0 = 0; k0 < k; k0 += kBlock) {
        const int k1 = std::min(k, k0 + kBlock);
        for (int i = 0; i < m; ++i) {
            T* __restrict crow = c + static_cast<std::size_t>(i) * n;
            const T* arow = a + static_cast<std::size_t>(i) * k;
            for (int p = k0; p < k1; ++p) {
                const T av = arow[p];
                if (av == T(0)) continue;
                const T* __restrict brow = b + static_cast<std::size_t>(p) * n;
                for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
            }
        }
    }
}

/// C[m x n] (+)= A^T * B, with A stored k x m and B stored k x n.
template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate)
{
    if (!accumulate) std::fill(c, c + static_cast<std::size_t>(m) * n, T(0));
    for (int p = 0; p < k; ++p) {
        const T* arow = a + static_cast<std::size_t>(p) * m;
        const T* __restrict brow = b + static_cast<std::size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const T av = arow[i];
            if (av == T(0)) continue;
            T* __restrict crow = c + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

/// C[m x n] (+)= A * B^T, with A stored m x k and B stored n x k.
template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate)
{
    for (int i = 0; i < m; ++i) {
        const T* __restrict arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const T* __restrict brow = b + static_cast<std::size_t>(j) * k;
            T s = 0;
            for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
            crow[j] = accumulate ? crow[j] + s : s;
        }
    }
}

/// Unfolds a (channels x height x width) image into a
/// (channels*size*size) x (out_h*out_w) matrix; out-of-range taps read zero.
template <typename T>
void im2col(const T* img, int channels, int height, int width, int size, int stride, int pad,
            T* col)
{
    const int out_h = (height + 2 * pad - size) / stride + 1;
    const int out_w = (width + 2 * pad - size) / stride + 1;
    const int rows = channels * size * size;
    for (int r = 0; r < rows; ++r) {
        const int kx = r % size, ky = (r / size) % size, ch = r / (size * size);
        T* dst = col + static_cast<std::size_t>(r) * out_h * out_w;
        const T* src = img + static_cast<std::size_t>(ch) * height * width;
        for (int oy = 0; oy < out_h; ++oy) {
            const int iy = oy * stride - pad + ky;
            for (int ox = 0; ox < out_w; ++ox) {
                const int ix = ox * stride - pad + kx;
                *dst++ = (iy >= 0 && iy < height && ix >= 0 && ix < width)
                             ? src[static_cast<std::size_t>(iy) * width + ix]
                             : T(0);
            }
        }
    }
}

/// Adjoint of im2col: scatters columns back, accumulating into img.
template <typename T>
void col2im(const T* col, int channels, int height, int width, int size, int stride, int pad,
            T* img)
{
    const int out_h = (height + 2 * pad - size) / stride + 1;
    const int out_w = (width + 2 * pad - size) / stride + 1;
    const int rows = channels * size * size;
    for (int r = 0; r < rows; ++r) {
        const int kx = r % size, ky = (r / size) % size, ch = r / (size * size);
        const T* src = col + static_cast<std::size_t>(r) * out_h * out_w;
        T* dst = img + static_cast<std::size_t>(ch) * height * width;
        for (int oy = 0; oy < out_h; ++oy) {
            const int iy = oy * stride - pad + ky;
            for (int ox = 0; ox < out_w; ++ox, ++src) {
                const int ix = ox * stride - pad + kx;
                if (iy >= 0 && iy < height && ix >= 0 && ix < width) {
                    dst[static_cast<std::size_t>(iy) * width + ix] += *src;
                }
            }
        }
    }
}

}   // anpr
