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

#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>

#include "anpr/image.hpp"

namespace anpr {

// Netpbm. Readers accept P1/P2/P5 (gray) and P1/P4 (binary); maxval must be <= 255.
// Writers produce binary P5 by default, plain P2 on request, and plain P1 for bitmaps.

GrayImage parse_pgm(std::string_view bytes);
std::string format_pgm(const GrayImage& img, bool plain = false);
BinaryImage parse_pbm(std::string_view bytes);
std::string format_pbm(const BinaryImage& img);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img, bool plain = false);
BinaryImage read_pbm(const std::filesystem::path& path);
void write_pbm(const std::filesystem::path& path, const BinaryImage& img);

/// Decodes PNG, JPEG, PPM/PGM/PBM by content sniffing.
RgbImage read_image(const std::filesystem::path& path);

/// 8-bit grayscale PNG onto an already-open stream.
void write_png(std::FILE* fp, const GrayImage& img);
void write_png(const std::filesystem::path& path, const GrayImage& img);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}   // anpr
