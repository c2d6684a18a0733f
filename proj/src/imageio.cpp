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

#include "anpr/imageio.hpp"

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <sstream>

#include <jpeglib.h>

namespace anpr {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path)
{
    std::ifstream ifs(path, std::ios::binary);
    ANPR_CHECK(ifs.good(), "could not open \"" + path.string() + "\"");
    std::ostringstream ss;
    ss << ifs.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes)
{
    std::ofstream ofs(path, std::ios::binary | std::ios::trunc);
    ANPR_CHECK(ofs.good(), "could not create \"" + path.string() + "\"");
    ofs.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    ANPR_CHECK(ofs.good(), "write failed for \"" + path.string() + "\"");
}

namespace {

// Tokenizer for netpbm headers and plain bodies: whitespace and '#' comments.
class PnmReader
{
public:
    explicit PnmReader(std::string_view s) : s_(s) {}

    std::string magic()
    {
        ANPR_CHECK(s_.size() >= 2 && s_[0] == 'P', "not a netpbm stream");
        pos_ = 2;
        return std::string(s_.substr(0, 2));
    }

    int integer()
    {
        skip();
        ANPR_CHECK(pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])),
                   "malformed netpbm stream");
        long v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + (s_[pos_++] - '0');
            ANPR_CHECK(v < (1L << 30), "netpbm value out of range");
        }
        return static_cast<int>(v);
    }

    // Plain PBM allows packed digits without separators.
    int bit()
    {
        skip();
        ANPR_CHECK(pos_ < s_.size() && (s_[pos_] == '0' || s_[pos_] == '1'),
                   "malformed plain PBM body");
        return s_[pos_++] - '0';
    }

    // Exactly one whitespace byte separates the header from a raw body.
    std::string_view raw(std::size_t n)
    {
        ANPR_CHECK(pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])),
                   "malformed netpbm header");
        ++pos_;
        ANPR_CHECK(s_.size() - pos_ >= n, "truncated netpbm body");
        auto r = s_.substr(pos_, n);
        pos_ += n;
        return r;
    }

private:
    void skip()
    {
        while (pos_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            } else if (s_[pos_] == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

RgbImage parse_ppm(std::string_view bytes)
{
    PnmReader rd(bytes);
    const auto magic = rd.magic();
    const int w = rd.integer(), h = rd.integer(), maxval = rd.integer();
    ANPR_CHECK(maxval >= 1 && maxval <= 255, "only 8-bit PPM is supported");
    RgbImage img(w, h);
    auto dst = img.pixels();
    auto scale = [&](int v) { return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval); };
    if (magic == "P6") {
        auto body = rd.raw(dst.size() * 3);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = {scale(static_cast<std::uint8_t>(body[3 * i])),
                      scale(static_cast<std::uint8_t>(body[3 * i + 1])),
                      scale(static_cast<std::uint8_t>(body[3 * i + 2]))};
        }
    } else {
        for (auto& p : dst) {
            const int r = rd.integer(), g = rd.integer(), b = rd.integer();
            ANPR_CHECK(r <= maxval && g <= maxval && b <= maxval, "PPM sample exceeds maxval");
            p = {scale(r), scale(g), scale(b)};
        }
    }
    return img;
}

}   // namespace

GrayImage parse_pgm(std::string_view bytes)
{
    PnmReader rd(bytes);
    const auto magic = rd.magic();
    if (magic == "P1" || magic == "P4") {
        // Bitmaps read as gray: ink (1) is black.
        const BinaryImage b = parse_pbm(bytes);
        GrayImage g(b.width(), b.height());
        for (std::size_t i = 0; i < b.size(); ++i) g.pixels()[i] = b.pixels()[i] ? 0 : 255;
        return g;
    }
    ANPR_CHECK(magic == "P2" || magic == "P5", "unsupported PGM magic " + magic);
    const int w = rd.integer(), h = rd.integer(), maxval = rd.integer();
    ANPR_CHECK(maxval >= 1 && maxval <= 255, "only 8-bit PGM is supported");
    GrayImage img(w, h);
    auto dst = img.pixels();
    if (magic == "P5") {
        auto body = rd.raw(dst.size());
        std::memcpy(dst.data(), body.data(), dst.size());
        for (auto v : dst) ANPR_CHECK(v <= maxval, "PGM sample exceeds maxval");
    } else {
        for (auto& v : dst) {
            const int s = rd.integer();
            ANPR_CHECK(s <= maxval, "PGM sample exceeds maxval");
            v = static_cast<std::uint8_t>(s);
        }
    }
    if (maxval != 255) {
        for (auto& v : dst) v = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    }
    return img;
}

std::string format_pgm(const GrayImage& img, bool plain)
{
    std::string out = (plain ? "P2\n" : "P5\n") + std::to_string(img.width()) + " " +
                      std::to_string(img.height()) + "\n255\n";
    if (!plain) {
        out.append(reinterpret_cast<const char*>(img.pixels().data()), img.size());
        return out;
    }
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (x) out += ' ';
            out += std::to_string(img(x, y));
        }
        out += '\n';
    }
    return out;
}

BinaryImage parse_pbm(std::string_view bytes)
{
    PnmReader rd(bytes);
    const auto magic = rd.magic();
    ANPR_CHECK(magic == "P1" || magic == "P4", "unsupported PBM magic " + magic);
    const int w = rd.integer(), h = rd.integer();
    BinaryImage img(w, h);
    if (magic == "P1") {
        for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rd.bit());
        return img;
    }
    const std::size_t stride = (static_cast<std::size_t>(w) + 7) / 8;
    auto body = rd.raw(stride * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto byte = static_cast<std::uint8_t>(body[y * stride + x / 8]);
            img(x, y) = (byte >> (7 - x % 8)) & 1;
        }
    }
    return img;
}

std::string format_pbm(const BinaryImage& img)
{
    std::string out = "P1\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n";
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (x) out += ' ';
            out += img(x, y) ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

GrayImage read_pgm(const fs::path& path)
{
    return parse_pgm(read_file(path));
}

void write_pgm(const fs::path& path, const GrayImage& img, bool plain)
{
    write_file(path, format_pgm(img, plain));
}

BinaryImage read_pbm(const fs::path& path)
{
    return parse_pbm(read_file(path));
}

void write_pbm(const fs::path& path, const BinaryImage& img)
{
    write_file(path, format_pbm(img));
}

namespace {

RgbImage decode_png(const std::string& bytes)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    ANPR_CHECK(png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()),
               std::string("PNG decode failed: ") + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error("PNG decode failed: " + msg);
    }
    RgbImage img(static_cast<int>(image.width), static_cast<int>(image.height));
    auto dst = img.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
    return img;
}

struct JpegError
{
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo)
{
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// Only trivially destructible locals live between setjmp and longjmp.
bool decode_jpeg_raw(const std::string& bytes, std::vector<std::uint8_t>& out, int& w, int& h,
                     char* message)
{
    jpeg_decompress_struct cinfo;
    JpegError err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        std::memcpy(message, err.message, JMSG_LENGTH_MAX);
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, reinterpret_cast<const unsigned char*>(bytes.data()),
                 static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    w = static_cast<int>(cinfo.output_width);
    h = static_cast<int>(cinfo.output_height);
    out.resize(static_cast<std::size_t>(w) * h * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

RgbImage decode_jpeg(const std::string& bytes)
{
    std::vector<std::uint8_t> buf;
    int w = 0, h = 0;
    char message[JMSG_LENGTH_MAX] = {};
    ANPR_CHECK(decode_jpeg_raw(bytes, buf, w, h, message),
               std::string("JPEG decode failed: ") + message);
    RgbImage img(w, h);
    auto dst = img.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
    return img;
}

}   // namespace

RgbImage read_image(const fs::path& path)
{
    const std::string bytes = read_file(path);
    try {
        if (bytes.size() >= 8 && std::memcmp(bytes.data(), "\x89PNG\r\n\x1a\n", 8) == 0) {
            return decode_png(bytes);
        }
        if (bytes.size() >= 3 && std::memcmp(bytes.data(), "\xff\xd8\xff", 3) == 0) {
            return decode_jpeg(bytes);
        }
        if (bytes.size() >= 2 && bytes[0] == 'P') {
            if (bytes[1] == '3' || bytes[1] == '6') return parse_ppm(bytes);
            const GrayImage g = parse_pgm(bytes);
            RgbImage img(g.width(), g.height());
            for (std::size_t i = 0; i < g.size(); ++i) {
                const auto v = g.pixels()[i];
                img.pixels()[i] = {v, v, v};
            }
            return img;
        }
    } catch (const Error& e) {
        throw Error("\"" + path.string() + "\": " + e.what());
    }
    throw Error("\"" + path.string() + "\": unrecognized image format");
}

void write_png(std::FILE* fp, const GrayImage& img)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    ANPR_CHECK(png_image_write_to_stdio(&image, fp, 0, img.pixels().data(), 0, nullptr),
               std::string("PNG encode failed: ") + image.message);
}

void write_png(const fs::path& path, const GrayImage& img)
{
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    ANPR_CHECK(fp, "could not create \"" + path.string() + "\"");
    try {
        write_png(fp, img);
    } catch (...) {
        std::fclose(fp);
        throw;
    }
    ANPR_CHECK(std::fclose(fp) == 0, "write failed for \"" + path.string() + "\"");
}

}   // anpr
