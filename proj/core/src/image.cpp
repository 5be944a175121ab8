// SPDX-License-Identifier: Apache-2.0
#include "fsdet/image.hpp"

#include <png.h>

#include <cstdio>
#include <csetjmp>
#include <memory>
#include <stdexcept>

#include <jpeglib.h>

namespace fsdet {

Image Image::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Image img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = r;
        img.rgb[i + 1] = g;
        img.rgb[i + 2] = b;
    }
    return img;
}

Image resize_nearest(const Image& src, int out_w, int out_h) {
    if (!src.valid() || out_w <= 0 || out_h <= 0)
        throw std::invalid_argument("resize_nearest: invalid input");
    Image out;
    out.width = out_w;
    out.height = out_h;
    out.rgb.resize(static_cast<std::size_t>(out_w) * out_h * 3);
    for (int y = 0; y < out_h; ++y) {
        int sy = static_cast<int>((static_cast<long long>(y) * src.height) / out_h);
        for (int x = 0; x < out_w; ++x) {
            int sx = static_cast<int>((static_cast<long long>(x) * src.width) / out_w);
            const std::uint8_t* p = src.pixel(sx, sy);
            std::uint8_t* q = out.pixel(x, y);
            q[0] = p[0];
            q[1] = p[1];
            q[2] = p[2];
        }
    }
    return out;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open file: " + path);
    return f;
}

// Reads any PNG color type, expanding to either 8-bit RGB or 8-bit gray.
void read_png_raw(const std::string& path, bool want_gray, int& w, int& h,
                  std::vector<std::uint8_t>& out) {
    FilePtr f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("PNG decode error: " + path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_packing(png);
    png_set_strip_alpha(png);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (want_gray) {
        if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    } else {
        if (!(color & PNG_COLOR_MASK_COLOR)) png_set_gray_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
            png_set_expand_gray_1_2_4_to_8(png);
    }
    png_read_update_info(png, info);

    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    const int channels = want_gray ? 1 : 3;
    out.resize(static_cast<std::size_t>(w) * h * channels);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = out.data() + static_cast<std::size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
}

struct JpegErr {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char msg[JMSG_LENGTH_MAX] = {};
};

void jpeg_error_trampoline(j_common_ptr ci) {
    auto* err = reinterpret_cast<JpegErr*>(ci->err);
    (*ci->err->format_message)(ci, err->msg);
    std::longjmp(err->jump, 1);
}

Image read_jpeg(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    jpeg_decompress_struct cinfo;
    JpegErr err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_trampoline;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("JPEG decode error (" + path + "): " + err.msg);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    Image img;
    img.width = static_cast<int>(cinfo.output_width);
    img.height = static_cast<int>(cinfo.output_height);
    img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.rgb.data() +
                       static_cast<std::size_t>(cinfo.output_scanline) * img.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

}  // namespace

Image read_image(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    unsigned char sig[8] = {};
    const std::size_t n = std::fread(sig, 1, 8, f.get());
    f.reset();
    if (n >= 8 && png_sig_cmp(sig, 0, 8) == 0) {
        Image img;
        read_png_raw(path, false, img.width, img.height, img.rgb);
        return img;
    }
    if (n >= 2 && sig[0] == 0xFF && sig[1] == 0xD8) return read_jpeg(path);
    throw std::runtime_error("unsupported image format (expect PNG or baseline JPEG): " + path);
}

Mask read_mask_png(const std::string& path) {
    Mask m;
    read_png_raw(path, true, m.width, m.height, m.value);
    return m;
}

namespace {

void write_png_raw(const std::string& path, int w, int h, int channels,
                   const std::uint8_t* data) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encode error: " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, w, h, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<std::uint8_t*>(data) + static_cast<std::size_t>(y) * w * channels;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
    if (!img.valid()) throw std::invalid_argument("write_png: invalid image");
    write_png_raw(path, img.width, img.height, 3, img.rgb.data());
}

void write_mask_png(const std::string& path, const Mask& mask) {
    if (mask.empty()) throw std::invalid_argument("write_mask_png: empty mask");
    write_png_raw(path, mask.width, mask.height, 1, mask.value.data());
}

}  // namespace fsdet
