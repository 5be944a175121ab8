// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fsdet {

/// Row-major 8-bit RGB image buffer.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // width * height * 3

    static Image filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* pixel(int x, int y) const {
        return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
    bool valid() const {
        return width > 0 && height > 0 && rgb.size() == static_cast<std::size_t>(width) * height * 3;
    }
    bool operator==(const Image&) const = default;
};

/// Single-channel 8-bit buffer; nonzero marks foreground object pixels.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> value;  // width * height

    static Mask zeros(int w, int h) { return Mask{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)}; }

    std::uint8_t& at(int x, int y) { return value[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return value[static_cast<std::size_t>(y) * width + x]; }
    bool empty() const { return value.empty(); }
    bool operator==(const Mask&) const = default;
};

/// Nearest-neighbor resize; keeps pixel-exact oracles possible.
Image resize_nearest(const Image& src, int out_w, int out_h);

Image read_image(const std::string& path);          // PNG or baseline JPEG by signature
Mask read_mask_png(const std::string& path);        // grayscale PNG
void write_png(const std::string& path, const Image& img);
void write_mask_png(const std::string& path, const Mask& mask);

}  // namespace fsdet
