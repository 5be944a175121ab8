// SPDX-License-Identifier: Apache-2.0
#include "fsdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fsdet/rng.hpp"

namespace fsdet {

namespace {

struct ShapePixels {
    std::vector<std::pair<int, int>> pixels;
    BoundingBox bbox() const {
        int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
        for (auto [x, y] : pixels) {
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
        return BoundingBox{static_cast<double>(x0), static_cast<double>(y0),
                           static_cast<double>(x1 + 1), static_cast<double>(y1 + 1)};
    }
};

// Rasterizes one shape of extent `size` at top-left (ox, oy); pixel centers.
ShapePixels rasterize(ShapeKind kind, int ox, int oy, int size) {
    ShapePixels out;
    const double half = size / 2.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            bool in = false;
            switch (kind) {
                case ShapeKind::Square:
                    in = true;
                    break;
                case ShapeKind::Circle: {
                    const double dx = px - half, dy = py - half;
                    in = dx * dx + dy * dy <= half * half;
                    break;
                }
                case ShapeKind::Triangle: {
                    // apex at top center, base along the bottom edge
                    const double t = py / size;  // 0 at apex row, 1 at base
                    const double hw = t * half;
                    in = px >= half - hw && px <= half + hw;
                    break;
                }
            }
            if (in) out.pixels.emplace_back(ox + x, oy + y);
        }
    }
    return out;
}

void paint(Image& img, const ShapePixels& sp, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    for (auto [x, y] : sp.pixels) {
        std::uint8_t* p = img.pixel(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
}

Image make_background(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                      int noise_amplitude, Rng& rng) {
    Image img = Image::filled(w, h, r, g, b);
    if (noise_amplitude > 0) {
        for (auto& v : img.rgb) {
            const int n = static_cast<int>(rng.uniform_int(-noise_amplitude, noise_amplitude));
            v = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + n, 0, 255));
        }
    }
    return img;
}

std::uint8_t jitter(std::uint8_t v, Rng& rng, int amount) {
    return static_cast<std::uint8_t>(
        std::clamp(static_cast<int>(v) + static_cast<int>(rng.uniform_int(-amount, amount)), 0, 255));
}

// Places a shape avoiding heavy overlap with already-placed boxes. Returns
// false when no position was found.
bool place_shape(Rng& rng, int img_w, int img_h, int size,
                 const std::vector<BoundingBox>& taken, double max_iou, int& ox, int& oy) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        ox = static_cast<int>(rng.uniform_int(0, img_w - size));
        oy = static_cast<int>(rng.uniform_int(0, img_h - size));
        const BoundingBox cand{static_cast<double>(ox), static_cast<double>(oy),
                               static_cast<double>(ox + size), static_cast<double>(oy + size)};
        bool ok = true;
        for (const auto& t : taken)
            if (iou(cand, t) > max_iou) ok = false;
        if (ok) return true;
    }
    return false;
}

ShapeKind random_kind(Rng& rng) {
    switch (rng.uniform_int(0, 2)) {
        case 0: return ShapeKind::Circle;
        case 1: return ShapeKind::Square;
        default: return ShapeKind::Triangle;
    }
}

}  // namespace

BoundingBox mask_label_bbox(const Mask& mask, std::uint8_t label) {
    int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(x, y) == label) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
        }
    }
    if (x1 < 0) throw std::invalid_argument("mask label " + std::to_string(label) + " not present");
    return BoundingBox{static_cast<double>(x0), static_cast<double>(y0),
                       static_cast<double>(x1 + 1), static_cast<double>(y1 + 1)};
}

DatasetIndex generate_synthetic_dataset(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.categories.empty())
        throw std::invalid_argument("generate_synthetic_dataset: no categories");
    if (spec.width < 32 || spec.height < 32)
        throw std::invalid_argument("generate_synthetic_dataset: image size must be >= 32x32");
    if (spec.max_size > std::min(spec.width, spec.height))
        throw std::invalid_argument("generate_synthetic_dataset: shape larger than image");
    if (spec.min_size < 4 || spec.min_size > spec.max_size || spec.min_shapes < 1 ||
        spec.min_shapes > spec.max_shapes || spec.image_count < 1)
        throw std::invalid_argument("generate_synthetic_dataset: inconsistent spec");

    std::vector<std::string> names;
    for (const auto& c : spec.categories) names.push_back(c.name);

    DatasetIndex out;
    out.categories = CategoryRegistry(names);
    out.provenance = "synth:seed=" + std::to_string(seed);

    const int n_cat = static_cast<int>(spec.categories.size());
    for (int i = 0; i < spec.image_count; ++i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "%s_%05d", spec.id_prefix.c_str(), i);
        ImageRecord rec;
        rec.id = idbuf;
        rec.width = spec.width;
        rec.height = spec.height;

        Rng rng(derive_seed(seed, rec.id));
        rec.pixels = make_background(spec.width, spec.height, spec.bg_r, spec.bg_g, spec.bg_b,
                                     spec.noise_amplitude, rng);
        rec.mask = Mask::zeros(spec.width, spec.height);

        std::vector<BoundingBox> taken;

        // distractors first, underneath the annotated objects
        for (int d = 0; d < spec.distractors; ++d) {
            const int size =
                static_cast<int>(rng.uniform_int(spec.min_size, spec.max_size));
            int ox, oy;
            if (!place_shape(rng, spec.width, spec.height, size, taken, 0.05, ox, oy)) continue;
            const ShapePixels sp = rasterize(random_kind(rng), ox, oy, size);
            const std::uint8_t v = static_cast<std::uint8_t>(rng.uniform_int(40, 200));
            paint(rec.pixels, sp, v, jitter(v, rng, 30), jitter(v, rng, 30));
            taken.push_back(sp.bbox());
        }

        const int n_shapes =
            static_cast<int>(rng.uniform_int(spec.min_shapes, spec.max_shapes));
        for (int s = 0; s < n_shapes; ++s) {
            // round-robin on the first shape keeps categories balanced
            const int cat_idx = (s == 0) ? i % n_cat
                                         : static_cast<int>(rng.uniform_int(0, n_cat - 1));
            const SynthCategory& cat = spec.categories[cat_idx];
            const int size =
                static_cast<int>(rng.uniform_int(spec.min_size, spec.max_size));
            int ox, oy;
            // annotated shapes never overlap anything already drawn, so every
            // mask label keeps all its pixels and mask bbox == annotation box
            if (!place_shape(rng, spec.width, spec.height, size, taken, 0.0, ox, oy)) continue;
            const ShapePixels sp = rasterize(cat.shape, ox, oy, size);
            if (sp.pixels.empty()) continue;
            paint(rec.pixels, sp, jitter(cat.r, rng, 20), jitter(cat.g, rng, 20),
                  jitter(cat.b, rng, 20));
            const std::uint8_t label = static_cast<std::uint8_t>(rec.annotations.size() + 1);
            for (auto [x, y] : sp.pixels) rec.mask.at(x, y) = label;
            // box from the rasterized pixels, so mask bbox == annotation box holds
            rec.annotations.push_back(Annotation{cat.name, sp.bbox(), false});
            taken.push_back(sp.bbox());
        }

        rec.validate();
        out.records.push_back(std::move(rec));
    }
    out.sort_records();
    return out;
}

std::vector<ImageRecord> generate_background_pool(int count, int width, int height,
                                                  int regions_per_image,
                                                  const std::string& region_category,
                                                  std::uint64_t seed) {
    if (count < 1 || regions_per_image < 1)
        throw std::invalid_argument("generate_background_pool: invalid counts");
    std::vector<ImageRecord> out;
    for (int i = 0; i < count; ++i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "bg_%05d", i);
        ImageRecord rec;
        rec.id = idbuf;
        rec.width = width;
        rec.height = height;
        Rng rng(derive_seed(seed, rec.id));
        rec.pixels = make_background(width, height, 60, 110, 70, 20, rng);
        std::vector<BoundingBox> taken;
        // clutter shapes; region boxes outline a subset of them
        const int clutter = regions_per_image + 3;
        for (int c = 0; c < clutter; ++c) {
            const int size = static_cast<int>(
                rng.uniform_int(10, std::max(11, std::min(width, height) / 3)));
            int ox, oy;
            if (!place_shape(rng, width, height, size, taken, 0.05, ox, oy)) continue;
            const ShapePixels sp = rasterize(random_kind(rng), ox, oy, size);
            const std::uint8_t g = static_cast<std::uint8_t>(rng.uniform_int(90, 180));
            paint(rec.pixels, sp, static_cast<std::uint8_t>(g / 2), g,
                  static_cast<std::uint8_t>(g / 2));
            if (static_cast<int>(rec.annotations.size()) < regions_per_image)
                rec.annotations.push_back(Annotation{region_category, sp.bbox(), false});
            taken.push_back(sp.bbox());
        }
        // guarantee the region-count contract even if placement got unlucky
        while (static_cast<int>(rec.annotations.size()) < regions_per_image) {
            const double w2 = width / 2.0, h2 = height / 2.0;
            rec.annotations.push_back(Annotation{
                region_category,
                BoundingBox{w2 - width / 4.0, h2 - height / 4.0, w2 + width / 4.0,
                            h2 + height / 4.0},
                false});
        }
        rec.validate();
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace fsdet
