// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsdet/dataset.hpp"

namespace fsdet {

/// Flat-shaded primitives; exact boxes and masks are recovered by pixel scan.
enum class ShapeKind { Circle, Square, Triangle };

struct SynthCategory {
    std::string name;
    ShapeKind shape = ShapeKind::Circle;
    std::uint8_t r = 255, g = 0, b = 0;
};

struct SynthSpec {
    std::vector<SynthCategory> categories;
    int image_count = 10;
    int width = 64;
    int height = 64;
    int min_shapes = 1;          // annotated shapes per image
    int max_shapes = 1;
    int min_size = 14;           // shape extent in pixels
    int max_size = 28;
    std::uint8_t bg_r = 96, bg_g = 112, bg_b = 96;
    int noise_amplitude = 8;     // per-pixel uniform background noise
    int distractors = 0;         // rendered but unannotated shapes (context clutter)
    std::string id_prefix = "synth";
};

/// Deterministic function of (spec, seed). Every record carries pixels, an
/// exact foreground mask (labels 1..n per annotated object) and annotations
/// whose boxes equal the pixel-scan bounding box of the object's mask label.
/// Distractor shapes are rendered but neither annotated nor masked,
/// emulating imagery where only foreground targets are labeled.
DatasetIndex generate_synthetic_dataset(const SynthSpec& spec, std::uint64_t seed);

/// Background-only images (clutter, no category objects) for the
/// background-replacement and target-background augmentations. Each record
/// carries `regions_per_image` region boxes labeled `region_category`,
/// outlining clutter patches.
std::vector<ImageRecord> generate_background_pool(int count, int width, int height,
                                                  int regions_per_image,
                                                  const std::string& region_category,
                                                  std::uint64_t seed);

/// Pixel-scan bounding box of one mask label; throws if the label is absent.
BoundingBox mask_label_bbox(const Mask& mask, std::uint8_t label);

}  // namespace fsdet
