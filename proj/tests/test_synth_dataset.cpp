// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fsdet/synth.hpp"
#include "fsdet/voc.hpp"

using namespace fsdet;

namespace {

SynthSpec three_category_spec(int images = 10) {
    SynthSpec spec;
    spec.categories = {{"alpha", ShapeKind::Circle, 220, 50, 40},
                       {"beta", ShapeKind::Square, 40, 70, 220},
                       {"gamma", ShapeKind::Triangle, 230, 210, 40}};
    spec.image_count = images;
    return spec;
}

}  // namespace

TEST_CASE("registry rejects duplicates and resolves indices") {
    CHECK_THROWS_AS(CategoryRegistry({"a", "b", "a"}), std::invalid_argument);
    const CategoryRegistry reg({"a", "b"});
    CHECK(reg.index_of("b") == 1);
    CHECK(reg.contains("a"));
    CHECK_FALSE(reg.contains("z"));
    try {
        reg.index_of("z");
        FAIL("expected error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("z") != std::string::npos);
    }
    CategoryRegistry r2 = reg;
    r2.replace("a", "c");
    CHECK(r2.at(0) == "c");
    CHECK(r2.size() == 2);
    CHECK_THROWS_AS(r2.replace("missing", "x"), std::invalid_argument);
    CHECK_THROWS_AS(r2.replace("c", "b"), std::invalid_argument);
}

TEST_CASE("dataset index bookkeeping") {
    DatasetIndex data = generate_synthetic_dataset(three_category_spec(6), 1);
    data.validate();
    CHECK(data.records.size() == 6);
    CHECK(data.by_id(data.records[2].id).id == data.records[2].id);
    CHECK_THROWS_AS(data.by_id("nope"), std::invalid_argument);
    std::size_t total = 0;
    for (const auto& name : data.categories.names())
        total += data.category_box_counts(name).first;
    CHECK(total == data.annotation_count());
    // duplicate ids rejected
    data.records.push_back(data.records[0]);
    CHECK_THROWS_AS(data.validate(), std::invalid_argument);
}

TEST_CASE("synthetic generation is deterministic") {
    const SynthSpec spec = three_category_spec(10);
    const DatasetIndex a = generate_synthetic_dataset(spec, 7);
    const DatasetIndex b = generate_synthetic_dataset(spec, 7);
    REQUIRE(a.records.size() == 10);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].pixels == b.records[i].pixels);
        CHECK(a.records[i].annotations == b.records[i].annotations);
        CHECK(a.records[i].mask == b.records[i].mask);
    }
    const DatasetIndex c = generate_synthetic_dataset(spec, 8);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
        if (!(a.records[i].pixels == c.records[i].pixels)) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("single-category spec yields one annotation per image") {
    SynthSpec spec = three_category_spec(10);
    spec.categories.resize(1);
    const DatasetIndex data = generate_synthetic_dataset(spec, 7);
    CHECK(data.records.size() == 10);
    CHECK(data.annotation_count() == 10);
}

TEST_CASE("mask label bounding box equals the annotation box") {
    SynthSpec spec = three_category_spec(12);
    spec.min_shapes = 1;
    spec.max_shapes = 3;
    const DatasetIndex data = generate_synthetic_dataset(spec, 3);
    for (const auto& rec : data.records) {
        REQUIRE(rec.has_mask());
        for (std::size_t i = 0; i < rec.annotations.size(); ++i) {
            const BoundingBox mb = mask_label_bbox(rec.mask, static_cast<std::uint8_t>(i + 1));
            CHECK(mb == rec.annotations[i].box);
        }
    }
    CHECK_THROWS_AS(mask_label_bbox(data.records[0].mask, 250), std::invalid_argument);
}

TEST_CASE("distractors are rendered but not annotated or masked") {
    SynthSpec plain = three_category_spec(8);
    SynthSpec cluttered = plain;
    cluttered.distractors = 3;
    const DatasetIndex b = generate_synthetic_dataset(cluttered, 5);
    bool any_annotated = false;
    for (const auto& rec : b.records) {
        CHECK(rec.annotations.size() <= static_cast<std::size_t>(cluttered.max_shapes));
        any_annotated |= !rec.annotations.empty();
        // mask labels exist only for annotated objects, never for distractors
        for (auto v : rec.mask.value) CHECK(v <= rec.annotations.size());
        // and every annotated object keeps its full mask footprint
        for (std::size_t i = 0; i < rec.annotations.size(); ++i)
            CHECK(mask_label_bbox(rec.mask, static_cast<std::uint8_t>(i + 1)) ==
                  rec.annotations[i].box);
    }
    CHECK(any_annotated);
}

TEST_CASE("spec validation errors") {
    SynthSpec spec = three_category_spec(2);
    spec.width = 16;  // below the 32-pixel floor
    CHECK_THROWS_AS(generate_synthetic_dataset(spec, 0), std::invalid_argument);
    spec = three_category_spec(2);
    spec.min_size = 80;
    spec.max_size = 90;  // larger than the image
    CHECK_THROWS_AS(generate_synthetic_dataset(spec, 0), std::invalid_argument);
    spec = three_category_spec(2);
    spec.categories.clear();
    CHECK_THROWS_AS(generate_synthetic_dataset(spec, 0), std::invalid_argument);
}

TEST_CASE("background pool carries region boxes") {
    const auto pool = generate_background_pool(5, 64, 64, 2, "target-background", 11);
    CHECK(pool.size() == 5);
    for (const auto& rec : pool) {
        CHECK(rec.annotations.size() == 2);
        for (const auto& ann : rec.annotations) CHECK(ann.category == "target-background");
        rec.validate();
    }
    CHECK(generate_background_pool(5, 64, 64, 2, "target-background", 11)[0].pixels ==
          pool[0].pixels);
}

TEST_CASE("materialize and reload round-trips a dataset") {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "fsdet_roundtrip_ds";
    std::filesystem::remove_all(dir);
    const DatasetIndex data = generate_synthetic_dataset(three_category_spec(6), 9);
    materialize_dataset(data, dir.string());

    const DatasetIndex loaded = load_dataset(dir.string(), data.categories);
    CHECK(loaded.records.size() == data.records.size());
    CHECK(loaded.skipped == 0);
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        CHECK(loaded.records[i].id == data.records[i].id);
        CHECK(loaded.records[i].pixels == data.records[i].pixels);
        CHECK(loaded.records[i].annotations == data.records[i].annotations);
        CHECK(loaded.records[i].mask == data.records[i].mask);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("load_dataset skips broken records and errors when empty") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "fsdet_partial_ds";
    fs::remove_all(dir);
    const DatasetIndex data = generate_synthetic_dataset(three_category_spec(2), 9);
    materialize_dataset(data, dir.string());
    // corrupt one annotation file
    {
        std::ofstream bad(dir / "annotations" / (data.records[0].id + ".xml"));
        bad << "<annotation><size>";
    }
    const DatasetIndex loaded = load_dataset(dir.string(), data.categories);
    CHECK(loaded.records.size() == 1);
    CHECK(loaded.skipped == 1);

    LayoutConfig strict;
    strict.strict = true;
    CHECK_THROWS(load_dataset(dir.string(), data.categories, strict));

    const fs::path empty = fs::temp_directory_path() / "fsdet_empty_ds";
    fs::remove_all(empty);
    fs::create_directories(empty / "images");
    fs::create_directories(empty / "annotations");
    CHECK_THROWS(load_dataset(empty.string(), data.categories));
    fs::remove_all(dir);
    fs::remove_all(empty);
}
