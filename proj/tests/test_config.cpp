// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "fsdet/config.hpp"

using namespace fsdet;

TEST_CASE("defaults are self-consistent") {
    Config cfg;
    CHECK(cfg.get("dataset.kind") == "synth");
    CHECK(cfg.get_int("trainer.base_iterations") == 2000);
    CHECK(cfg.get_int("trainer.finetune_iterations") == 400);
    CHECK(cfg.get_int("trainer.k") == 10);
    CHECK(cfg.get_double("eval.iou_threshold") == 0.5);
    // typed views built from defaults validate cleanly
    cfg.detector_config();
    cfg.train_config(false);
    cfg.train_config(true);
    cfg.augment_strategy();
    CHECK(cfg.split_mode() == SplitMode::Seeded);
    CHECK(cfg.ap_mode() == ApMode::Voc07ElevenPoint);
    const SynthSpec spec = cfg.synth_spec();
    REQUIRE(spec.categories.size() == 3);
    CHECK(spec.categories[0].name == "alpha");
    CHECK(spec.categories[1].shape == ShapeKind::Square);
}

TEST_CASE("parse_text: comments, blanks, whitespace, unknown keys") {
    const std::string text =
        "# a comment\n"
        "\n"
        "  trainer.lr = 0.01   # trailing comment\n"
        "detector.m=16\n";
    Config cfg = Config::parse_text(text);
    CHECK(cfg.get_double("trainer.lr") == 0.01);
    CHECK(cfg.get_int("detector.m") == 16);
    // untouched keys keep their defaults
    CHECK(cfg.get_int("trainer.batch") == 4);

    CHECK_THROWS_WITH_AS(Config::parse_text("no.such.key = 1\n"),
                         doctest::Contains("unknown config key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(Config::parse_text("just some words\n"),
                         doctest::Contains("line 1"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(Config::parse_text("trainer.lr = 0.1\nbroken\n"),
                         doctest::Contains("line 2"), std::invalid_argument);
}

TEST_CASE("overrides") {
    Config cfg;
    cfg.set_override("trainer.k=3");
    CHECK(cfg.get_int("trainer.k") == 3);
    cfg.set_override("  synth.prefix = demo ");
    CHECK(cfg.get("synth.prefix") == "demo");
    CHECK_THROWS_AS(cfg.set_override("trainer.k"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.set_override("bogus.key=1"), std::invalid_argument);
}

TEST_CASE("typed getters reject malformed values") {
    Config cfg;
    cfg.set("trainer.batch", "4x");
    CHECK_THROWS_WITH_AS(cfg.get_int("trainer.batch"), doctest::Contains("not an integer"),
                         std::invalid_argument);
    cfg.set("trainer.lr", "fast");
    CHECK_THROWS_WITH_AS(cfg.get_double("trainer.lr"), doctest::Contains("not a number"),
                         std::invalid_argument);
    cfg.set("augment.gamma_brighten", "maybe");
    CHECK_THROWS_WITH_AS(cfg.get_bool("augment.gamma_brighten"),
                         doctest::Contains("not a boolean"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.get("nope"), std::invalid_argument);
}

TEST_CASE("boolean spellings") {
    Config cfg;
    for (const char* t : {"true", "1", "yes"}) {
        cfg.set("augment.gamma_brighten", t);
        CHECK(cfg.get_bool("augment.gamma_brighten"));
    }
    for (const char* f : {"false", "0", "no"}) {
        cfg.set("augment.gamma_brighten", f);
        CHECK_FALSE(cfg.get_bool("augment.gamma_brighten"));
    }
}

TEST_CASE("list parsing trims and drops empties") {
    Config cfg;
    cfg.set("experiment.strategies", " none , br ,, ia ");
    CHECK(cfg.get_list("experiment.strategies") ==
          std::vector<std::string>{"none", "br", "ia"});
    cfg.set("augment.exclude", "");
    CHECK(cfg.get_list("augment.exclude").empty());
}

TEST_CASE("resolved text is sorted, complete, and reparses to the same config") {
    Config cfg;
    cfg.set_override("trainer.lr=0.005");
    const std::string text = cfg.resolved_text();
    // sorted keys
    std::istringstream is(text);
    std::string line, prev;
    std::size_t lines = 0;
    while (std::getline(is, line)) {
        CHECK(prev < line);
        prev = line;
        ++lines;
    }
    CHECK(lines >= 30);  // every schema key appears
    CHECK(text.find("trainer.lr = 0.005\n") != std::string::npos);
    // round trip
    const Config back = Config::parse_text(text);
    CHECK(back.resolved_text() == text);
}

TEST_CASE("detector view parses channels and anchors") {
    Config cfg;
    cfg.set("detector.input_size", "16");
    cfg.set("detector.channels", "4,8");
    cfg.set("detector.m", "6");
    cfg.set("detector.anchors", "2.0x2.5,1.5x1.0");
    const DetectorConfig d = cfg.detector_config();
    CHECK(d.backbone_channels == std::vector<int>{4, 8});
    CHECK(d.feature_channels == 6);
    REQUIRE(d.anchors.size() == 2);
    CHECK(d.anchors[0].w == 2.0);
    CHECK(d.anchors[0].h == 2.5);
    CHECK(d.anchors[1].w == 1.5);
    cfg.set("detector.anchors", "2.0-2.5");
    CHECK_THROWS_WITH_AS(cfg.detector_config(), doctest::Contains("WxH"),
                         std::invalid_argument);
    // invalid architectures surface through validate()
    cfg.set("detector.anchors", "2.0x2.5");
    cfg.set("detector.input_size", "15");
    CHECK_THROWS_AS(cfg.detector_config(), std::invalid_argument);
}

TEST_CASE("synth view rejects unknown shapes and maps names in order") {
    Config cfg;
    cfg.set("synth.categories", "cuke:circle,leaf:square");
    const SynthSpec spec = cfg.synth_spec();
    REQUIRE(spec.categories.size() == 2);
    CHECK(spec.categories[0].name == "cuke");
    CHECK(spec.categories[0].shape == ShapeKind::Circle);
    CHECK(spec.categories[1].shape == ShapeKind::Square);
    // distinct palette colors for distinct slots
    CHECK((spec.categories[0].r != spec.categories[1].r ||
           spec.categories[0].g != spec.categories[1].g ||
           spec.categories[0].b != spec.categories[1].b));
    cfg.set("synth.categories", "cuke:pentagon");
    CHECK_THROWS_WITH_AS(cfg.synth_spec(), doctest::Contains("unknown shape"),
                         std::invalid_argument);
}

TEST_CASE("train view switches iteration count by stage") {
    Config cfg;
    cfg.set("trainer.base_iterations", "100");
    cfg.set("trainer.finetune_iterations", "25");
    CHECK(cfg.train_config(false).iterations == 100);
    CHECK(cfg.train_config(true).iterations == 25);
    cfg.set("trainer.k", "0");
    CHECK_THROWS_AS(cfg.train_config(true), std::invalid_argument);
    cfg.train_config(false);  // base stage ignores k
}

TEST_CASE("augment view and mode parsing") {
    Config cfg;
    cfg.set("augment.kind", "ia");
    cfg.set("augment.gamma", "1.8");
    cfg.set("augment.exclude", "leaf");
    const AugmentStrategy s = cfg.augment_strategy();
    CHECK(s.kind == AugmentKind::Illuminance);
    CHECK(s.gamma_factor == 1.8);
    CHECK(s.exclude_categories == std::vector<std::string>{"leaf"});
    cfg.set("augment.kind", "sparkle");
    CHECK_THROWS(cfg.augment_strategy());

    cfg.set("split.mode", "fixed");
    CHECK(cfg.split_mode() == SplitMode::Fixed);
    cfg.set("split.mode", "other");
    CHECK_THROWS_AS(cfg.split_mode(), std::invalid_argument);
    cfg.set("eval.ap_mode", "all");
    CHECK(cfg.ap_mode() == ApMode::AllPoint);
    cfg.set("eval.ap_mode", "none");
    CHECK_THROWS_AS(cfg.ap_mode(), std::invalid_argument);
}

TEST_CASE("parse_file reads from disk and reports missing files") {
    CHECK_THROWS_AS(Config::parse_file("/nonexistent/fsdet.cfg"), std::runtime_error);
}
