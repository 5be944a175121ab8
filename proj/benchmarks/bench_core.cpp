// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "fsdet/augment.hpp"
#include "fsdet/detector.hpp"
#include "fsdet/eval.hpp"
#include "fsdet/rng.hpp"

using namespace fsdet;

namespace {

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t = Tensor::zeros(std::move(shape));
    for (auto& v : t.data) v = static_cast<float>(rng.uniform());
    return t;
}

void BM_BackboneForward(benchmark::State& state) {
    DetectorConfig cfg;
    cfg.input_size = static_cast<int>(state.range(0));
    Detector det(cfg);
    det.init(1);
    const Tensor img = random_tensor({3, cfg.input_size, cfg.input_size}, 2);
    for (auto _ : state) {
        Tape tape;
        benchmark::DoNotOptimize(det.extract_features(tape, img));
    }
}
BENCHMARK(BM_BackboneForward)->Arg(32)->Arg(64);

void BM_LossBackward(benchmark::State& state) {
    DetectorConfig cfg;
    cfg.input_size = 32;
    cfg.backbone_channels = {4, 8};
    cfg.feature_channels = 8;
    Detector det(cfg);
    det.init(3);
    const Tensor img = random_tensor({3, 32, 32}, 4);
    const std::vector<GtBox> gts = {{{4, 4, 18, 20}, 0, false}};
    for (auto _ : state) {
        Tape tape;
        Var f = det.extract_features(tape, img);
        auto terms = det.detection_loss(tape, {det.predict(tape, f)}, gts);
        tape.backward(terms.total);
        det.params().zero_grads();
    }
}
BENCHMARK(BM_LossBackward);

void BM_IouMatching(benchmark::State& state) {
    Rng rng(5);
    std::vector<EvalDetection> dets;
    std::vector<EvalGroundTruth> gts;
    const int n = static_cast<int>(state.range(0));
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform() * 100, y = rng.uniform() * 100;
        const BoundingBox b{x, y, x + 5 + rng.uniform() * 20, y + 5 + rng.uniform() * 20};
        gts.push_back({"im" + std::to_string(i % 8), "c", b, false});
        dets.push_back({"im" + std::to_string(i % 8), "c", rng.uniform(), b});
    }
    for (auto _ : state) benchmark::DoNotOptimize(match_detections(dets, gts, 0.5));
}
BENCHMARK(BM_IouMatching)->Arg(64)->Arg(256);

void BM_Nms(benchmark::State& state) {
    Rng rng(6);
    std::vector<Detection> dets;
    for (int i = 0; i < 256; ++i) {
        const double x = rng.uniform() * 60, y = rng.uniform() * 60;
        dets.push_back({{x, y, x + 4 + rng.uniform() * 10, y + 4 + rng.uniform() * 10},
                        "c", rng.uniform()});
    }
    for (auto _ : state) benchmark::DoNotOptimize(nms(dets, 0.45));
}
BENCHMARK(BM_Nms);

void BM_GammaLut(benchmark::State& state) {
    Rng rng(7);
    ImageRecord rec;
    rec.id = "bench";
    rec.width = 256;
    rec.height = 256;
    rec.pixels = Image::filled(256, 256, 0, 0, 0);
    for (auto& v : rec.pixels.rgb) v = static_cast<std::uint8_t>(rng.index(256));
    for (auto _ : state) benchmark::DoNotOptimize(adjust_illuminance(rec, 1.5, true));
}
BENCHMARK(BM_GammaLut);

}  // namespace

BENCHMARK_MAIN();
