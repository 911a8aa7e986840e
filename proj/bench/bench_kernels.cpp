// Parallel kernels against their serial references.

#include "lftag/detector.hpp"
#include "lftag/imgproc.hpp"
#include "lftag/reference.hpp"
#include "lftag/synthcam.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace lftag;

namespace {

// 1280x720 frame with a marker and mild noise.
const GrayImage& frame() {
    static const GrayImage img = [] {
        RenderSpec s;
        s.family = TagFamily::standard(3);
        s.id = TagId{1234};
        s.width = 1280;
        s.height = 720;
        s.distance_m = 3.0;
        s.tilt_deg = 30.0;
        s.noise_sigma = 4.0;
        s.noise_seed = 1;
        return render(s);
    }();
    return img;
}

const BinaryImage& mask() {
    static const BinaryImage m = adaptive_threshold(frame());
    return m;
}

RenderSpec blurred_spec() {
    RenderSpec s;
    s.id = TagId{77};
    s.distance_m = 2.0;
    s.tilt_deg = 20.0;
    s.blur_len_px = 12.0;
    s.blur_angle_deg = 45.0;
    return s;
}

void BM_Threshold(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(adaptive_threshold(frame()));
}
void BM_ThresholdReference(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(reference::adaptive_threshold(frame()));
}

void BM_Dilate(benchmark::State& st) {
    const int r = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(dilate(mask(), r));
}
void BM_DilateReference(benchmark::State& st) {
    const int r = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(reference::dilate(mask(), r));
}

void BM_MotionBlur(benchmark::State& st) {
    const double len = static_cast<double>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(apply_motion_blur(frame(), len, 45.0));
}
void BM_MotionBlurReference(benchmark::State& st) {
    const double len = static_cast<double>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(reference::apply_motion_blur(frame(), len, 45.0));
}

void BM_Render(benchmark::State& st) {
    const RenderSpec s = blurred_spec();
    for (auto _ : st) benchmark::DoNotOptimize(render(s));
}
void BM_RenderReference(benchmark::State& st) {
    const RenderSpec s = blurred_spec();
    for (auto _ : st) benchmark::DoNotOptimize(reference::render(s));
}

void BM_Detect(benchmark::State& st) {
    const Detector det(DetectorConfig::defaults(TagFamily::standard(3)));
    for (auto _ : st) benchmark::DoNotOptimize(det.detect(frame()));
}

}  // namespace

BENCHMARK(BM_Threshold)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ThresholdReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dilate)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DilateReference)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MotionBlur)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MotionBlurReference)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Render)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Detect)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
