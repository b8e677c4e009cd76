#include <benchmark/benchmark.h>

#include "flagwalk/exterior.hpp"
#include "flagwalk/linalg.hpp"
#include "flagwalk/spectral.hpp"
#include "flagwalk/walk.hpp"

using namespace flagwalk;

namespace {

const MeasureSpec& spec(int m) {
    static const MeasureSpec sl2 = load_measure_spec(FLAGWALK_SPEC_DIR "/sl2.json");
    static const MeasureSpec sl3 = load_measure_spec(FLAGWALK_SPEC_DIR "/sl3.json");
    return m == 1 ? sl2 : sl3;
}

void BM_Cartan(benchmark::State& state) {
    Rng rng(1);
    const GroupElement g(random_unimodular(static_cast<int>(state.range(0)), rng, 2.0));
    for (auto _ : state) benchmark::DoNotOptimize(cartan_decompose(g));
}
BENCHMARK(BM_Cartan)->Arg(2)->Arg(3)->Arg(4);

void BM_Iwasawa(benchmark::State& state) {
    Rng rng(2);
    const int dim = static_cast<int>(state.range(0));
    const GroupElement g(random_unimodular(dim, rng, 2.0));
    const FlagPoint eta(random_rotation(dim, rng));
    for (auto _ : state) benchmark::DoNotOptimize(iwasawa_cocycle(g, eta));
}
BENCHMARK(BM_Iwasawa)->Arg(2)->Arg(3)->Arg(4);

void BM_ExteriorPower(benchmark::State& state) {
    Rng rng(3);
    const Matrix a = random_unimodular(4, rng);
    for (auto _ : state) benchmark::DoNotOptimize(exterior_power(a, 2));
}
BENCHMARK(BM_ExteriorPower);

// One walk of length 200 with kappa at the end.
void BM_WalkKappa(benchmark::State& state) {
    const MeasureSpec& s = spec(static_cast<int>(state.range(0)));
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_product(s, 200, 1, i++).kappa());
}
BENCHMARK(BM_WalkKappa)->Arg(1)->Arg(2);

void BM_TransferApply(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const TransferDiscretization t = build_transfer(spec(1), Complex(0.0, 5.0), n);
    CVector in = CVector::Ones(n), out;
    for (auto _ : state) {
        t.apply(in, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_TransferApply)->Arg(512)->Arg(2048);

void BM_SpectralRadius(benchmark::State& state) {
    const TransferDiscretization t = build_transfer(spec(1), Complex(0.0, 5.0), static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(t).radius);
}
BENCHMARK(BM_SpectralRadius)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
