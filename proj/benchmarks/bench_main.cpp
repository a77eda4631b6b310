#include <benchmark/benchmark.h>

#include <random>
#include <sstream>
#include <vector>

#include "nsense/engine.hpp"
#include "nsense/fusion.hpp"
#include "nsense/ingest.hpp"
#include "nsense/pipelines.hpp"
#include "nsense/simulator.hpp"

using namespace nsense;

namespace {

sim::ScenarioConfig experiment1() { return sim::load_scenario(std::filesystem::path(NSENSE_SCENARIO_DIR) / "experiment1.scn"); }

void BM_SocialInteraction(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> s(1.0, 3600.0), d(0.0, 30.0);
    std::vector<std::pair<double, double>> in(1024);
    for (auto& x : in) x = {s(rng), d(rng)};
    std::size_t k = 0;
    for (auto _ : state) {
        const auto& [sv, dv] = in[k++ & 1023];
        benchmark::DoNotOptimize(fusion::social_interaction(sv, SoundClass::Normal, Distance::meters(dv), Motion::Stationary));
    }
}
BENCHMARK(BM_SocialInteraction);

void BM_DetectContacts(benchmark::State& state) {
    std::vector<BtSighting> s;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::int64_t> step(0, 200'000);
    std::int64_t t = 0;
    for (int k = 0; k < state.range(0); ++k) {
        s.push_back({Tick{t}, NodeId("A"), NodeId("B"), -60.0});
        t += step(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(pipelines::detect_contacts(s, 120'000, 60.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectContacts)->Arg(1 << 10)->Arg(1 << 16);

void BM_EngineRun(benchmark::State& state) {
    const auto cfg = experiment1();
    const auto traces = sim::generate(cfg).first;
    const auto ec = engine::EngineConfig::for_rf(cfg.rf);
    for (auto _ : state) {
        engine::TraceReplay src(traces);
        engine::Engine e(ec);
        std::size_t n = 0;
        while (!src.done()) {
            const auto m = src.next_minute();
            n += e.step(m, src.next()).size();
        }
        benchmark::DoNotOptimize(n);
    }
}
BENCHMARK(BM_EngineRun)->Unit(benchmark::kMillisecond);

void BM_SightingCsvRoundtrip(benchmark::State& state) {
    const auto traces = sim::generate(experiment1()).first;
    for (auto _ : state) {
        std::stringstream buf;
        ingest::write_sightings(buf, traces.sightings);
        benchmark::DoNotOptimize(ingest::read_sightings(buf, "bench"));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(traces.sightings.size()));
}
BENCHMARK(BM_SightingCsvRoundtrip)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
