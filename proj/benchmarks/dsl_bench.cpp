#include <benchmark/benchmark.h>

#include <filesystem>

#include "scenarioforge/dsl.hpp"
#include "scenarioforge/project.hpp"

using namespace scenarioforge;

namespace {

std::string bundled_source() {
    return read_file(std::filesystem::path(SCENARIOFORGE_BUNDLE_DIR) / "scenarios/inter_component.scn");
}

void BM_ParseBundledScenarios(benchmark::State& state) {
    std::string text = bundled_source();
    for (auto _ : state) benchmark::DoNotOptimize(parse_source(text));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseBundledScenarios);

void BM_FormatBundledScenarios(benchmark::State& state) {
    SourceFile f = parse_source(bundled_source());
    for (auto _ : state)
        for (const ScenarioDef& d : f.scenarios) benchmark::DoNotOptimize(format_scenario(d));
}
BENCHMARK(BM_FormatBundledScenarios);

}  // namespace
