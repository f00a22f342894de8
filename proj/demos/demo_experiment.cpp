// Runs small randomized comparisons of the two expansion models on two
// structure shapes and prints their summaries.

#include <cstdio>

#include "probweb/probweb.hpp"

using namespace probweb;

namespace {

void run(const StructureTemplate& shape, int trials, std::uint64_t seed) {
    ExperimentConfig config;
    config.structure = shape;
    config.trials = trials;
    config.seed = seed;

    auto result = run_experiment(config);
    const auto& s = result.summary;
    std::printf("%s: %d trials, alt %d / standard %d / tie %d\n", shape.name.c_str(), s.completed,
                s.alt_wins, s.standard_wins, s.ties);
    std::printf("  gap mean %.3e (min %.3e, max %.3e)\n", s.mean_gap, s.min_gap, s.max_gap);
    std::printf("  k >= 1 in %d trials (alt wins %d of them)\n", s.k_at_least_one,
                s.alt_wins_k_at_least_one);
    std::printf("  partition condition held in %d trials\n", s.partition_holds);
    if (result.probe_ran)
        std::printf("  %zu unpacking orders, joint deviation %.3e\n",
                    result.probe.unpacking_count, result.probe.max_px_deviation);
}

}  // namespace

int main() {
    run(preset_fig1(), 200, 7);
    run(preset_star(4), 200, 7);
    run(preset_chain(4), 50, 7);
    return 0;
}
