#include <benchmark/benchmark.h>

#include <cmath>

#include "spl/constfit.hpp"
#include "spl/expr.hpp"
#include "spl/mcts.hpp"
#include "spl/numdata.hpp"
#include "spl/tasks.hpp"

using namespace spl;

namespace {

DataMatrix make_data(std::size_t points) {
    Rng rng(7);
    DataMatrix Y;
    Y.rows.resize(1);
    for (std::size_t i = 0; i < points; ++i) Y.rows[0].push_back(rng.uniform(-2.0, 2.0));
    return Y;
}

}  // namespace

static void BM_Evaluate(benchmark::State& state) {
    ExpressionTree t = parse_expression("x*x*x + x*x + sin(x)*exp(x) - x/(x + 3)", {"x"});
    DataMatrix Y = make_data(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out;
    for (auto _ : state) {
        evaluate_into(t, Y, {}, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(20)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_Simplify(benchmark::State& state) {
    ExpressionTree t =
        parse_expression("(C + C) + 1*x + 0 + x*x*1 + (2*3)*x - 0/(x + 1) + C*C*x", {"x"});
    for (auto _ : state) {
        ExpressionTree s = simplify(t);
        benchmark::DoNotOptimize(s.root());
    }
}
BENCHMARK(BM_Simplify);

static void BM_RandomRollout(benchmark::State& state) {
    Grammar g = find_task("nguyen-2")->make_grammar();
    Rng rng(11);
    std::uint64_t completed = 0;
    for (auto _ : state) {
        DerivationState s = DerivationState::fresh(g);
        while (!s.complete() && s.step() < 50) {
            const auto& valid = valid_actions(g, s);
            apply_rule_inplace(g, s, valid[rng.uniform_index(valid.size())]);
        }
        completed += s.complete() ? 1 : 0;
        benchmark::DoNotOptimize(s.traversal.data());
    }
    state.counters["completion_rate"] =
        benchmark::Counter(static_cast<double>(completed), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_RandomRollout);

static void BM_PowellFit(benchmark::State& state) {
    ExpressionTree t = parse_expression("C*x*x + C*x + C", {"x"});
    DataMatrix Y = make_data(static_cast<std::size_t>(state.range(0)));
    std::vector<double> target(Y.rows[0].size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double x = Y.rows[0][i];
        target[i] = 0.3 * x * x - 1.2 * x + 0.5;
    }
    FitOptions opts;
    opts.fast = true;
    int seed = 0;
    for (auto _ : state) {
        opts.seed = static_cast<std::uint64_t>(seed++);
        FitResult r = fit_constants(t, Y, target, opts);
        benchmark::DoNotOptimize(r.rmse);
    }
}
BENCHMARK(BM_PowellFit)->Arg(100)->Arg(1000);

static void BM_SavitzkyGolay(benchmark::State& state) {
    std::vector<double> series(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < series.size(); ++i) series[i] = std::sin(0.01 * i);
    for (auto _ : state) {
        auto out = savitzky_golay(series, 21, 3);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SavitzkyGolay)->Arg(1000)->Arg(10000);

static void BM_SearchEpisodes(benchmark::State& state) {
    const BenchmarkTask* task = find_task("nguyen-1");
    ExpressionTree target = task->target_tree();
    Rng rng(13);
    auto data = make_function_dataset(target, task->sampling(), 0.0, rng);
    for (auto _ : state) {
        state.PauseTiming();
        Grammar g = task->make_grammar();
        SearchConfig cfg = task->search_config(true);
        cfg.episodes = static_cast<int>(state.range(0));
        cfg.seed = 21;
        Dataset aligned = align_dataset(g, data.train);
        state.ResumeTiming();
        SplSearch search(g, aligned, cfg);
        for (int e = 0; e < cfg.episodes; ++e) search.step_episode();
        benchmark::DoNotOptimize(search.best_reward());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SearchEpisodes)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
