#include "rsport/rsport.hpp"

#include <benchmark/benchmark.h>

namespace {

rsport::RegimeCoefficients regime(double r, double alpha, double sigma) {
    rsport::RegimeCoefficients c;
    c.rate = r;
    c.expected_return = Eigen::VectorXd::Constant(1, alpha);
    c.volatility = Eigen::MatrixXd::Constant(1, 1, sigma);
    c.uncertain_vol = Eigen::MatrixXd::Zero(1, 1);
    return c;
}

rsport::RegimeMarket market() {
    Eigen::MatrixXd q(2, 2);
    q << -1.2, 1.2, 2.5, -2.5;
    return {rsport::Generator::validate(q), {regime(0.05, 0.15, 0.25), regime(0.01, 0.25, 0.6)}, 1.0};
}

void BM_SolveBackward(benchmark::State& state) {
    const auto mkt = market();
    const rsport::UtilitySpec util(10.0, 0.07);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rsport::solve_backward(mkt, util, static_cast<std::size_t>(state.range(0))));
    }
}
BENCHMARK(BM_SolveBackward)->Arg(200)->Arg(2000)->Arg(20000);

void BM_HjbResidual(benchmark::State& state) {
    auto mkt = market();
    const rsport::UtilitySpec util(10.0, 0.07);
    auto grid = rsport::solve_backward(mkt, util, 2000);
    const rsport::PolicyMap pm(std::move(mkt), util, std::move(grid));
    std::vector<double> ts(50), xs(20);
    for (std::size_t k = 0; k < 50; ++k) ts[k] = (k + 1.0) / 51.0;
    for (std::size_t k = 0; k < 20; ++k) xs[k] = 0.1 * std::pow(100.0, k / 19.0);
    for (auto _ : state) benchmark::DoNotOptimize(rsport::hjb_residual(pm, ts, xs));
}
BENCHMARK(BM_HjbResidual);

void BM_SimulateWealth(benchmark::State& state) {
    auto mkt = market();
    const rsport::UtilitySpec util(10.0, 0.07);
    auto grid = rsport::solve_backward(mkt, util, 2000);
    const rsport::PolicyMap pm(std::move(mkt), util, std::move(grid));
    rsport::SimulationOptions opt;
    opt.n_paths = static_cast<std::size_t>(state.range(0));
    opt.steps = 1000;
    for (auto _ : state) benchmark::DoNotOptimize(rsport::simulate_wealth(pm, 1.0, 0, opt));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateWealth)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_RegimePaths(benchmark::State& state) {
    const auto mkt = market();
    for (auto _ : state) {
        benchmark::DoNotOptimize(rsport::regime_statistics(mkt.generator(), 1.0, 10000, 1));
    }
}
BENCHMARK(BM_RegimePaths)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
