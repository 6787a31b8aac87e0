#include <iostream>
#include <vector>

#include <mdfocus/calibrate.hpp>
#include <mdfocus/engine.hpp>
#include <mdfocus/simlab.hpp>

// Simulates a sparse Gaussian mean change and monitors it with three statistics.
int main() {
    using namespace mdfocus;

    const std::size_t p = 5;
    const auto model = ModelSpec::gaussian(p);
    StatConfig cfg;
    cfg.stats = {StatSpec::dense(), StatSpec::ranked(1), StatSpec::thresholded(1.0)};
    cfg.prechange = Prechange::unknown();
    const auto plan = analytic_arl_plan(cfg, static_cast<int>(p), 5000.0);

    StreamScenario sc;
    sc.model = model;
    sc.n = 2000;
    sc.change_at = 500;
    sc.sparsity = 1;
    sc.magnitude = 1.0;
    sc.seed = 7;
    StreamGenerator gen(sc);

    auto det = make_detector(model, cfg, EngineConfig{});
    std::vector<double> y;
    for (std::int64_t t = 0; t < sc.n; ++t) {
        gen.next(y);
        const auto& rep = det.step_raw(y);
        const auto d = decide(rep, cfg, plan);
        if (d.stop) {
            std::cout << "stop at n=" << d.n << " by " << d.stat << " (value " << d.value << ", threshold "
                      << d.threshold << "), estimated change after " << d.tau_hat.value_or(-1) << ", "
                      << rep.candidates << " candidates held\n";
            return 0;
        }
    }
    std::cout << "no change detected in " << sc.n << " observations\n";
    return 0;
}
