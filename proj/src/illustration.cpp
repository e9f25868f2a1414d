#include "dosage/illustration.hpp"

namespace dosage::illustration {

DoseGrid grid() { return DoseGrid(2); }

WelfareSpec welfare() { return WelfareSpec{{1.0, 0.25, 0.75, 0.0}}; }

ThresholdDistribution threshold_distribution() {
    const DoseGrid g = grid();
    const int n = g.threshold_count();
    std::vector<double> mass(static_cast<std::size_t>(n) * n, 0.0);
    // t_d uniform on {0..3}, t_e uniform on {1..3}, independent.
    for (int td = 0; td < n; ++td)
        for (int te = 1; te < n; ++te)
            mass[static_cast<std::size_t>(td) * n + te] = 1.0 / 12.0;
    return ThresholdDistribution(g, std::move(mass));
}

TrialEvidence evidence() {
    const DoseGrid g = grid();
    const ThresholdDistribution q = threshold_distribution();
    std::vector<TrialArm> arms;
    arms.push_back(TrialArm{0, push_forward(q, 0), std::nullopt});
    arms.push_back(TrialArm{2, push_forward(q, 2), std::nullopt});
    return TrialEvidence(std::move(arms), g);
}

std::vector<CostSpec> cost_scenarios() {
    const DoseGrid g = grid();
    return {CostSpec::zero(g),
            CostSpec::linear(g, 0.05),
            CostSpec::linear(g, 0.1),
            CostSpec::linear(g, 0.15),
            CostSpec(g, {0.0, 0.0, 0.3})};
}

std::vector<std::string> cost_labels() {
    return {"zero", "linear_0.05", "linear_0.10", "linear_0.15", "nonlinear"};
}

}  // namespace dosage::illustration
