#pragma once

#include <random>
#include <vector>

#include "dosage/core.hpp"

namespace testutil {

// Random threshold distribution: i.i.d. exponential mass, normalized.
inline dosage::ThresholdDistribution random_q(const dosage::DoseGrid& grid,
                                              std::mt19937_64& rng) {
    const int n = grid.threshold_count();
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> mass(static_cast<std::size_t>(n) * n);
    double sum = 0.0;
    for (double& m : mass) {
        m = exp1(rng);
        sum += m;
    }
    for (double& m : mass) m /= sum;
    return dosage::ThresholdDistribution(grid, std::move(mass));
}

// Consistent-by-construction evidence: exact push-forwards of q at `doses`.
inline dosage::TrialEvidence evidence_from_q(const dosage::ThresholdDistribution& q,
                                             const std::vector<int>& doses) {
    std::vector<dosage::TrialArm> arms;
    for (int t : doses)
        arms.push_back(dosage::TrialArm{t, dosage::push_forward(q, t), std::nullopt});
    return dosage::TrialEvidence(std::move(arms), q.grid());
}

// Random strictly increasing dose subset of size k from 0..T.
inline std::vector<int> random_doses(const dosage::DoseGrid& grid, int k,
                                     std::mt19937_64& rng) {
    std::vector<int> all(static_cast<std::size_t>(grid.dose_count()));
    for (int t = 0; t < grid.dose_count(); ++t) all[static_cast<std::size_t>(t)] = t;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
}

inline dosage::WelfareSpec random_welfare(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return dosage::WelfareSpec{{u(rng), u(rng), u(rng), u(rng)}};
}

inline dosage::CostSpec random_cost(const dosage::DoseGrid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 0.3);
    std::vector<double> g(static_cast<std::size_t>(grid.dose_count()));
    for (double& v : g) v = u(rng);
    return dosage::CostSpec(grid, std::move(g));
}

}  // namespace testutil
