#pragma once

#include <string>
#include <vector>

#include "dosage/core.hpp"

namespace dosage::illustration {

// Built-in worked example: T = 2, a two-armed trial at doses {0, 2}, and a
// uniform threshold distribution with no mass on t_e = 0. Used by the
// `illustrate` CLI verb and the acceptance suite.

DoseGrid grid();
WelfareSpec welfare();
ThresholdDistribution threshold_distribution();
TrialEvidence evidence();

// The five cost settings exercised by `illustrate`: zero, three linear
// slopes, and one nonlinear schedule.
std::vector<CostSpec> cost_scenarios();
std::vector<std::string> cost_labels();

}  // namespace dosage::illustration
