#pragma once

#include <optional>
#include <vector>

#include "lidarpaint/boxes.hpp"
#include "lidarpaint/instance_mask.hpp"
#include "lidarpaint/types.hpp"

namespace lidarpaint {

/// First-stage quality proxies (full detection scoring is out of scope).
struct Metrics {
    double label_accuracy = 1.0;  // vacuous 1.0 when nothing painted
    bool accuracy_vacuous = true;
    std::optional<double> center_mae_m;
    double cluster_purity = 1.0;
    std::size_t painted = 0;
    std::size_t unpainted = 0;
    std::size_t evicted = 0;
};

/// Correct painted labels / painted count against per-point ground-truth
/// labels (0 = background). 1.0 when nothing is painted; callers can check
/// the painted count to spot the vacuous case.
double label_accuracy(const std::vector<AugmentedPoint>& augmented,
                      const std::vector<int>& gt_labels);

/// Mean distance between each prior's center and the center of the
/// ground-truth box owning the majority of its members (background-majority
/// priors stay unmatched). Absent when nothing matches.
std::optional<double> center_error(const std::vector<Instance3DPrior>& priors,
                                   const std::vector<Box3D>& gt_boxes,
                                   const std::vector<int>& gt_index);

/// Weighted purity: for each prior the fraction of members owned by its most
/// common ground-truth entity, averaged over painted points.
double cluster_purity(const std::vector<Instance3DPrior>& priors,
                      const std::vector<int>& gt_index);

Metrics compute_metrics(const std::vector<AugmentedPoint>& augmented,
                        const std::vector<Instance3DPrior>& priors,
                        const std::vector<Box3D>& gt_boxes,
                        const std::vector<int>& gt_index,
                        std::size_t evicted);

}  // namespace lidarpaint
