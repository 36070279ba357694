#include "lidarpaint/metrics.hpp"

#include <algorithm>
#include <map>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

double label_accuracy(const std::vector<AugmentedPoint>& augmented,
                      const std::vector<int>& gt_labels) {
    if (augmented.size() != gt_labels.size())
        throw InputError("label_accuracy: length mismatch");
    std::size_t painted = 0, correct = 0;
    for (std::size_t i = 0; i < augmented.size(); ++i) {
        if (!augmented[i].painted()) continue;
        ++painted;
        if (augmented[i].s == gt_labels[i]) ++correct;
    }
    return painted == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(painted);
}

namespace {

/// Ground-truth entity owning the majority of a prior's members, or -1 when
/// background dominates.
int majority_owner(const Instance3DPrior& prior, const std::vector<int>& gt_index,
                   std::size_t* count_out = nullptr) {
    std::map<int, std::size_t> counts;
    for (int idx : prior.member_indices) ++counts[gt_index[static_cast<std::size_t>(idx)]];
    int best = -1;
    std::size_t best_count = 0;
    for (const auto& [owner, count] : counts) {
        if (count > best_count) {
            best = owner;
            best_count = count;
        }
    }
    if (count_out != nullptr) *count_out = best_count;
    return best;
}

}  // namespace

std::optional<double> center_error(const std::vector<Instance3DPrior>& priors,
                                   const std::vector<Box3D>& gt_boxes,
                                   const std::vector<int>& gt_index) {
    double total = 0.0;
    std::size_t matched = 0;
    for (const Instance3DPrior& prior : priors) {
        if (prior.member_indices.empty()) continue;
        const int owner = majority_owner(prior, gt_index);
        if (owner < 0 || owner >= static_cast<int>(gt_boxes.size())) continue;
        total += distance(prior.center, gt_boxes[static_cast<std::size_t>(owner)].center);
        ++matched;
    }
    if (matched == 0) return std::nullopt;
    return total / static_cast<double>(matched);
}

double cluster_purity(const std::vector<Instance3DPrior>& priors,
                      const std::vector<int>& gt_index) {
    std::size_t members = 0, majority = 0;
    for (const Instance3DPrior& prior : priors) {
        std::size_t best = 0;
        majority_owner(prior, gt_index, &best);
        members += prior.member_indices.size();
        majority += best;
    }
    return members == 0 ? 1.0 : static_cast<double>(majority) / static_cast<double>(members);
}

Metrics compute_metrics(const std::vector<AugmentedPoint>& augmented,
                        const std::vector<Instance3DPrior>& priors,
                        const std::vector<Box3D>& gt_boxes,
                        const std::vector<int>& gt_index,
                        std::size_t evicted) {
    std::vector<int> gt_labels(gt_index.size(), 0);
    for (std::size_t i = 0; i < gt_index.size(); ++i) {
        if (gt_index[i] >= 0 && gt_index[i] < static_cast<int>(gt_boxes.size()))
            gt_labels[i] = gt_boxes[static_cast<std::size_t>(gt_index[i])].label;
    }

    Metrics m;
    m.painted = 0;
    for (const auto& p : augmented)
        if (p.painted()) ++m.painted;
    m.unpainted = augmented.size() - m.painted;
    m.evicted = evicted;
    m.accuracy_vacuous = m.painted == 0;
    m.label_accuracy = label_accuracy(augmented, gt_labels);
    m.center_mae_m = center_error(priors, gt_boxes, gt_index);
    m.cluster_purity = cluster_purity(priors, gt_index);
    return m;
}

}  // namespace lidarpaint
