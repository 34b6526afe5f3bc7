#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voxmt/tensor.hpp"

namespace voxmt {

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;  // w.r.t. the first argument, same layout
};

// Mean of -log softmax at the true class over non-ignored rows.
// ignore_mask (optional): rows with true entries are excluded.
LossResult cross_entropy(const ScoreMat& logits, const std::vector<int32_t>& labels,
                         const std::vector<bool>& ignore_mask = {});

// Lovasz-softmax: Jaccard extension over per-class error vectors, averaged
// over classes present in the labels. Gradient is w.r.t. probs.
LossResult lovasz_softmax(const ScoreMat& probs, const std::vector<int32_t>& labels);

// Penalty-reduced (Gaussian) focal loss over heatmaps, alpha=2, beta=4,
// normalized by the number of target peaks (min 1).
LossResult gaussian_focal(const std::vector<double>& pred_hm, const std::vector<double>& target_hm);

// Mean absolute error over masked entries (empty mask means all).
LossResult l1_loss(const std::vector<double>& pred, const std::vector<double>& target,
                   const std::vector<bool>& mask = {});

// L_DET = 1*hm + 2*reg + 1*iou.
double group_det(double hm, double reg, double iou);

struct UncertaintyParams {
  double s_seg = 0.0;  // s = log sigma^2
  double s_det = 0.0;
  double s_bev = 0.0;
};

struct UncertaintyResult {
  double total = 0.0;
  double d_s_seg = 0.0;
  double d_s_det = 0.0;
  double d_s_bev = 0.0;
};

// total = sum_i [ L_i * exp(-s_i)/2 + s_i/2 ] over the grouped task losses.
UncertaintyResult total_uncertainty_loss(double l_seg, double l_det, double l_bev,
                                         const UncertaintyParams& params);

// Alternate per-loss weighting mode: one uncertainty term per component.
struct PerLossUncertaintyResult {
  double total = 0.0;
  std::vector<double> d_s;
};
PerLossUncertaintyResult per_loss_uncertainty(const std::vector<double>& losses,
                                              const std::vector<double>& s);

// Flat key/value loss report emitted by the CLI.
struct TaskLossReport {
  double ce_v = 0.0;
  double lovasz_v = 0.0;
  double hm = 0.0;
  double reg = 0.0;
  double iou = 0.0;
  double ce_bev = 0.0;
  double lovasz_bev = 0.0;
  double l_seg = 0.0;
  double l_det = 0.0;
  double l_bev = 0.0;
  double total = 0.0;
  double d_s_seg = 0.0;
  double d_s_det = 0.0;
  double d_s_bev = 0.0;

  std::map<std::string, double> as_key_values() const;
};

}  // namespace voxmt
