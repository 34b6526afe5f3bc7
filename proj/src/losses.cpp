#include "voxmt/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "voxmt/errors.hpp"

namespace voxmt {

LossResult cross_entropy(const ScoreMat& logits, const std::vector<int32_t>& labels,
                         const std::vector<bool>& ignore_mask) {
  const std::size_t n = logits.rows;
  const std::size_t k = logits.cols;
  if (labels.size() != n) throw InputError("cross_entropy: label count mismatch");
  LossResult res;
  res.grad.assign(n * k, 0.0);

  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ignore_mask.empty() && ignore_mask[i]) continue;
    ++count;
  }
  if (count == 0) return res;

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ignore_mask.empty() && ignore_mask[i]) continue;
    const int32_t y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw InputError("cross_entropy: label out of range at row " + std::to_string(i));
    }
    const double* row = logits.row(i);
    const double m = *std::max_element(row, row + k);
    double denom = 0.0;
    for (std::size_t c = 0; c < k; ++c) denom += std::exp(row[c] - m);
    const double log_denom = std::log(denom) + m;
    total += log_denom - row[y];
    double* g = res.grad.data() + i * k;
    for (std::size_t c = 0; c < k; ++c) {
      g[c] = std::exp(row[c] - log_denom) / static_cast<double>(count);
    }
    g[y] -= 1.0 / static_cast<double>(count);
  }
  res.value = total / static_cast<double>(count);
  return res;
}

namespace {

// Gradient of the Jaccard extension along the sorted error vector.
std::vector<double> lovasz_grad(const std::vector<int>& gt_sorted) {
  const std::size_t n = gt_sorted.size();
  const double gts = std::accumulate(gt_sorted.begin(), gt_sorted.end(), 0.0);
  std::vector<double> jaccard(n);
  double cum_gt = 0.0, cum_fp = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cum_gt += gt_sorted[j];
    cum_fp += 1.0 - gt_sorted[j];
    const double intersection = gts - cum_gt;
    const double uni = gts + cum_fp;
    jaccard[j] = 1.0 - intersection / uni;
  }
  for (std::size_t j = n; j-- > 1;) jaccard[j] -= jaccard[j - 1];
  return jaccard;
}

}  // namespace

LossResult lovasz_softmax(const ScoreMat& probs, const std::vector<int32_t>& labels) {
  const std::size_t n = probs.rows;
  const std::size_t k = probs.cols;
  LossResult res;
  res.grad.assign(n * k, 0.0);
  if (n == 0) return res;
  if (labels.size() != n) throw InputError("lovasz_softmax: label count mismatch");

  std::set<int32_t> present(labels.begin(), labels.end());
  double total = 0.0;
  for (int32_t c : present) {
    // errors: 1 - p for ground-truth rows, p otherwise; sorted descending.
    std::vector<double> m(n);
    std::vector<int> gt(n);
    for (std::size_t i = 0; i < n; ++i) {
      gt[i] = labels[i] == c ? 1 : 0;
      m[i] = gt[i] ? 1.0 - probs.row(i)[c] : probs.row(i)[c];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m[a] > m[b]; });
    std::vector<int> gt_sorted(n);
    for (std::size_t j = 0; j < n; ++j) gt_sorted[j] = gt[order[j]];
    const std::vector<double> g = lovasz_grad(gt_sorted);
    for (std::size_t j = 0; j < n; ++j) {
      total += m[order[j]] * g[j];
      // d m_i / d p_i(c) = -1 for gt rows, +1 otherwise; g treated as locally
      // constant (valid away from sort ties).
      res.grad[order[j] * k + c] += (gt_sorted[j] ? -g[j] : g[j]);
    }
  }
  const double inv = 1.0 / static_cast<double>(present.size());
  res.value = total * inv;
  for (double& v : res.grad) v *= inv;
  return res;
}

LossResult gaussian_focal(const std::vector<double>& pred_hm,
                          const std::vector<double>& target_hm) {
  if (pred_hm.size() != target_hm.size()) throw InputError("gaussian_focal: size mismatch");
  constexpr double kAlpha = 2.0;
  constexpr double kBeta = 4.0;
  constexpr double kEps = 1e-6;

  std::size_t peaks = 0;
  for (double t : target_hm) {
    if (t == 1.0) ++peaks;
  }
  const double norm = static_cast<double>(std::max<std::size_t>(peaks, 1));

  LossResult res;
  res.grad.assign(pred_hm.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < pred_hm.size(); ++i) {
    const double p = std::clamp(pred_hm[i], kEps, 1.0 - kEps);
    const double t = target_hm[i];
    const bool clamped = pred_hm[i] < kEps || pred_hm[i] > 1.0 - kEps;
    if (t == 1.0) {
      total += -std::pow(1.0 - p, kAlpha) * std::log(p);
      if (!clamped) {
        res.grad[i] = (kAlpha * std::pow(1.0 - p, kAlpha - 1.0) * std::log(p) -
                       std::pow(1.0 - p, kAlpha) / p) /
                      norm;
      }
    } else {
      const double w = std::pow(1.0 - t, kBeta);
      total += -w * std::pow(p, kAlpha) * std::log(1.0 - p);
      if (!clamped) {
        res.grad[i] = -w *
                      (kAlpha * std::pow(p, kAlpha - 1.0) * std::log(1.0 - p) -
                       std::pow(p, kAlpha) / (1.0 - p)) /
                      norm;
      }
    }
  }
  res.value = total / norm;
  return res;
}

LossResult l1_loss(const std::vector<double>& pred, const std::vector<double>& target,
                   const std::vector<bool>& mask) {
  if (pred.size() != target.size()) throw InputError("l1_loss: size mismatch");
  LossResult res;
  res.grad.assign(pred.size(), 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    ++count;
  }
  if (count == 0) return res;
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double d = pred[i] - target[i];
    total += std::abs(d);
    res.grad[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / static_cast<double>(count);
  }
  res.value = total / static_cast<double>(count);
  return res;
}

double group_det(double hm, double reg, double iou) { return 1.0 * hm + 2.0 * reg + 1.0 * iou; }

UncertaintyResult total_uncertainty_loss(double l_seg, double l_det, double l_bev,
                                         const UncertaintyParams& params) {
  const auto term = [](double l, double s) { return l * std::exp(-s) / 2.0 + s / 2.0; };
  const auto dterm = [](double l, double s) { return -l * std::exp(-s) / 2.0 + 0.5; };
  UncertaintyResult r;
  r.total = term(l_seg, params.s_seg) + term(l_det, params.s_det) + term(l_bev, params.s_bev);
  r.d_s_seg = dterm(l_seg, params.s_seg);
  r.d_s_det = dterm(l_det, params.s_det);
  r.d_s_bev = dterm(l_bev, params.s_bev);
  return r;
}

PerLossUncertaintyResult per_loss_uncertainty(const std::vector<double>& losses,
                                              const std::vector<double>& s) {
  if (losses.size() != s.size()) throw InputError("per_loss_uncertainty: size mismatch");
  PerLossUncertaintyResult r;
  r.d_s.resize(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) {
    r.total += losses[i] * std::exp(-s[i]) / 2.0 + s[i] / 2.0;
    r.d_s[i] = -losses[i] * std::exp(-s[i]) / 2.0 + 0.5;
  }
  return r;
}

std::map<std::string, double> TaskLossReport::as_key_values() const {
  return {
      {"loss.ce_voxel", ce_v},     {"loss.lovasz_voxel", lovasz_v},
      {"loss.heatmap", hm},        {"loss.reg", reg},
      {"loss.iou", iou},           {"loss.ce_bev", ce_bev},
      {"loss.lovasz_bev", lovasz_bev},
      {"loss.seg", l_seg},         {"loss.det", l_det},
      {"loss.bev", l_bev},         {"loss.total", total},
      {"grad.s_seg", d_s_seg},     {"grad.s_det", d_s_det},
      {"grad.s_bev", d_s_bev},
  };
}

}  // namespace voxmt
