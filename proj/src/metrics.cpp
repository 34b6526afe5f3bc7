#include "voxmt/metrics.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "voxmt/errors.hpp"

namespace voxmt {

IoUReport miou(const std::vector<int32_t>& pred, const std::vector<int32_t>& gt, int32_t k,
               const std::vector<int32_t>& ignore_ids) {
  if (pred.size() != gt.size()) throw InputError("miou: prediction/ground-truth size mismatch");
  const std::set<int32_t> ignored(ignore_ids.begin(), ignore_ids.end());
  std::vector<int64_t> tp(k, 0), fp(k, 0), fn(k, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int32_t p = pred[i], g = gt[i];
    if (p < 0 || p >= k || g < 0 || g >= k) {
      throw InputError("miou: label out of range at point " + std::to_string(i));
    }
    if (ignored.count(g) != 0) continue;
    if (p == g) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  IoUReport rep;
  rep.per_class.assign(static_cast<std::size_t>(k), -1.0);
  double sum = 0.0;
  int32_t counted = 0;
  for (int32_t c = 0; c < k; ++c) {
    if (ignored.count(c) != 0) continue;
    const int64_t denom = tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;  // absent from both sides
    rep.per_class[c] = static_cast<double>(tp[c]) / static_cast<double>(denom);
    sum += rep.per_class[c];
    ++counted;
  }
  rep.mean = counted > 0 ? sum / counted : 0.0;
  return rep;
}

double PqClassStats::pq() const {
  const double denom = tp + 0.5 * fp + 0.5 * fn;
  return denom > 0.0 ? iou_sum / denom : 0.0;
}
double PqClassStats::sq() const { return tp > 0 ? iou_sum / tp : 0.0; }
double PqClassStats::rq() const {
  const double denom = tp + 0.5 * fp + 0.5 * fn;
  return denom > 0.0 ? tp / denom : 0.0;
}

namespace {

// Segment key: (class, instance) for things, (class, 0) for stuff.
using SegKey = std::pair<int32_t, int32_t>;

std::map<SegKey, std::vector<int32_t>> collect_segments(const PanopticLabel& lab,
                                                        const std::set<int32_t>& things,
                                                        const std::set<int32_t>& stuff) {
  std::map<SegKey, std::vector<int32_t>> segs;
  for (std::size_t i = 0; i < lab.semantic.size(); ++i) {
    const int32_t c = lab.semantic[i];
    if (things.count(c) != 0) {
      segs[{c, lab.instance[i]}].push_back(static_cast<int32_t>(i));
    } else if (stuff.count(c) != 0) {
      segs[{c, 0}].push_back(static_cast<int32_t>(i));
    }
  }
  return segs;
}

}  // namespace

PqReport pq(const PanopticLabel& pred, const PanopticLabel& gt,
            const std::vector<int32_t>& thing_classes, const std::vector<int32_t>& stuff_classes) {
  if (pred.semantic.size() != gt.semantic.size() || pred.instance.size() != gt.instance.size() ||
      pred.semantic.size() != pred.instance.size()) {
    throw InputError("pq: panoptic labelings disagree in point count");
  }
  const std::set<int32_t> things(thing_classes.begin(), thing_classes.end());
  const std::set<int32_t> stuff(stuff_classes.begin(), stuff_classes.end());

  auto pred_segs = collect_segments(pred, things, stuff);
  auto gt_segs = collect_segments(gt, things, stuff);

  PqReport rep;
  std::set<SegKey> matched_pred;
  for (const auto& [gkey, gpoints] : gt_segs) {
    PqClassStats& st = rep.per_class[gkey.first];
    // Intersections with predicted segments of the same class.
    std::map<SegKey, int32_t> inter;
    for (int32_t pi : gpoints) {
      const int32_t pc = pred.semantic[pi];
      if (pc != gkey.first) continue;
      const int32_t inst = things.count(pc) != 0 ? pred.instance[pi] : 0;
      ++inter[{pc, inst}];
    }
    bool matched = false;
    for (const auto& [pkey, count] : inter) {
      const double uni = static_cast<double>(gpoints.size()) +
                         static_cast<double>(pred_segs.at(pkey).size()) - count;
      const double iou = count / uni;
      if (iou > 0.5) {
        st.iou_sum += iou;
        ++st.tp;
        matched_pred.insert(pkey);
        matched = true;
        break;  // IoU > 0.5 matches are unique
      }
    }
    if (!matched) ++st.fn;
  }
  for (const auto& [pkey, ppoints] : pred_segs) {
    if (matched_pred.count(pkey) == 0) ++rep.per_class[pkey.first].fp;
  }

  PqClassStats pooled;
  for (const auto& [cls, st] : rep.per_class) {
    pooled.iou_sum += st.iou_sum;
    pooled.tp += st.tp;
    pooled.fp += st.fp;
    pooled.fn += st.fn;
  }
  if (pooled.tp + pooled.fp + pooled.fn == 0) {
    rep.pq = rep.sq = rep.rq = 1.0;  // both labelings empty
  } else {
    rep.pq = pooled.pq();
    rep.sq = pooled.sq();
    rep.rq = pooled.rq();
  }
  return rep;
}

}  // namespace voxmt
