#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "voxmt/refine.hpp"

namespace voxmt {

struct IoUReport {
  std::vector<double> per_class;   // -1 for classes absent from both sides
  double mean = 0.0;
};

IoUReport miou(const std::vector<int32_t>& pred, const std::vector<int32_t>& gt, int32_t k,
               const std::vector<int32_t>& ignore_ids = {});

struct PqClassStats {
  double iou_sum = 0.0;
  int32_t tp = 0;
  int32_t fp = 0;
  int32_t fn = 0;

  double pq() const;
  double sq() const;
  double rq() const;
};

struct PqReport {
  // Aggregates over the pooled TP/FP/FN counts, so PQ == SQ * RQ exactly.
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  std::map<int32_t, PqClassStats> per_class;
};

// Segments matched at IoU > 0.5 (unique by the strict-majority property);
// stuff classes are one segment each.
PqReport pq(const PanopticLabel& pred, const PanopticLabel& gt,
            const std::vector<int32_t>& thing_classes, const std::vector<int32_t>& stuff_classes);

}  // namespace voxmt
