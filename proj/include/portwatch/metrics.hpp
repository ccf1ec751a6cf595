#pragma once

#include <vector>

#include "portwatch/detector.hpp"
#include "portwatch/synth.hpp"
#include "portwatch/types.hpp"

namespace portwatch {

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;

  long total() const { return tp + fp + tn + fn; }
  double tpr() const;  // NaN when tp + fn == 0
  double fpr() const;  // NaN when fp + tn == 0
  double f1() const;   // 2TP / (2TP + FP + FN); NaN when denominator is 0
};

// Two evaluation granularities: "rows" collapses each tick to one
// any-anomaly / any-alert bit; "indiv" scores every (stream, tick) cell of
// the flattened test matrix.
struct EvalReport {
  double tpr_rows = 0.0, fpr_rows = 0.0;
  double tpr_indiv = 0.0, fpr_indiv = 0.0;
  double f1 = 0.0;       // indiv level, the tuner's objective
  double f1_rows = 0.0;  // exposed, not used in tuning
  ConfusionCounts rows;
  ConfusionCounts indiv;
  bool indiv_tpr_defined = true;  // false iff the mask is all-false
};

// Rows-level confusion over ticks [test_start, T).  Throws on an empty
// window or shape mismatch.
ConfusionCounts confusion_rows(const AlertMatrix& alerts, const BoolMatrix& mask, Index test_start);

// Cell-level confusion over the same window.
ConfusionCounts confusion_indiv(const AlertMatrix& alerts, const BoolMatrix& mask, Index test_start);

EvalReport evaluate_alerts(const AlertMatrix& alerts, const BoolMatrix& mask, Index test_start);

// Assembles the same report from pre-accumulated counts (the detector's
// streaming fast path).
EvalReport report_from_counts(const StreamCounts& counts);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), sorted by fpr, deduped
  std::vector<double> params;                     // parameter value per point (L or alpha)
  double auc = 0.0;
};

// Sorts by fpr, deduplicates equal fprs keeping the max tpr, then integrates
// the trapezoid through (0,0) and (1,1) anchors.  params, when given, must
// align with points and follows the surviving point after deduplication.
RocCurve roc_auc(std::vector<std::pair<double, double>> points, std::vector<double> params = {});

}  // namespace portwatch
