#include "portwatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace portwatch {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(long num, long den) { return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den); }
}  // namespace

double ConfusionCounts::tpr() const { return ratio(tp, tp + fn); }
double ConfusionCounts::fpr() const { return ratio(fp, fp + tn); }
double ConfusionCounts::f1() const { return ratio(2 * tp, 2 * tp + fp + fn); }

namespace {

void check_window(const AlertMatrix& alerts, const BoolMatrix& mask, Index test_start) {
  if (alerts.p != mask.rows() || alerts.T != mask.cols())
    throw std::invalid_argument("confusion: alert matrix and mask shapes disagree");
  if (test_start < 0 || test_start >= alerts.T)
    throw std::invalid_argument("confusion: empty test window");
  for (const auto& rec : alerts.records) {
    if (rec.tick < 0 || rec.tick >= alerts.T || rec.stream < 0 || rec.stream >= alerts.p)
      throw std::invalid_argument("confusion: alert record out of bounds");
  }
}

}  // namespace

ConfusionCounts confusion_rows(const AlertMatrix& alerts, const BoolMatrix& mask, Index test_start) {
  check_window(alerts, mask, test_start);
  std::vector<std::uint8_t> predicted(static_cast<std::size_t>(alerts.T - test_start), 0);
  for (const auto& rec : alerts.records) {
    if (rec.tick >= test_start) predicted[static_cast<std::size_t>(rec.tick - test_start)] = 1;
  }
  ConfusionCounts counts;
  for (Index t = test_start; t < alerts.T; ++t) {
    const bool actual = mask.col(t).any();
    const bool pred = predicted[static_cast<std::size_t>(t - test_start)] != 0;
    if (actual && pred) ++counts.tp;
    else if (!actual && pred) ++counts.fp;
    else if (actual && !pred) ++counts.fn;
    else ++counts.tn;
  }
  return counts;
}

ConfusionCounts confusion_indiv(const AlertMatrix& alerts, const BoolMatrix& mask, Index test_start) {
  check_window(alerts, mask, test_start);
  BoolMatrix predicted = BoolMatrix::Constant(alerts.p, alerts.T, false);
  for (const auto& rec : alerts.records) predicted(rec.stream, rec.tick) = true;
  ConfusionCounts counts;
  for (Index t = test_start; t < alerts.T; ++t) {
    for (Index j = 0; j < alerts.p; ++j) {
      const bool actual = mask(j, t);
      const bool pred = predicted(j, t);
      if (actual && pred) ++counts.tp;
      else if (!actual && pred) ++counts.fp;
      else if (actual && !pred) ++counts.fn;
      else ++counts.tn;
    }
  }
  return counts;
}

EvalReport evaluate_alerts(const AlertMatrix& alerts, const BoolMatrix& mask, Index test_start) {
  EvalReport report;
  report.rows = confusion_rows(alerts, mask, test_start);
  report.indiv = confusion_indiv(alerts, mask, test_start);
  report.tpr_rows = report.rows.tpr();
  report.fpr_rows = report.rows.fpr();
  report.tpr_indiv = report.indiv.tpr();
  report.fpr_indiv = report.indiv.fpr();
  report.f1 = report.indiv.f1();
  report.f1_rows = report.rows.f1();
  report.indiv_tpr_defined = (report.indiv.tp + report.indiv.fn) > 0;
  return report;
}

EvalReport report_from_counts(const StreamCounts& counts) {
  EvalReport report;
  report.rows = ConfusionCounts{counts.rows_tp, counts.rows_fp, counts.rows_tn, counts.rows_fn};
  report.indiv = ConfusionCounts{counts.indiv_tp, counts.indiv_fp, counts.indiv_tn, counts.indiv_fn};
  report.tpr_rows = report.rows.tpr();
  report.fpr_rows = report.rows.fpr();
  report.tpr_indiv = report.indiv.tpr();
  report.fpr_indiv = report.indiv.fpr();
  report.f1 = report.indiv.f1();
  report.f1_rows = report.rows.f1();
  report.indiv_tpr_defined = (report.indiv.tp + report.indiv.fn) > 0;
  return report;
}

RocCurve roc_auc(std::vector<std::pair<double, double>> points, std::vector<double> params) {
  if (points.empty()) throw std::invalid_argument("roc_auc: need at least one point");
  if (!params.empty() && params.size() != points.size())
    throw std::invalid_argument("roc_auc: params must align with points");
  for (const auto& [fpr, tpr] : points) {
    if (!(fpr >= 0.0 && fpr <= 1.0 && tpr >= 0.0 && tpr <= 1.0))
      throw std::invalid_argument("roc_auc: point outside the unit square");
  }

  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].first != points[b].first) return points[a].first < points[b].first;
    return points[a].second < points[b].second;
  });

  RocCurve out;
  for (const std::size_t i : order) {
    const double param = params.empty() ? 0.0 : params[i];
    if (!out.points.empty() && out.points.back().first == points[i].first) {
      // Equal fpr: keep the max tpr (the sort put it last).
      out.points.back() = points[i];
      if (!params.empty()) out.params.back() = param;
    } else {
      out.points.push_back(points[i]);
      if (!params.empty()) out.params.push_back(param);
    }
  }

  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;  // (0,0) anchor
  for (const auto& [fpr, tpr] : out.points) {
    auc += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  auc += 0.5 * (1.0 - prev_fpr) * (1.0 + prev_tpr);  // (1,1) anchor
  out.auc = auc;
  return out;
}

}  // namespace portwatch
