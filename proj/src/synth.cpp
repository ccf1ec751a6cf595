#include "portwatch/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "portwatch/rng.hpp"

namespace portwatch {

void AnomalySpec::validate(Index p, Index T) const {
  if (!(snr >= 0.0)) throw std::invalid_argument("AnomalySpec: snr must be >= 0");
  if (duration_ticks < 1) throw std::invalid_argument("AnomalySpec: duration_ticks must be >= 1");
  if (start_tick < 0 || start_tick + duration_ticks > T)
    throw std::invalid_argument("AnomalySpec: window [" + std::to_string(start_tick) + ", " +
                                std::to_string(start_tick + duration_ticks) + ") does not fit in T=" +
                                std::to_string(T));
  if (streams.empty()) throw std::invalid_argument("AnomalySpec: needs at least one stream");
  for (const Index s : streams) {
    if (s < 0 || s >= p)
      throw std::invalid_argument("AnomalySpec: stream " + std::to_string(s) + " outside [0, " +
                                  std::to_string(p) + ")");
  }
}

SeriesMatrix synthesize_background(const FactorModel& model, Index T, std::uint64_t seed) {
  model.validate();
  if (T < 1) throw std::invalid_argument("synthesize_background: T must be >= 1");
  const Matrix<double> factors = generate_trends(model.trends, T);
  SeriesMatrix x = model.loadings * factors;
  for (Index j = 0; j < model.p(); ++j) {
    const Vector<double> noise =
        generate_fgn(model.noise, T, derive_seed(seed, 0x0153ULL, static_cast<std::uint64_t>(j)));
    x.row(j) += noise.transpose();
  }
  return x;
}

LabeledDataset synthesize_dataset(const FactorModel& model, const AnomalySpec& anomaly, Index T,
                                  std::uint64_t seed, Index warmup_len) {
  anomaly.validate(model.p(), T);
  if (warmup_len < 2 || warmup_len > T)
    throw std::invalid_argument("synthesize_dataset: warmup_len must lie in [2, T]");

  LabeledDataset out;
  out.model = model;
  out.anomaly = anomaly;
  out.data = synthesize_background(model, T, seed);
  out.mask.cells = BoolMatrix::Constant(model.p(), T, false);
  out.mask.snr = anomaly.snr;
  out.mask.duration_ticks = anomaly.duration_ticks;
  out.mask.streams = anomaly.streams;

  // Amplitude scale comes from the anomaly-free warm-up window only, so the
  // injected shift never contaminates its own calibration.
  for (const Index j : anomaly.streams) {
    const auto row = out.data.row(j).head(warmup_len);
    const double mean = row.mean();
    const double sd = std::sqrt((row.array() - mean).square().mean());
    const double shift = anomaly.snr * sd;
    for (Index t = anomaly.start_tick; t < anomaly.start_tick + anomaly.duration_ticks; ++t) {
      out.data(j, t) += shift;
      out.mask.cells(j, t) = true;
    }
  }
  return out;
}

}  // namespace portwatch
