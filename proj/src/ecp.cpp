#include "epds/ecp.hpp"

#include <algorithm>
#include <vector>

#include "epds/error.hpp"
#include "epds/predictor/inference.hpp"

namespace epds {

double segment_ecp(std::span<const double> observed, std::span<const double> predicted,
                   const VoltageCurrentMap& map) {
  double q = 0.0;
  for (double v : observed) q += current_from_voltage(map, v) * kSampleInterval;
  for (double v : predicted) {
    q += current_from_voltage(map, std::clamp(v, map.v_min, map.v_max)) * kSampleInterval;
  }
  return q;
}

OraclePredictor::OraclePredictor(const DischargeModel& model, double bias)
    : model_(model), bias_(bias) {
  if (!(bias > 0.0)) throw Error(ErrorCode::InvalidArgument, "oracle bias must be positive");
}

double OraclePredictor::predict_ecp(const SegmentContext& ctx, const VoltageCurrentMap& map) {
  const long remaining = static_cast<long>(ctx.total_samples) - static_cast<long>(ctx.observed.size());
  const Eigen::VectorXd rest =
      noiseless_trace(model_, ctx.current_voltage, ctx.headwind_kmh, std::max(0L, remaining));
  return bias_ * segment_ecp(ctx.observed, {rest.data(), static_cast<std::size_t>(rest.size())}, map);
}

SequencePredictor::SequencePredictor(nn::Checkpoint checkpoint) : ckpt_(std::move(checkpoint)) {
  if (ckpt_.encoder.selection.strategy != FeatureStrategy::VbatOnly) {
    throw Error(ErrorCode::ConfigError,
                "live prediction needs a vbat-only checkpoint, got '" +
                    ckpt_.encoder.selection.name() + "'");
  }
}

std::string SequencePredictor::name() const {
  return std::visit([](const auto& m) { return m.kind(); }, ckpt_.model);
}

std::size_t SequencePredictor::min_samples() const {
  return static_cast<std::size_t>(
      std::visit([](const auto& m) { return m.shape.len_in; }, ckpt_.model));
}

double SequencePredictor::predict_ecp(const SegmentContext& ctx, const VoltageCurrentMap& map) {
  const auto len_in = static_cast<std::size_t>(min_samples());
  if (ctx.observed.size() < len_in) {
    throw Error(ErrorCode::SequenceTooShort, "need " + std::to_string(len_in) +
                                                 " observed samples before predicting");
  }
  const long remaining = static_cast<long>(ctx.total_samples) - static_cast<long>(ctx.observed.size());
  if (remaining <= 0) return segment_ecp(ctx.observed, {}, map);

  Eigen::MatrixXd seq(static_cast<Eigen::Index>(len_in), 1);
  const std::size_t first = ctx.observed.size() - len_in;
  for (std::size_t i = 0; i < len_in; ++i) {
    seq(static_cast<Eigen::Index>(i), 0) = ckpt_.encoder.scale_vbat(ctx.observed[first + i]);
  }
  const Eigen::VectorXd scaled = std::visit(
      [&](const auto& m) -> Eigen::VectorXd { return nn::predict_variable_length(m, seq, remaining); },
      ckpt_.model);
  std::vector<double> volts(static_cast<std::size_t>(scaled.size()));
  for (Eigen::Index i = 0; i < scaled.size(); ++i) {
    volts[static_cast<std::size_t>(i)] = ckpt_.encoder.unscale_vbat(scaled(i));
  }
  return segment_ecp(ctx.observed, volts, map);
}

}  // namespace epds
