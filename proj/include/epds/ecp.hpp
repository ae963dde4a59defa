#pragma once

#include <memory>
#include <span>
#include <string>

#include "epds/discharge.hpp"
#include "epds/energy.hpp"
#include "epds/predictor/checkpoint.hpp"
#include "epds/time.hpp"

namespace epds {

/// What a predictor sees at the trigger point of a segment flight.
struct SegmentContext {
  std::span<const double> observed;  // vbat samples of this segment so far
  Tick total_samples = 0;            // samples the whole segment produces
  double current_voltage = 0.0;      // pack voltage now (next sample)
  double headwind_kmh = 0.0;
};

/// Energy consumption prediction (ECP) for a whole segment in A.s.
class EnergyPredictor {
 public:
  virtual ~EnergyPredictor() = default;
  virtual std::string name() const = 0;
  /// Samples that must be observed before a prediction can be made.
  virtual std::size_t min_samples() const { return 1; }
  virtual double predict_ecp(const SegmentContext& ctx, const VoltageCurrentMap& map) = 0;
};

/// Q of the observed samples plus Q of a predicted remainder; predicted
/// voltages are clamped into the map's operating range.
double segment_ecp(std::span<const double> observed, std::span<const double> predicted,
                   const VoltageCurrentMap& map);

/// Noiseless ground-truth extrapolation scaled by a multiplicative bias.
/// bias = 1 is an idealised predictor; other values inject systematic error.
class OraclePredictor final : public EnergyPredictor {
 public:
  explicit OraclePredictor(const DischargeModel& model, double bias = 1.0);
  std::string name() const override { return "oracle"; }
  double predict_ecp(const SegmentContext& ctx, const VoltageCurrentMap& map) override;

 private:
  DischargeModel model_;
  double bias_;
};

/// Chained recurrent prediction of the remaining vbat samples from the last
/// len_in observed ones. Only vbat-only encodings can be driven from a live
/// voltage stream, so other checkpoints are rejected.
class SequencePredictor final : public EnergyPredictor {
 public:
  explicit SequencePredictor(nn::Checkpoint checkpoint);
  std::string name() const override;
  std::size_t min_samples() const override;
  double predict_ecp(const SegmentContext& ctx, const VoltageCurrentMap& map) override;

 private:
  nn::Checkpoint ckpt_;
};

}  // namespace epds
