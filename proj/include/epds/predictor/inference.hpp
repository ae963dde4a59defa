#pragma once

#include <cmath>
#include <span>
#include <string>

#include "epds/dataset.hpp"
#include "epds/predictor/model.hpp"

namespace epds::nn {

/// Feedback for encodings that keep vbat as a raw channel: the predicted
/// value replaces it and every other channel holds its last value.
struct HoldLastFeedback {
  Eigen::Index vbat_channel = 0;

  template <typename Scalar>
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> operator()(
      Scalar vbat, const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& last) const {
    auto row = last;
    row(vbat_channel) = vbat;
    return row;
  }
};

/// Feedback for PCA inputs: hold the last scaled feature row, substitute the
/// predicted vbat and re-project through the fitted components.
struct PcaFeedback {
  const FeatureEncoder* encoder = nullptr;
  Eigen::RowVectorXd last_scaled;  // all kFeatureNames columns

  template <typename Scalar>
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> operator()(
      Scalar vbat, const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>&) {
    last_scaled(kVbatColumn) = static_cast<double>(vbat);
    return encoder->encode(last_scaled).row(0).template cast<Scalar>();
  }
};

/// Chained prediction: predict len_pred samples, append them to the input
/// history, predict again from the latest len_in rows, and clip the result
/// to exactly len_seg samples.
template <typename Model, typename Feedback>
Vec<typename Model::scalar_type> predict_variable_length(
    const Model& model, const Mat<typename Model::scalar_type>& seq_in, Eigen::Index len_seg,
    Feedback&& feedback) {
  using S = typename Model::scalar_type;
  if (len_seg < 1) throw Error(ErrorCode::InvalidArgument, "len_seg must be >= 1");
  const Eigen::Index len_in = model.shape.len_in;
  const Eigen::Index len_pred = model.shape.len_pred;
  if (seq_in.rows() != len_in || seq_in.cols() != model.shape.input_size) {
    throw Error(ErrorCode::ShapeMismatch, "input sequence does not match the model shape");
  }
  const Eigen::Index rounds = (len_seg + len_pred - 1) / len_pred;
  Mat<S> history(len_in + rounds * len_pred, seq_in.cols());
  history.topRows(len_in) = seq_in;
  Eigen::Index rows = len_in;
  Vec<S> out(rounds * len_pred);
  for (Eigen::Index r = 0; r < rounds; ++r) {
    const Mat<S> window = history.middleRows(rows - len_in, len_in);
    const Vec<S> pred = model.predict(window);
    out.segment(r * len_pred, len_pred) = pred;
    for (Eigen::Index k = 0; k < len_pred; ++k) {
      const Eigen::Matrix<S, 1, Eigen::Dynamic> last = history.row(rows - 1);
      history.row(rows) = feedback(pred(k), last);
      ++rows;
    }
  }
  return out.head(len_seg);
}

template <typename Model>
Vec<typename Model::scalar_type> predict_variable_length(
    const Model& model, const Mat<typename Model::scalar_type>& seq_in, Eigen::Index len_seg,
    Eigen::Index vbat_channel = 0) {
  return predict_variable_length(model, seq_in, len_seg, HoldLastFeedback{vbat_channel});
}

/// Root mean squared error, accumulated in index order.
inline double rmse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw Error(ErrorCode::LengthMismatch, "prediction has " + std::to_string(pred.size()) +
                                               " samples, target " +
                                               std::to_string(target.size()));
  }
  if (pred.empty()) throw Error(ErrorCode::EmptySequence, "rmse of empty sequences");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

/// RMSE over every predicted sample of a packed dataset (normalised units).
template <typename Model>
double evaluate_rmse(const Model& model, const PackedSequences& data, std::size_t chunk = 256) {
  using S = typename Model::scalar_type;
  if (data.size() == 0) throw Error(ErrorCode::EmptySequence, "evaluation set is empty");
  std::vector<double> pred;
  std::vector<double> target;
  std::vector<std::size_t> idx;
  for (std::size_t b = 0; b < data.size(); b += chunk) {
    idx.clear();
    for (std::size_t i = b; i < std::min(data.size(), b + chunk); ++i) idx.push_back(i);
    const Mat<S> out = model.forward(time_major<S>(data.inputs, idx));
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const auto& y = data.targets[idx[static_cast<std::size_t>(c)]];
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        pred.push_back(static_cast<double>(out(r, c)));
        target.push_back(y(r));
      }
    }
  }
  return rmse(pred, target);
}

}  // namespace epds::nn
