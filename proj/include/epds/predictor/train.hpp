#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epds/dataset.hpp"
#include "epds/predictor/model.hpp"

namespace epds::nn {

inline constexpr double kMinLearningRate = 0.001;
inline constexpr double kMaxLearningRate = 0.1;

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double clip_norm = 5.0;  // global gradient norm; <= 0 disables
  /// Each mini-batch is split into this many fixed contiguous shards whose
  /// gradients are computed concurrently and summed in shard order.
  std::size_t shards = 1;
  bool allow_out_of_range = false;
};

struct TrainReport {
  std::vector<double> loss_history;  // full-dataset MSE after each epoch
  std::size_t steps = 0;
};

/// Raw pointer/size view of every tensor, in visit order.
template <typename Model>
std::vector<std::pair<typename Model::scalar_type*, Eigen::Index>> tensor_views(Model& m) {
  std::vector<std::pair<typename Model::scalar_type*, Eigen::Index>> views;
  m.visit([&](const std::string&, auto& t) { views.emplace_back(t.data(), t.size()); });
  return views;
}

/// Adds the gradient of the summed squared error to grad; returns that sum.
template <typename Model>
typename Model::scalar_type accumulate_sse_gradient(const Model& model,
                                                    const std::vector<Mat<typename Model::scalar_type>>& steps,
                                                    const Mat<typename Model::scalar_type>& y,
                                                    Model& grad) {
  typename Model::Trace trace;
  const auto pred = model.forward(steps, &trace);
  if (pred.rows() != y.rows() || pred.cols() != y.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "target shape differs from model output");
  }
  const auto diff = (pred - y).eval();
  model.backward(trace, (2 * diff).eval(), grad);
  return diff.squaredNorm();
}

/// Mean squared error over a batch and its gradient.
template <typename Model>
std::pair<typename Model::scalar_type, Model> loss_and_gradient(
    const Model& model, const std::vector<Mat<typename Model::scalar_type>>& steps,
    const Mat<typename Model::scalar_type>& y) {
  using S = typename Model::scalar_type;
  Model grad = model.zeros_like();
  const S sse = accumulate_sse_gradient(model, steps, y, grad);
  const S n = static_cast<S>(y.size());
  for (auto [p, size] : tensor_views(grad))
    for (Eigen::Index i = 0; i < size; ++i) p[i] /= n;
  return {sse / n, std::move(grad)};
}

template <typename Model>
typename Model::scalar_type batch_loss(const Model& model,
                                       const std::vector<Mat<typename Model::scalar_type>>& steps,
                                       const Mat<typename Model::scalar_type>& y) {
  return (model.forward(steps) - y).squaredNorm() / static_cast<typename Model::scalar_type>(y.size());
}

/// Mean squared error over a whole packed dataset, in fixed-size chunks.
template <typename Model>
double dataset_mse(const Model& model, const PackedSequences& data, std::size_t chunk = 256) {
  using S = typename Model::scalar_type;
  if (data.size() == 0) throw Error(ErrorCode::EmptySequence, "dataset is empty");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double sse = 0.0;
  double count = 0.0;
  for (std::size_t b = 0; b < idx.size(); b += chunk) {
    const std::span<const std::size_t> part(idx.data() + b, std::min(chunk, idx.size() - b));
    const auto steps = time_major<S>(data.inputs, part);
    const auto y = stack_targets<S>(data.targets, part);
    sse += static_cast<double>((model.forward(steps) - y).squaredNorm());
    count += static_cast<double>(y.size());
  }
  return sse / count;
}

/// Mini-batch gradient descent with global-norm clipping over full BPTT.
template <typename Model>
TrainReport train(Model& model, const PackedSequences& data, const TrainConfig& cfg) {
  using S = typename Model::scalar_type;
  if (data.size() == 0) throw Error(ErrorCode::EmptySequence, "training set is empty");
  if (!cfg.allow_out_of_range &&
      (cfg.learning_rate < kMinLearningRate || cfg.learning_rate > kMaxLearningRate)) {
    throw Error(ErrorCode::ConfigError, "learning rate " + std::to_string(cfg.learning_rate) +
                                            " outside [0.001, 0.1]");
  }
  if (cfg.batch_size == 0 || cfg.shards == 0 || cfg.epochs < 0) {
    throw Error(ErrorCode::InvalidArgument, "batch_size and shards must be positive");
  }
  if (data.len_in != model.shape.len_in || data.len_pred != model.shape.len_pred ||
      data.inputs.front().cols() != model.shape.input_size) {
    throw Error(ErrorCode::ShapeMismatch, "packed sequences do not match the model shape");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  TrainReport report;
  auto params = tensor_views(model);

  auto diverged = [&](int epoch, const std::string& where) {
    return Error(ErrorCode::DivergenceDetected,
                 "non-finite loss at " + where + " (seed " + std::to_string(cfg.seed) +
                     ", epoch " + std::to_string(epoch) + ", step " +
                     std::to_string(report.steps) + ")");
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::span<const std::size_t> batch(order.data() + b,
                                               std::min(cfg.batch_size, order.size() - b));
      const std::size_t shards = std::min(cfg.shards, batch.size());
      std::vector<Model> grads;
      std::vector<S> sse(shards, S(0));
      grads.reserve(shards);
      for (std::size_t s = 0; s < shards; ++s) grads.push_back(model.zeros_like());

      auto run_shard = [&](std::size_t s) {
        const std::size_t lo = batch.size() * s / shards;
        const std::size_t hi = batch.size() * (s + 1) / shards;
        const auto part = batch.subspan(lo, hi - lo);
        sse[s] = accumulate_sse_gradient(model, time_major<S>(data.inputs, part),
                                         stack_targets<S>(data.targets, part), grads[s]);
      };
      if (shards == 1) {
        run_shard(0);
      } else {
        std::vector<std::future<void>> jobs;
        for (std::size_t s = 0; s < shards; ++s)
          jobs.push_back(std::async(std::launch::async, run_shard, s));
        for (auto& j : jobs) j.get();
      }

      S total = S(0);
      for (std::size_t s = 0; s < shards; ++s) total += sse[s];
      if (!std::isfinite(static_cast<double>(total))) throw diverged(epoch, "batch");
      auto g = tensor_views(grads[0]);
      for (std::size_t s = 1; s < shards; ++s) {
        auto gs = tensor_views(grads[s]);
        for (std::size_t k = 0; k < g.size(); ++k)
          for (Eigen::Index i = 0; i < g[k].second; ++i) g[k].first[i] += gs[k].first[i];
      }

      const S n = static_cast<S>(batch.size() * static_cast<std::size_t>(model.shape.len_pred));
      S norm2 = S(0);
      for (auto [p, size] : g)
        for (Eigen::Index i = 0; i < size; ++i) norm2 += (p[i] / n) * (p[i] / n);
      const S norm = std::sqrt(norm2);
      S scale = static_cast<S>(cfg.learning_rate) / n;
      if (cfg.clip_norm > 0.0 && norm > static_cast<S>(cfg.clip_norm)) {
        scale *= static_cast<S>(cfg.clip_norm) / norm;
      }
      for (std::size_t k = 0; k < g.size(); ++k)
        for (Eigen::Index i = 0; i < g[k].second; ++i) params[k].first[i] -= scale * g[k].first[i];
      ++report.steps;
    }
    const double loss = dataset_mse(model, data);
    if (!std::isfinite(loss)) throw diverged(epoch, "epoch end");
    report.loss_history.push_back(loss);
  }
  return report;
}

}  // namespace epds::nn
