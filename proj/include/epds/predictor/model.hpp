#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "epds/predictor/cells.hpp"

namespace epds::nn {

struct ModelShape {
  Eigen::Index input_size = 1;
  Eigen::Index hidden_size = 64;
  Eigen::Index len_in = 25;
  Eigen::Index len_pred = 100;
  bool bidirectional = true;

  Eigen::Index directions() const { return bidirectional ? 2 : 1; }
  /// Width of the flattened hidden-state vector the head consumes.
  Eigen::Index head_inputs() const { return len_in * directions() * hidden_size; }
  bool operator==(const ModelShape&) const = default;
};

/// Recurrent encoder (one or two directions) followed by a linear head over
/// the flattened per-step states [fwd_h_t; bwd_h_t], t = 1..len_in.
/// Batched tensors are time-major: one f x B matrix per input step.
template <typename Scalar, template <typename> class CellT>
struct RecurrentModel {
  using Cell = CellT<Scalar>;
  using Params = typename Cell::Params;
  using scalar_type = Scalar;

  ModelShape shape;
  Params fwd;
  Params bwd;  // empty unless bidirectional
  Mat<Scalar> head_w;  // len_pred x head_inputs
  Vec<Scalar> head_b;  // len_pred

  /// Everything backward() needs from a forward pass, indexed by input step.
  struct Trace {
    std::vector<typename Cell::Cache> fwd, bwd;
    std::vector<Mat<Scalar>> hf, hb;
  };

  static RecurrentModel zeros(const ModelShape& s) {
    RecurrentModel m;
    m.shape = s;
    m.fwd = Params::zeros(s.hidden_size, s.input_size);
    if (s.bidirectional) m.bwd = Params::zeros(s.hidden_size, s.input_size);
    m.head_w = Mat<Scalar>::Zero(s.len_pred, s.head_inputs());
    m.head_b = Vec<Scalar>::Zero(s.len_pred);
    return m;
  }

  static RecurrentModel random(const ModelShape& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RecurrentModel m;
    m.shape = s;
    m.fwd = Params::random(s.hidden_size, s.input_size, rng);
    if (s.bidirectional) m.bwd = Params::random(s.hidden_size, s.input_size, rng);
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(s.head_inputs()));
    m.head_w.resize(s.len_pred, s.head_inputs());
    m.head_b.resize(s.len_pred);
    fill_uniform(m.head_w, bound, rng);
    fill_uniform(m.head_b, bound, rng);
    return m;
  }

  RecurrentModel zeros_like() const { return zeros(shape); }

  std::string kind() const {
    return std::string(shape.bidirectional ? "bi" : "") + Cell::kName;
  }

  Eigen::Index fwd_offset(Eigen::Index t) const {
    return t * shape.directions() * shape.hidden_size;
  }
  Eigen::Index bwd_offset(Eigen::Index t) const { return fwd_offset(t) + shape.hidden_size; }

  void check_input(const std::vector<Mat<Scalar>>& steps) const {
    if (static_cast<Eigen::Index>(steps.size()) != shape.len_in) {
      throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(shape.len_in) +
                                                " input steps, got " +
                                                std::to_string(steps.size()));
    }
    for (const auto& x : steps) {
      if (x.rows() != shape.input_size || x.cols() != steps.front().cols()) {
        throw Error(ErrorCode::ShapeMismatch,
                    "expected " + std::to_string(shape.input_size) + " features per step, got " +
                        std::to_string(x.rows()));
      }
    }
  }

  /// len_pred x B predictions.
  Mat<Scalar> forward(const std::vector<Mat<Scalar>>& steps, Trace* trace = nullptr) const {
    check_input(steps);
    Trace local;
    Trace& tr = trace ? *trace : local;
    const auto L = static_cast<std::size_t>(shape.len_in);
    const Eigen::Index batch = steps.front().cols();
    const Eigen::Index h = shape.hidden_size;

    tr.fwd.assign(L, {});
    tr.hf.assign(L, {});
    auto state = Cell::zero_state(fwd, batch);
    for (std::size_t t = 0; t < L; ++t) {
      state = Cell::forward(fwd, steps[t], state, tr.fwd[t]);
      tr.hf[t] = state.h;
    }
    if (shape.bidirectional) {
      tr.bwd.assign(L, {});
      tr.hb.assign(L, {});
      auto back = Cell::zero_state(bwd, batch);
      for (std::size_t s = 0; s < L; ++s) {
        const std::size_t t = L - 1 - s;
        back = Cell::forward(bwd, steps[t], back, tr.bwd[t]);
        tr.hb[t] = back.h;
      }
    }

    // Accumulated per step so that zero backward blocks add exact zeros.
    Mat<Scalar> out = head_b.replicate(1, batch);
    for (std::size_t t = 0; t < L; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      out.noalias() += head_w.middleCols(fwd_offset(ti), h) * tr.hf[t];
      if (shape.bidirectional) out.noalias() += head_w.middleCols(bwd_offset(ti), h) * tr.hb[t];
    }
    return out;
  }

  /// Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
  void backward(const Trace& tr, const Mat<Scalar>& dout, RecurrentModel& grad) const {
    const auto L = static_cast<std::size_t>(shape.len_in);
    const Eigen::Index h = shape.hidden_size;
    const Eigen::Index batch = dout.cols();
    grad.head_b += dout.rowwise().sum();

    auto carry = Cell::zero_carry(fwd, batch);
    for (std::size_t s = 0; s < L; ++s) {
      const std::size_t t = L - 1 - s;
      const auto ti = static_cast<Eigen::Index>(t);
      grad.head_w.middleCols(fwd_offset(ti), h).noalias() += dout * tr.hf[t].transpose();
      const Mat<Scalar> dh = head_w.middleCols(fwd_offset(ti), h).transpose() * dout;
      Cell::backward(fwd, tr.fwd[t], dh, carry, grad.fwd);
    }
    if (!shape.bidirectional) return;
    auto back = Cell::zero_carry(bwd, batch);
    for (std::size_t t = 0; t < L; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      grad.head_w.middleCols(bwd_offset(ti), h).noalias() += dout * tr.hb[t].transpose();
      const Mat<Scalar> dh = head_w.middleCols(bwd_offset(ti), h).transpose() * dout;
      Cell::backward(bwd, tr.bwd[t], dh, back, grad.bwd);
    }
  }

  /// Single sequence, len_in x f, to len_pred predictions.
  Vec<Scalar> predict(const Mat<Scalar>& seq) const {
    std::vector<Mat<Scalar>> steps;
    steps.reserve(static_cast<std::size_t>(seq.rows()));
    for (Eigen::Index t = 0; t < seq.rows(); ++t) steps.emplace_back(seq.row(t).transpose());
    return forward(steps).col(0);
  }

  template <typename F>
  void visit(F&& fn) {
    fwd.visit([&](const std::string& n, auto& t) { fn("fwd." + n, t); });
    if (shape.bidirectional) bwd.visit([&](const std::string& n, auto& t) { fn("bwd." + n, t); });
    fn("head.W", head_w);
    fn("head.b", head_b);
  }
  template <typename F>
  void visit(F&& fn) const {
    fwd.visit([&](const std::string& n, const auto& t) { fn("fwd." + n, t); });
    if (shape.bidirectional)
      bwd.visit([&](const std::string& n, const auto& t) { fn("bwd." + n, t); });
    fn("head.W", head_w);
    fn("head.b", head_b);
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    visit([&](const std::string&, const auto& t) { n += t.size(); });
    return n;
  }
};

template <typename Scalar>
using LstmModel = RecurrentModel<Scalar, LstmCell>;
template <typename Scalar>
using RnnModel = RecurrentModel<Scalar, RnnCell>;

/// Bi-LSTM: both directions on.
template <typename Scalar>
LstmModel<Scalar> make_bilstm(ModelShape s, std::uint64_t seed) {
  s.bidirectional = true;
  return LstmModel<Scalar>::random(s, seed);
}

/// Unidirectional vanilla RNN baseline.
template <typename Scalar>
RnnModel<Scalar> make_rnn(ModelShape s, std::uint64_t seed) {
  s.bidirectional = false;
  return RnnModel<Scalar>::random(s, seed);
}

/// Gathers samples idx from a list of len_in x f sequences into time-major
/// f x B step matrices.
template <typename Scalar>
std::vector<Mat<Scalar>> time_major(const std::vector<Eigen::MatrixXd>& seqs,
                                    std::span<const std::size_t> idx) {
  if (idx.empty()) return {};
  const Eigen::Index len = seqs[idx.front()].rows();
  const Eigen::Index f = seqs[idx.front()].cols();
  const auto batch = static_cast<Eigen::Index>(idx.size());
  std::vector<Mat<Scalar>> steps(static_cast<std::size_t>(len), Mat<Scalar>(f, batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& s = seqs[idx[static_cast<std::size_t>(b)]];
    if (s.rows() != len || s.cols() != f) {
      throw Error(ErrorCode::ShapeMismatch, "sequences in a batch differ in shape");
    }
    for (Eigen::Index t = 0; t < len; ++t)
      steps[static_cast<std::size_t>(t)].col(b) = s.row(t).transpose().cast<Scalar>();
  }
  return steps;
}

/// Targets idx stacked as a len_pred x B matrix.
template <typename Scalar>
Mat<Scalar> stack_targets(const std::vector<Eigen::VectorXd>& targets,
                          std::span<const std::size_t> idx) {
  const Eigen::Index p = targets[idx.front()].size();
  Mat<Scalar> y(p, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t b = 0; b < idx.size(); ++b)
    y.col(static_cast<Eigen::Index>(b)) = targets[idx[b]].cast<Scalar>();
  return y;
}

}  // namespace epds::nn
