#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "epds/error.hpp"

namespace epds::nn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  return a.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
}

template <typename Derived>
auto tanh_of(const Eigen::MatrixBase<Derived>& a) {
  return a.array().tanh().matrix();
}

/// [h_prev; x] stacked per batch column.
template <typename Scalar>
Mat<Scalar> stack(const Mat<Scalar>& h_prev, const Mat<Scalar>& x) {
  Mat<Scalar> z(h_prev.rows() + x.rows(), x.cols());
  z.topRows(h_prev.rows()) = h_prev;
  z.bottomRows(x.rows()) = x;
  return z;
}

template <typename Scalar>
void fill_uniform(Mat<Scalar>& m, Scalar bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-static_cast<double>(bound), static_cast<double>(bound));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(u(rng));
}

template <typename Scalar>
void fill_uniform(Vec<Scalar>& v, Scalar bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-static_cast<double>(bound), static_cast<double>(bound));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = static_cast<Scalar>(u(rng));
}

// LSTM ----------------------------------------------------------------------

/// Gate weights act on [h_prev; x], so each W is h x (h + f).
template <typename Scalar>
struct LstmParams {
  Mat<Scalar> W_f, W_i, W_o, W_c;
  Vec<Scalar> b_f, b_i, b_o, b_c;

  Eigen::Index hidden_size() const { return b_f.size(); }
  Eigen::Index input_size() const { return W_f.cols() - W_f.rows(); }

  static LstmParams zeros(Eigen::Index h, Eigen::Index f) {
    LstmParams p;
    for (auto* w : {&p.W_f, &p.W_i, &p.W_o, &p.W_c}) *w = Mat<Scalar>::Zero(h, h + f);
    for (auto* b : {&p.b_f, &p.b_i, &p.b_o, &p.b_c}) *b = Vec<Scalar>::Zero(h);
    return p;
  }

  static LstmParams random(Eigen::Index h, Eigen::Index f, std::mt19937_64& rng) {
    auto p = zeros(h, f);
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(h));
    p.visit([&](const std::string&, auto& t) { fill_uniform(t, bound, rng); });
    p.b_f.array() += Scalar(1);  // start by remembering
    return p;
  }

  template <typename F>
  void visit(F&& fn) {
    fn("W_f", W_f), fn("W_i", W_i), fn("W_o", W_o), fn("W_c", W_c);
    fn("b_f", b_f), fn("b_i", b_i), fn("b_o", b_o), fn("b_c", b_c);
  }
  template <typename F>
  void visit(F&& fn) const {
    fn("W_f", W_f), fn("W_i", W_i), fn("W_o", W_o), fn("W_c", W_c);
    fn("b_f", b_f), fn("b_i", b_i), fn("b_o", b_o), fn("b_c", b_c);
  }
};

template <typename Scalar>
void check_step_dims(Eigen::Index h, Eigen::Index f, Eigen::Index x_rows, Eigen::Index h_rows) {
  if (x_rows != f || h_rows != h) {
    throw Error(ErrorCode::DimensionMismatch,
                "cell expects x of size " + std::to_string(f) + " and state of size " +
                    std::to_string(h) + ", got " + std::to_string(x_rows) + " and " +
                    std::to_string(h_rows));
  }
}

/// One LSTM time step for a single sample.
template <typename Scalar>
std::pair<Vec<Scalar>, Vec<Scalar>> lstm_step(const LstmParams<Scalar>& p, const Vec<Scalar>& x,
                                              const Vec<Scalar>& h_prev,
                                              const Vec<Scalar>& c_prev) {
  check_step_dims<Scalar>(p.hidden_size(), p.input_size(), x.size(), h_prev.size());
  if (c_prev.size() != p.hidden_size()) {
    throw Error(ErrorCode::DimensionMismatch, "cell state size differs from hidden size");
  }
  Vec<Scalar> z(h_prev.size() + x.size());
  z << h_prev, x;
  const Vec<Scalar> f = sigmoid(p.W_f * z + p.b_f);
  const Vec<Scalar> i = sigmoid(p.W_i * z + p.b_i);
  const Vec<Scalar> o = sigmoid(p.W_o * z + p.b_o);
  const Vec<Scalar> g = tanh_of(p.W_c * z + p.b_c);
  Vec<Scalar> c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  Vec<Scalar> h = o.cwiseProduct(tanh_of(c));
  return {std::move(h), std::move(c)};
}

/// Batched LSTM cell with the caches BPTT needs. Columns are batch entries.
template <typename Scalar>
struct LstmCell {
  using Params = LstmParams<Scalar>;
  static constexpr const char* kName = "lstm";

  struct State {
    Mat<Scalar> h, c;
  };
  struct Cache {
    Mat<Scalar> z, f, i, o, g, c_prev, tanh_c;
  };
  /// Gradient flowing from step t into step t-1.
  struct Carry {
    Mat<Scalar> dh, dc;
  };

  static State zero_state(const Params& p, Eigen::Index batch) {
    return {Mat<Scalar>::Zero(p.hidden_size(), batch), Mat<Scalar>::Zero(p.hidden_size(), batch)};
  }
  static Carry zero_carry(const Params& p, Eigen::Index batch) {
    return {Mat<Scalar>::Zero(p.hidden_size(), batch), Mat<Scalar>::Zero(p.hidden_size(), batch)};
  }

  static State forward(const Params& p, const Mat<Scalar>& x, const State& prev, Cache& k) {
    k.z = stack(prev.h, x);
    k.f = sigmoid((p.W_f * k.z).colwise() + p.b_f);
    k.i = sigmoid((p.W_i * k.z).colwise() + p.b_i);
    k.o = sigmoid((p.W_o * k.z).colwise() + p.b_o);
    k.g = tanh_of((p.W_c * k.z).colwise() + p.b_c);
    k.c_prev = prev.c;
    State next;
    next.c = k.f.cwiseProduct(prev.c) + k.i.cwiseProduct(k.g);
    k.tanh_c = tanh_of(next.c);
    next.h = k.o.cwiseProduct(k.tanh_c);
    return next;
  }

  static void backward(const Params& p, const Cache& k, const Mat<Scalar>& dh_out, Carry& carry,
                       Params& grad) {
    const Eigen::Index h = p.hidden_size();
    const Mat<Scalar> dh = dh_out + carry.dh;
    const auto one = Scalar(1);
    const Mat<Scalar> dc =
        carry.dc + dh.cwiseProduct(k.o).cwiseProduct((one - k.tanh_c.array().square()).matrix());
    const Mat<Scalar> da_o =
        dh.cwiseProduct(k.tanh_c).cwiseProduct(k.o.cwiseProduct((one - k.o.array()).matrix()));
    const Mat<Scalar> da_f =
        dc.cwiseProduct(k.c_prev).cwiseProduct(k.f.cwiseProduct((one - k.f.array()).matrix()));
    const Mat<Scalar> da_i =
        dc.cwiseProduct(k.g).cwiseProduct(k.i.cwiseProduct((one - k.i.array()).matrix()));
    const Mat<Scalar> da_g =
        dc.cwiseProduct(k.i).cwiseProduct((one - k.g.array().square()).matrix());

    grad.W_f.noalias() += da_f * k.z.transpose();
    grad.W_i.noalias() += da_i * k.z.transpose();
    grad.W_o.noalias() += da_o * k.z.transpose();
    grad.W_c.noalias() += da_g * k.z.transpose();
    grad.b_f += da_f.rowwise().sum();
    grad.b_i += da_i.rowwise().sum();
    grad.b_o += da_o.rowwise().sum();
    grad.b_c += da_g.rowwise().sum();

    Mat<Scalar> dz = p.W_f.transpose() * da_f;
    dz.noalias() += p.W_i.transpose() * da_i;
    dz.noalias() += p.W_o.transpose() * da_o;
    dz.noalias() += p.W_c.transpose() * da_g;
    carry.dh = dz.topRows(h);
    carry.dc = dc.cwiseProduct(k.f);
  }
};

// Vanilla RNN ---------------------------------------------------------------

template <typename Scalar>
struct RnnParams {
  Mat<Scalar> W;  // h x (h + f)
  Vec<Scalar> b;

  Eigen::Index hidden_size() const { return b.size(); }
  Eigen::Index input_size() const { return W.cols() - W.rows(); }

  static RnnParams zeros(Eigen::Index h, Eigen::Index f) {
    return {Mat<Scalar>::Zero(h, h + f), Vec<Scalar>::Zero(h)};
  }

  static RnnParams random(Eigen::Index h, Eigen::Index f, std::mt19937_64& rng) {
    auto p = zeros(h, f);
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(h));
    p.visit([&](const std::string&, auto& t) { fill_uniform(t, bound, rng); });
    return p;
  }

  template <typename F>
  void visit(F&& fn) {
    fn("W", W), fn("b", b);
  }
  template <typename F>
  void visit(F&& fn) const {
    fn("W", W), fn("b", b);
  }
};

/// h_t = tanh(W [h_prev; x] + b) for a single sample.
template <typename Scalar>
Vec<Scalar> rnn_step(const RnnParams<Scalar>& p, const Vec<Scalar>& x, const Vec<Scalar>& h_prev) {
  check_step_dims<Scalar>(p.hidden_size(), p.input_size(), x.size(), h_prev.size());
  Vec<Scalar> z(h_prev.size() + x.size());
  z << h_prev, x;
  return tanh_of(p.W * z + p.b);
}

template <typename Scalar>
struct RnnCell {
  using Params = RnnParams<Scalar>;
  static constexpr const char* kName = "rnn";

  struct State {
    Mat<Scalar> h;
  };
  struct Cache {
    Mat<Scalar> z, h;
  };
  struct Carry {
    Mat<Scalar> dh;
  };

  static State zero_state(const Params& p, Eigen::Index batch) {
    return {Mat<Scalar>::Zero(p.hidden_size(), batch)};
  }
  static Carry zero_carry(const Params& p, Eigen::Index batch) {
    return {Mat<Scalar>::Zero(p.hidden_size(), batch)};
  }

  static State forward(const Params& p, const Mat<Scalar>& x, const State& prev, Cache& k) {
    k.z = stack(prev.h, x);
    k.h = tanh_of((p.W * k.z).colwise() + p.b);
    return {k.h};
  }

  static void backward(const Params& p, const Cache& k, const Mat<Scalar>& dh_out, Carry& carry,
                       Params& grad) {
    const Mat<Scalar> da =
        (dh_out + carry.dh).cwiseProduct((Scalar(1) - k.h.array().square()).matrix());
    grad.W.noalias() += da * k.z.transpose();
    grad.b += da.rowwise().sum();
    carry.dh = (p.W.transpose() * da).topRows(p.hidden_size());
  }
};

}  // namespace epds::nn
