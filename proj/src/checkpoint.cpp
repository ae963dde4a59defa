#include "epds/predictor/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "epds/error.hpp"

namespace epds::nn {

namespace {

constexpr const char* kMagic = "epds-checkpoint";

void put(std::ostream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

template <typename Derived>
void put_tensor(std::ostream& out, const std::string& name, const Eigen::DenseBase<Derived>& t) {
  out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
  // Column-major, matching Eigen's storage order.
  for (Eigen::Index j = 0; j < t.cols(); ++j)
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      if (i || j) out << ' ';
      put(out, t(i, j));
    }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw Error(ErrorCode::SchemaMismatch, "checkpoint truncated");
    return w;
  }
  void expect(const std::string& w) {
    const auto got = word();
    if (got != w) {
      throw Error(ErrorCode::SchemaMismatch, "checkpoint expected '" + w + "', got '" + got + "'");
    }
  }
  long integer() {
    const auto w = word();
    long v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) {
      throw Error(ErrorCode::SchemaMismatch, "bad integer '" + w + "' in checkpoint");
    }
    return v;
  }
  double real() {
    const auto w = word();
    double v = 0;
    auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || ptr != w.data() + w.size()) {
      throw Error(ErrorCode::SchemaMismatch, "bad number '" + w + "' in checkpoint");
    }
    return v;
  }
  template <typename Derived>
  void tensor(const std::string& name, Eigen::PlainObjectBase<Derived>& t) {
    expect("tensor");
    expect(name);
    const long rows = integer();
    const long cols = integer();
    if (rows != t.rows() || cols != t.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "tensor " + name + " is " + std::to_string(rows) +
                                                "x" + std::to_string(cols) + ", expected " +
                                                std::to_string(t.rows()) + "x" +
                                                std::to_string(t.cols()));
    }
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = real();
  }
  template <typename Derived>
  void sized_tensor(const std::string& name, Eigen::PlainObjectBase<Derived>& t) {
    expect("tensor");
    expect(name);
    const long rows = integer();
    const long cols = integer();
    if (rows < 0 || cols < 0) throw Error(ErrorCode::SchemaMismatch, "negative tensor size");
    t.resize(rows, cols);
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = real();
  }

 private:
  std::istream& in_;
};

template <typename Model>
void write_model(std::ostream& out, const Model& m) {
  out << "model " << m.kind() << '\n';
  out << "shape " << m.shape.input_size << ' ' << m.shape.hidden_size << ' ' << m.shape.len_in
      << ' ' << m.shape.len_pred << ' ' << (m.shape.bidirectional ? 1 : 0) << '\n';
  m.visit([&](const std::string& name, const auto& t) { put_tensor(out, name, t); });
}

template <typename Model>
Model read_model(Reader& r, bool bidirectional) {
  ModelShape s;
  r.expect("shape");
  s.input_size = r.integer();
  s.hidden_size = r.integer();
  s.len_in = r.integer();
  s.len_pred = r.integer();
  s.bidirectional = r.integer() != 0;
  if (s.bidirectional != bidirectional || s.input_size < 1 || s.hidden_size < 1 ||
      s.len_in < 1 || s.len_pred < 1) {
    throw Error(ErrorCode::SchemaMismatch, "inconsistent model shape in checkpoint");
  }
  Model m = Model::zeros(s);
  m.visit([&](const std::string& name, auto& t) { r.tensor(name, t); });
  return m;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  std::visit([&](const auto& m) { write_model(out, m); }, ckpt.model);
  const auto& enc = ckpt.encoder;
  out << "features " << enc.selection.name() << '\n';
  put_tensor(out, "scaler.min", enc.scaler.min);
  put_tensor(out, "scaler.max", enc.scaler.max);
  out << "pca " << (enc.pca ? 1 : 0) << '\n';
  if (enc.pca) {
    put_tensor(out, "pca.mean", enc.pca->mean);
    put_tensor(out, "pca.components", enc.pca->components);
    put_tensor(out, "pca.explained", enc.pca->explained);
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  const long version = r.integer();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::SchemaMismatch,
                "unsupported checkpoint version " + std::to_string(version));
  }
  r.expect("model");
  const auto kind = r.word();
  Checkpoint ckpt;
  if (kind == "bilstm" || kind == "lstm") {
    ckpt.model = read_model<LstmModel<double>>(r, kind == "bilstm");
  } else if (kind == "birnn" || kind == "rnn") {
    ckpt.model = read_model<RnnModel<double>>(r, kind == "birnn");
  } else {
    throw Error(ErrorCode::SchemaMismatch, "unknown model kind '" + kind + "'");
  }
  r.expect("features");
  ckpt.encoder.selection = FeatureSelection::parse(r.word());
  r.sized_tensor("scaler.min", ckpt.encoder.scaler.min);
  r.sized_tensor("scaler.max", ckpt.encoder.scaler.max);
  r.expect("pca");
  if (r.integer() != 0) {
    Pca p;
    r.sized_tensor("pca.mean", p.mean);
    r.sized_tensor("pca.components", p.components);
    r.sized_tensor("pca.explained", p.explained);
    ckpt.encoder.pca = std::move(p);
  }
  r.expect("end");
  const auto input_size = std::visit([](const auto& m) { return m.shape.input_size; }, ckpt.model);
  if (input_size != ckpt.encoder.input_size()) {
    throw Error(ErrorCode::ShapeMismatch, "model input size does not match its feature encoder");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace epds::nn
