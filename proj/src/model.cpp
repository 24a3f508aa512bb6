#include "hybseq/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hybseq {

void ModelGraph::add(std::unique_ptr<Layer> layer) {
  std::vector<int> in = layers_.empty() ? input_shape_ : output_shape_;
  if (layers_.empty()) {
    in.insert(in.begin(), 1);  // probe with batch 1
  }
  output_shape_ = layer->out_shape(in);
  layers_.push_back(std::move(layer));
}

Tensor ModelGraph::forward(const Tensor& x, Mode mode, Rng* rng) {
  if (x.shape.size() != input_shape_.size() + 1 ||
      !std::equal(input_shape_.begin(), input_shape_.end(), x.shape.begin() + 1)) {
    throw Error(ErrorCode::ShapeMismatch,
                "model " + name_ + " expects [B" +
                    (input_shape_.empty() ? "" : "," + shape_str(input_shape_).substr(1, shape_str(input_shape_).size() - 2)) +
                    "], got " + shape_str(x.shape));
  }
  Tensor cur = x;
  for (auto& layer : layers_) {
    cur = layer->forward(cur, mode, rng);
    if (mode == Mode::Train) check_finite(cur, layer->describe().c_str());
  }
  return cur;
}

void ModelGraph::backward(const Tensor& dloss) {
  Tensor cur = dloss;
  for (size_t i = layers_.size(); i-- > 0;) {
    cur = layers_[i]->backward(cur);
  }
}

std::vector<Tensor*> ModelGraph::params() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) {
    for (Tensor* t : layer->params()) out.push_back(t);
  }
  return out;
}

std::vector<Tensor*> ModelGraph::state() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) {
    for (Tensor* t : layer->state()) out.push_back(t);
  }
  return out;
}

size_t ModelGraph::parameter_count() const {
  size_t n = 0;
  for (const auto& layer : layers_) {
    for (Tensor* t : const_cast<Layer&>(*layer).params()) n += t->numel();
  }
  return n;
}

void ModelGraph::zero_grads() {
  for (Tensor* t : params()) t->zero_grad();
}

void ModelGraph::init_weights(Rng& rng) {
  for (auto& layer : layers_) {
    auto ps = layer->params();
    if (ps.empty()) continue;
    if (dynamic_cast<BatchNorm*>(layer.get()) != nullptr) {
      continue;  // scale 1, shift 0 from construction
    }
    // ps[0] = weight [out, fan_in...], ps[1] = bias.
    Tensor& w = *ps[0];
    size_t fan_in = 1;
    for (size_t d = 1; d < w.shape.size(); ++d) fan_in *= static_cast<size_t>(w.shape[d]);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : w.val) v = rng.uniform(-bound, bound);
    for (double& v : ps[1]->val) v = 0.0;
  }
}

std::vector<std::vector<double>> ModelGraph::snapshot() const {
  std::vector<std::vector<double>> snap;
  auto& self = const_cast<ModelGraph&>(*this);
  for (Tensor* t : self.params()) snap.push_back(t->val);
  for (Tensor* t : self.state()) snap.push_back(t->val);
  return snap;
}

void ModelGraph::restore(const std::vector<std::vector<double>>& snap) {
  size_t i = 0;
  for (Tensor* t : params()) t->val = snap.at(i++);
  for (Tensor* t : state()) t->val = snap.at(i++);
}

void ModelGraph::freeze_dropout(bool frozen) {
  for (auto& layer : layers_) {
    if (auto* d = dynamic_cast<Dropout*>(layer.get())) d->freeze_mask(frozen);
  }
}

ModelGraph build_cnn() {
  ModelGraph g("cnn", {2, 4, 26});
  auto conv_block_2d = [&](int in, int out, int kh, int kw) {
    g.add(std::make_unique<Conv2D>(in, out, kh, kw));
    g.add(std::make_unique<ReLU>());
    g.add(std::make_unique<BatchNorm>(out));
  };
  auto conv_block_1d = [&](int in, int out, int k) {
    g.add(std::make_unique<Conv1D>(in, out, k));
    g.add(std::make_unique<ReLU>());
    g.add(std::make_unique<BatchNorm>(out));
  };
  conv_block_2d(2, 512, 4, 9);
  g.add(std::make_unique<Dropout>(0.2));
  conv_block_1d(512, 512, 9);
  conv_block_1d(512, 128, 3);
  g.add(std::make_unique<Dropout>(0.2));
  conv_block_1d(128, 128, 3);
  conv_block_1d(128, 64, 1);
  g.add(std::make_unique<Flatten>());
  if (g.output_shape() != std::vector<int>{1, 384}) {
    throw Error(ErrorCode::ShapeMismatch,
                "cnn flatten width must be 384, got " + shape_str(g.output_shape()));
  }
  g.add(std::make_unique<Dense>(384, 256));
  g.add(std::make_unique<ReLU>());
  g.add(std::make_unique<Dense>(256, 128));
  g.add(std::make_unique<ReLU>());
  g.add(std::make_unique<Dropout>(0.2));
  g.add(std::make_unique<Dense>(128, 1));
  return g;
}

ModelGraph build_cnn_lite() {
  ModelGraph g("cnn-lite", {2, 4, 26});
  g.add(std::make_unique<Conv2D>(2, 256, 4, 9));
  g.add(std::make_unique<ReLU>());
  g.add(std::make_unique<BatchNorm>(256));
  g.add(std::make_unique<Dropout>(0.2));
  g.add(std::make_unique<Conv1D>(256, 128, 9));
  g.add(std::make_unique<ReLU>());
  g.add(std::make_unique<BatchNorm>(128));
  g.add(std::make_unique<Conv1D>(128, 64, 3));
  g.add(std::make_unique<ReLU>());
  g.add(std::make_unique<BatchNorm>(64));
  g.add(std::make_unique<Flatten>());
  if (g.output_shape() != std::vector<int>{1, 512}) {
    throw Error(ErrorCode::ShapeMismatch,
                "cnn-lite flatten width must be 512, got " + shape_str(g.output_shape()));
  }
  g.add(std::make_unique<Dense>(512, 256));
  g.add(std::make_unique<ReLU>());
  g.add(std::make_unique<Dropout>(0.2));
  g.add(std::make_unique<Dense>(256, 1));
  return g;
}

ModelGraph build_mlp(int input_dim) {
  ModelGraph g("mlp", {input_dim});
  const int widths[4] = {117, 18, 7, 19};
  int in = input_dim;
  for (int w : widths) {
    g.add(std::make_unique<Dense>(in, w));
    g.add(std::make_unique<ReLU>());
    g.add(std::make_unique<Dropout>(0.3296));
    in = w;
  }
  g.add(std::make_unique<Dense>(in, 1));
  g.add(std::make_unique<Sigmoid>());
  return g;
}

ModelGraph build_model(const std::string& name) {
  if (name == "cnn") return build_cnn();
  if (name == "cnn-lite") return build_cnn_lite();
  if (name == "mlp") return build_mlp();
  throw Error(ErrorCode::InvalidArgument, "unknown model '" + name + "'");
}

// ---------------------------------------------------------------------------
// Checkpoints: a text manifest with the layer list, then one little-endian
// binary block holding every parameter and state tensor in declaration order.

namespace {

constexpr const char* kMagic = "hybseq-ckpt v1";
constexpr double kEndianSentinel = 1.0;

std::unique_ptr<Layer> layer_from_line(const std::string& line) {
  std::istringstream in(line);
  std::string kind;
  in >> kind;
  if (kind == "conv2d") {
    int ci, co, kh, kw;
    in >> ci >> co >> kh >> kw;
    return std::make_unique<Conv2D>(ci, co, kh, kw);
  }
  if (kind == "conv1d") {
    int ci, co, k;
    in >> ci >> co >> k;
    return std::make_unique<Conv1D>(ci, co, k);
  }
  if (kind == "dense") {
    int i, o;
    in >> i >> o;
    return std::make_unique<Dense>(i, o);
  }
  if (kind == "relu") return std::make_unique<ReLU>();
  if (kind == "sigmoid") return std::make_unique<Sigmoid>();
  if (kind == "batchnorm") {
    int c;
    double momentum, eps;
    in >> c >> momentum >> eps;
    return std::make_unique<BatchNorm>(c, momentum, eps);
  }
  if (kind == "dropout") {
    double p;
    in >> p;
    return std::make_unique<Dropout>(p);
  }
  if (kind == "flatten") return std::make_unique<Flatten>();
  throw Error(ErrorCode::ParseError, "unknown layer '" + line + "' in checkpoint");
}

}  // namespace

void ModelGraph::save(std::ostream& out) const {
  out << kMagic << '\n';
  out << "model " << name_ << '\n';
  out << "input";
  for (int d : input_shape_) out << ' ' << d;
  out << '\n';
  out << "layers " << layers_.size() << '\n';
  for (const auto& layer : layers_) out << layer->describe() << '\n';
  auto& self = const_cast<ModelGraph&>(*this);
  size_t tensors = self.params().size() + self.state().size();
  out << "tensors " << tensors << '\n';
  out << "binary\n";
  out.write(reinterpret_cast<const char*>(&kEndianSentinel), sizeof(double));
  auto dump = [&](Tensor* t) {
    out.write(reinterpret_cast<const char*>(t->val.data()),
              static_cast<std::streamsize>(t->val.size() * sizeof(double)));
  };
  for (Tensor* t : self.params()) dump(t);
  for (Tensor* t : self.state()) dump(t);
  if (!out) {
    throw Error(ErrorCode::IoError, "checkpoint write failed");
  }
}

void ModelGraph::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  }
  save(out);
}

ModelGraph ModelGraph::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw Error(ErrorCode::ParseError, "not a hybseq checkpoint");
  }
  std::string key, name;
  in >> key >> name;
  if (key != "model") throw Error(ErrorCode::ParseError, "checkpoint misses model line");
  in >> key;
  if (key != "input") throw Error(ErrorCode::ParseError, "checkpoint misses input line");
  std::vector<int> input_shape;
  while (in.peek() != '\n') {
    int d;
    if (!(in >> d)) throw Error(ErrorCode::ParseError, "bad input shape");
    input_shape.push_back(d);
  }
  size_t n_layers = 0;
  in >> key >> n_layers;
  if (key != "layers") throw Error(ErrorCode::ParseError, "checkpoint misses layer count");
  std::getline(in, line);  // consume EOL

  ModelGraph g(name, input_shape);
  for (size_t i = 0; i < n_layers; ++i) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::ParseError, "truncated layer list");
    }
    g.add(layer_from_line(line));
  }
  size_t n_tensors = 0;
  in >> key >> n_tensors;
  std::getline(in, line);
  std::getline(in, line);
  if (key != "tensors" || line != "binary") {
    throw Error(ErrorCode::ParseError, "checkpoint misses binary block");
  }
  double sentinel = 0;
  in.read(reinterpret_cast<char*>(&sentinel), sizeof(double));
  if (sentinel != kEndianSentinel) {
    throw Error(ErrorCode::ParseError, "checkpoint endianness mismatch");
  }
  auto fill = [&](Tensor* t) {
    in.read(reinterpret_cast<char*>(t->val.data()),
            static_cast<std::streamsize>(t->val.size() * sizeof(double)));
  };
  auto ps = g.params();
  auto ss = g.state();
  if (ps.size() + ss.size() != n_tensors) {
    throw Error(ErrorCode::ParseError, "checkpoint tensor count mismatch");
  }
  for (Tensor* t : ps) fill(t);
  for (Tensor* t : ss) fill(t);
  if (!in) {
    throw Error(ErrorCode::ParseError, "truncated checkpoint payload");
  }
  return g;
}

ModelGraph ModelGraph::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path);
  }
  return load(in);
}

}  // namespace hybseq
