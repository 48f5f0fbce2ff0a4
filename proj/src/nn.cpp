#include "wadv/nn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace wadv::nn {

namespace {

constexpr char kMagic[8] = {'W', 'A', 'D', 'V', 'N', 'N', '1', 0};
constexpr int kFormatVersion = 1;
// fixed chunk count so batch reductions are identical for any worker count
constexpr int kGradChunks = 8;

Mat to_input(const CVec& z) {
  Mat x(2, z.size());
  x.row(0) = z.real().transpose();
  x.row(1) = z.imag().transpose();
  return x;
}

Mat im2col(const Mat& x, int width, int stride) {
  const Index cin = x.rows();
  const Index out_len = (x.cols() - width) / stride + 1;
  Mat cols(cin * width, out_len);
  for (Index o = 0; o < out_len; ++o)
    for (int w = 0; w < width; ++w)
      cols.col(o).segment(w * cin, cin) = x.col(o * stride + w);
  return cols;
}

Mat col2im(const Mat& dcols, Index cin, Index len, int width, int stride) {
  Mat dx = Mat::Zero(cin, len);
  const Index out_len = dcols.cols();
  for (Index o = 0; o < out_len; ++o)
    for (int w = 0; w < width; ++w)
      dx.col(o * stride + w) += dcols.col(o).segment(w * cin, cin);
  return dx;
}

struct Caches {
  std::vector<Mat> in;
  std::vector<Mat> out;
  std::vector<Eigen::ArrayXXi> poolarg;
  std::vector<Mat> dropmask;
  std::vector<Mat> cols;
};

struct GradBuf {
  std::vector<Mat> dW;
  std::vector<RVec> db;

  void init_zero(const Classifier& m) {
    dW.resize(m.params.size());
    db.resize(m.params.size());
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      dW[i] = Mat::Zero(m.params[i].W.rows(), m.params[i].W.cols());
      db[i] = RVec::Zero(m.params[i].b.size());
    }
  }
  void set_zero() {
    for (auto& w : dW) w.setZero();
    for (auto& b : db) b.setZero();
  }
  void add(const GradBuf& o) {
    for (std::size_t i = 0; i < dW.size(); ++i) {
      dW[i] += o.dW[i];
      db[i] += o.db[i];
    }
  }
};

RVec run_forward(const Classifier& m, const Mat& input, bool training,
                 Rng* drop_rng, Caches* c) {
  Mat act = input;
  if (c) {
    c->in.assign(m.layers.size(), Mat());
    c->out.assign(m.layers.size(), Mat());
    c->poolarg.assign(m.layers.size(), Eigen::ArrayXXi());
    c->dropmask.assign(m.layers.size(), Mat());
    c->cols.assign(m.layers.size(), Mat());
  }
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    const LayerSpec& spec = m.layers[li];
    if (c) c->in[li] = act;
    switch (spec.kind) {
      case LayerKind::Conv1d: {
        Mat cols = im2col(act, spec.width, spec.stride);
        Mat out = m.params[li].W * cols;
        out.colwise() += m.params[li].b;
        if (c) c->cols[li] = std::move(cols);
        act = std::move(out);
        break;
      }
      case LayerKind::Relu:
        act = act.cwiseMax(0.0);
        break;
      case LayerKind::MaxPool: {
        const int p = spec.pool;
        const Index ch = act.rows(), out_len = act.cols() / p;
        Mat out(ch, out_len);
        Eigen::ArrayXXi arg(ch, out_len);
        for (Index o = 0; o < out_len; ++o) {
          for (Index r = 0; r < ch; ++r) {
            Index best = o * p;
            double bv = act(r, best);
            for (int k = 1; k < p; ++k) {
              if (act(r, o * p + k) > bv) {
                bv = act(r, o * p + k);
                best = o * p + k;
              }
            }
            out(r, o) = bv;
            arg(r, o) = static_cast<int>(best);
          }
        }
        if (c) c->poolarg[li] = std::move(arg);
        act = std::move(out);
        break;
      }
      case LayerKind::Dense: {
        Eigen::Map<const RVec> flat(act.data(), act.size());
        RVec out = m.params[li].W * flat + m.params[li].b;
        act = Eigen::Map<Mat>(out.data(), out.size(), 1);
        break;
      }
      case LayerKind::Dropout: {
        if (training) {
          const double keep = 1.0 - spec.rate;
          Mat mask(act.rows(), act.cols());
          for (Index j = 0; j < act.cols(); ++j)
            for (Index i = 0; i < act.rows(); ++i)
              mask(i, j) = (drop_rng->uniform() < keep) ? 1.0 / keep : 0.0;
          act = act.cwiseProduct(mask);
          if (c) c->dropmask[li] = std::move(mask);
        } else if (c) {
          c->dropmask[li] = Mat();
        }
        break;
      }
      case LayerKind::Softmax: {
        const double mx = act.maxCoeff();
        Mat e = (act.array() - mx).exp();
        act = e / e.sum();
        break;
      }
    }
    if (c) c->out[li] = act;
  }
  return Eigen::Map<const RVec>(act.data(), act.size());
}

/// dout: gradient w.r.t. the network output. If fused_ce, dout is already the
/// gradient at the logits (softmax+cross-entropy combined) and the softmax
/// layer is skipped. Returns the gradient w.r.t. the 2 x N input.
Mat run_backward(const Classifier& m, const Caches& c, RVec dout,
                 bool fused_ce, GradBuf* g) {
  Mat grad = Eigen::Map<Mat>(dout.data(), dout.size(), 1);
  for (std::size_t k = m.layers.size(); k-- > 0;) {
    const LayerSpec& spec = m.layers[k];
    switch (spec.kind) {
      case LayerKind::Softmax: {
        if (fused_ce) break;  // dout already at the logits
        Eigen::Map<const RVec> p(c.out[k].data(), c.out[k].size());
        Eigen::Map<const RVec> dy(grad.data(), grad.size());
        const double dot = dy.dot(p);
        RVec dx = p.cwiseProduct(dy.array().matrix() -
                                 RVec::Constant(p.size(), dot));
        grad = Eigen::Map<Mat>(dx.data(), dx.size(), 1);
        break;
      }
      case LayerKind::Dense: {
        Eigen::Map<const RVec> dy(grad.data(), grad.size());
        Eigen::Map<const RVec> x(c.in[k].data(), c.in[k].size());
        if (g) {
          g->dW[k].noalias() += dy * x.transpose();
          g->db[k] += dy;
        }
        RVec dx = m.params[k].W.transpose() * dy;
        grad = Eigen::Map<Mat>(dx.data(), c.in[k].rows(), c.in[k].cols());
        break;
      }
      case LayerKind::Dropout: {
        if (c.dropmask[k].size() > 0) grad = grad.cwiseProduct(c.dropmask[k]);
        break;
      }
      case LayerKind::MaxPool: {
        const Mat& in = c.in[k];
        Mat dx = Mat::Zero(in.rows(), in.cols());
        const auto& arg = c.poolarg[k];
        for (Index o = 0; o < grad.cols(); ++o)
          for (Index r = 0; r < grad.rows(); ++r)
            dx(r, arg(r, o)) += grad(r, o);
        grad = std::move(dx);
        break;
      }
      case LayerKind::Relu:
        grad = (c.in[k].array() > 0.0).select(grad, 0.0);
        break;
      case LayerKind::Conv1d: {
        if (g) {
          g->dW[k].noalias() += grad * c.cols[k].transpose();
          g->db[k] += grad.rowwise().sum();
        }
        Mat dcols = m.params[k].W.transpose() * grad;
        grad = col2im(dcols, c.in[k].rows(), c.in[k].cols(), spec.width,
                      spec.stride);
        break;
      }
    }
  }
  return grad;
}

void snap_float32(Classifier& m) {
  const auto snap = [](double v) {
    return static_cast<double>(static_cast<float>(v));
  };
  for (auto& p : m.params) {
    p.W = p.W.unaryExpr(snap);
    p.b = p.b.unaryExpr(snap);
  }
}

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv1d:
      return "conv1d";
    case LayerKind::Relu:
      return "relu";
    case LayerKind::MaxPool:
      return "maxpool";
    case LayerKind::Dense:
      return "dense";
    case LayerKind::Dropout:
      return "dropout";
    case LayerKind::Softmax:
      return "softmax";
  }
  return "?";
}

LayerKind kind_from_name(const std::string& s) {
  if (s == "conv1d") return LayerKind::Conv1d;
  if (s == "relu") return LayerKind::Relu;
  if (s == "maxpool") return LayerKind::MaxPool;
  if (s == "dense") return LayerKind::Dense;
  if (s == "dropout") return LayerKind::Dropout;
  if (s == "softmax") return LayerKind::Softmax;
  throw SchemaError("unknown layer kind: " + s);
}

}  // namespace

LayerSpec conv1d(int filters, int width, int stride) {
  LayerSpec s;
  s.kind = LayerKind::Conv1d;
  s.filters = filters;
  s.width = width;
  s.stride = stride;
  return s;
}
LayerSpec relu() { return LayerSpec{LayerKind::Relu}; }
LayerSpec maxpool(int size) {
  LayerSpec s;
  s.kind = LayerKind::MaxPool;
  s.pool = size;
  return s;
}
LayerSpec dense(int units) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.units = units;
  return s;
}
LayerSpec dropout(double rate) {
  LayerSpec s;
  s.kind = LayerKind::Dropout;
  s.rate = rate;
  return s;
}
LayerSpec softmax() { return LayerSpec{LayerKind::Softmax}; }

std::vector<std::pair<Index, Index>> shape_chain(
    const std::vector<LayerSpec>& layers, Index input_len) {
  if (input_len < 1) throw SchemaError("input length must be positive");
  if (layers.empty() || layers.back().kind != LayerKind::Softmax)
    throw SchemaError("final layer must be softmax");
  std::vector<std::pair<Index, Index>> shapes;
  Index ch = 2, len = input_len;
  for (const auto& spec : layers) {
    switch (spec.kind) {
      case LayerKind::Conv1d:
        if (spec.filters < 1 || spec.width < 1 || spec.stride < 1)
          throw SchemaError("bad conv1d spec");
        if (len < spec.width) throw SchemaError("conv window exceeds input");
        len = (len - spec.width) / spec.stride + 1;
        ch = spec.filters;
        break;
      case LayerKind::MaxPool:
        if (spec.pool < 1) throw SchemaError("bad maxpool size");
        if (len < spec.pool) throw SchemaError("pool window exceeds input");
        len = len / spec.pool;
        break;
      case LayerKind::Dense:
        if (spec.units < 1) throw SchemaError("bad dense units");
        ch = spec.units;
        len = 1;
        break;
      case LayerKind::Dropout:
        if (spec.rate < 0.0 || spec.rate >= 1.0)
          throw SchemaError("dropout rate must be in [0,1)");
        break;
      case LayerKind::Relu:
      case LayerKind::Softmax:
        break;
    }
    shapes.emplace_back(ch, len);
  }
  return shapes;
}

Classifier make_classifier(std::vector<LayerSpec> layers,
                           std::vector<std::string> classes, Index input_len,
                           std::uint64_t seed) {
  if (classes.size() < 2) throw SchemaError("need at least 2 classes");
  const auto shapes = shape_chain(layers, input_len);
  if (shapes.back().first != static_cast<Index>(classes.size()))
    throw SchemaError("output width does not match class count");

  Classifier m;
  m.layers = std::move(layers);
  m.classes = std::move(classes);
  m.input_len = input_len;
  m.params.resize(m.layers.size());

  Rng rng(mix_seed(seed, 0x1217u));
  Index ch = 2, len = input_len;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const LayerSpec& spec = m.layers[i];
    if (spec.kind == LayerKind::Conv1d) {
      const Index fan_in = ch * spec.width;
      const double lim = std::sqrt(3.0 / static_cast<double>(fan_in));
      Mat w(spec.filters, fan_in);
      for (Index r = 0; r < w.rows(); ++r)
        for (Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-lim, lim);
      m.params[i].W = w;
      m.params[i].b = RVec::Zero(spec.filters);
    } else if (spec.kind == LayerKind::Dense) {
      const Index fan_in = ch * len;
      const double lim = std::sqrt(3.0 / static_cast<double>(fan_in));
      Mat w(spec.units, fan_in);
      for (Index r = 0; r < w.rows(); ++r)
        for (Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-lim, lim);
      m.params[i].W = w;
      m.params[i].b = RVec::Zero(spec.units);
    }
    ch = shapes[i].first;
    len = shapes[i].second;
  }
  snap_float32(m);
  return m;
}

Classifier modulation_surrogate(std::vector<std::string> classes,
                                Index input_len, std::uint64_t seed,
                                int conv_blocks) {
  if (conv_blocks < 1 || conv_blocks > 7)
    throw SchemaError("conv_blocks must be in [1,7]");
  std::vector<LayerSpec> layers;
  for (int b = 0; b < conv_blocks; ++b) {
    layers.push_back(conv1d(std::min(16 + 8 * b, 64), 7));
    layers.push_back(relu());
    layers.push_back(maxpool(2));
  }
  layers.push_back(dense(64));
  layers.push_back(relu());
  layers.push_back(dense(static_cast<int>(classes.size())));
  layers.push_back(softmax());
  return make_classifier(std::move(layers), std::move(classes), input_len,
                         seed);
}

Classifier fingerprint_surrogate(std::vector<std::string> classes,
                                 Index input_len, std::uint64_t seed) {
  std::vector<LayerSpec> layers{
      conv1d(32, 7), relu(), dropout(0.5), maxpool(2),
      conv1d(32, 7), relu(), dropout(0.5), maxpool(2),
      dense(128),    relu(),
      dense(64),     relu(),
      dense(static_cast<int>(classes.size())),
      softmax()};
  return make_classifier(std::move(layers), std::move(classes), input_len,
                         seed);
}

RVec forward(const Classifier& model, const CVec& z) {
  if (z.size() != model.input_len)
    throw std::invalid_argument("waveform length does not match model input");
  return run_forward(model, to_input(z), false, nullptr, nullptr);
}

Index argmax_class(const RVec& probs) {
  Index best = 0;
  for (Index i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

Index predict(const Classifier& model, const CVec& z) {
  return argmax_class(forward(model, z));
}

CVec input_gradient(const Classifier& model, const CVec& z, Index cls) {
  if (z.size() != model.input_len)
    throw std::invalid_argument("waveform length does not match model input");
  if (cls < 0 || cls >= model.num_classes())
    throw std::invalid_argument("unknown class index");
  Caches caches;
  run_forward(model, to_input(z), false, nullptr, &caches);
  RVec dout = RVec::Zero(model.num_classes());
  dout[cls] = 1.0;
  Mat dx = run_backward(model, caches, std::move(dout), false, nullptr);
  CVec g(z.size());
  g.real() = dx.row(0).transpose();
  g.imag() = dx.row(1).transpose();
  return g;
}

ForwardGradients forward_with_gradients(const Classifier& model, const CVec& z,
                                        const std::vector<Index>& classes) {
  if (z.size() != model.input_len)
    throw std::invalid_argument("waveform length does not match model input");
  Caches caches;
  ForwardGradients out;
  out.probs = run_forward(model, to_input(z), false, nullptr, &caches);
  out.gradients.reserve(classes.size());
  for (Index cls : classes) {
    if (cls < 0 || cls >= model.num_classes())
      throw std::invalid_argument("unknown class index");
    RVec dout = RVec::Zero(model.num_classes());
    dout[cls] = 1.0;
    Mat dx = run_backward(model, caches, std::move(dout), false, nullptr);
    CVec g(z.size());
    g.real() = dx.row(0).transpose();
    g.imag() = dx.row(1).transpose();
    out.gradients.push_back(std::move(g));
  }
  return out;
}

TrainResult train(Classifier& model,
                  const std::vector<LabeledExample>& examples,
                  const TrainHyper& hyper) {
  if (examples.empty()) throw std::invalid_argument("empty dataset");
  for (const auto& ex : examples) {
    if (ex.label < 0 || ex.label >= model.num_classes())
      throw std::invalid_argument("label outside the model's class set");
    if (ex.iq->size() != model.input_len)
      throw std::invalid_argument("slice length does not match model input");
  }
  const Index n = static_cast<Index>(examples.size());
  const int batch = std::max(1, hyper.batch);

  std::vector<LayerParams> adam_m(model.params.size()),
      adam_v(model.params.size());
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    adam_m[i].W = Mat::Zero(model.params[i].W.rows(), model.params[i].W.cols());
    adam_m[i].b = RVec::Zero(model.params[i].b.size());
    adam_v[i] = adam_m[i];
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  TrainResult result;
  result.loss_curve.push_back(dataset_loss(model, examples));

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});

  std::vector<GradBuf> partial(kGradChunks);
  for (auto& p : partial) p.init_zero(model);
  GradBuf total;
  total.init_zero(model);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    // Fisher-Yates with the epoch-derived stream
    Rng shuffle_rng(mix_seed(hyper.seed, 0x5AFFu + epoch));
    for (Index i = n - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_index(i + 1)]);

    double epoch_loss = 0.0;
    Index epoch_correct = 0;
    for (Index start = 0; start < n; start += batch) {
      const Index bs = std::min<Index>(batch, n - start);
      std::vector<double> loss_p(kGradChunks, 0.0);
      std::vector<Index> correct_p(kGradChunks, 0);
      parallel_chunks(bs, kGradChunks, [&](int chunk, Index b0, Index b1) {
        partial[chunk].set_zero();
        Caches caches;
        for (Index b = b0; b < b1; ++b) {
          const Index idx = order[start + b];
          const LabeledExample& ex = examples[idx];
          // per-item dropout stream, independent of batching and threading
          Rng drop_rng(mix_seed(hyper.seed ^ 0xD209u,
                                static_cast<std::uint64_t>(epoch) * n + idx));
          RVec probs = run_forward(model, to_input(*ex.iq), true, &drop_rng,
                                   &caches);
          loss_p[chunk] += -std::log(std::max(probs[ex.label], 1e-300));
          correct_p[chunk] += argmax_class(probs) == ex.label;
          RVec dlogits = probs;
          dlogits[ex.label] -= 1.0;
          run_backward(model, caches, std::move(dlogits), true,
                       &partial[chunk]);
        }
      });
      total.set_zero();
      for (int c = 0; c < kGradChunks; ++c) total.add(partial[c]);
      for (int c = 0; c < kGradChunks; ++c) {
        epoch_loss += loss_p[c];
        epoch_correct += correct_p[c];
      }

      ++step;
      const double bc1 = 1.0 - std::pow(beta1, step);
      const double bc2 = 1.0 - std::pow(beta2, step);
      for (std::size_t i = 0; i < model.params.size(); ++i) {
        if (model.params[i].W.size() == 0) continue;
        Mat gw = total.dW[i] / static_cast<double>(bs) +
                 2.0 * hyper.l2_lambda * model.params[i].W;
        RVec gb = total.db[i] / static_cast<double>(bs);
        adam_m[i].W = beta1 * adam_m[i].W + (1.0 - beta1) * gw;
        adam_v[i].W =
            beta2 * adam_v[i].W.array().matrix() +
            (1.0 - beta2) * gw.cwiseProduct(gw);
        adam_m[i].b = beta1 * adam_m[i].b + (1.0 - beta1) * gb;
        adam_v[i].b =
            beta2 * adam_v[i].b + (1.0 - beta2) * gb.cwiseProduct(gb);
        model.params[i].W.array() -=
            hyper.lr * (adam_m[i].W / bc1).array() /
            ((adam_v[i].W / bc2).array().sqrt() + eps);
        model.params[i].b.array() -=
            hyper.lr * (adam_m[i].b / bc1).array() /
            ((adam_v[i].b / bc2).array().sqrt() + eps);
      }
      if (!std::isfinite(epoch_loss))
        throw NumericalError("training loss diverged");
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(n));
    result.accuracy_curve.push_back(static_cast<double>(epoch_correct) /
                                    static_cast<double>(n));
  }
  snap_float32(model);
  return result;
}

double dataset_loss(const Classifier& model,
                    const std::vector<LabeledExample>& examples) {
  const Index n = static_cast<Index>(examples.size());
  std::vector<double> losses(n);
  parallel_for(n, [&](Index i) {
    const RVec p = forward(model, *examples[i].iq);
    losses[i] = -std::log(std::max(p[examples[i].label], 1e-300));
  });
  double acc = 0.0;
  for (double l : losses) acc += l;
  return acc / static_cast<double>(n);
}

double accuracy(const Classifier& model,
                const std::vector<LabeledExample>& examples) {
  const Index n = static_cast<Index>(examples.size());
  std::vector<char> ok(n);
  parallel_for(n, [&](Index i) {
    ok[i] = predict(model, *examples[i].iq) == examples[i].label;
  });
  Index correct = 0;
  for (char c : ok) correct += c;
  return static_cast<double>(correct) / static_cast<double>(n);
}

double weight_l2_norm(const Classifier& model) {
  double acc = 0.0;
  for (const auto& p : model.params) acc += p.W.squaredNorm();
  return std::sqrt(acc);
}

void save_model(const Classifier& model, const std::string& path) {
  nlohmann::json header;
  header["version"] = kFormatVersion;
  header["input_len"] = model.input_len;
  header["classes"] = model.classes;
  nlohmann::json jl = nlohmann::json::array();
  for (const auto& spec : model.layers) {
    nlohmann::json l;
    l["kind"] = kind_name(spec.kind);
    switch (spec.kind) {
      case LayerKind::Conv1d:
        l["filters"] = spec.filters;
        l["width"] = spec.width;
        l["stride"] = spec.stride;
        break;
      case LayerKind::MaxPool:
        l["pool"] = spec.pool;
        break;
      case LayerKind::Dense:
        l["units"] = spec.units;
        break;
      case LayerKind::Dropout:
        l["rate"] = spec.rate;
        break;
      default:
        break;
    }
    jl.push_back(l);
  }
  header["layers"] = jl;
  const std::string hs = header.dump();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(kMagic, 8);
  const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
  f.write(reinterpret_cast<const char*>(&hlen), 4);
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  std::vector<float> blob;
  for (const auto& p : model.params) {
    for (Index j = 0; j < p.W.cols(); ++j)
      for (Index i = 0; i < p.W.rows(); ++i)
        blob.push_back(static_cast<float>(p.W(i, j)));
    for (Index i = 0; i < p.b.size(); ++i)
      blob.push_back(static_cast<float>(p.b[i]));
  }
  f.write(reinterpret_cast<const char*>(blob.data()),
          static_cast<std::streamsize>(blob.size() * sizeof(float)));
  if (!f) throw IoError("short write: " + path);
}

Classifier load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw SchemaError("not a model checkpoint: " + path);
  std::uint32_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 4);
  if (!f) throw SchemaError("truncated checkpoint header: " + path);
  std::string hs(hlen, '\0');
  f.read(hs.data(), hlen);
  if (!f) throw SchemaError("truncated checkpoint header: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("bad checkpoint header: " + std::string(e.what()));
  }
  if (header.value("version", -1) != kFormatVersion)
    throw SchemaError("unsupported checkpoint version");

  Classifier m;
  m.input_len = header.at("input_len").get<Index>();
  m.classes = header.at("classes").get<std::vector<std::string>>();
  for (const auto& l : header.at("layers")) {
    LayerSpec spec;
    spec.kind = kind_from_name(l.at("kind").get<std::string>());
    spec.filters = l.value("filters", 0);
    spec.width = l.value("width", 0);
    spec.stride = l.value("stride", 1);
    spec.pool = l.value("pool", 0);
    spec.units = l.value("units", 0);
    spec.rate = l.value("rate", 0.0);
    m.layers.push_back(spec);
  }
  const auto shapes = shape_chain(m.layers, m.input_len);
  if (shapes.back().first != static_cast<Index>(m.classes.size()))
    throw SchemaError("checkpoint class count mismatch");

  m.params.resize(m.layers.size());
  Index ch = 2, len = m.input_len;
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const LayerSpec& spec = m.layers[i];
    if (spec.kind == LayerKind::Conv1d) {
      m.params[i].W = Mat(spec.filters, ch * spec.width);
      m.params[i].b = RVec(spec.filters);
    } else if (spec.kind == LayerKind::Dense) {
      m.params[i].W = Mat(spec.units, ch * len);
      m.params[i].b = RVec(spec.units);
    }
    ch = shapes[i].first;
    len = shapes[i].second;
  }
  for (auto& p : m.params) {
    if (p.W.size() == 0) continue;
    std::vector<float> buf(p.W.size() + p.b.size());
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!f) throw SchemaError("truncated weight blob: " + path);
    std::size_t k = 0;
    for (Index j = 0; j < p.W.cols(); ++j)
      for (Index i2 = 0; i2 < p.W.rows(); ++i2) p.W(i2, j) = buf[k++];
    for (Index i2 = 0; i2 < p.b.size(); ++i2) p.b[i2] = buf[k++];
  }
  f.peek();
  if (!f.eof()) throw SchemaError("trailing bytes in checkpoint: " + path);
  return m;
}

}  // namespace wadv::nn
