#include "wadv/firnet.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace wadv::firnet {

using nlohmann::json;

FirLayer make_fir_layer(Index num_taps, double box_epsilon) {
  if (num_taps < 1) throw std::invalid_argument("need >= 1 tap");
  if (box_epsilon < 0.0) throw std::invalid_argument("negative box epsilon");
  FirLayer l;
  l.init = CVec::Zero(num_taps);
  l.init[0] = 1.0;  // identity: unchanged input before the first update
  l.taps = l.init;
  l.box_epsilon = box_epsilon;
  return l;
}

FirNetModel make_firnet(Index num_classes, Index num_taps, double box_epsilon,
                        Index num_layers) {
  if (num_classes < 1) throw std::invalid_argument("need >= 1 class");
  if (num_layers < 1) throw std::invalid_argument("need >= 1 layer");
  FirNetModel net;
  net.box_epsilon = box_epsilon;
  net.banks.resize(num_classes);
  for (auto& bank : net.banks)
    for (Index l = 0; l < num_layers; ++l)
      bank.push_back(make_fir_layer(num_taps, box_epsilon));
  return net;
}

CVec firnet_forward(const FirNetModel& net, const CVec& z, Index target) {
  if (target < 0 || target >= net.num_classes())
    throw std::invalid_argument("unknown target class");
  if (z.size() == 0) throw std::invalid_argument("empty waveform");
  CVec out = z;
  for (const auto& layer : net.banks[target])
    out = dsp::convolve_fir(out, layer.taps);
  return out;
}

void project_firnet(FirNetModel& net) {
  for (auto& bank : net.banks) {
    for (auto& layer : bank) {
      const double eps = layer.box_epsilon;
      for (Index i = 0; i < layer.taps.size(); ++i) {
        const Cplx dev = layer.taps[i] - layer.init[i];
        layer.taps[i] =
            layer.init[i] + Cplx{std::clamp(dev.real(), -eps, eps),
                                 std::clamp(dev.imag(), -eps, eps)};
      }
    }
  }
}

FeedbackOracle::FeedbackOracle(nn::Classifier model, dsp::ChannelModel channel,
                               bool normalize, std::uint64_t seed,
                               bool allow_graybox)
    : model_(std::move(model)),
      channel_(std::move(channel)),
      normalize_(normalize),
      seed_(seed),
      allow_graybox_(allow_graybox) {}

dsp::ChannelRealization FeedbackOracle::channel_draw(Index n,
                                                     std::uint64_t window,
                                                     Index item) const {
  return dsp::sample_realization(
      channel_, n,
      mix_seed(seed_, mix_seed(window, static_cast<std::uint64_t>(item))));
}

namespace {
CVec normalize_power(const CVec& z) {
  const double p = z.squaredNorm() / static_cast<double>(z.size());
  if (p <= 0.0) return z;
  return z / std::sqrt(p);
}
}  // namespace

std::vector<RVec> FeedbackOracle::query_softmax(const std::vector<CVec>& tx,
                                                std::uint64_t window) const {
  const Index n = static_cast<Index>(tx.size());
  std::vector<RVec> out(n);
  parallel_for(n, [&](Index i) {
    CVec rx = dsp::apply_channel(tx[i], channel_draw(tx[i].size(), window, i));
    if (normalize_) rx = normalize_power(rx);
    out[i] = nn::forward(model_, rx);
  });
  return out;
}

Index FeedbackOracle::query_acks(const std::vector<CVec>& tx,
                                 const std::vector<Index>& targets,
                                 std::uint64_t window) const {
  if (tx.size() != targets.size())
    throw std::invalid_argument("targets size mismatch");
  const auto probs = query_softmax(tx, window);
  Index acks = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    acks += nn::argmax_class(probs[i]) == targets[i];
  return acks;
}

const nn::Classifier& FeedbackOracle::graybox_model() const {
  if (!allow_graybox_)
    throw std::logic_error("oracle is blackbox; graybox access disabled");
  return model_;
}

double firnet_loss(const FeedbackOracle& oracle, const FirNetModel& net,
                   const std::vector<FirnetBatchItem>& batch,
                   FeedbackMode mode, std::uint64_t window) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  std::vector<CVec> tx(batch.size());
  std::vector<Index> targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    tx[i] = firnet_forward(net, *batch[i].payload, batch[i].target);
    targets[i] = batch[i].target;
  }
  if (mode == FeedbackMode::OneBit) {
    const Index acks = oracle.query_acks(tx, targets, window);
    return static_cast<double>(static_cast<Index>(batch.size()) - acks) /
           static_cast<double>(batch.size());
  }
  const auto probs = oracle.query_softmax(tx, window);
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    loss += -std::log(std::max(probs[i][targets[i]], 1e-300));
  return loss / static_cast<double>(batch.size());
}

namespace {

RVec net_deviations(const FirNetModel& net) {
  const Index c = net.num_classes(), l = net.num_layers(), m = net.num_taps();
  RVec theta(2 * c * l * m);
  Index k = 0;
  for (const auto& bank : net.banks) {
    for (const auto& layer : bank) {
      for (Index i = 0; i < m; ++i) {
        const Cplx dev = layer.taps[i] - layer.init[i];
        theta[k++] = dev.real();
        theta[k++] = dev.imag();
      }
    }
  }
  return theta;
}

void set_deviations(FirNetModel& net, const RVec& theta) {
  Index k = 0;
  for (auto& bank : net.banks) {
    for (auto& layer : bank) {
      for (Index i = 0; i < layer.taps.size(); ++i) {
        layer.taps[i] = layer.init[i] + Cplx{theta[k], theta[k + 1]};
        k += 2;
      }
    }
  }
}

std::vector<FirnetBatchItem> sample_batch(const std::vector<CVec>& payloads,
                                          const std::vector<Index>& targets,
                                          int batch, bool round_robin,
                                          int step, std::uint64_t seed) {
  std::vector<FirnetBatchItem> items(batch);
  Rng rng(mix_seed(seed, 0xBA7C0u + static_cast<std::uint64_t>(step)));
  for (int i = 0; i < batch; ++i) {
    items[i].payload =
        &payloads[rng.uniform_index(static_cast<Index>(payloads.size()))];
    items[i].target =
        round_robin
            ? targets[static_cast<std::size_t>(step) % targets.size()]
            : targets[rng.uniform_index(static_cast<Index>(targets.size()))];
  }
  return items;
}

}  // namespace

RVec firnet_graybox_gradient(const FirNetModel& net,
                             const FeedbackOracle& oracle,
                             const std::vector<FirnetBatchItem>& batch,
                             std::uint64_t window) {
  if (oracle.normalizes())
    throw std::logic_error("graybox path requires identity processing");
  const nn::Classifier& model = oracle.graybox_model();
  const Index c = net.num_classes(), l = net.num_layers(), m = net.num_taps();
  const Index bsz = static_cast<Index>(batch.size());

  std::vector<RVec> partials(bsz);
  parallel_for(bsz, [&](Index i) {
    const FirnetBatchItem& item = batch[i];
    const auto& bank = net.banks[item.target];
    // forward through the bank, keeping per-layer inputs
    std::vector<CVec> inputs;
    CVec x = *item.payload;
    for (const auto& layer : bank) {
      inputs.push_back(x);
      x = dsp::convolve_fir(x, layer.taps);
    }
    const auto r = oracle.channel_draw(x.size(), window, i);
    const CVec rx = dsp::apply_channel(x, r);
    const auto fg = nn::forward_with_gradients(model, rx, {item.target});
    const double p = std::max(fg.probs[item.target], 1e-12);
    // d(-log p_y)/dz = -(1/p_y) df_y/dz
    CVec u = r.gain * dsp::conv_adjoint(CVec(-fg.gradients[0] / p), r.taps);

    RVec grad = RVec::Zero(2 * c * l * m);
    for (Index li = l; li-- > 0;) {
      const CVec gt = dsp::conv_taps_adjoint(u, inputs[li], m);
      const Index base = 2 * (item.target * l + li) * m;
      for (Index t = 0; t < m; ++t) {
        grad[base + 2 * t] = gt[t].real();
        grad[base + 2 * t + 1] = gt[t].imag();
      }
      if (li > 0) u = dsp::conv_adjoint(u, bank[li].taps);
    }
    partials[i] = std::move(grad);
  });

  RVec total = RVec::Zero(2 * c * l * m);
  for (Index i = 0; i < bsz; ++i) total += partials[i];
  return total / static_cast<double>(bsz);
}

FoolingEval eval_fooling(const FirNetModel& net, const FeedbackOracle& oracle,
                         const std::vector<CVec>& payloads,
                         const std::vector<Index>& targets, int count,
                         std::uint64_t window) {
  std::vector<CVec> tx(count);
  std::vector<Index> want(count);
  Rng rng(mix_seed(window, 0xE7A1u));
  for (int i = 0; i < count; ++i) {
    const Index target =
        targets[static_cast<std::size_t>(i) % targets.size()];
    const CVec& payload =
        payloads[rng.uniform_index(static_cast<Index>(payloads.size()))];
    tx[i] = firnet_forward(net, payload, target);
    want[i] = target;
  }
  const auto probs = oracle.query_softmax(tx, window);
  FoolingEval ev;
  std::vector<Index> hist(oracle.num_classes(), 0);
  Index hit = 0;
  for (int i = 0; i < count; ++i) {
    const Index got = nn::argmax_class(probs[i]);
    hit += got == want[i];
    hist[got]++;
  }
  ev.fooling_rate = static_cast<double>(hit) / count;
  ev.top_class = 0;
  for (Index cidx = 1; cidx < static_cast<Index>(hist.size()); ++cidx)
    if (hist[cidx] > hist[ev.top_class]) ev.top_class = cidx;
  ev.top_fraction = static_cast<double>(hist[ev.top_class]) / count;
  return ev;
}

FirnetTrainResult train_firnet(FirNetModel& net, const FeedbackOracle& oracle,
                               const std::vector<CVec>& payloads,
                               const std::vector<Index>& targets,
                               const FirnetHyper& hyper) {
  if (targets.empty()) throw std::invalid_argument("no target classes");
  if (payloads.empty()) throw std::invalid_argument("no payloads");
  for (Index t : targets)
    if (t < 0 || t >= oracle.num_classes())
      throw std::invalid_argument("target outside the oracle's class set");

  const double eps = net.box_epsilon;
  const double lr = hyper.lr > 0.0 ? hyper.lr : 0.2 * std::max(eps, 1e-6);
  const double c0 =
      hyper.spsa_c > 0.0 ? hyper.spsa_c : 0.1 * std::max(eps, 1e-6);
  const double decay_a = 0.602, decay_c = 0.101;
  const double stab = 0.1 * hyper.steps;

  RVec theta = net_deviations(net);
  const Index dim = theta.size();
  FirnetTrainResult result;
  FirNetModel probe = net;

  for (int k = 0; k < hyper.steps; ++k) {
    const auto batch = sample_batch(payloads, targets, hyper.batch,
                                    hyper.round_robin_targets, k, hyper.seed);
    const std::uint64_t window = static_cast<std::uint64_t>(k);
    const double ak = lr / std::pow(k + 1 + stab, decay_a);

    double loss_now = 0.0;
    RVec ghat = RVec::Zero(dim);
    if (hyper.graybox) {
      set_deviations(net, theta);
      ghat = firnet_graybox_gradient(net, oracle, batch, window);
      loss_now = firnet_loss(oracle, net, batch, hyper.mode, window);
    } else {
      const double ck = c0 / std::pow(k + 1, decay_c);
      for (int a = 0; a < hyper.spsa_avg; ++a) {
        Rng prng(mix_seed(hyper.seed, 0x5A5A0u +
                                          static_cast<std::uint64_t>(k) *
                                              hyper.spsa_avg +
                                          a));
        RVec delta(dim);
        for (Index i = 0; i < dim; ++i)
          delta[i] = prng.uniform() < 0.5 ? -1.0 : 1.0;
        // both probes share the step's coherence window
        set_deviations(probe, RVec(theta + ck * delta));
        project_firnet(probe);
        const double lp =
            firnet_loss(oracle, probe, batch, hyper.mode, window);
        set_deviations(probe, RVec(theta - ck * delta));
        project_firnet(probe);
        const double lm =
            firnet_loss(oracle, probe, batch, hyper.mode, window);
        ghat += (lp - lm) / (2.0 * ck) * delta;
        loss_now += 0.5 * (lp + lm);
      }
      ghat /= hyper.spsa_avg;
      loss_now /= hyper.spsa_avg;
    }
    if (!std::isfinite(loss_now))
      throw NumericalError("firnet training loss diverged");

    theta -= ak * ghat;
    theta = theta.cwiseMax(-eps).cwiseMin(eps);  // box on the deviation
    result.loss_curve.push_back(loss_now);

    if (hyper.eval_every > 0 &&
        ((k + 1) % hyper.eval_every == 0 || k + 1 == hyper.steps)) {
      set_deviations(net, theta);
      const auto ev =
          eval_fooling(net, oracle, payloads, targets, hyper.eval_batch,
                       0x0E7A0000u + static_cast<std::uint64_t>(k));
      result.fooling_curve.push_back(ev.fooling_rate);
    }
  }

  set_deviations(net, theta);
  project_firnet(net);
  const auto ev = eval_fooling(net, oracle, payloads, targets,
                               hyper.eval_batch, 0x0E7AFFFFu);
  result.final_fooling = ev.fooling_rate;
  result.collapsed = ev.top_fraction >= hyper.collapse_threshold;
  result.collapsed_class = ev.top_class;
  result.collapse_fraction = ev.top_fraction;
  return result;
}

void save_firnet(const FirNetModel& net, const std::string& path) {
  json j;
  j["format"] = 1;
  j["box_epsilon"] = net.box_epsilon;
  json banks = json::array();
  for (const auto& bank : net.banks) {
    json jb = json::array();
    for (const auto& layer : bank) {
      json jl;
      json taps = json::array(), init = json::array();
      for (Index i = 0; i < layer.taps.size(); ++i) {
        taps.push_back({layer.taps[i].real(), layer.taps[i].imag()});
        init.push_back({layer.init[i].real(), layer.init[i].imag()});
      }
      jl["taps"] = taps;
      jl["init"] = init;
      jl["box_epsilon"] = layer.box_epsilon;
      jb.push_back(jl);
    }
    banks.push_back(jb);
  }
  j["banks"] = banks;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << j.dump(2) << "\n";
}

FirNetModel load_firnet(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw SchemaError("bad firnet artifact: " + std::string(e.what()));
  }
  if (j.value("format", -1) != 1)
    throw SchemaError("unsupported firnet artifact format");
  FirNetModel net;
  net.box_epsilon = j.at("box_epsilon").get<double>();
  for (const auto& jb : j.at("banks")) {
    std::vector<FirLayer> bank;
    for (const auto& jl : jb) {
      FirLayer layer;
      const auto& taps = jl.at("taps");
      const auto& init = jl.at("init");
      layer.taps = CVec(taps.size());
      layer.init = CVec(init.size());
      for (std::size_t i = 0; i < taps.size(); ++i) {
        layer.taps[i] = Cplx{taps[i][0].get<double>(),
                             taps[i][1].get<double>()};
        layer.init[i] = Cplx{init[i][0].get<double>(),
                             init[i][1].get<double>()};
      }
      layer.box_epsilon = jl.at("box_epsilon").get<double>();
      bank.push_back(std::move(layer));
    }
    net.banks.push_back(std::move(bank));
  }
  return net;
}

}  // namespace wadv::firnet
