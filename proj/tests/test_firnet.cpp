#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "wadv/data.hpp"
#include "wadv/firnet.hpp"
#include "wadv/whitebox.hpp"

using namespace wadv;
using namespace wadv::firnet;

namespace {

CVec random_waveform(Index n, std::uint64_t seed) {
  Rng rng(seed);
  CVec x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.cnormal(1.0);
  return x;
}

nn::Classifier small_model(Index n, std::uint64_t seed) {
  return nn::make_classifier(
      {nn::conv1d(4, 5), nn::relu(), nn::maxpool(2), nn::dense(8), nn::relu(),
       nn::dense(3), nn::softmax()},
      {"c0", "c1", "c2"}, n, seed);
}

std::vector<CVec> random_payloads(int count, Index n, std::uint64_t seed) {
  std::vector<CVec> out;
  for (int i = 0; i < count; ++i)
    out.push_back(random_waveform(n, mix_seed(seed, i)));
  return out;
}

}  // namespace

TEST_CASE("firnet_forward: identity initialization is the bit-exact identity") {
  const FirNetModel net = make_firnet(3, 12, 0.5);
  const CVec z = random_waveform(64, 1);
  for (Index t = 0; t < 3; ++t) {
    const CVec y = firnet_forward(net, z, t);
    for (Index i = 0; i < z.size(); ++i) CHECK(y[i] == z[i]);
  }
  CHECK_THROWS_AS(firnet_forward(net, z, 3), std::invalid_argument);
}

TEST_CASE("firnet_forward: single layer delegates to convolve_fir") {
  FirNetModel net = make_firnet(1, 4, 10.0);
  net.banks[0][0].taps.setZero();
  net.banks[0][0].taps[1] = 0.5 * std::exp(Cplx{0.0, M_PI / 2.0});
  const CVec z = random_waveform(48, 2);
  const CVec got = firnet_forward(net, z, 0);
  const CVec want = dsp::convolve_fir(z, net.banks[0][0].taps);
  CHECK((got - want).norm() == 0.0);
}

TEST_CASE("firnet_forward: two layers compose like two convolutions") {
  FirNetModel net = make_firnet(1, 5, 10.0, 2);
  Rng rng(3);
  for (auto& layer : net.banks[0])
    for (Index i = 0; i < 5; ++i)
      layer.taps[i] += 0.3 * rng.cnormal(1.0);
  const CVec z = random_waveform(40, 4);
  const CVec got = firnet_forward(net, z, 0);
  const CVec want = dsp::convolve_fir(
      dsp::convolve_fir(z, net.banks[0][0].taps), net.banks[0][1].taps);
  CHECK((got - want).norm() < 1e-12 * want.norm());
}

TEST_CASE("firnet_loss: perfect, uniform, and one-bit cases") {
  // oracle over a model rigged to output probability 1 on class 1 is not
  // constructible directly; instead check the loss arithmetic on the
  // uniform model and the one-bit counting rule
  const Index n = 32;
  nn::Classifier model = small_model(n, 4);
  // zero last dense -> uniform output 1/3
  for (std::size_t i = model.layers.size(); i-- > 0;) {
    if (model.layers[i].kind == nn::LayerKind::Dense) {
      model.params[i].W.setZero();
      model.params[i].b.setZero();
      break;
    }
  }
  const FeedbackOracle oracle(model, dsp::ChannelModel{}, false, 1);
  const FirNetModel net = make_firnet(3, 4, 0.1);
  const auto payloads = random_payloads(10, n, 5);
  std::vector<FirnetBatchItem> batch;
  for (int i = 0; i < 10; ++i)
    batch.push_back({&payloads[i], static_cast<Index>(i % 3)});

  // uniform oracle: softmax loss is exactly ln|C|
  CHECK(firnet_loss(oracle, net, batch, FeedbackMode::Softmax, 0) ==
        doctest::Approx(std::log(3.0)));
  // uniform logits tie-break to class 0: ACKs only where target == 0
  const double onebit =
      firnet_loss(oracle, net, batch, FeedbackMode::OneBit, 0);
  CHECK(onebit == doctest::Approx(6.0 / 10.0));
}

TEST_CASE("firnet_loss: onebit counts misses as (M - A)/M") {
  // 100 items, 73 accepted -> 0.27; build via a perfect-on-class-0 stub:
  // model with huge bias on class 0 accepts exactly the target-0 items
  const Index n = 16;
  nn::Classifier model = nn::make_classifier(
      {nn::dense(3), nn::softmax()}, {"c0", "c1", "c2"}, n, 2);
  model.params[0].W.setZero();
  model.params[0].b << 10.0, 0.0, -10.0;
  const FeedbackOracle oracle(model, dsp::ChannelModel{}, false, 1);
  const FirNetModel net = make_firnet(3, 4, 0.1);
  const auto payloads = random_payloads(4, n, 7);
  std::vector<FirnetBatchItem> batch;
  for (int i = 0; i < 100; ++i)
    batch.push_back({&payloads[i % 4], i < 73 ? Index{0} : Index{1}});
  CHECK(firnet_loss(oracle, net, batch, FeedbackMode::OneBit, 3) ==
        doctest::Approx(0.27));
}

TEST_CASE("project_firnet: box applies to the deviation from the identity") {
  FirNetModel net = make_firnet(1, 4, 0.1);
  net.banks[0][0].taps[0] = Cplx{1.4, -0.3};
  net.banks[0][0].taps[2] = Cplx{-0.05, 0.25};
  project_firnet(net);
  CHECK(net.banks[0][0].taps[0] == Cplx{1.1, -0.1});  // around init 1
  CHECK(net.banks[0][0].taps[2] == Cplx{-0.05, 0.1});
}

TEST_CASE("train_firnet: epsilon zero cannot change the net") {
  const Index n = 32;
  nn::Classifier model = small_model(n, 6);
  const FeedbackOracle oracle(model, dsp::ChannelModel{}, false, 3);
  FirNetModel net = make_firnet(3, 6, 0.0);
  const auto payloads = random_payloads(20, n, 9);
  FirnetHyper hyper;
  hyper.batch = 10;
  hyper.steps = 5;
  hyper.seed = 1;
  hyper.eval_every = 0;
  hyper.eval_batch = 60;
  const auto r = train_firnet(net, oracle, payloads, {0, 1, 2}, hyper);
  for (const auto& bank : net.banks)
    for (const auto& layer : bank)
      CHECK((layer.taps - layer.init).norm() == 0.0);

  // fooling rate equals the clean baseline computed without the net
  const auto ev = eval_fooling(net, oracle, payloads, {0, 1, 2}, 60,
                               0x0E7AFFFFu);
  std::vector<CVec> tx;
  std::vector<Index> want;
  Rng rng(mix_seed(0x0E7AFFFFu, 0xE7A1u));
  for (int i = 0; i < 60; ++i) {
    want.push_back(static_cast<Index>(i % 3));
    tx.push_back(payloads[rng.uniform_index(20)]);
  }
  const auto probs = oracle.query_softmax(tx, 0x0E7AFFFFu);
  Index hit = 0;
  for (int i = 0; i < 60; ++i)
    hit += nn::argmax_class(probs[i]) == want[i];
  CHECK(ev.fooling_rate == doctest::Approx(hit / 60.0));
  CHECK(r.final_fooling == doctest::Approx(ev.fooling_rate));
}

TEST_CASE("train_firnet: box constraint holds after every step") {
  const Index n = 32;
  nn::Classifier model = small_model(n, 8);
  const FeedbackOracle oracle(model, dsp::rayleigh_channel(2, 0.01, 0.0),
                              false, 5);
  FirNetModel net = make_firnet(3, 8, 0.25);
  const auto payloads = random_payloads(16, n, 11);
  FirnetHyper hyper;
  hyper.batch = 8;
  hyper.steps = 12;
  hyper.seed = 3;
  hyper.eval_every = 4;
  hyper.eval_batch = 30;
  train_firnet(net, oracle, payloads, {0, 1, 2}, hyper);
  for (const auto& bank : net.banks) {
    for (const auto& layer : bank) {
      for (Index i = 0; i < layer.taps.size(); ++i) {
        const Cplx dev = layer.taps[i] - layer.init[i];
        CHECK(std::abs(dev.real()) <= 0.25 + 1e-12);
        CHECK(std::abs(dev.imag()) <= 0.25 + 1e-12);
      }
    }
  }
}

TEST_CASE("train_firnet: graybox gradient agrees with finite differences") {
  const Index n = 24;
  nn::Classifier model = small_model(n, 12);
  const FeedbackOracle oracle(model, dsp::rayleigh_channel(2, 0.0, 0.0), false,
                              7, /*allow_graybox=*/true);
  FirNetModel net = make_firnet(3, 4, 1.0);
  Rng rng(5);
  for (auto& bank : net.banks)
    for (auto& layer : bank)
      for (Index i = 0; i < layer.taps.size(); ++i)
        layer.taps[i] += 0.2 * rng.cnormal(1.0);

  const auto payloads = random_payloads(6, n, 13);
  std::vector<FirnetBatchItem> batch;
  for (int i = 0; i < 6; ++i)
    batch.push_back({&payloads[i], static_cast<Index>(i % 3)});

  const std::uint64_t window = 9;
  const RVec g = firnet_graybox_gradient(net, oracle, batch, window);

  const double h = 1e-5;
  Rng pick(17);
  for (int probe = 0; probe < 12; ++probe) {
    const Index t = pick.uniform_index(3);
    const Index tap = pick.uniform_index(4);
    const bool imag = pick.uniform() < 0.5;

    FirNetModel plus = net, minus = net;
    const Cplx dh = imag ? Cplx{0.0, h} : Cplx{h, 0.0};
    plus.banks[t][0].taps[tap] += dh;
    minus.banks[t][0].taps[tap] -= dh;
    const double lp =
        firnet_loss(oracle, plus, batch, FeedbackMode::Softmax, window);
    const double lm =
        firnet_loss(oracle, minus, batch, FeedbackMode::Softmax, window);
    const double fd = (lp - lm) / (2.0 * h);

    // deviation layout: banks, then layers, then taps, re/im interleaved
    const Index coord = 2 * (t * 1 + 0) * 4 + 2 * tap + (imag ? 1 : 0);
    CHECK(oracles::close(g[coord], fd, 1e-4, 1e-3));
  }
}

TEST_CASE("firnet artifact: save/load round trip") {
  FirNetModel net = make_firnet(3, 6, 0.5, 2);
  Rng rng(3);
  for (auto& bank : net.banks)
    for (auto& layer : bank)
      for (Index i = 0; i < layer.taps.size(); ++i)
        layer.taps[i] += 0.1 * rng.cnormal(1.0);
  const std::string path = "tmp_firnet.json";
  save_firnet(net, path);
  const FirNetModel back = load_firnet(path);
  REQUIRE(back.num_classes() == 3);
  REQUIRE(back.num_layers() == 2);
  for (Index b = 0; b < 3; ++b)
    for (Index l = 0; l < 2; ++l) {
      CHECK((back.banks[b][l].taps - net.banks[b][l].taps).norm() == 0.0);
      CHECK((back.banks[b][l].init - net.banks[b][l].init).norm() == 0.0);
    }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_firnet("missing_firnet.json"), IoError);
}

TEST_CASE("oracle: graybox access is rejected unless enabled") {
  nn::Classifier model = small_model(16, 1);
  const FeedbackOracle blackbox(model, dsp::ChannelModel{}, false, 1);
  CHECK_THROWS_AS(blackbox.graybox_model(), std::logic_error);
  const FeedbackOracle gray(model, dsp::ChannelModel{}, false, 1, true);
  CHECK(gray.graybox_model().input_len == 16);
}
