#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "wadv/dsp.hpp"
#include "wadv/iqfile.hpp"
#include "wadv/modulation.hpp"

using namespace wadv;
using namespace wadv::dsp;

namespace {
CVec random_waveform(Index n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  CVec x(n);
  for (Index i = 0; i < n; ++i) x[i] = scale * rng.cnormal(1.0);
  return x;
}
}  // namespace

TEST_CASE("convolve_fir: identity filter is bit-exact identity") {
  const CVec x = random_waveform(257, 11);
  CVec id = CVec::Zero(5);
  id[0] = 1.0;
  const CVec y = convolve_fir(x, id);
  for (Index i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
  CHECK(energy(y) == energy(x));
}

TEST_CASE("convolve_fir: single pi/2 rotation tap rotates, halves, delays") {
  const CVec x = random_waveform(64, 12);
  CVec taps = CVec::Zero(2);
  taps[1] = 0.5 * std::exp(Cplx{0.0, M_PI / 2.0});
  const CVec y = convolve_fir(x, taps);
  CHECK(std::abs(y[0]) == doctest::Approx(0.0));
  for (Index i = 1; i < x.size(); ++i) {
    const Cplx expected = 0.5 * Cplx{0.0, 1.0} * x[i - 1];
    CHECK(std::abs(y[i] - expected) < 1e-12);
  }
}

TEST_CASE("convolve_fir: impulse response returns the taps") {
  CVec delta = CVec::Zero(16);
  delta[0] = 1.0;
  const CVec taps = random_waveform(4, 13);
  const CVec y = convolve_fir(delta, taps);
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(y[i] - taps[i]) < 1e-15);
  for (Index i = 4; i < 16; ++i) CHECK(y[i] == Cplx{0.0, 0.0});
}

TEST_CASE("convolve_fir: empty input is an error") {
  CHECK_THROWS_AS(convolve_fir(CVec(), CVec::Ones(1)), std::invalid_argument);
}

TEST_CASE("convolve_fir: linearity and agreement with naive loop") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const CVec x = random_waveform(96, 100 + seed);
    const CVec y = random_waveform(96, 200 + seed);
    const CVec taps = random_waveform(7, 300 + seed);
    const Cplx a{1.25, -0.5}, b{-0.75, 2.0};
    const CVec lhs = convolve_fir(a * x + b * y, taps);
    const CVec rhs = a * convolve_fir(x, taps) + b * convolve_fir(y, taps);
    CHECK((lhs - rhs).norm() <= 1e-10 * std::max(lhs.norm(), rhs.norm()));
    const CVec naive = oracles::naive_convolve(x, taps);
    CHECK((convolve_fir(x, taps) - naive).norm() < 1e-12 * naive.norm());
  }
}

TEST_CASE("apply_channel: transparent channel returns input") {
  const CVec x = random_waveform(128, 21);
  ChannelModel ch;  // taps [1], no noise, no path loss
  const CVec z = apply_channel(x, ch, 7);
  for (Index i = 0; i < x.size(); ++i) CHECK(z[i] == x[i]);
}

TEST_CASE("apply_channel: pure attenuation") {
  const CVec x = random_waveform(64, 22);
  ChannelModel ch;
  ch.taps = CVec::Constant(1, Cplx{0.5, 0.0});
  const CVec z = apply_channel(x, ch, 7);
  for (Index i = 0; i < x.size(); ++i)
    CHECK(std::abs(z[i] - 0.5 * x[i]) < 1e-15);
}

TEST_CASE("apply_channel: path loss scales amplitude by 10^(-dB/20)") {
  const CVec x = random_waveform(32, 23);
  ChannelModel ch;
  ch.path_loss_db = 20.0;
  const CVec z = apply_channel(x, ch, 7);
  for (Index i = 0; i < x.size(); ++i)
    CHECK(std::abs(z[i] - 0.1 * x[i]) < 1e-15);
}

TEST_CASE("apply_channel: Rayleigh draw is deterministic per seed") {
  const CVec x = random_waveform(200, 24);
  const ChannelModel ch = rayleigh_channel(4, 0.01, 0.0);
  const CVec z1 = apply_channel(x, ch, 99);
  const CVec z2 = apply_channel(x, ch, 99);
  const CVec z3 = apply_channel(x, ch, 100);
  CHECK((z1 - z2).norm() == 0.0);
  CHECK((z1 - z3).norm() > 0.0);
}

TEST_CASE("apply_channel: zero-noise channel is linear in the input") {
  const ChannelModel ch = rayleigh_channel(3, 0.0, 0.0);
  const auto r = sample_realization(ch, 64, 5);
  const CVec x = random_waveform(64, 25);
  const CVec y = random_waveform(64, 26);
  const CVec lhs = apply_channel(CVec(2.0 * x + 3.0 * y), r);
  const CVec rhs = 2.0 * apply_channel(x, r) + 3.0 * apply_channel(y, r);
  CHECK((lhs - rhs).norm() < 1e-10 * rhs.norm());
}

TEST_CASE("superimpose: zero jammer and direct sum") {
  const CVec a = random_waveform(50, 31);
  const CVec zero = CVec::Zero(50);
  const CVec r = superimpose(a, zero, 0, false);
  for (Index i = 0; i < a.size(); ++i) CHECK(r[i] == a[i]);

  CVec one(1), jay(1);
  one[0] = Cplx{1.0, 0.0};
  jay[0] = Cplx{0.0, 1.0};
  const CVec s = superimpose(one, jay, 0, false);
  CHECK(s[0] == Cplx{1.0, 1.0});
}

TEST_CASE("superimpose: cyclic tiling matches the naive loop oracle") {
  const CVec a = random_waveform(1024, 32);
  const CVec b = random_waveform(256, 33);
  for (Index offset : {Index{0}, Index{1}, Index{100}, Index{1023}}) {
    const CVec got = superimpose(a, b, offset, true);
    const CVec want = oracles::naive_tile_sum(a, b, offset);
    CHECK((got - want).norm() == 0.0);
  }
  // 1024/256: the jamming block appears exactly 4 times
  const CVec tiled = cyclic_tile(b, 1024, 0);
  for (Index i = 0; i < 1024; ++i) CHECK(tiled[i] == b[i % 256]);
}

TEST_CASE("superimpose: offset out of range is an error") {
  const CVec a = random_waveform(8, 34);
  CHECK_THROWS_AS(superimpose(a, a, 8, true), std::invalid_argument);
  CHECK_THROWS_AS(superimpose(a, a, -1, false), std::invalid_argument);
}

TEST_CASE("energy: examples and naive oracle") {
  CHECK(energy(CVec::Zero(16)) == 0.0);
  CVec v(1);
  v[0] = Cplx{3.0, 4.0};
  CHECK(energy(v) == doctest::Approx(25.0));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CVec x = random_waveform(333, 40 + seed);
    const double naive = oracles::naive_energy(x);
    CHECK(oracles::close(energy(x), naive, 0.0, 1e-12));
  }
}

TEST_CASE("modulate/demodulate: noiseless loopback is exact for all schemes") {
  const std::vector<std::string> names = {"bpsk", "qpsk", "psk8", "qam16",
                                          "qam64", "ook", "gfsk"};
  for (const auto& name : names) {
    ModulationScheme s = scheme_from_name(name);
    const Index nbits = 64 * s.bits_per_symbol();
    const auto bits = random_bits(nbits, 77);
    const CVec z = modulate(bits, s);
    const auto rx = demodulate(z, s);
    REQUIRE(rx.size() == bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) CHECK(rx[i] == bits[i]);
    CHECK(measure_ber(bits, z, s) == 0.0);
  }
}

TEST_CASE("modulate/demodulate: loopback with oversampling and RRC") {
  ModulationScheme s = scheme_from_name("qpsk");
  s.samples_per_symbol = 4;
  const auto bits = random_bits(256, 78);
  SUBCASE("rectangular") {
    const CVec z = modulate(bits, s);
    CHECK(measure_ber(bits, z, s) == 0.0);
  }
  SUBCASE("root raised cosine") {
    s.pulse = PulseShape::RootRaisedCosine;
    const CVec z = modulate(bits, s);
    CHECK(measure_ber(bits, z, s) == 0.0);
  }
}

TEST_CASE("modulate: indivisible bit count is an error") {
  ModulationScheme s = scheme_from_name("qam16");
  CHECK_THROWS_AS(modulate(std::vector<std::uint8_t>(13, 0), s),
                  std::invalid_argument);
}

TEST_CASE("constellations: unit average power and bijective mapping") {
  for (const auto& name : {"bpsk", "qpsk", "psk8", "qam16", "qam64", "ook"}) {
    const ModulationScheme s = scheme_from_name(name);
    const CVec c = s.constellation();
    CHECK(c.size() == (Index{1} << s.bits_per_symbol()));
    double p = 0.0;
    for (Index i = 0; i < c.size(); ++i) p += std::norm(c[i]);
    CHECK(p / static_cast<double>(c.size()) == doctest::Approx(1.0));
    for (Index i = 0; i < c.size(); ++i)
      for (Index j = i + 1; j < c.size(); ++j)
        CHECK(std::abs(c[i] - c[j]) > 1e-9);
  }
}

TEST_CASE("BER over AWGN matches the Q-function oracle within 20%") {
  // frozen oracle values: Q(sqrt(2*Es/N0)) at 0, 3, 6 dB
  const double expected_bpsk[3] = {0.0786496035251426, 0.0228784075610853,
                                   0.00238829078093281};
  const std::vector<double> esn0 = {0.0, 3.0, 6.0};
  for (int which = 0; which < 2; ++which) {
    const ModulationScheme s =
        scheme_from_name(which == 0 ? "bpsk" : "qpsk");
    for (std::size_t k = 0; k < esn0.size(); ++k) {
      const double want = which == 0 ? expected_bpsk[k]
                                     : oracles::qpsk_ber(esn0[k] - 0.0);
      const Index nbits = 100000 * s.bits_per_symbol();
      const auto bits = random_bits(nbits, 500 + k);
      const CVec clean = modulate(bits, s);
      ChannelModel ch;
      ch.noise_variance = noise_variance_for_esn0(s, esn0[k]);
      const CVec z = apply_channel(clean, ch, 900 + k);
      const double ber = measure_ber(bits, z, s);
      CHECK(ber == doctest::Approx(want).epsilon(0.20));
    }
    // sanity: oracle matches its own closed form at 6 dB
    CHECK(oracles::bpsk_ber(6.0) ==
          doctest::Approx(expected_bpsk[2]).epsilon(1e-9));
  }
}

TEST_CASE("QAM16 at 20 dB Es/N0 has BER below 1e-3") {
  const ModulationScheme s = scheme_from_name("qam16");
  const auto bits = random_bits(100000, 321);
  const CVec clean = modulate(bits, s);
  ChannelModel ch;
  ch.noise_variance = noise_variance_for_esn0(s, 20.0);
  const CVec z = apply_channel(clean, ch, 55);
  CHECK(measure_ber(bits, z, s) < 1e-3);
}

TEST_CASE("measure_ber: clean, antipodal, and mismatch cases") {
  const ModulationScheme s = scheme_from_name("bpsk");
  auto bits = random_bits(512, 91);
  CHECK(measure_ber(bits, modulate(bits, s), s) == 0.0);
  auto flipped = bits;
  for (auto& b : flipped) b ^= 1;
  CHECK(measure_ber(bits, modulate(flipped, s), s) == 1.0);
  CHECK_THROWS_AS(measure_ber(random_bits(100, 1), modulate(bits, s), s),
                  std::invalid_argument);
}

TEST_CASE("mean_constellation_error: zero on clean symbols, grows with noise") {
  const ModulationScheme s = scheme_from_name("qpsk");
  const auto bits = random_bits(2048, 17);
  const CVec clean = modulate(bits, s);
  CHECK(mean_constellation_error(clean, s) == doctest::Approx(0.0));
  ChannelModel ch;
  ch.noise_variance = 0.05;
  const CVec noisy = apply_channel(clean, ch, 3);
  const double e = mean_constellation_error(noisy, s);
  CHECK(e > 0.01);
  CHECK(e < 0.10);
}

TEST_CASE("symbol_estimates_adjoint is the true adjoint of symbol_estimates") {
  // <A x, y> == <x, A^H y> for random x, y
  for (const char* pulse : {"rect", "rrc"}) {
    ModulationScheme s = scheme_from_name("qpsk");
    s.samples_per_symbol = 4;
    if (pulse[0] == 'r' && pulse[1] == 'r')
      s.pulse = PulseShape::RootRaisedCosine;
    const Index n = 64;
    const CVec x = random_waveform(n, 61);
    const CVec y = random_waveform(n / 4, 62);
    const CVec ax = symbol_estimates(x, s);
    const CVec aty = symbol_estimates_adjoint(y, n, s);
    const Cplx lhs = y.dot(ax);   // conj(y)^T (A x)
    const Cplx rhs = aty.dot(x);  // conj(A^H y)^T x
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("IQF1 round trip preserves samples at float32 precision") {
  const std::string path = "test_roundtrip.iqf";
  Rng rng(5);
  CVec x(37);
  for (Index i = 0; i < x.size(); ++i) {
    // float32-representable values round-trip exactly
    x[i] = Cplx{static_cast<float>(rng.normal()),
                static_cast<float>(rng.normal())};
  }
  write_iqf(path, x);
  const CVec y = read_iqf(path);
  REQUIRE(y.size() == x.size());
  CHECK((x - y).norm() == 0.0);

  IqSidecar meta;
  meta.scheme = "qpsk";
  meta.seed = 42;
  meta.label = "2";
  write_iqf_sidecar(path, meta);
  const IqSidecar back = read_iqf_sidecar(path);
  CHECK(back.scheme == "qpsk");
  CHECK(back.seed == 42);
  CHECK(back.label == "2");
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST_CASE("IQF1: corrupt magic is a schema error") {
  const std::string path = "test_badmagic.iqf";
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite("NOTANIQF", 1, 8, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_iqf(path), SchemaError);
  std::filesystem::remove(path);
}
