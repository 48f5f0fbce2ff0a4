#include "wadv/dsp.hpp"

#include <cmath>

namespace wadv::dsp {

CVec convolve_fir(const CVec& x, const CVec& taps) {
  if (x.size() == 0) throw std::invalid_argument("empty waveform");
  if (taps.size() == 0) throw std::invalid_argument("empty filter");
  const Index n = x.size();
  const Index m = taps.size();
  CVec y = CVec::Zero(n);
  for (Index k = 0; k < m; ++k) {
    const Cplx t = taps[k];
    if (t == Cplx{0.0, 0.0}) continue;
    y.tail(n - std::min(k, n)) += t * x.head(n - std::min(k, n));
  }
  return y;
}

CVec conv_adjoint(const CVec& grad_out, const CVec& taps) {
  const Index n = grad_out.size();
  CVec u = CVec::Zero(n);
  for (Index k = 0; k < taps.size() && k < n; ++k) {
    const Cplx c = std::conj(taps[k]);
    if (c == Cplx{0.0, 0.0}) continue;
    u.head(n - k) += c * grad_out.tail(n - k);
  }
  return u;
}

CVec conv_taps_adjoint(const CVec& grad_out, const CVec& x, Index num_taps) {
  CVec g = CVec::Zero(num_taps);
  const Index n = grad_out.size();
  for (Index m = 0; m < num_taps && m < n; ++m)
    g[m] = x.head(n - m).dot(grad_out.tail(n - m));  // conj(x)^T grad
  return g;
}

CVec cyclic_tile(const CVec& phi, Index n, Index offset) {
  if (phi.size() == 0) throw std::invalid_argument("empty waveform");
  const Index m = phi.size();
  CVec out(n);
  Index j = ((-offset) % m + m) % m;  // index into phi at output position 0
  for (Index i = 0; i < n; ++i) {
    out[i] = phi[j];
    if (++j == m) j = 0;
  }
  return out;
}

CVec superimpose(const CVec& a, const CVec& b, Index offset, bool tile) {
  if (a.size() == 0) throw std::invalid_argument("empty waveform");
  if (offset < 0 || offset >= a.size())
    throw std::invalid_argument("superimpose: offset out of range");
  if (b.size() == 0) throw std::invalid_argument("empty waveform");
  CVec out = a;
  if (tile) {
    out += cyclic_tile(b, a.size(), offset);
  } else {
    const Index len = std::min(b.size(), a.size() - offset);
    out.segment(offset, len) += b.head(len);
  }
  return out;
}

ChannelModel rayleigh_channel(int num_taps, double noise_variance,
                              double path_loss_db, double decay_db_per_tap) {
  if (num_taps < 1) throw std::invalid_argument("channel needs >= 1 tap");
  ChannelModel ch;
  ch.noise_variance = noise_variance;
  ch.path_loss_db = path_loss_db;
  ch.time_varying = true;
  RVec power(num_taps);
  for (int k = 0; k < num_taps; ++k)
    power[k] = std::pow(10.0, -decay_db_per_tap * k / 10.0);
  power /= power.sum();  // unit average channel energy
  ch.tap_power = power;
  ch.taps = CVec::Zero(num_taps);
  return ch;
}

ChannelRealization sample_realization(const ChannelModel& ch, Index n,
                                      std::uint64_t seed) {
  if (ch.taps.size() < 1) throw std::invalid_argument("channel needs >= 1 tap");
  if (ch.noise_variance < 0.0)
    throw std::invalid_argument("negative noise variance");
  ChannelRealization r;
  Rng rng(mix_seed(seed, 0xC4A5u));
  if (ch.time_varying) {
    const Index k = ch.tap_power.size();
    r.taps = CVec(k);
    for (Index i = 0; i < k; ++i) r.taps[i] = rng.cnormal(ch.tap_power[i]);
  } else {
    r.taps = ch.taps;
  }
  if (ch.noise_variance > 0.0 && n > 0) {
    r.noise = CVec(n);
    for (Index i = 0; i < n; ++i) r.noise[i] = rng.cnormal(ch.noise_variance);
  }
  r.gain = std::pow(10.0, -ch.path_loss_db / 20.0);
  return r;
}

CVec apply_channel(const CVec& x, const ChannelRealization& r) {
  if (x.size() == 0) throw std::invalid_argument("empty waveform");
  CVec z = r.gain * convolve_fir(x, r.taps);
  if (r.noise.size() > 0) {
    if (r.noise.size() != x.size())
      throw std::invalid_argument("channel realization length mismatch");
    z += r.noise;
  }
  return z;
}

CVec apply_channel(const CVec& x, const ChannelModel& ch, std::uint64_t seed) {
  return apply_channel(x, sample_realization(ch, x.size(), seed));
}

}  // namespace wadv::dsp
