#ifndef WADV_DSP_HPP
#define WADV_DSP_HPP

#include "wadv/common.hpp"

namespace wadv::dsp {

/// Causal same-length FIR: y[n] = sum_m taps[m] * x[n-m], x out of range = 0.
CVec convolve_fir(const CVec& x, const CVec& taps);

/// Adjoint of x -> convolve_fir(x, taps): u[i] = sum_k conj(taps[k]) g[i+k].
/// Maps an output-side gradient back to the input side.
CVec conv_adjoint(const CVec& grad_out, const CVec& taps);

/// Adjoint of taps -> convolve_fir(x, taps) for fixed input x:
/// g[m] = sum_i conj(x[i-m]) grad_out[i]. num_taps rows are produced.
CVec conv_taps_adjoint(const CVec& grad_out, const CVec& x, Index num_taps);

/// ||x||_2^2
inline double energy(const CVec& x) { return x.squaredNorm(); }

/// x[i] = phi[(i - offset) mod len(phi)]; periodic extension of a short
/// sequence to length n with a circular phase offset.
CVec cyclic_tile(const CVec& phi, Index n, Index offset);

/// Elementwise sum of b onto a over a's support. tile=false adds b once
/// starting at `offset`; tile=true repeats b cyclically from `offset` to
/// cover all of a. Result has a's length.
CVec superimpose(const CVec& a, const CVec& b, Index offset, bool tile);

struct ChannelModel {
  CVec taps = CVec::Ones(1);   // fixed taps when !time_varying
  double noise_variance = 0.0; // E|w|^2 per complex sample
  double path_loss_db = 0.0;
  bool time_varying = false;   // redraw taps per realization
  RVec tap_power;              // expected per-tap power when time_varying
};

/// Tapped-delay Rayleigh model: taps i.i.d. circularly-symmetric complex
/// Gaussian with an exponential power-delay profile, redrawn per realization.
ChannelModel rayleigh_channel(int num_taps, double noise_variance,
                              double path_loss_db,
                              double decay_db_per_tap = 3.0);

/// One frozen draw of a channel: fixed taps, fixed additive noise for a
/// waveform of known length, and the linear path-loss gain. Gradients through
/// the channel are only defined against a frozen realization.
struct ChannelRealization {
  CVec taps = CVec::Ones(1);
  CVec noise;      // length n; empty means noiseless
  double gain = 1.0;
};

ChannelRealization sample_realization(const ChannelModel& ch, Index n,
                                      std::uint64_t seed);

/// z[n] = gain * sum_k taps[k] x[n-k] + noise[n]
CVec apply_channel(const CVec& x, const ChannelRealization& r);
CVec apply_channel(const CVec& x, const ChannelModel& ch, std::uint64_t seed);

}  // namespace wadv::dsp

#endif  // WADV_DSP_HPP
