#include "wadv/modulation.hpp"

#include <algorithm>
#include <cmath>

namespace wadv::dsp {

namespace {

// Gray sequence for 2^b levels, b <= 3
int gray(int i) { return i ^ (i >> 1); }

// per-axis Gray-mapped PAM levels, scaled later
RVec pam_levels(int bits) {
  const int n = 1 << bits;
  RVec lv(n);
  for (int i = 0; i < n; ++i) lv[gray(i)] = static_cast<double>(2 * i - n + 1);
  return lv;
}

CVec make_constellation(Modulation kind) {
  switch (kind) {
    case Modulation::BPSK: {
      CVec c(2);
      c << Cplx{1, 0}, Cplx{-1, 0};
      return c;
    }
    case Modulation::QPSK: {
      CVec c(4);
      const double s = 1.0 / std::sqrt(2.0);
      // bit pair (b1 b0): b1 -> quadrature sign, b0 -> in-phase sign
      for (int i = 0; i < 4; ++i) {
        const int b1 = (i >> 1) & 1, b0 = i & 1;
        c[i] = Cplx{s * (1 - 2 * b0), s * (1 - 2 * b1)};
      }
      return c;
    }
    case Modulation::PSK8: {
      // Gray indexing: adjacent points on the circle differ in one bit
      CVec c(8);
      for (int i = 0; i < 8; ++i) {
        const double ang = 2.0 * M_PI * i / 8.0 + M_PI / 8.0;
        c[gray(i)] = Cplx{std::cos(ang), std::sin(ang)};
      }
      return c;
    }
    case Modulation::QAM16: {
      const RVec lv = pam_levels(2);
      CVec c(16);
      const double s = 1.0 / std::sqrt(10.0);
      for (int i = 0; i < 16; ++i)
        c[i] = s * Cplx{lv[(i >> 2) & 3], lv[i & 3]};
      return c;
    }
    case Modulation::QAM64: {
      const RVec lv = pam_levels(3);
      CVec c(64);
      const double s = 1.0 / std::sqrt(42.0);
      for (int i = 0; i < 64; ++i)
        c[i] = s * Cplx{lv[(i >> 3) & 7], lv[i & 7]};
      return c;
    }
    case Modulation::OOK: {
      CVec c(2);
      c << Cplx{0, 0}, Cplx{std::sqrt(2.0), 0};
      return c;
    }
    case Modulation::GFSK:
      throw SchemaError("GFSK has no memoryless constellation");
  }
  throw SchemaError("unknown modulation");
}

// root-raised-cosine pulse, unit energy, odd length span*sps + 1
RVec rrc_taps(int sps, double rolloff, int span) {
  if (rolloff <= 0.0 || rolloff > 1.0)
    throw SchemaError("rrc rolloff must be in (0,1]");
  const int half = span * sps / 2;
  const int len = 2 * half + 1;
  RVec h(len);
  for (int i = 0; i < len; ++i) {
    const double t = static_cast<double>(i - half) / sps;  // in symbols
    double v;
    if (std::abs(t) < 1e-12) {
      v = 1.0 - rolloff + 4.0 * rolloff / M_PI;
    } else if (std::abs(std::abs(4.0 * rolloff * t) - 1.0) < 1e-9) {
      v = rolloff / std::sqrt(2.0) *
          ((1.0 + 2.0 / M_PI) * std::sin(M_PI / (4.0 * rolloff)) +
           (1.0 - 2.0 / M_PI) * std::cos(M_PI / (4.0 * rolloff)));
    } else {
      v = (std::sin(M_PI * t * (1.0 - rolloff)) +
           4.0 * rolloff * t * std::cos(M_PI * t * (1.0 + rolloff))) /
          (M_PI * t * (1.0 - std::pow(4.0 * rolloff * t, 2)));
    }
    h[i] = v;
  }
  h /= h.norm();
  return h;
}

// circular convolution with a centered kernel; slices are treated as one
// period of a continuous stream so edge symbols keep their full pulse energy
CVec circular_filter(const CVec& x, const RVec& h) {
  const Index n = x.size();
  const Index len = h.size();
  const Index half = (len - 1) / 2;
  CVec y = CVec::Zero(n);
  for (Index l = 0; l < len; ++l) {
    if (h[l] == 0.0) continue;
    const Index shift = ((l - half) % n + n) % n;  // y[i] += h[l] x[i - (l-half)]
    for (Index i = 0; i < n; ++i) {
      Index j = i - shift;
      if (j < 0) j += n;
      y[i] += h[l] * x[j];
    }
  }
  return y;
}

CVec gfsk_tone(int sps, int bit) {
  CVec t(sps);
  const double sign = bit ? 1.0 : -1.0;
  const double c = (sps - 1) / 2.0;
  for (int i = 0; i < sps; ++i) {
    const double ang = sign * 2.0 * M_PI * (i - c) / (4.0 * sps);
    t[i] = Cplx{std::cos(ang), std::sin(ang)};
  }
  return t;
}

int bits_to_index(const std::vector<std::uint8_t>& bits, Index pos, int nb) {
  int idx = 0;
  for (int b = 0; b < nb; ++b) idx = (idx << 1) | (bits[pos + b] & 1);
  return idx;
}

void index_to_bits(int idx, int nb, std::vector<std::uint8_t>& out) {
  for (int b = nb - 1; b >= 0; --b) out.push_back((idx >> b) & 1);
}

Index nearest_point(const CVec& constellation, Cplx z) {
  Index best = 0;
  double bd = std::norm(z - constellation[0]);
  for (Index i = 1; i < constellation.size(); ++i) {
    const double d = std::norm(z - constellation[i]);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

int ModulationScheme::bits_per_symbol() const {
  switch (kind) {
    case Modulation::BPSK:
    case Modulation::OOK:
    case Modulation::GFSK:
      return 1;
    case Modulation::QPSK:
      return 2;
    case Modulation::PSK8:
      return 3;
    case Modulation::QAM16:
      return 4;
    case Modulation::QAM64:
      return 6;
  }
  throw SchemaError("unknown modulation");
}

CVec ModulationScheme::constellation() const { return make_constellation(kind); }

double ModulationScheme::symbol_energy() const {
  if (kind == Modulation::GFSK) return samples_per_symbol;
  if (pulse == PulseShape::Rectangular) return samples_per_symbol;
  return 1.0;  // unit-energy RRC pulse
}

ModulationScheme scheme_from_name(const std::string& name) {
  ModulationScheme s;
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), ::tolower);
  if (n == "bpsk")
    s.kind = Modulation::BPSK;
  else if (n == "qpsk")
    s.kind = Modulation::QPSK;
  else if (n == "psk8" || n == "8psk")
    s.kind = Modulation::PSK8;
  else if (n == "qam16" || n == "16qam")
    s.kind = Modulation::QAM16;
  else if (n == "qam64" || n == "64qam")
    s.kind = Modulation::QAM64;
  else if (n == "ook")
    s.kind = Modulation::OOK;
  else if (n == "gfsk") {
    s.kind = Modulation::GFSK;
    s.samples_per_symbol = 8;
  } else
    throw SchemaError("unknown modulation scheme: " + name);
  return s;
}

std::string to_string(Modulation kind) {
  switch (kind) {
    case Modulation::BPSK:
      return "bpsk";
    case Modulation::QPSK:
      return "qpsk";
    case Modulation::PSK8:
      return "psk8";
    case Modulation::QAM16:
      return "qam16";
    case Modulation::QAM64:
      return "qam64";
    case Modulation::OOK:
      return "ook";
    case Modulation::GFSK:
      return "gfsk";
  }
  throw SchemaError("unknown modulation");
}

std::vector<std::uint8_t> random_bits(Index n, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xB175u));
  std::vector<std::uint8_t> bits(n);
  for (Index i = 0; i < n; ++i) bits[i] = rng.next_u64() >> 63;
  return bits;
}

CVec modulate(const std::vector<std::uint8_t>& bits,
              const ModulationScheme& scheme) {
  const int nb = scheme.bits_per_symbol();
  const int sps = scheme.samples_per_symbol;
  if (sps < 1) throw SchemaError("samples_per_symbol must be >= 1");
  if (bits.size() % nb != 0)
    throw std::invalid_argument("bit count not divisible by bits per symbol");
  const Index nsym = static_cast<Index>(bits.size()) / nb;
  if (nsym == 0) throw std::invalid_argument("empty bit sequence");

  if (scheme.kind == Modulation::GFSK) {
    if (sps < 2) throw SchemaError("GFSK needs samples_per_symbol >= 2");
    const CVec t0 = gfsk_tone(sps, 0), t1 = gfsk_tone(sps, 1);
    CVec out(nsym * sps);
    for (Index k = 0; k < nsym; ++k)
      out.segment(k * sps, sps) = bits[k] ? t1 : t0;
    return out;
  }

  const CVec points = scheme.constellation();
  CVec sym(nsym);
  for (Index k = 0; k < nsym; ++k)
    sym[k] = points[bits_to_index(bits, k * nb, nb)];

  if (sps == 1 && scheme.pulse == PulseShape::Rectangular) return sym;

  if (scheme.pulse == PulseShape::Rectangular) {
    CVec out(nsym * sps);
    for (Index k = 0; k < nsym; ++k)
      out.segment(k * sps, sps).setConstant(sym[k]);
    return out;
  }

  const RVec h = rrc_taps(sps, scheme.rrc_rolloff, scheme.rrc_span_symbols);
  CVec impulses = CVec::Zero(nsym * sps);
  for (Index k = 0; k < nsym; ++k) impulses[k * sps] = sym[k];
  return circular_filter(impulses, h);
}

CVec symbol_estimates(const CVec& z, const ModulationScheme& scheme) {
  if (!scheme.is_linear())
    throw SchemaError("symbol estimates undefined for GFSK");
  const int sps = scheme.samples_per_symbol;
  if (z.size() == 0) throw std::invalid_argument("empty waveform");
  if (z.size() % sps != 0)
    throw std::invalid_argument("waveform length not divisible by sps");
  const Index nsym = z.size() / sps;
  if (sps == 1 && scheme.pulse == PulseShape::Rectangular) return z;
  if (scheme.pulse == PulseShape::Rectangular) {
    CVec s(nsym);
    for (Index k = 0; k < nsym; ++k)
      s[k] = z.segment(k * sps, sps).mean();
    return s;
  }
  const RVec h = rrc_taps(sps, scheme.rrc_rolloff, scheme.rrc_span_symbols);
  const CVec m = circular_filter(z, h);
  CVec s(nsym);
  for (Index k = 0; k < nsym; ++k) s[k] = m[k * sps];
  return s;
}

CVec symbol_estimates_adjoint(const CVec& symbol_grad, Index n,
                              const ModulationScheme& scheme) {
  if (!scheme.is_linear())
    throw SchemaError("symbol estimates undefined for GFSK");
  const int sps = scheme.samples_per_symbol;
  const Index nsym = symbol_grad.size();
  if (nsym * sps != n)
    throw std::invalid_argument("adjoint length mismatch");
  if (sps == 1 && scheme.pulse == PulseShape::Rectangular) return symbol_grad;
  if (scheme.pulse == PulseShape::Rectangular) {
    CVec out(n);
    for (Index k = 0; k < nsym; ++k)
      out.segment(k * sps, sps).setConstant(symbol_grad[k] / double(sps));
    return out;
  }
  // adjoint of (circular filter with symmetric real h, then downsample)
  const RVec h = rrc_taps(sps, scheme.rrc_rolloff, scheme.rrc_span_symbols);
  CVec up = CVec::Zero(n);
  for (Index k = 0; k < nsym; ++k) up[k * sps] = symbol_grad[k];
  return circular_filter(up, h);
}

std::vector<std::uint8_t> demodulate(const CVec& z,
                                     const ModulationScheme& scheme) {
  const int sps = scheme.samples_per_symbol;
  if (z.size() == 0) throw std::invalid_argument("empty waveform");
  if (z.size() % sps != 0)
    throw std::invalid_argument("waveform length not divisible by sps");
  const Index nsym = z.size() / sps;
  std::vector<std::uint8_t> bits;
  bits.reserve(nsym * scheme.bits_per_symbol());

  if (scheme.kind == Modulation::GFSK) {
    const CVec t0 = gfsk_tone(sps, 0), t1 = gfsk_tone(sps, 1);
    for (Index k = 0; k < nsym; ++k) {
      const CVec w = z.segment(k * sps, sps);
      const double c0 = t0.dot(w).real();  // Re <t0, w>
      const double c1 = t1.dot(w).real();
      bits.push_back(c1 > c0 ? 1 : 0);
    }
    return bits;
  }

  const CVec points = scheme.constellation();
  const CVec s = symbol_estimates(z, scheme);
  const int nb = scheme.bits_per_symbol();
  for (Index k = 0; k < nsym; ++k)
    index_to_bits(static_cast<int>(nearest_point(points, s[k])), nb, bits);
  return bits;
}

double measure_ber(const std::vector<std::uint8_t>& tx_bits, const CVec& z,
                   const ModulationScheme& scheme) {
  if (tx_bits.empty()) throw std::invalid_argument("empty bit sequence");
  const auto rx = demodulate(z, scheme);
  if (rx.size() != tx_bits.size())
    throw std::invalid_argument("bit length mismatch");
  Index errors = 0;
  for (std::size_t i = 0; i < tx_bits.size(); ++i)
    errors += (tx_bits[i] & 1) != (rx[i] & 1);
  return static_cast<double>(errors) / static_cast<double>(tx_bits.size());
}

double mean_constellation_error(const CVec& z,
                                const ModulationScheme& scheme) {
  const CVec points = scheme.constellation();
  const CVec s = symbol_estimates(z, scheme);
  double acc = 0.0;
  for (Index k = 0; k < s.size(); ++k)
    acc += std::norm(s[k] - points[nearest_point(points, s[k])]);
  return acc / static_cast<double>(s.size());
}

double noise_variance_for_esn0(const ModulationScheme& scheme,
                               double esn0_db) {
  return scheme.symbol_energy() / std::pow(10.0, esn0_db / 10.0);
}

}  // namespace wadv::dsp
