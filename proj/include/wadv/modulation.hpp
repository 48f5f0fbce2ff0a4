#ifndef WADV_MODULATION_HPP
#define WADV_MODULATION_HPP

#include <string>
#include <vector>

#include "wadv/common.hpp"

namespace wadv::dsp {

enum class Modulation { BPSK, QPSK, PSK8, QAM16, QAM64, OOK, GFSK };

enum class PulseShape { Rectangular, RootRaisedCosine };

/// Gray-mapped constellation with unit average power; bit groups index
/// points MSB-first. GFSK is the odd one out: two tones per bit, needs
/// samples_per_symbol >= 2 and has no memoryless constellation.
struct ModulationScheme {
  Modulation kind = Modulation::BPSK;
  int samples_per_symbol = 1;
  PulseShape pulse = PulseShape::Rectangular;
  double rrc_rolloff = 0.35;   // in (0, 1]
  int rrc_span_symbols = 8;    // one-sided pulse extent

  int bits_per_symbol() const;
  bool is_linear() const { return kind != Modulation::GFSK; }
  CVec constellation() const;  // linear schemes only
  /// energy of one unit-power symbol as transmitted (depends on the pulse)
  double symbol_energy() const;
};

ModulationScheme scheme_from_name(const std::string& name);
std::string to_string(Modulation kind);

std::vector<std::uint8_t> random_bits(Index n, std::uint64_t seed);

CVec modulate(const std::vector<std::uint8_t>& bits,
              const ModulationScheme& scheme);
std::vector<std::uint8_t> demodulate(const CVec& z,
                                     const ModulationScheme& scheme);
double measure_ber(const std::vector<std::uint8_t>& tx_bits, const CVec& z,
                   const ModulationScheme& scheme);

/// Matched-filtered symbol estimates (linear schemes). The same linear
/// front-end backs demodulation and the solver's constellation-error
/// constraint surrogate.
CVec symbol_estimates(const CVec& z, const ModulationScheme& scheme);

/// Adjoint of symbol_estimates: maps a gradient w.r.t. the symbol vector back
/// to a gradient w.r.t. the n input samples.
CVec symbol_estimates_adjoint(const CVec& symbol_grad, Index n,
                              const ModulationScheme& scheme);

/// Mean squared distance of each symbol estimate to its nearest
/// constellation point. Smooth a.e. in z, unlike the demodulated BER.
double mean_constellation_error(const CVec& z, const ModulationScheme& scheme);

/// noise variance per complex sample giving the requested Es/N0
double noise_variance_for_esn0(const ModulationScheme& scheme,
                               double esn0_db);

}  // namespace wadv::dsp

#endif  // WADV_MODULATION_HPP
