#ifndef WADV_DATA_HPP
#define WADV_DATA_HPP

#include <string>
#include <utility>
#include <vector>

#include "wadv/dsp.hpp"
#include "wadv/modulation.hpp"
#include "wadv/nn.hpp"

namespace wadv::data {

struct SliceMeta {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> tx_bits;  // empty if unknown (imported data)
  int device_id = -1;
};

struct Slice {
  CVec iq;
  int label = 0;
  SliceMeta meta;
};

/// Synthetic radio-circuitry impairment: a short FIR near identity plus
/// IQ gain/phase imbalance and a residual carrier frequency offset.
struct DeviceFingerprint {
  CVec impairment_fir = []{ CVec f = CVec::Zero(3); f[0] = 1.0; return f; }();
  double gain_mismatch = 0.0;
  double phase_skew = 0.0;   // radians
  double cfo = 0.0;          // radians per sample
  int device_id = 0;
};

CVec apply_fingerprint(const CVec& x, const DeviceFingerprint& fp);

enum class DatasetKind { Modulation, Fingerprint };

struct Dataset {
  DatasetKind kind = DatasetKind::Modulation;
  std::vector<std::string> classes;
  Index n_i = 0;
  std::uint64_t seed = 0;
  // pulse configuration shared by all schemes in the dataset
  int samples_per_symbol = 1;
  dsp::PulseShape pulse = dsp::PulseShape::Rectangular;
  double rrc_rolloff = 0.35;
  dsp::ModulationScheme base_scheme;  // payload scheme (fingerprint kind)
  std::vector<Slice> slices;
  std::vector<DeviceFingerprint> fingerprints;

  /// modulation scheme used to decode class `label`'s transmissions
  dsp::ModulationScheme scheme_for(int label) const;
  std::vector<int> class_counts() const;
};

Dataset gen_modulation_dataset(const std::vector<std::string>& scheme_names,
                               const std::vector<double>& snr_grid_db,
                               int slices_per_cell, Index n_i,
                               std::uint64_t seed);

struct FingerprintGenOptions {
  double snr_db = 15.0;
  bool identity_fingerprints = false;  // all devices indistinguishable
  std::string base_scheme = "qpsk";
};

Dataset gen_fingerprint_dataset(int num_devices, int slices_per_device,
                                Index n_i, std::uint64_t seed,
                                const FingerprintGenOptions& opt = {});

/// Stratified per class; fractions must sum to <= 1.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  double optimization_fraction,
                                  std::uint64_t seed);

/// Keeps only slices with the given label.
Dataset filter_class(const Dataset& ds, int label);

/// Reads the 2018.01A archive layout: X float32 [N,1024,2], Y one-hot
/// [N,24], Z SNR per record. max_slices = 0 imports everything.
Dataset import_radioml(const std::string& path, Index max_slices = 0);

/// Directory of IQF1 slice files plus a manifest JSON.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

std::vector<nn::LabeledExample> as_examples(const Dataset& ds);

std::string bits_to_hex(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> hex_to_bits(const std::string& hex, Index nbits);

}  // namespace wadv::data

#endif  // WADV_DATA_HPP
