#ifndef WADV_IQFILE_HPP
#define WADV_IQFILE_HPP

#include <string>

#include "wadv/common.hpp"

namespace wadv::dsp {

/// IQF1 waveform container: little-endian, 8-byte magic "IQF1\0\0\0\0",
/// u32 sample count, then interleaved float32 (I, Q) pairs.
struct IqSidecar {
  std::string scheme;
  std::string sample_rate_tag = "baseband";
  std::uint64_t seed = 0;
  std::string label;
};

void write_iqf(const std::string& path, const CVec& x);
CVec read_iqf(const std::string& path);

/// Writes/reads the companion "<path>.json" metadata file.
void write_iqf_sidecar(const std::string& path, const IqSidecar& meta);
IqSidecar read_iqf_sidecar(const std::string& path);

}  // namespace wadv::dsp

#endif  // WADV_IQFILE_HPP
