#include "wadv/data.hpp"

#include <hdf5.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "wadv/iqfile.hpp"

namespace wadv::data {

namespace fs = std::filesystem;
using nlohmann::json;

CVec apply_fingerprint(const CVec& x, const DeviceFingerprint& fp) {
  CVec y = dsp::convolve_fir(x, fp.impairment_fir);
  const double g = fp.gain_mismatch;
  const double cs = std::cos(fp.phase_skew), sn = std::sin(fp.phase_skew);
  for (Index n = 0; n < y.size(); ++n) {
    const double i = y[n].real(), q = y[n].imag();
    Cplx v{(1.0 + g) * i, cs * q + sn * i};
    y[n] = v * std::exp(Cplx{0.0, fp.cfo * static_cast<double>(n)});
  }
  return y;
}

dsp::ModulationScheme Dataset::scheme_for(int label) const {
  if (label < 0 || label >= static_cast<int>(classes.size()))
    throw std::invalid_argument("label outside class set");
  dsp::ModulationScheme s;
  if (kind == DatasetKind::Fingerprint) {
    s = base_scheme;
  } else {
    s = dsp::scheme_from_name(classes[label]);
  }
  if (s.kind != dsp::Modulation::GFSK) s.samples_per_symbol = samples_per_symbol;
  s.pulse = pulse;
  s.rrc_rolloff = rrc_rolloff;
  return s;
}

std::vector<int> Dataset::class_counts() const {
  std::vector<int> counts(classes.size(), 0);
  for (const auto& s : slices) counts.at(s.label)++;
  return counts;
}

namespace {

Slice make_modulation_slice(const dsp::ModulationScheme& scheme, int label,
                            double snr_db, Index n_i, std::uint64_t seed) {
  const int sps = scheme.samples_per_symbol;
  if (n_i % sps != 0)
    throw SchemaError("slice length not divisible by samples per symbol");
  const Index nsym = n_i / sps;
  Slice s;
  s.label = label;
  s.meta.snr_db = snr_db;
  s.meta.seed = seed;
  s.meta.tx_bits = dsp::random_bits(nsym * scheme.bits_per_symbol(), seed);
  const CVec clean = dsp::modulate(s.meta.tx_bits, scheme);
  dsp::ChannelModel awgn;
  awgn.noise_variance = dsp::noise_variance_for_esn0(scheme, snr_db);
  s.iq = snap_f32(dsp::apply_channel(clean, awgn, mix_seed(seed, 0xA36Eu)));
  return s;
}

}  // namespace

Dataset gen_modulation_dataset(const std::vector<std::string>& scheme_names,
                               const std::vector<double>& snr_grid_db,
                               int slices_per_cell, Index n_i,
                               std::uint64_t seed) {
  if (scheme_names.empty()) throw std::invalid_argument("no schemes given");
  if (snr_grid_db.empty()) throw std::invalid_argument("no SNR points given");
  if (slices_per_cell < 1)
    throw std::invalid_argument("slices_per_cell must be >= 1");

  Dataset ds;
  ds.kind = DatasetKind::Modulation;
  ds.classes = scheme_names;
  ds.n_i = n_i;
  ds.seed = seed;
  std::uint64_t counter = 0;
  for (std::size_t c = 0; c < scheme_names.size(); ++c) {
    dsp::ModulationScheme scheme = ds.scheme_for(static_cast<int>(c));
    for (double snr : snr_grid_db) {
      for (int k = 0; k < slices_per_cell; ++k) {
        ds.slices.push_back(make_modulation_slice(
            scheme, static_cast<int>(c), snr, n_i, mix_seed(seed, counter)));
        ++counter;
      }
    }
  }
  return ds;
}

Dataset gen_fingerprint_dataset(int num_devices, int slices_per_device,
                                Index n_i, std::uint64_t seed,
                                const FingerprintGenOptions& opt) {
  if (num_devices < 2) throw std::invalid_argument("need >= 2 devices");
  if (slices_per_device < 1)
    throw std::invalid_argument("slices_per_device must be >= 1");

  Dataset ds;
  ds.kind = DatasetKind::Fingerprint;
  ds.n_i = n_i;
  ds.seed = seed;
  ds.base_scheme = dsp::scheme_from_name(opt.base_scheme);
  for (int d = 0; d < num_devices; ++d)
    ds.classes.push_back("device" + std::to_string(d));

  for (int d = 0; d < num_devices; ++d) {
    DeviceFingerprint fp;
    fp.device_id = d;
    if (!opt.identity_fingerprints) {
      Rng rng(mix_seed(seed, 0xF1F0u + static_cast<std::uint64_t>(d)));
      // |fir - identity|_inf <= 0.2, subtle but learnable
      for (Index t = 0; t < 3; ++t) {
        const double mag = rng.uniform(0.03, 0.12);
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        fp.impairment_fir[t] += mag * std::exp(Cplx{0.0, ang});
      }
      fp.gain_mismatch = rng.uniform(-0.08, 0.08);
      fp.phase_skew = rng.uniform(-0.08, 0.08);
      fp.cfo = rng.uniform(-8e-4, 8e-4);
    }
    ds.fingerprints.push_back(fp);
  }

  const dsp::ModulationScheme scheme = ds.scheme_for(0);
  const int sps = scheme.samples_per_symbol;
  if (n_i % sps != 0)
    throw SchemaError("slice length not divisible by samples per symbol");
  const Index nsym = n_i / sps;
  std::uint64_t counter = 0;
  for (int d = 0; d < num_devices; ++d) {
    for (int k = 0; k < slices_per_device; ++k) {
      const std::uint64_t sl_seed = mix_seed(seed, 0x51D0u + counter);
      Slice s;
      s.label = d;
      s.meta.device_id = d;
      s.meta.snr_db = opt.snr_db;
      s.meta.seed = sl_seed;
      s.meta.tx_bits =
          dsp::random_bits(nsym * scheme.bits_per_symbol(), sl_seed);
      CVec wave = dsp::modulate(s.meta.tx_bits, scheme);
      wave = apply_fingerprint(wave, ds.fingerprints[d]);
      dsp::ChannelModel awgn;
      awgn.noise_variance = dsp::noise_variance_for_esn0(scheme, opt.snr_db);
      s.iq = snap_f32(dsp::apply_channel(wave, awgn, mix_seed(sl_seed, 1)));
      ds.slices.push_back(std::move(s));
      ++counter;
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  double optimization_fraction,
                                  std::uint64_t seed) {
  if (test_fraction < 0.0 || optimization_fraction < 0.0 ||
      test_fraction + optimization_fraction > 1.0 + 1e-12)
    throw std::invalid_argument("split fractions must sum to <= 1");

  Dataset test = ds, opt = ds;
  test.slices.clear();
  opt.slices.clear();

  const bool exhaustive =
      std::abs(test_fraction + optimization_fraction - 1.0) < 1e-12;
  for (std::size_t c = 0; c < ds.classes.size(); ++c) {
    std::vector<Index> idx;
    for (Index i = 0; i < static_cast<Index>(ds.slices.size()); ++i)
      if (ds.slices[i].label == static_cast<int>(c)) idx.push_back(i);
    Rng rng(mix_seed(seed, 0x5137u + c));
    for (Index i = static_cast<Index>(idx.size()) - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
    const Index n = static_cast<Index>(idx.size());
    const Index nt = static_cast<Index>(std::floor(n * test_fraction + 0.5));
    Index no = exhaustive
                   ? n - nt
                   : static_cast<Index>(
                         std::floor(n * optimization_fraction + 0.5));
    no = std::min(no, n - nt);
    for (Index i = 0; i < nt; ++i) test.slices.push_back(ds.slices[idx[i]]);
    for (Index i = nt; i < nt + no; ++i)
      opt.slices.push_back(ds.slices[idx[i]]);
  }
  if (test.slices.empty() || opt.slices.empty())
    throw std::invalid_argument("split produced an empty dataset");
  return {std::move(test), std::move(opt)};
}

Dataset filter_class(const Dataset& ds, int label) {
  if (label < 0 || label >= static_cast<int>(ds.classes.size()))
    throw std::invalid_argument("label outside class set");
  Dataset out = ds;
  out.slices.clear();
  for (const auto& s : ds.slices)
    if (s.label == label) out.slices.push_back(s);
  return out;
}

namespace {

// canonical 2018.01A class ordering
const std::vector<std::string> kRadioMlClasses = {
    "OOK",       "4ASK",      "8ASK",      "BPSK",      "QPSK",
    "8PSK",      "16PSK",     "32PSK",     "16APSK",    "32APSK",
    "64APSK",    "128APSK",   "16QAM",     "32QAM",     "64QAM",
    "128QAM",    "256QAM",    "AM-SSB-WC", "AM-SSB-SC", "AM-DSB-WC",
    "AM-DSB-SC", "FM",        "GMSK",      "OQPSK"};

struct H5File {
  hid_t id = -1;
  explicit H5File(const std::string& path) {
    if (!fs::exists(path)) throw IoError("no such file: " + path);
    H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr);  // errors become exceptions
    id = H5Fopen(path.c_str(), H5F_ACC_RDONLY, H5P_DEFAULT);
    if (id < 0) throw SchemaError("not an HDF5 file: " + path);
  }
  ~H5File() {
    if (id >= 0) H5Fclose(id);
  }
};

struct H5Dataset {
  hid_t id = -1;
  H5Dataset(hid_t file, const char* name) {
    id = H5Dopen2(file, name, H5P_DEFAULT);
    if (id < 0)
      throw SchemaError(std::string("missing HDF5 dataset: ") + name);
  }
  ~H5Dataset() {
    if (id >= 0) H5Dclose(id);
  }
  std::vector<hsize_t> dims() const {
    hid_t space = H5Dget_space(id);
    const int rank = H5Sget_simple_extent_ndims(space);
    std::vector<hsize_t> d(rank);
    H5Sget_simple_extent_dims(space, d.data(), nullptr);
    H5Sclose(space);
    return d;
  }
};

}  // namespace

Dataset import_radioml(const std::string& path, Index max_slices) {
  H5File file(path);
  H5Dataset dx(file.id, "X"), dy(file.id, "Y"), dz(file.id, "Z");

  const auto xd = dx.dims();
  if (xd.size() != 3 || xd[1] != 1024 || xd[2] != 2)
    throw SchemaError("X must have shape [N,1024,2]");
  const auto yd = dy.dims();
  if (yd.size() != 2 || yd[1] != 24 || yd[0] != xd[0])
    throw SchemaError("Y must have shape [N,24]");
  const auto zd = dz.dims();
  if (zd.empty() || zd[0] != xd[0]) throw SchemaError("Z must have N rows");

  const Index total = static_cast<Index>(xd[0]);
  if (total == 0) throw SchemaError("empty RadioML archive");
  const Index n = max_slices > 0 ? std::min(max_slices, total) : total;

  Dataset ds;
  ds.kind = DatasetKind::Modulation;
  ds.classes = kRadioMlClasses;
  ds.n_i = 1024;
  ds.seed = 0;

  std::vector<float> xbuf(static_cast<std::size_t>(n) * 1024 * 2);
  std::vector<float> ybuf(static_cast<std::size_t>(n) * 24);
  std::vector<double> zbuf(static_cast<std::size_t>(n) *
                           (zd.size() > 1 ? zd[1] : 1));
  {
    // hyperslab over the first n records
    hsize_t start[3] = {0, 0, 0};
    hsize_t count[3] = {static_cast<hsize_t>(n), 1024, 2};
    hid_t space = H5Dget_space(dx.id);
    H5Sselect_hyperslab(space, H5S_SELECT_SET, start, nullptr, count, nullptr);
    hid_t mem = H5Screate_simple(3, count, nullptr);
    if (H5Dread(dx.id, H5T_NATIVE_FLOAT, mem, space, H5P_DEFAULT,
                xbuf.data()) < 0)
      throw SchemaError("failed to read X");
    H5Sclose(mem);
    H5Sclose(space);
  }
  {
    hsize_t start[2] = {0, 0};
    hsize_t count[2] = {static_cast<hsize_t>(n), 24};
    hid_t space = H5Dget_space(dy.id);
    H5Sselect_hyperslab(space, H5S_SELECT_SET, start, nullptr, count, nullptr);
    hid_t mem = H5Screate_simple(2, count, nullptr);
    if (H5Dread(dy.id, H5T_NATIVE_FLOAT, mem, space, H5P_DEFAULT,
                ybuf.data()) < 0)
      throw SchemaError("failed to read Y");
    H5Sclose(mem);
    H5Sclose(space);
  }
  {
    std::vector<hsize_t> count(zd.size());
    count[0] = static_cast<hsize_t>(n);
    for (std::size_t i = 1; i < zd.size(); ++i) count[i] = zd[i];
    std::vector<hsize_t> start(zd.size(), 0);
    hid_t space = H5Dget_space(dz.id);
    H5Sselect_hyperslab(space, H5S_SELECT_SET, start.data(), nullptr,
                        count.data(), nullptr);
    hid_t mem = H5Screate_simple(static_cast<int>(count.size()), count.data(),
                                 nullptr);
    if (H5Dread(dz.id, H5T_NATIVE_DOUBLE, mem, space, H5P_DEFAULT,
                zbuf.data()) < 0)
      throw SchemaError("failed to read Z");
    H5Sclose(mem);
    H5Sclose(space);
  }

  const std::size_t zstride = zd.size() > 1 ? zd[1] : 1;
  for (Index r = 0; r < n; ++r) {
    Slice s;
    s.iq = CVec(1024);
    for (Index i = 0; i < 1024; ++i) {
      const std::size_t base = (static_cast<std::size_t>(r) * 1024 + i) * 2;
      s.iq[i] = Cplx{xbuf[base], xbuf[base + 1]};
    }
    int label = -1;
    float best = -1.0f;
    for (int c = 0; c < 24; ++c) {
      const float v = ybuf[static_cast<std::size_t>(r) * 24 + c];
      if (v > best) {
        best = v;
        label = c;
      }
    }
    if (best <= 0.0f) throw SchemaError("Y row is not one-hot");
    s.label = label;
    s.meta.snr_db = zbuf[static_cast<std::size_t>(r) * zstride];
    ds.slices.push_back(std::move(s));
  }
  return ds;
}

std::string bits_to_hex(const std::vector<std::uint8_t>& bits) {
  static const char* hexd = "0123456789abcdef";
  std::string out;
  out.reserve((bits.size() + 3) / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int v = 0;
    for (std::size_t b = 0; b < 4; ++b)
      v = (v << 1) | (i + b < bits.size() ? (bits[i + b] & 1) : 0);
    out.push_back(hexd[v]);
  }
  return out;
}

std::vector<std::uint8_t> hex_to_bits(const std::string& hex, Index nbits) {
  std::vector<std::uint8_t> bits;
  bits.reserve(hex.size() * 4);
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else
      throw SchemaError("bad hex digit in bit string");
    for (int b = 3; b >= 0; --b) bits.push_back((v >> b) & 1);
  }
  if (static_cast<Index>(bits.size()) < nbits)
    throw SchemaError("bit string shorter than declared");
  bits.resize(nbits);
  return bits;
}

namespace {

json fingerprint_to_json(const DeviceFingerprint& fp) {
  json j;
  json fir = json::array();
  for (Index i = 0; i < fp.impairment_fir.size(); ++i)
    fir.push_back({fp.impairment_fir[i].real(), fp.impairment_fir[i].imag()});
  j["fir"] = fir;
  j["gain_mismatch"] = fp.gain_mismatch;
  j["phase_skew"] = fp.phase_skew;
  j["cfo"] = fp.cfo;
  j["device_id"] = fp.device_id;
  return j;
}

DeviceFingerprint fingerprint_from_json(const json& j) {
  DeviceFingerprint fp;
  const auto& fir = j.at("fir");
  fp.impairment_fir = CVec(fir.size());
  for (std::size_t i = 0; i < fir.size(); ++i)
    fp.impairment_fir[i] = Cplx{fir[i][0].get<double>(),
                                fir[i][1].get<double>()};
  fp.gain_mismatch = j.at("gain_mismatch").get<double>();
  fp.phase_skew = j.at("phase_skew").get<double>();
  fp.cfo = j.at("cfo").get<double>();
  fp.device_id = j.at("device_id").get<int>();
  return fp;
}

std::string slice_filename(Index i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "slice_%06lld.iqf",
                static_cast<long long>(i));
  return buf;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = 1;
  manifest["kind"] =
      ds.kind == DatasetKind::Modulation ? "modulation" : "fingerprint";
  manifest["classes"] = ds.classes;
  manifest["n_i"] = ds.n_i;
  manifest["seed"] = ds.seed;
  manifest["samples_per_symbol"] = ds.samples_per_symbol;
  manifest["pulse"] =
      ds.pulse == dsp::PulseShape::Rectangular ? "rect" : "rrc";
  manifest["rrc_rolloff"] = ds.rrc_rolloff;
  manifest["base_scheme"] = dsp::to_string(ds.base_scheme.kind);

  json slices = json::array();
  for (Index i = 0; i < static_cast<Index>(ds.slices.size()); ++i) {
    const Slice& s = ds.slices[i];
    json js;
    js["file"] = slice_filename(i);
    js["label"] = s.label;
    js["snr_db"] = s.meta.snr_db;
    js["seed"] = s.meta.seed;
    js["nbits"] = s.meta.tx_bits.size();
    js["bits"] = bits_to_hex(s.meta.tx_bits);
    js["device"] = s.meta.device_id;
    slices.push_back(js);
    dsp::write_iqf(dir + "/" + slice_filename(i), s.iq);
  }
  manifest["slices"] = slices;

  json fps = json::array();
  for (const auto& fp : ds.fingerprints) fps.push_back(fingerprint_to_json(fp));
  manifest["fingerprints"] = fps;

  std::ofstream f(dir + "/manifest.json", std::ios::trunc);
  if (!f) throw IoError("cannot write manifest in " + dir);
  f << manifest.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream f(dir + "/manifest.json");
  if (!f) throw IoError("no manifest.json in " + dir);
  json manifest;
  try {
    f >> manifest;
  } catch (const json::exception& e) {
    throw SchemaError("bad manifest: " + std::string(e.what()));
  }
  if (manifest.value("version", -1) != 1)
    throw SchemaError("unsupported dataset version");

  Dataset ds;
  ds.kind = manifest.at("kind").get<std::string>() == "modulation"
                ? DatasetKind::Modulation
                : DatasetKind::Fingerprint;
  ds.classes = manifest.at("classes").get<std::vector<std::string>>();
  ds.n_i = manifest.at("n_i").get<Index>();
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  ds.samples_per_symbol = manifest.value("samples_per_symbol", 1);
  ds.pulse = manifest.value("pulse", "rect") == std::string("rect")
                 ? dsp::PulseShape::Rectangular
                 : dsp::PulseShape::RootRaisedCosine;
  ds.rrc_rolloff = manifest.value("rrc_rolloff", 0.35);
  ds.base_scheme =
      dsp::scheme_from_name(manifest.value("base_scheme", "qpsk"));

  for (const auto& js : manifest.at("slices")) {
    Slice s;
    s.iq = dsp::read_iqf(dir + "/" + js.at("file").get<std::string>());
    if (s.iq.size() != ds.n_i)
      throw SchemaError("slice length mismatch in " + dir);
    s.label = js.at("label").get<int>();
    s.meta.snr_db = js.at("snr_db").get<double>();
    s.meta.seed = js.at("seed").get<std::uint64_t>();
    s.meta.device_id = js.value("device", -1);
    const Index nbits = js.at("nbits").get<Index>();
    if (nbits > 0)
      s.meta.tx_bits = hex_to_bits(js.at("bits").get<std::string>(), nbits);
    ds.slices.push_back(std::move(s));
  }
  for (const auto& jf : manifest.at("fingerprints"))
    ds.fingerprints.push_back(fingerprint_from_json(jf));
  return ds;
}

std::vector<nn::LabeledExample> as_examples(const Dataset& ds) {
  std::vector<nn::LabeledExample> ex;
  ex.reserve(ds.slices.size());
  for (const auto& s : ds.slices) ex.push_back({&s.iq, s.label});
  return ex;
}

}  // namespace wadv::data
