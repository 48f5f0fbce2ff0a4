#include "wadv/iqfile.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace wadv::dsp {

namespace {
constexpr char kMagic[8] = {'I', 'Q', 'F', '1', 0, 0, 0, 0};
}

void write_iqf(const std::string& path, const CVec& x) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(kMagic, 8);
  const std::uint32_t n = static_cast<std::uint32_t>(x.size());
  f.write(reinterpret_cast<const char*>(&n), 4);
  std::vector<float> buf(2 * x.size());
  for (Index i = 0; i < x.size(); ++i) {
    buf[2 * i] = static_cast<float>(x[i].real());
    buf[2 * i + 1] = static_cast<float>(x[i].imag());
  }
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!f) throw IoError("short write: " + path);
}

CVec read_iqf(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw SchemaError("not an IQF1 file: " + path);
  std::uint32_t n = 0;
  f.read(reinterpret_cast<char*>(&n), 4);
  if (!f) throw SchemaError("truncated IQF1 header: " + path);
  std::vector<float> buf(2ull * n);
  f.read(reinterpret_cast<char*>(buf.data()),
         static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!f) throw SchemaError("truncated IQF1 payload: " + path);
  CVec x(n);
  for (std::uint32_t i = 0; i < n; ++i)
    x[i] = Cplx{buf[2 * i], buf[2 * i + 1]};
  return x;
}

void write_iqf_sidecar(const std::string& path, const IqSidecar& meta) {
  nlohmann::json j;
  j["scheme"] = meta.scheme;
  j["sample_rate_tag"] = meta.sample_rate_tag;
  j["seed"] = meta.seed;
  j["label"] = meta.label;
  std::ofstream f(path + ".json", std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path + ".json");
  f << j.dump(2) << "\n";
}

IqSidecar read_iqf_sidecar(const std::string& path) {
  std::ifstream f(path + ".json");
  if (!f) throw IoError("cannot open: " + path + ".json");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("bad sidecar JSON: " + std::string(e.what()));
  }
  IqSidecar m;
  m.scheme = j.value("scheme", "");
  m.sample_rate_tag = j.value("sample_rate_tag", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.label = j.value("label", "");
  return m;
}

}  // namespace wadv::dsp
