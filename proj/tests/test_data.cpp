#include <doctest.h>
#include <hdf5.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "wadv/data.hpp"

using namespace wadv;
using namespace wadv::data;

namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("tmp_") += name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}
}  // namespace

TEST_CASE("gen_modulation_dataset: balanced counts across the grid") {
  const auto ds = gen_modulation_dataset({"bpsk", "qpsk", "psk8", "qam16"},
                                         {10.0, 20.0}, 100, 256, 42);
  CHECK(ds.slices.size() == 4 * 2 * 100);
  const auto counts = ds.class_counts();
  for (int c : counts) CHECK(c == 200);
  CHECK(ds.classes.size() == 4);
}

TEST_CASE("gen_modulation_dataset: high-SNR slice loops back to stored bits") {
  const auto ds = gen_modulation_dataset({"bpsk"}, {30.0}, 5, 512, 7);
  for (const auto& s : ds.slices) {
    CHECK(dsp::measure_ber(s.meta.tx_bits, s.iq, ds.scheme_for(s.label)) ==
          0.0);
  }
}

TEST_CASE("gen_modulation_dataset: same seed gives byte-identical files") {
  TempDir d1("modds1"), d2("modds2");
  const auto a = gen_modulation_dataset({"bpsk", "qpsk"}, {20.0}, 10, 128, 9);
  const auto b = gen_modulation_dataset({"bpsk", "qpsk"}, {20.0}, 10, 128, 9);
  save_dataset(a, d1.path.string());
  save_dataset(b, d2.path.string());
  CHECK(file_bytes(d1.path / "manifest.json") ==
        file_bytes(d2.path / "manifest.json"));
  CHECK(file_bytes(d1.path / "slice_000000.iqf") ==
        file_bytes(d2.path / "slice_000000.iqf"));
}

TEST_CASE("dataset save/load round trip is lossless") {
  TempDir dir("roundtrip");
  const auto ds = gen_modulation_dataset({"qam16"}, {15.0}, 8, 64, 3);
  save_dataset(ds, dir.path.string());
  const auto back = load_dataset(dir.path.string());
  REQUIRE(back.slices.size() == ds.slices.size());
  CHECK(back.classes == ds.classes);
  CHECK(back.n_i == ds.n_i);
  for (std::size_t i = 0; i < ds.slices.size(); ++i) {
    CHECK((back.slices[i].iq - ds.slices[i].iq).norm() == 0.0);
    CHECK(back.slices[i].meta.tx_bits == ds.slices[i].meta.tx_bits);
    CHECK(back.slices[i].label == ds.slices[i].label);
  }
}

TEST_CASE("gen_fingerprint_dataset: metadata and invariant bounds") {
  const auto ds = gen_fingerprint_dataset(5, 20, 288, 11);
  CHECK(ds.classes.size() == 5);
  CHECK(ds.slices.size() == 100);
  REQUIRE(ds.fingerprints.size() == 5);
  for (const auto& fp : ds.fingerprints) {
    CVec dev = fp.impairment_fir;
    dev[0] -= 1.0;
    for (Index i = 0; i < dev.size(); ++i) CHECK(std::abs(dev[i]) <= 0.2);
    CHECK(std::abs(fp.gain_mismatch) <= 0.1);
    CHECK(std::abs(fp.phase_skew) <= 0.1);
    CHECK(std::abs(fp.cfo) <= 1e-3);
  }
  // distinct devices actually differ
  CHECK((ds.fingerprints[0].impairment_fir - ds.fingerprints[1].impairment_fir)
            .norm() > 1e-3);
}

TEST_CASE("gen_fingerprint_dataset: fingerprints round-trip through save/load") {
  TempDir dir("fpds");
  const auto ds = gen_fingerprint_dataset(3, 4, 96, 13);
  save_dataset(ds, dir.path.string());
  const auto back = load_dataset(dir.path.string());
  REQUIRE(back.fingerprints.size() == 3);
  for (int d = 0; d < 3; ++d) {
    CHECK((back.fingerprints[d].impairment_fir -
           ds.fingerprints[d].impairment_fir)
              .norm() == 0.0);
    CHECK(back.fingerprints[d].cfo == ds.fingerprints[d].cfo);
  }
}

TEST_CASE("apply_fingerprint: identity fingerprint is a no-op") {
  DeviceFingerprint fp;
  Rng rng(3);
  CVec x(64);
  for (Index i = 0; i < 64; ++i) x[i] = rng.cnormal(1.0);
  const CVec y = apply_fingerprint(x, fp);
  CHECK((y - x).norm() < 1e-12);
}

TEST_CASE("split: stratified, exact when divisible, disjoint, deterministic") {
  const auto ds = gen_modulation_dataset({"bpsk", "qpsk"}, {20.0}, 50, 64, 5);
  const auto [test, opt] = split(ds, 0.5, 0.5, 77);
  const auto tc = test.class_counts(), oc = opt.class_counts();
  CHECK(tc[0] == 25);
  CHECK(tc[1] == 25);
  CHECK(oc[0] == 25);
  CHECK(oc[1] == 25);

  // no slice appears in both halves (identified by its generation seed)
  std::set<std::uint64_t> seen;
  for (const auto& s : test.slices) seen.insert(s.meta.seed);
  for (const auto& s : opt.slices) CHECK(seen.count(s.meta.seed) == 0);

  const auto [test2, opt2] = split(ds, 0.5, 0.5, 77);
  for (std::size_t i = 0; i < test.slices.size(); ++i)
    CHECK(test.slices[i].meta.seed == test2.slices[i].meta.seed);
}

TEST_CASE("split: odd counts are within one slice of the target") {
  const auto ds = gen_modulation_dataset({"bpsk"}, {20.0}, 25, 64, 5);
  const auto [test, opt] = split(ds, 0.5, 0.5, 1);
  CHECK(std::abs(static_cast<int>(test.slices.size()) - 12) <= 1);
  CHECK(test.slices.size() + opt.slices.size() == 25);
}

TEST_CASE("split: empty result is an error") {
  const auto ds = gen_modulation_dataset({"bpsk"}, {20.0}, 3, 64, 5);
  CHECK_THROWS_AS(split(ds, 0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(ds, 0.6, 0.6, 1), std::invalid_argument);
}

namespace {

void write_radioml_fixture(const std::string& path, int n) {
  const hid_t file =
      H5Fcreate(path.c_str(), H5F_ACC_TRUNC, H5P_DEFAULT, H5P_DEFAULT);
  REQUIRE(file >= 0);
  {
    hsize_t dims[3] = {static_cast<hsize_t>(n), 1024, 2};
    hid_t space = H5Screate_simple(3, dims, nullptr);
    hid_t dset = H5Dcreate2(file, "X", H5T_NATIVE_FLOAT, space, H5P_DEFAULT,
                            H5P_DEFAULT, H5P_DEFAULT);
    std::vector<float> x(static_cast<std::size_t>(n) * 1024 * 2);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = static_cast<float>(std::sin(0.01 * static_cast<double>(i)));
    H5Dwrite(dset, H5T_NATIVE_FLOAT, H5S_ALL, H5S_ALL, H5P_DEFAULT, x.data());
    H5Dclose(dset);
    H5Sclose(space);
  }
  {
    hsize_t dims[2] = {static_cast<hsize_t>(n), 24};
    hid_t space = H5Screate_simple(2, dims, nullptr);
    hid_t dset = H5Dcreate2(file, "Y", H5T_NATIVE_INT, space, H5P_DEFAULT,
                            H5P_DEFAULT, H5P_DEFAULT);
    std::vector<int> y(static_cast<std::size_t>(n) * 24, 0);
    for (int r = 0; r < n; ++r) y[static_cast<std::size_t>(r) * 24 + r % 24] = 1;
    H5Dwrite(dset, H5T_NATIVE_INT, H5S_ALL, H5S_ALL, H5P_DEFAULT, y.data());
    H5Dclose(dset);
    H5Sclose(space);
  }
  {
    hsize_t dims[2] = {static_cast<hsize_t>(n), 1};
    hid_t space = H5Screate_simple(2, dims, nullptr);
    hid_t dset = H5Dcreate2(file, "Z", H5T_NATIVE_INT, space, H5P_DEFAULT,
                            H5P_DEFAULT, H5P_DEFAULT);
    std::vector<int> z(n);
    for (int r = 0; r < n; ++r) z[r] = 2 * r - 20;
    H5Dwrite(dset, H5T_NATIVE_INT, H5S_ALL, H5S_ALL, H5P_DEFAULT, z.data());
    H5Dclose(dset);
    H5Sclose(space);
  }
  H5Fclose(file);
}

}  // namespace

TEST_CASE("import_radioml: fixture with 10 records") {
  const std::string path = "tmp_radioml_fixture.h5";
  write_radioml_fixture(path, 10);
  const auto ds = import_radioml(path);
  CHECK(ds.classes.size() == 24);
  CHECK(ds.n_i == 1024);
  REQUIRE(ds.slices.size() == 10);
  for (int r = 0; r < 10; ++r) {
    CHECK(ds.slices[r].label == r % 24);          // one-hot recovered
    CHECK(ds.slices[r].meta.snr_db == 2 * r - 20);  // SNR preserved
    CHECK(ds.slices[r].iq.size() == 1024);
  }
  const auto limited = import_radioml(path, 4);
  CHECK(limited.slices.size() == 4);
  fs::remove(path);
}

TEST_CASE("import_radioml: missing and malformed files are structured errors") {
  CHECK_THROWS_AS(import_radioml("no_such_file.h5"), IoError);
  const std::string path = "tmp_not_hdf5.h5";
  std::ofstream(path) << "this is not hdf5";
  CHECK_THROWS_AS(import_radioml(path), SchemaError);
  fs::remove(path);
}

TEST_CASE("bits hex round trip") {
  const auto bits = dsp::random_bits(97, 5);
  const auto hex = bits_to_hex(bits);
  const auto back = hex_to_bits(hex, 97);
  CHECK(back == bits);
}

TEST_CASE("filter_class keeps only the requested label") {
  const auto ds = gen_modulation_dataset({"bpsk", "qpsk"}, {20.0}, 5, 64, 2);
  const auto only = filter_class(ds, 1);
  CHECK(only.slices.size() == 5);
  for (const auto& s : only.slices) CHECK(s.label == 1);
}
