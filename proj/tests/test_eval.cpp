#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "wadv/eval.hpp"

using namespace wadv;
using namespace wadv::eval;

namespace fs = std::filesystem;

namespace {

// 2-class dataset + a trained-enough linear model for fast eval tests
struct Fixture {
  data::Dataset train, test;
  nn::Classifier model;

  Fixture() {
    auto ds = data::gen_modulation_dataset({"bpsk", "qpsk"}, {20.0}, 80, 64,
                                           1234);
    auto parts = data::split(ds, 0.5, 0.5, 5);
    test = std::move(parts.first);
    train = std::move(parts.second);
    model = nn::make_classifier(
        {nn::conv1d(8, 5), nn::relu(), nn::maxpool(2), nn::dense(16),
         nn::relu(), nn::dense(2), nn::softmax()},
        {"bpsk", "qpsk"}, 64, 3);
    nn::TrainHyper hyper;
    hyper.lr = 3e-3;
    hyper.epochs = 30;
    hyper.batch = 16;
    hyper.seed = 9;
    nn::train(model, data::as_examples(train), hyper);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("confusion_matrix: rows normalized, accuracy matches loop oracle") {
  auto& f = fixture();
  const auto r = confusion_matrix(f.model, f.test);
  for (Index row = 0; row < r.matrix.rows(); ++row)
    CHECK(r.matrix.row(row).sum() == doctest::Approx(1.0));

  // independent per-slice loop oracle
  Index correct = 0;
  for (const auto& s : f.test.slices) {
    const RVec p = nn::forward(f.model, s.iq);
    Index best = 0;
    for (Index c = 1; c < p.size(); ++c)
      if (p[c] > p[best]) best = c;
    correct += best == s.label;
  }
  const double oracle_acc =
      static_cast<double>(correct) / static_cast<double>(f.test.slices.size());
  CHECK(r.accuracy == doctest::Approx(oracle_acc));
  CHECK(r.support[0] + r.support[1] ==
        static_cast<int>(f.test.slices.size()));
}

TEST_CASE("confusion_matrix: trained fixture model is well above chance") {
  auto& f = fixture();
  const auto r = confusion_matrix(f.model, f.test);
  CHECK(r.accuracy > 0.8);  // BPSK vs QPSK at 20 dB separates easily
}

TEST_CASE("run_attack_eval: zero strategy reproduces clean accuracy exactly") {
  auto& f = fixture();
  whitebox::AttackArtifact a;
  a.kind = whitebox::AttackKind::Jamming;
  a.phi = CVec::Zero(16);
  a.eps = 0.0;
  a.ber_max = 1e-2;
  a.e_max = 1e-9;
  a.fading = "none";
  a.scheme_name = "bpsk";
  a.source_class = 0;
  a.target_class = -1;
  a.n_i = 64;
  a.problem_digest = "zerotest";
  EvalOptions opt;
  opt.seeds = {1, 2, 3};
  const auto rep = run_attack_eval(f.model, a, f.test, opt);
  CHECK(rep.attacked_accuracy == doctest::Approx(rep.clean_accuracy));
  CHECK(rep.fooling_rate == doctest::Approx(1.0 - rep.clean_accuracy));
  // every attacked slice carries an audit record
  CHECK(rep.audits.size() == 3 * 40);
  for (const auto& au : rep.audits) {
    CHECK(au.energy == 0.0);
    CHECK(au.box_ok);
    CHECK(au.energy_ok);
  }
}

TEST_CASE("run_attack_eval: strong jamming hurts accuracy and is audited") {
  auto& f = fixture();
  whitebox::AttackArtifact a;
  a.kind = whitebox::AttackKind::Jamming;
  a.phi = CVec(16);  // loud random jammer, way over any BER budget
  {
    Rng rng(4);
    for (Index i = 0; i < 16; ++i) a.phi[i] = rng.cnormal(4.0);
  }
  a.eps = 8.0;
  a.ber_max = 1e-2;
  a.e_max = dsp::energy(a.phi) + 1.0;
  a.fading = "none";
  a.scheme_name = "bpsk";
  a.source_class = 0;
  a.target_class = -1;
  a.n_i = 64;
  a.problem_digest = "hugejam";
  EvalOptions opt;
  opt.seeds = {1, 2};
  const auto rep = run_attack_eval(f.model, a, f.test, opt);
  CHECK(rep.attacked_accuracy < rep.clean_accuracy);
  bool any_ber_flag = false;
  for (const auto& au : rep.audits) any_ber_flag |= !au.ber_ok;
  CHECK(any_ber_flag);  // the audit catches the BER violation
}

TEST_CASE("baseline_replay: transparent channel equals clean accuracy") {
  auto& f = fixture();
  EvalOptions opt;
  opt.seeds = {1, 2, 3};
  const auto rep =
      baseline_replay(f.model, f.test, dsp::ChannelModel{}, opt);
  CHECK(rep.fooling_rate == doctest::Approx(rep.clean_accuracy));
}

TEST_CASE("baseline_replay: Rayleigh channel strictly lowers the fooling rate") {
  auto& f = fixture();
  EvalOptions opt;
  opt.seeds = {1, 2, 3, 4, 5};
  const auto transparent =
      baseline_replay(f.model, f.test, dsp::ChannelModel{}, opt);
  const auto faded = baseline_replay(
      f.model, f.test, dsp::rayleigh_channel(4, 0.01, 0.0), opt);
  CHECK(faded.fooling_rate < transparent.fooling_rate);
  CHECK(faded.per_class_rates.size() == 2);  // per-device rates recorded
}

TEST_CASE("baseline_fgsm: eps zero changes nothing") {
  auto& f = fixture();
  EvalOptions opt;
  opt.seeds = {1};
  opt.max_slices_per_class = 6;
  const auto rep = baseline_fgsm(f.model, f.test, 0.0, "none", true, opt);
  CHECK(rep.attacked_accuracy == doctest::Approx(rep.clean_accuracy));
}

TEST_CASE("baseline_fgsm: in-sample attack is effective") {
  auto& f = fixture();
  EvalOptions opt;
  opt.seeds = {1};
  opt.max_slices_per_class = 8;
  const auto rep = baseline_fgsm(f.model, f.test, 0.3, "none", true, opt);
  CHECK(rep.attacked_accuracy < rep.clean_accuracy);
}

TEST_CASE("report JSON round trip is byte-identical") {
  auto& f = fixture();
  whitebox::AttackArtifact a;
  a.kind = whitebox::AttackKind::Jamming;
  a.phi = CVec::Constant(8, Cplx{0.05, -0.02});
  a.eps = 0.05;
  a.ber_max = 1e-2;
  a.e_max = 1.0;
  a.fading = "none";
  a.scheme_name = "bpsk";
  a.source_class = 0;
  a.target_class = -1;
  a.n_i = 64;
  a.problem_digest = "rt";
  EvalOptions opt;
  opt.seeds = {7};
  const auto rep = run_attack_eval(f.model, a, f.test, opt);
  const std::string text = report_to_json(rep);
  const auto back = report_from_json(text);
  CHECK(report_to_json(back) == text);
}

TEST_CASE("reports are reproducible: same config + seeds, same bytes") {
  auto& f = fixture();
  whitebox::AttackArtifact a;
  a.kind = whitebox::AttackKind::Jamming;
  a.phi = CVec::Constant(8, Cplx{0.03, 0.01});
  a.eps = 0.05;
  a.ber_max = 1e-2;
  a.e_max = 1.0;
  a.fading = "high";
  a.scheme_name = "qpsk";
  a.source_class = 1;
  a.target_class = -1;
  a.n_i = 64;
  a.problem_digest = "repro";
  EvalOptions opt;
  opt.seeds = {11, 12};
  const auto r1 = run_attack_eval(f.model, a, f.test, opt);
  const auto r2 = run_attack_eval(f.model, a, f.test, opt);
  CHECK(report_to_json(r1) == report_to_json(r2));
}

TEST_CASE("emit_report: deterministic filenames, CSV dims, SVG plots") {
  auto& f = fixture();
  EvalReport rep;
  rep.kind = "attack";
  rep.config_digest = "cafef00dcafef00d";
  rep.classes = {"bpsk", "qpsk"};
  rep.confusion = Mat::Identity(2, 2);
  rep.attacked_confusion = Mat::Constant(2, 2, 0.5);
  rep.fooling.cells = Mat::Constant(2, 2, 0.25);
  rep.fooling.counts = Eigen::MatrixXi::Constant(2, 2, 10);
  rep.sweep.push_back({0.0, 64, 0.9, 0.01});
  rep.sweep.push_back({0.1, 64, 0.5, 0.02});

  const std::string dir = "tmp_emit";
  fs::remove_all(dir);
  const auto files = emit_report(rep, {"json", "csv", "svg"}, dir);
  CHECK(std::find(files.begin(), files.end(),
                  dir + "/report-cafef00dcafef00d.json") != files.end());

  // CSV row/col counts match the matrix dims
  std::ifstream csv(dir + "/confusion-cafef00dcafef00d.csv");
  REQUIRE(csv.good());
  std::string line;
  int rows = 0, cols = 0;
  while (std::getline(csv, line)) {
    if (rows == 0) cols = static_cast<int>(std::count(line.begin(), line.end(), ','));
    ++rows;
  }
  CHECK(rows == 3);  // header + 2 class rows
  CHECK(cols == 2);

  CHECK(fs::exists(dir + "/fooling-cafef00dcafef00d.svg"));
  CHECK(fs::exists(dir + "/sweep-cafef00dcafef00d.svg"));
  fs::remove_all(dir);
}
