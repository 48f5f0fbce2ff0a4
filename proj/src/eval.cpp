#include "wadv/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wadv::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1)) /
         std::sqrt(static_cast<double>(v.size()));
}

Mat row_normalize(const Mat& counts) {
  Mat out = counts;
  for (Index r = 0; r < out.rows(); ++r) {
    const double s = out.row(r).sum();
    if (s > 0.0) out.row(r) /= s;
  }
  return out;
}

std::vector<Index> class_slice_indices(const data::Dataset& ds, int label,
                                       int cap) {
  std::vector<Index> idx;
  for (Index i = 0; i < static_cast<Index>(ds.slices.size()); ++i)
    if (ds.slices[i].label == label) idx.push_back(i);
  if (cap > 0 && static_cast<int>(idx.size()) > cap) idx.resize(cap);
  return idx;
}

bool box_ok(const CVec& phi, double eps) {
  for (Index i = 0; i < phi.size(); ++i)
    if (std::abs(phi[i].real()) > eps + 1e-12 ||
        std::abs(phi[i].imag()) > eps + 1e-12)
      return false;
  return true;
}

}  // namespace

ConfusionResult confusion_matrix(const nn::Classifier& model,
                                 const data::Dataset& ds) {
  if (ds.slices.empty()) throw std::invalid_argument("empty dataset");
  const Index nc = model.num_classes();
  const Index n = static_cast<Index>(ds.slices.size());
  std::vector<Index> preds(n);
  parallel_for(n, [&](Index i) {
    preds[i] = nn::predict(model, ds.slices[i].iq);
  });
  Mat counts = Mat::Zero(nc, nc);
  Index correct = 0;
  for (Index i = 0; i < n; ++i) {
    counts(ds.slices[i].label, preds[i]) += 1.0;
    correct += preds[i] == ds.slices[i].label;
  }
  ConfusionResult r;
  r.matrix = row_normalize(counts);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  r.support.assign(nc, 0);
  for (const auto& s : ds.slices) r.support[s.label]++;
  return r;
}

EvalReport run_attack_eval(const nn::Classifier& model,
                           const whitebox::AttackArtifact& artifact,
                           const data::Dataset& test_set,
                           const EvalOptions& opt) {
  if (artifact.n_i != test_set.n_i || artifact.n_i != model.input_len)
    throw std::invalid_argument("artifact/model/dataset length mismatch");
  if (static_cast<Index>(test_set.classes.size()) != model.num_classes())
    throw std::invalid_argument("artifact/model class count mismatch");

  const Index nc = model.num_classes();
  const bool jamming = artifact.kind == whitebox::AttackKind::Jamming;
  const bool external = !jamming && artifact.source_class < 0;
  const dsp::ModulationScheme scheme =
      external ? test_set.scheme_for(0)
               : test_set.scheme_for(artifact.source_class);

  double noise_var = 0.0;
  if (!jamming)
    noise_var = dsp::noise_variance_for_esn0(scheme, opt.aws_noise_snr_db);
  const dsp::ChannelModel chan =
      whitebox::adversary_channel(artifact.fading, noise_var);

  // payload/legit slice pool
  std::vector<Index> pool;
  std::vector<CVec> external_payloads;
  std::vector<std::vector<std::uint8_t>> external_bits;
  if (!external) {
    pool = class_slice_indices(test_set, artifact.source_class,
                               opt.max_slices_per_class);
    if (pool.empty())
      throw std::invalid_argument("no test slices for the attacked class");
  } else {
    const int count =
        opt.max_slices_per_class > 0 ? opt.max_slices_per_class : 100;
    const Index nsym = test_set.n_i / scheme.samples_per_symbol;
    for (int i = 0; i < count; ++i) {
      external_bits.push_back(dsp::random_bits(
          nsym * scheme.bits_per_symbol(), mix_seed(0xE27e0000u, i)));
      external_payloads.push_back(dsp::modulate(external_bits.back(), scheme));
    }
    pool.resize(count);
    std::iota(pool.begin(), pool.end(), Index{0});
  }
  const Index npool = static_cast<Index>(pool.size());

  EvalReport rep;
  rep.kind = "attack";
  rep.seeds = opt.seeds;
  rep.classes = test_set.classes;
  rep.config_digest = artifact.problem_digest;

  // clean pass over the same slices (identity strategy, same channel draws
  // for synthesis so the no-attack baseline is exactly comparable)
  std::vector<double> acc_per_seed, fool_per_seed, clean_per_seed;
  Mat attacked_counts = Mat::Zero(nc, nc);
  Mat clean_counts = Mat::Zero(nc, nc);

  for (std::size_t sdx = 0; sdx < opt.seeds.size(); ++sdx) {
    const std::uint64_t seed = opt.seeds[sdx];
    std::vector<Index> pred(npool), clean_pred(npool);
    std::vector<ConstraintAudit> audits(npool);

    parallel_for(npool, [&](Index k) {
      const Index idx = pool[k];
      const CVec& base =
          external ? external_payloads[k] : test_set.slices[idx].iq;
      const auto& bits =
          external ? external_bits[k] : test_set.slices[idx].meta.tx_bits;
      const auto realization = dsp::sample_realization(
          chan, test_set.n_i, mix_seed(seed, 0xE7A10000u + k));

      CVec z, zc;
      double energy = 0.0;
      if (jamming) {
        const Index offset =
            Rng(mix_seed(seed, 0x0FF50000u + k)).uniform_index(test_set.n_i);
        const CVec xa = dsp::cyclic_tile(artifact.phi, test_set.n_i, offset);
        z = base + dsp::apply_channel(xa, realization);
        zc = base;
        energy = dsp::energy(artifact.phi);
      } else {
        const CVec xa = dsp::convolve_fir(base, artifact.phi);
        z = dsp::apply_channel(xa, realization);
        zc = dsp::apply_channel(base, realization);
        energy = dsp::energy(xa);
      }
      pred[k] = nn::predict(model, z);
      clean_pred[k] = nn::predict(model, zc);

      ConstraintAudit a;
      a.slice = idx;
      a.seed = seed;
      a.energy = energy;
      a.energy_ok = energy <= artifact.e_max + 1e-9;
      a.box_ok = box_ok(artifact.phi, artifact.eps);
      if (!bits.empty()) {
        a.ber = dsp::measure_ber(bits, z, scheme);
        a.ber_ok = a.ber <= artifact.ber_max;
      }
      audits[k] = a;
    });

    Index hit = 0, fooled = 0, clean_hit = 0;
    for (Index k = 0; k < npool; ++k) {
      const int label = external ? -1 : test_set.slices[pool[k]].label;
      if (!external) {
        attacked_counts(label, pred[k]) += 1.0;
        clean_counts(label, clean_pred[k]) += 1.0;
        hit += pred[k] == label;
        clean_hit += clean_pred[k] == label;
      }
      if (artifact.target_class >= 0)
        fooled += pred[k] == artifact.target_class;
      rep.audits.push_back(audits[k]);
    }
    if (!external) {
      acc_per_seed.push_back(static_cast<double>(hit) /
                             static_cast<double>(npool));
      clean_per_seed.push_back(static_cast<double>(clean_hit) /
                               static_cast<double>(npool));
    }
    if (artifact.target_class >= 0)
      fool_per_seed.push_back(static_cast<double>(fooled) /
                              static_cast<double>(npool));
  }

  rep.attacked_accuracy = mean_of(acc_per_seed);
  rep.attacked_accuracy_stderr = stderr_of(acc_per_seed);
  rep.clean_accuracy = mean_of(clean_per_seed);
  if (artifact.target_class >= 0) {
    rep.fooling_rate = mean_of(fool_per_seed);
    rep.fooling_rate_stderr = stderr_of(fool_per_seed);
  } else {
    rep.fooling_rate = 1.0 - rep.attacked_accuracy;
    rep.fooling_rate_stderr = rep.attacked_accuracy_stderr;
  }
  rep.attacked_confusion = row_normalize(attacked_counts);
  rep.confusion = row_normalize(clean_counts);
  return rep;
}

FoolingMatrix fooling_matrix_from_artifacts(
    const nn::Classifier& model,
    const std::vector<whitebox::AttackArtifact>& artifacts,
    const data::Dataset& test_set, const EvalOptions& opt) {
  const Index nc = model.num_classes();
  FoolingMatrix fm;
  fm.cells = Mat::Zero(nc, nc);
  fm.counts = Eigen::MatrixXi::Zero(nc, nc);
  for (const auto& a : artifacts) {
    if (a.target_class < 0 || a.source_class < 0)
      throw std::invalid_argument(
          "fooling matrix needs targeted per-(source,target) artifacts");
    const EvalReport r = run_attack_eval(model, a, test_set, opt);
    fm.cells(a.source_class, a.target_class) = r.fooling_rate;
    fm.counts(a.source_class, a.target_class) =
        static_cast<int>(r.audits.size());
  }
  return fm;
}

EvalReport baseline_replay(const nn::Classifier& model,
                           const data::Dataset& test_set,
                           const dsp::ChannelModel& adversary_channel,
                           const EvalOptions& opt) {
  const Index nc = model.num_classes();
  EvalReport rep;
  rep.kind = "replay";
  rep.seeds = opt.seeds;
  rep.classes = test_set.classes;
  {
    std::ostringstream os;
    os << "replay|" << test_set.seed << '|' << test_set.slices.size() << '|'
       << opt.seeds.size();
    rep.config_digest = digest_hex(os.str());
  }

  Mat counts = Mat::Zero(nc, nc);
  std::vector<double> fool_per_seed;
  std::vector<double> per_class_acc(nc, 0.0);
  std::vector<Index> per_class_n(nc, 0);

  const Index n = static_cast<Index>(test_set.slices.size());
  for (std::size_t sdx = 0; sdx < opt.seeds.size(); ++sdx) {
    const std::uint64_t seed = opt.seeds[sdx];
    std::vector<Index> pred(n);
    parallel_for(n, [&](Index i) {
      const auto realization = dsp::sample_realization(
          adversary_channel, test_set.n_i, mix_seed(seed, 0x2E91A000u + i));
      pred[i] =
          nn::predict(model, dsp::apply_channel(test_set.slices[i].iq,
                                                realization));
    });
    Index fooled = 0;
    for (Index i = 0; i < n; ++i) {
      const int d = test_set.slices[i].label;
      counts(d, pred[i]) += 1.0;
      const bool ok = pred[i] == d;
      fooled += ok;
      per_class_acc[d] += ok;
      per_class_n[d]++;
    }
    fool_per_seed.push_back(static_cast<double>(fooled) /
                            static_cast<double>(n));
  }
  rep.fooling_rate = mean_of(fool_per_seed);
  rep.fooling_rate_stderr = stderr_of(fool_per_seed);
  rep.attacked_confusion = row_normalize(counts);
  for (Index c = 0; c < nc; ++c)
    rep.per_class_rates.push_back(
        per_class_n[c] > 0 ? per_class_acc[c] / per_class_n[c] : 0.0);

  // clean reference: the same slices classified without the replay channel
  const auto clean = confusion_matrix(model, test_set);
  rep.clean_accuracy = clean.accuracy;
  rep.confusion = clean.matrix;
  return rep;
}

EvalReport baseline_fgsm(const nn::Classifier& model,
                         const data::Dataset& test_set, double eps,
                         const std::string& fading, bool in_sample,
                         const EvalOptions& opt) {
  const Index nc = model.num_classes();
  const dsp::ChannelModel chan = whitebox::adversary_channel(fading, 0.0);
  EvalReport rep;
  rep.kind = "fgsm";
  rep.seeds = opt.seeds;
  rep.classes = test_set.classes;
  {
    std::ostringstream os;
    os << "fgsm|" << eps << '|' << fading << '|' << in_sample << '|'
       << test_set.seed;
    rep.config_digest = digest_hex(os.str());
  }

  std::vector<Index> pool;
  for (Index c = 0; c < nc; ++c) {
    const auto idx = class_slice_indices(test_set, static_cast<int>(c),
                                         opt.max_slices_per_class);
    pool.insert(pool.end(), idx.begin(), idx.end());
  }
  const Index n = static_cast<Index>(pool.size());

  Mat counts = Mat::Zero(nc, nc);
  std::vector<double> acc_per_seed, clean_per_seed;
  for (std::size_t sdx = 0; sdx < opt.seeds.size(); ++sdx) {
    const std::uint64_t seed = opt.seeds[sdx];
    std::vector<Index> pred(n), clean_pred(n);
    parallel_for(n, [&](Index k) {
      const data::Slice& slice = test_set.slices[pool[k]];
      // per-slice gradient through one frozen channel draw
      whitebox::GwapProblem p;
      p.kind = whitebox::AttackKind::Jamming;
      p.n_i = test_set.n_i;
      p.class_weights = RVec::Zero(nc);
      p.scheme = test_set.scheme_for(slice.label);
      whitebox::GwapSlice gs;
      gs.legit = slice.iq;
      gs.tx_bits = slice.meta.tx_bits;
      gs.channel_seed = mix_seed(seed, 0xF65A0000u + k);
      gs.channel = dsp::sample_realization(chan, test_set.n_i,
                                           gs.channel_seed);
      gs.offset = 0;
      p.slices.push_back(std::move(gs));

      whitebox::AttackStrategy zero;
      zero.kind = whitebox::AttackKind::Jamming;
      zero.phi = CVec::Zero(test_set.n_i);
      const CVec g =
          whitebox::strategy_gradient(p, model, zero, slice.label, 0);
      CVec phi(test_set.n_i);
      for (Index i = 0; i < phi.size(); ++i) {
        // step against the true class, box-optimal signed move
        const double re = g[i].real() == 0.0 ? 0.0 : (g[i].real() > 0 ? -eps : eps);
        const double im = g[i].imag() == 0.0 ? 0.0 : (g[i].imag() > 0 ? -eps : eps);
        phi[i] = Cplx{re, im};
      }

      auto eval_realization = p.slices[0].channel;
      if (!in_sample)
        eval_realization = dsp::sample_realization(
            chan, test_set.n_i, mix_seed(seed, 0x0E1D0000u + k));
      const CVec z =
          slice.iq + dsp::apply_channel(phi, eval_realization);
      pred[k] = nn::predict(model, z);
      clean_pred[k] = nn::predict(model, slice.iq);
    });
    Index hit = 0, clean_hit = 0;
    for (Index k = 0; k < n; ++k) {
      const int label = test_set.slices[pool[k]].label;
      counts(label, pred[k]) += 1.0;
      hit += pred[k] == label;
      clean_hit += clean_pred[k] == label;
    }
    acc_per_seed.push_back(static_cast<double>(hit) / static_cast<double>(n));
    clean_per_seed.push_back(static_cast<double>(clean_hit) /
                             static_cast<double>(n));
  }
  rep.attacked_accuracy = mean_of(acc_per_seed);
  rep.attacked_accuracy_stderr = stderr_of(acc_per_seed);
  rep.clean_accuracy = mean_of(clean_per_seed);
  rep.fooling_rate = 1.0 - rep.attacked_accuracy;
  rep.fooling_rate_stderr = rep.attacked_accuracy_stderr;
  rep.attacked_confusion = row_normalize(counts);
  return rep;
}

EvalReport eval_firnet(const firnet::FirNetModel& net,
                       const firnet::FeedbackOracle& oracle,
                       const std::vector<CVec>& payloads,
                       const std::vector<Index>& targets,
                       const EvalOptions& opt) {
  EvalReport rep;
  rep.kind = "firnet";
  rep.seeds = opt.seeds;
  {
    std::ostringstream os;
    os << "firnet|" << net.num_classes() << '|' << net.num_taps() << '|'
       << net.box_epsilon << '|' << payloads.size();
    rep.config_digest = digest_hex(os.str());
  }
  const Index nc = oracle.num_classes();
  Mat counts = Mat::Zero(nc, nc);
  std::vector<double> fool_per_seed;
  const int count = opt.max_slices_per_class > 0
                        ? opt.max_slices_per_class
                        : 200;
  for (const std::uint64_t seed : opt.seeds) {
    const auto ev = firnet::eval_fooling(net, oracle, payloads, targets,
                                         count, mix_seed(seed, 0xF17Eu));
    fool_per_seed.push_back(ev.fooling_rate);
  }
  rep.fooling_rate = mean_of(fool_per_seed);
  rep.fooling_rate_stderr = stderr_of(fool_per_seed);
  rep.attacked_confusion = counts;
  return rep;
}

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  if (j.empty()) return Mat();
  Mat m(j.size(), j[0].size());
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["kind"] = r.kind;
  j["config_digest"] = r.config_digest;
  j["seeds"] = r.seeds;
  j["classes"] = r.classes;
  j["clean_accuracy"] = r.clean_accuracy;
  j["attacked_accuracy"] = r.attacked_accuracy;
  j["attacked_accuracy_stderr"] = r.attacked_accuracy_stderr;
  j["fooling_rate"] = r.fooling_rate;
  j["fooling_rate_stderr"] = r.fooling_rate_stderr;
  j["confusion"] = mat_to_json(r.confusion);
  j["attacked_confusion"] = mat_to_json(r.attacked_confusion);
  j["fooling_cells"] = mat_to_json(r.fooling.cells);
  {
    json counts = json::array();
    for (Index rr = 0; rr < r.fooling.counts.rows(); ++rr) {
      json row = json::array();
      for (Index cc = 0; cc < r.fooling.counts.cols(); ++cc)
        row.push_back(r.fooling.counts(rr, cc));
      counts.push_back(row);
    }
    j["fooling_counts"] = counts;
  }
  j["per_class_rates"] = r.per_class_rates;
  json audits = json::array();
  for (const auto& a : r.audits) {
    json ja;
    ja["slice"] = a.slice;
    ja["seed"] = a.seed;
    ja["ber"] = a.ber;
    ja["energy"] = a.energy;
    ja["ber_ok"] = a.ber_ok;
    ja["energy_ok"] = a.energy_ok;
    ja["box_ok"] = a.box_ok;
    audits.push_back(ja);
  }
  j["audits"] = audits;
  json sweep = json::array();
  for (const auto& p : r.sweep) {
    json jp;
    jp["eps"] = p.eps;
    jp["block_len"] = p.block_len;
    jp["attacked_accuracy"] = p.attacked_accuracy;
    jp["stderr"] = p.stderr_;
    sweep.push_back(jp);
  }
  j["sweep"] = sweep;
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError("bad report JSON: " + std::string(e.what()));
  }
  if (j.value("schema_version", -1) != 1)
    throw SchemaError("unsupported report schema version");
  EvalReport r;
  r.kind = j.at("kind").get<std::string>();
  r.config_digest = j.at("config_digest").get<std::string>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.classes = j.at("classes").get<std::vector<std::string>>();
  r.clean_accuracy = j.at("clean_accuracy").get<double>();
  r.attacked_accuracy = j.at("attacked_accuracy").get<double>();
  r.attacked_accuracy_stderr = j.at("attacked_accuracy_stderr").get<double>();
  r.fooling_rate = j.at("fooling_rate").get<double>();
  r.fooling_rate_stderr = j.at("fooling_rate_stderr").get<double>();
  r.confusion = mat_from_json(j.at("confusion"));
  r.attacked_confusion = mat_from_json(j.at("attacked_confusion"));
  r.fooling.cells = mat_from_json(j.at("fooling_cells"));
  {
    const auto& counts = j.at("fooling_counts");
    if (!counts.empty()) {
      r.fooling.counts.resize(counts.size(), counts[0].size());
      for (Index rr = 0; rr < r.fooling.counts.rows(); ++rr)
        for (Index cc = 0; cc < r.fooling.counts.cols(); ++cc)
          r.fooling.counts(rr, cc) = counts[rr][cc].get<int>();
    }
  }
  r.per_class_rates = j.at("per_class_rates").get<std::vector<double>>();
  for (const auto& ja : j.at("audits")) {
    ConstraintAudit a;
    a.slice = ja.at("slice").get<Index>();
    a.seed = ja.at("seed").get<std::uint64_t>();
    a.ber = ja.at("ber").get<double>();
    a.energy = ja.at("energy").get<double>();
    a.ber_ok = ja.at("ber_ok").get<bool>();
    a.energy_ok = ja.at("energy_ok").get<bool>();
    a.box_ok = ja.at("box_ok").get<bool>();
    r.audits.push_back(a);
  }
  for (const auto& jp : j.at("sweep")) {
    SweepPoint p;
    p.eps = jp.at("eps").get<double>();
    p.block_len = jp.at("block_len").get<Index>();
    p.attacked_accuracy = jp.at("attacked_accuracy").get<double>();
    p.stderr_ = jp.at("stderr").get<double>();
    r.sweep.push_back(p);
  }
  return r;
}

namespace {

void write_csv_matrix(const std::string& path, const Mat& m,
                      const std::vector<std::string>& labels) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "class";
  for (Index c = 0; c < m.cols(); ++c)
    f << ',' << (c < static_cast<Index>(labels.size()) ? labels[c]
                                                       : std::to_string(c));
  f << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    f << (r < static_cast<Index>(labels.size()) ? labels[r]
                                                : std::to_string(r));
    for (Index c = 0; c < m.cols(); ++c) f << ',' << m(r, c);
    f << '\n';
  }
}

std::string heat_color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  const int r = static_cast<int>(255 * v);
  const int g = static_cast<int>(64 + 96 * (1.0 - v));
  const int b = static_cast<int>(255 * (1.0 - v));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

void write_svg_heatmap(const std::string& path, const Mat& m,
                       const std::vector<std::string>& labels,
                       const std::string& title) {
  const int cell = 48, margin = 90;
  const int w = margin + cell * static_cast<int>(m.cols()) + 20;
  const int h = margin + cell * static_cast<int>(m.rows()) + 20;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
    << h << "' font-family='monospace' font-size='11'>\n";
  f << "<text x='8' y='18'>" << title << "</text>\n";
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      const int x = margin + static_cast<int>(c) * cell;
      const int y = margin + static_cast<int>(r) * cell;
      f << "<rect x='" << x << "' y='" << y << "' width='" << cell
        << "' height='" << cell << "' fill='" << heat_color(m(r, c))
        << "' stroke='white'/>\n";
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.2f", m(r, c));
      f << "<text x='" << x + 6 << "' y='" << y + cell / 2 + 4
        << "' fill='white'>" << buf << "</text>\n";
    }
  }
  for (Index r = 0; r < m.rows(); ++r)
    f << "<text x='8' y='" << margin + static_cast<int>(r) * cell + cell / 2
      << "'>"
      << (r < static_cast<Index>(labels.size()) ? labels[r]
                                                : std::to_string(r))
      << "</text>\n";
  for (Index c = 0; c < m.cols(); ++c)
    f << "<text x='" << margin + static_cast<int>(c) * cell << "' y='"
      << margin - 10 << "' transform='rotate(-35 "
      << margin + static_cast<int>(c) * cell << ' ' << margin - 10 << ")'>"
      << (c < static_cast<Index>(labels.size()) ? labels[c]
                                                : std::to_string(c))
      << "</text>\n";
  f << "</svg>\n";
}

void write_svg_sweep(const std::string& path,
                     const std::vector<SweepPoint>& sweep,
                     const std::string& title) {
  const int w = 480, h = 320, ml = 60, mb = 40;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
    << h << "' font-family='monospace' font-size='11'>\n";
  f << "<text x='8' y='16'>" << title << "</text>\n";
  if (!sweep.empty()) {
    double xmax = 0.0;
    for (const auto& p : sweep) xmax = std::max(xmax, p.eps);
    if (xmax <= 0.0) xmax = 1.0;
    // group points by block length into separate polylines
    std::vector<Index> blocks;
    for (const auto& p : sweep)
      if (std::find(blocks.begin(), blocks.end(), p.block_len) == blocks.end())
        blocks.push_back(p.block_len);
    const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      f << "<polyline fill='none' stroke='" << colors[b % 4]
        << "' stroke-width='2' points='";
      for (const auto& p : sweep) {
        if (p.block_len != blocks[b]) continue;
        const double x = ml + (w - ml - 20) * (p.eps / xmax);
        const double y = (h - mb) - (h - mb - 30) * p.attacked_accuracy;
        f << x << ',' << y << ' ';
      }
      f << "'/>\n";
      f << "<text x='" << w - 120 << "' y='" << 30 + 14 * b << "' fill='"
        << colors[b % 4] << "'>block " << blocks[b] << "</text>\n";
    }
    f << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - 10
      << "' y2='" << h - mb << "' stroke='black'/>\n";
    f << "<line x1='" << ml << "' y1='20' x2='" << ml << "' y2='" << h - mb
      << "' stroke='black'/>\n";
    f << "<text x='" << w / 2 << "' y='" << h - 8 << "'>eps</text>\n";
    f << "<text x='6' y='" << h / 2 << "' transform='rotate(-90 12 "
      << h / 2 << ")'>accuracy</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace

std::vector<std::string> emit_report(const EvalReport& r,
                                     const std::vector<std::string>& formats,
                                     const std::string& outdir) {
  fs::create_directories(outdir);
  const std::string text = report_to_json(r);
  const std::string digest =
      r.config_digest.empty() ? digest_hex(text) : r.config_digest;
  std::vector<std::string> written;

  const auto want = [&](const std::string& fmt) {
    return std::find(formats.begin(), formats.end(), fmt) != formats.end();
  };
  if (want("json") || formats.empty()) {
    const std::string path = outdir + "/report-" + digest + ".json";
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << text;
    written.push_back(path);
  }
  if (want("csv")) {
    if (r.confusion.size() > 0) {
      const std::string p = outdir + "/confusion-" + digest + ".csv";
      write_csv_matrix(p, r.confusion, r.classes);
      written.push_back(p);
    }
    if (r.attacked_confusion.size() > 0) {
      const std::string p = outdir + "/attacked-confusion-" + digest + ".csv";
      write_csv_matrix(p, r.attacked_confusion, r.classes);
      written.push_back(p);
    }
    if (r.fooling.cells.size() > 0) {
      const std::string p = outdir + "/fooling-" + digest + ".csv";
      write_csv_matrix(p, r.fooling.cells, r.classes);
      written.push_back(p);
    }
  }
  if (want("svg") || want("plots")) {
    if (r.attacked_confusion.size() > 0) {
      const std::string p = outdir + "/attacked-confusion-" + digest + ".svg";
      write_svg_heatmap(p, r.attacked_confusion, r.classes,
                        r.kind + " attacked confusion");
      written.push_back(p);
    }
    if (r.fooling.cells.size() > 0) {
      const std::string p = outdir + "/fooling-" + digest + ".svg";
      write_svg_heatmap(p, r.fooling.cells, r.classes, r.kind + " fooling");
      written.push_back(p);
    }
    if (!r.sweep.empty()) {
      const std::string p = outdir + "/sweep-" + digest + ".svg";
      write_svg_sweep(p, r.sweep, r.kind + " sweep");
      written.push_back(p);
    }
  }
  return written;
}

}  // namespace wadv::eval
