// waveform-adv: dataset generation, classifier training, whitebox/blackbox
// waveform attacks, and evaluation, driven by subcommands or a config file.
#include <CLI11.hpp>

#include <cstdlib>
#include <sstream>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "wadv/data.hpp"
#include "wadv/eval.hpp"
#include "wadv/firnet.hpp"
#include "wadv/iqfile.hpp"
#include "wadv/nn.hpp"
#include "wadv/whitebox.hpp"

namespace fs = std::filesystem;
using namespace wadv;

namespace {

// exit codes: 0 ok, 2 usage, 3 io, 4 schema, 5 numerical failure
constexpr int kOk = 0, kUsage = 2, kIo = 3, kSchema = 4, kNumerical = 5;

std::string default_out_root() {
  const char* env = std::getenv("WAVEFORM_ADV_OUT");
  return env != nullptr && env[0] != '\0' ? env : "out";
}

std::string run_digest(CLI::App* sub) {
  // The serialized effective config (file + flags) pins the run. Output
  // location and emission formats are presentation, not experiment identity.
  std::istringstream lines(sub->config_to_str(true, false));
  std::string line, kept = sub->get_name() + "\n";
  while (std::getline(lines, line)) {
    if (line.rfind("out=", 0) == 0 || line.rfind("formats=", 0) == 0) continue;
    kept += line + "\n";
  }
  return digest_hex(kept);
}

struct SplitFlags {
  double test_frac = 0.5;
  std::uint64_t split_seed = 13;
};

void add_split_flags(CLI::App* sub, SplitFlags& f) {
  sub->add_option("--test-frac", f.test_frac,
                  "fraction of the dataset held out for testing");
  sub->add_option("--split-seed", f.split_seed, "stratified split seed");
}

std::pair<data::Dataset, data::Dataset> load_split(const std::string& dir,
                                                   const SplitFlags& f) {
  const data::Dataset ds = data::load_dataset(dir);
  return data::split(ds, f.test_frac, 1.0 - f.test_frac, f.split_seed);
}

nn::Classifier train_on(const data::Dataset& train_set,
                        const std::string& arch, int conv_blocks,
                        const nn::TrainHyper& hyper, std::uint64_t init_seed) {
  nn::Classifier model;
  if (arch == "fp")
    model = nn::fingerprint_surrogate(train_set.classes, train_set.n_i,
                                      init_seed);
  else
    model = nn::modulation_surrogate(train_set.classes, train_set.n_i,
                                     init_seed, conv_blocks);
  nn::train(model, data::as_examples(train_set), hyper);
  return model;
}

whitebox::AttackConfig make_attack_config(double eps, Index nj, Index taps,
                                          double ber_max, double e_max,
                                          const std::string& fading,
                                          int slices, std::uint64_t seed,
                                          int rogue) {
  whitebox::AttackConfig cfg;
  cfg.eps = eps;
  cfg.nj = nj;
  cfg.taps = taps;
  cfg.ber_max = ber_max;
  cfg.e_max = e_max;
  cfg.fading = fading;
  cfg.num_slices = slices;
  cfg.seed = seed;
  cfg.adversary_class = rogue;
  return cfg;
}

std::vector<std::uint64_t> eval_seeds(int count, std::uint64_t base) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(mix_seed(base, 0xE0 + i));
  return seeds;
}

std::vector<CVec> clean_payloads(const data::Dataset& ds, int count,
                                 std::uint64_t seed) {
  const auto scheme = ds.scheme_for(0);
  const Index nsym = ds.n_i / scheme.samples_per_symbol;
  std::vector<CVec> out;
  for (int i = 0; i < count; ++i)
    out.push_back(dsp::modulate(
        dsp::random_bits(nsym * scheme.bits_per_symbol(), mix_seed(seed, i)),
        scheme));
  return out;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

int run(int argc, char** argv) {
  CLI::App app{"adversarial waveform attacks on wireless classifiers"};
  app.set_config("--config", "", "declarative run config (flags override)");
  int workers = 0;
  app.add_option("--workers", workers, "worker thread count (0 = auto)");
  app.require_subcommand(1);

  // ---- gen-mod ----
  auto* gen_mod = app.add_subcommand(
      "gen-mod", "generate a synthetic modulation-recognition dataset");
  std::vector<std::string> schemes{"bpsk", "qpsk", "psk8", "qam16"};
  std::vector<double> snrs{20.0};
  int slices = 100;
  Index ni = 1024;
  std::uint64_t seed = 7;
  std::string out = default_out_root() + "/dataset-mod";
  gen_mod->add_option("--schemes", schemes, "modulation scheme names")
      ->delimiter(',');
  gen_mod->add_option("--snr", snrs, "Es/N0 grid in dB")->delimiter(',');
  gen_mod->add_option("--slices", slices, "slices per (scheme, SNR) cell");
  gen_mod->add_option("--ni", ni, "slice length in I/Q samples");
  gen_mod->add_option("--seed", seed, "generation seed");
  gen_mod->add_option("--out", out, "output dataset directory");

  // ---- gen-fp ----
  auto* gen_fp = app.add_subcommand(
      "gen-fp", "generate a synthetic device-fingerprinting dataset");
  int devices = 5;
  int fp_slices = 500;
  Index fp_ni = 288;
  std::uint64_t fp_seed = 7;
  double fp_snr = 15.0;
  bool identity = false;
  std::string fp_scheme = "qpsk";
  std::string fp_out = default_out_root() + "/dataset-fp";
  gen_fp->add_option("--devices", devices, "number of devices");
  gen_fp->add_option("--slices", fp_slices, "slices per device");
  gen_fp->add_option("--ni", fp_ni, "slice length in I/Q samples");
  gen_fp->add_option("--seed", fp_seed, "generation seed");
  gen_fp->add_option("--snr", fp_snr, "per-slice Es/N0 in dB");
  gen_fp->add_flag("--identity", identity,
                   "give every device the identity impairment");
  gen_fp->add_option("--scheme", fp_scheme, "payload modulation scheme");
  gen_fp->add_option("--out", fp_out, "output dataset directory");

  // ---- import-radioml ----
  auto* import_cmd =
      app.add_subcommand("import-radioml", "ingest a 2018.01A HDF5 archive");
  std::string import_in;
  Index import_limit = 0;
  std::string import_out = default_out_root() + "/dataset-radioml";
  import_cmd->add_option("--in", import_in, "archive path")->required();
  import_cmd->add_option("--limit", import_limit,
                         "max records to import (0 = all)");
  import_cmd->add_option("--out", import_out, "output dataset directory");

  // ---- train ----
  auto* train_cmd =
      app.add_subcommand("train", "train a classifier on a dataset");
  std::string train_dataset, train_arch = "auto";
  std::string train_out = default_out_root() + "/model.ckpt";
  nn::TrainHyper hyper;
  int conv_blocks = 3;
  std::uint64_t init_seed = 1;
  SplitFlags train_split;
  train_cmd->add_option("--dataset", train_dataset, "dataset directory")
      ->required();
  train_cmd->add_option("--arch", train_arch, "mod | fp | auto");
  train_cmd->add_option("--epochs", hyper.epochs, "training epochs");
  train_cmd->add_option("--lr", hyper.lr, "Adam learning rate");
  train_cmd->add_option("--l2", hyper.l2_lambda, "l2 penalty on kernels");
  train_cmd->add_option("--batch", hyper.batch, "batch size");
  train_cmd->add_option("--seed", hyper.seed, "training seed");
  train_cmd->add_option("--init-seed", init_seed, "weight init seed");
  train_cmd->add_option("--conv-blocks", conv_blocks,
                        "conv blocks for the modulation network (1-7)");
  add_split_flags(train_cmd, train_split);
  train_cmd->add_option("--out", train_out, "checkpoint path");

  // ---- attack ----
  auto* attack = app.add_subcommand("attack", "solve whitebox attacks");
  attack->require_subcommand(1);
  std::string atk_model, atk_dataset;
  std::string atk_out = default_out_root() + "/attacks";
  double eps = 0.1, ber_max = 1e-2, e_max = 0.0;
  Index nj = 64, taps = 8;
  std::string fading = "none";
  int atk_slices = 16, atk_class = -1, atk_target = -1, payload_class = -1;
  int rogue_class = -1;
  bool all_classes = false;
  std::uint64_t atk_seed = 1;
  int max_outer = 8, max_ncg = 10;
  double gamma0 = 0.1, rho_pen = 1.0;
  SplitFlags atk_split;
  for (const std::string name : {"awj-u", "awj-t", "aws"}) {
    auto* sub = attack->add_subcommand(name);
    sub->add_option("--model", atk_model, "classifier checkpoint")->required();
    sub->add_option("--dataset", atk_dataset, "dataset directory")->required();
    sub->add_option("--eps", eps, "per-component box bound");
    sub->add_option("--ber-max", ber_max, "C1 bit error rate budget");
    sub->add_option("--e-max", e_max, "C2 energy budget (0 = derive)");
    sub->add_option("--fading", fading, "none | high | low");
    sub->add_option("--slices", atk_slices, "optimization slices");
    sub->add_option("--seed", atk_seed, "attack seed");
    sub->add_option("--max-outer", max_outer, "outer iterations");
    sub->add_option("--max-ncg", max_ncg, "NCG steps per outer iteration");
    sub->add_option("--gamma0", gamma0, "multiplier step size");
    sub->add_option("--rho", rho_pen, "penalty weight");
    add_split_flags(sub, atk_split);
    sub->add_option("--out", atk_out, "artifact output directory");
    if (name != "aws") {
      sub->add_option("--nj", nj, "jamming block length");
      sub->add_option("--class", atk_class, "legitimate source class");
      sub->add_flag("--all-classes", all_classes,
                    "one artifact per source class");
      sub->add_option("--rogue-class", rogue_class,
                      "adversary's own class (-1 = external)");
    }
    if (name != "awj-u")
      sub->add_option("--target", atk_target, "target class")->required();
    if (name == "aws") {
      sub->add_option("--taps", taps, "FIR tap count");
      sub->add_option("--payload-class", payload_class,
                      "rogue payload class (-1 = external clean payloads)");
    }
  }

  // ---- firnet ----
  auto* firnet_cmd = app.add_subcommand("firnet", "blackbox FIR network");
  firnet_cmd->require_subcommand(1);
  auto* fn_train = firnet_cmd->add_subcommand("train");
  std::string fn_model, fn_dataset;
  std::string fn_out = default_out_root() + "/firnet.json";
  Index fn_taps = 20;
  int fn_layers = 1;
  double fn_eps = 1.0;
  std::string fn_mode = "softmax", fn_fading = "high";
  int fn_steps = 400, fn_batch = 100, fn_payloads = 200;
  double fn_oracle_snr = 20.0, fn_lr = 0.0;
  bool fn_normalize = false, fn_round_robin = false;
  std::uint64_t fn_seed = 1;
  fn_train->add_option("--model", fn_model, "oracle classifier checkpoint")
      ->required();
  fn_train->add_option("--dataset", fn_dataset, "dataset directory")
      ->required();
  fn_train->add_option("--taps", fn_taps, "taps per FIR layer");
  fn_train->add_option("--layers", fn_layers, "FIR layers per bank");
  fn_train->add_option("--eps", fn_eps, "deviation box bound");
  fn_train->add_option("--mode", fn_mode, "softmax | onebit");
  fn_train->add_option("--fading", fn_fading, "oracle channel regime");
  fn_train->add_option("--oracle-snr", fn_oracle_snr,
                       "oracle receiver Es/N0 in dB");
  fn_train->add_flag("--normalize", fn_normalize,
                     "oracle normalizes received power");
  fn_train->add_flag("--round-robin", fn_round_robin,
                     "cycle targets per step instead of random labels");
  fn_train->add_option("--steps", fn_steps, "training steps");
  fn_train->add_option("--batch", fn_batch, "batch size");
  fn_train->add_option("--payloads", fn_payloads, "clean payload pool size");
  fn_train->add_option("--lr", fn_lr, "step size (0 = scale with eps)");
  fn_train->add_option("--seed", fn_seed, "training seed");
  fn_train->add_option("--out", fn_out, "trained artifact path");

  auto* fn_apply = firnet_cmd->add_subcommand("apply");
  std::string fa_firnet, fa_dataset;
  std::string fa_out = default_out_root() + "/firnet-out";
  int fa_target = 0, fa_count = 10;
  std::uint64_t fa_seed = 1;
  fn_apply->add_option("--firnet", fa_firnet, "trained artifact")->required();
  fn_apply->add_option("--dataset", fa_dataset, "dataset for payload scheme")
      ->required();
  fn_apply->add_option("--target", fa_target, "target class");
  fn_apply->add_option("--count", fa_count, "payloads to transform");
  fn_apply->add_option("--seed", fa_seed, "payload seed");
  fn_apply->add_option("--out", fa_out, "output directory");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "evaluate attacks on test data");
  std::string ev_model, ev_dataset, ev_attack, ev_firnet;
  std::string ev_out = default_out_root() + "/eval";
  int ev_seeds = 5;
  std::uint64_t ev_seed_base = 1;
  int ev_max_slices = 0;
  std::string ev_fading = "high";
  double ev_oracle_snr = 20.0;
  bool ev_normalize = false;
  std::vector<std::string> ev_formats{"json", "csv", "svg"};
  SplitFlags ev_split;
  eval_cmd->add_option("--model", ev_model, "classifier checkpoint")
      ->required();
  eval_cmd->add_option("--dataset", ev_dataset, "dataset directory")
      ->required();
  eval_cmd->add_option("--attack", ev_attack, "attack artifact JSON");
  eval_cmd->add_option("--firnet", ev_firnet, "firnet artifact JSON");
  eval_cmd->add_option("--seeds", ev_seeds, "number of evaluation seeds");
  eval_cmd->add_option("--seed-base", ev_seed_base, "evaluation seed base");
  eval_cmd->add_option("--max-slices", ev_max_slices,
                       "cap test slices per class (0 = all)");
  eval_cmd->add_option("--fading", ev_fading, "oracle regime (firnet eval)");
  eval_cmd->add_option("--oracle-snr", ev_oracle_snr,
                       "oracle receiver Es/N0 in dB (firnet eval)");
  eval_cmd->add_flag("--normalize", ev_normalize,
                     "oracle normalizes received power (firnet eval)");
  eval_cmd->add_option("--formats", ev_formats, "json,csv,svg")
      ->delimiter(',');
  add_split_flags(eval_cmd, ev_split);
  eval_cmd->add_option("--out", ev_out, "report output directory");

  // ---- sweep ----
  auto* sweep_cmd =
      app.add_subcommand("sweep", "attack across an epsilon/length grid");
  std::string sw_model, sw_dataset;
  std::string sw_out = default_out_root() + "/sweep";
  std::vector<double> sw_eps{0.0, 0.05, 0.1, 0.2};
  std::vector<Index> sw_nj{64, 256};
  std::string sw_fading = "none";
  int sw_slices = 16, sw_seeds = 5, sw_class = -1, sw_max_slices = 0;
  std::uint64_t sw_seed = 1;
  SplitFlags sw_split;
  sweep_cmd->add_option("--model", sw_model, "classifier checkpoint")
      ->required();
  sweep_cmd->add_option("--dataset", sw_dataset, "dataset directory")
      ->required();
  sweep_cmd->add_option("--eps", sw_eps, "epsilon grid")->delimiter(',');
  sweep_cmd->add_option("--nj", sw_nj, "jamming block lengths")
      ->delimiter(',');
  sweep_cmd->add_option("--fading", sw_fading, "none | high | low");
  sweep_cmd->add_option("--class", sw_class,
                        "source class (-1 = average over all)");
  sweep_cmd->add_option("--slices", sw_slices, "optimization slices");
  sweep_cmd->add_option("--seeds", sw_seeds, "evaluation seeds");
  sweep_cmd->add_option("--seed", sw_seed, "attack seed");
  sweep_cmd->add_option("--max-slices", sw_max_slices,
                        "cap test slices per class");
  add_split_flags(sweep_cmd, sw_split);
  sweep_cmd->add_option("--out", sw_out, "report output directory");

  // ---- report ----
  auto* report_cmd =
      app.add_subcommand("report", "re-emit a report in other formats");
  std::string rp_in;
  std::string rp_out = default_out_root() + "/report";
  std::vector<std::string> rp_formats{"json", "csv", "svg"};
  report_cmd->add_option("--in", rp_in, "report JSON path")->required();
  report_cmd->add_option("--formats", rp_formats, "json,csv,svg")
      ->delimiter(',');
  report_cmd->add_option("--out", rp_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (workers > 0) set_worker_count(workers);

  if (gen_mod->parsed()) {
    const auto ds =
        data::gen_modulation_dataset(schemes, snrs, slices, ni, seed);
    data::save_dataset(ds, out);
    std::cerr << "wrote " << ds.slices.size() << " slices to " << out
              << " digest=" << run_digest(gen_mod) << "\n";
    return kOk;
  }
  if (gen_fp->parsed()) {
    data::FingerprintGenOptions o;
    o.snr_db = fp_snr;
    o.identity_fingerprints = identity;
    o.base_scheme = fp_scheme;
    const auto ds =
        data::gen_fingerprint_dataset(devices, fp_slices, fp_ni, fp_seed, o);
    data::save_dataset(ds, fp_out);
    std::cerr << "wrote " << ds.slices.size() << " slices to " << fp_out
              << " digest=" << run_digest(gen_fp) << "\n";
    return kOk;
  }
  if (import_cmd->parsed()) {
    const auto ds = data::import_radioml(import_in, import_limit);
    data::save_dataset(ds, import_out);
    std::cerr << "imported " << ds.slices.size() << " slices to "
              << import_out << "\n";
    return kOk;
  }
  if (train_cmd->parsed()) {
    auto [test_set, opt_set] = load_split(train_dataset, train_split);
    std::string arch = train_arch;
    if (arch == "auto")
      arch = opt_set.kind == data::DatasetKind::Fingerprint ? "fp" : "mod";
    const auto model = train_on(opt_set, arch, conv_blocks, hyper, init_seed);
    ensure_parent_dir(train_out);
    nn::save_model(model, train_out);
    std::cerr << "train accuracy "
              << nn::accuracy(model, data::as_examples(opt_set))
              << ", test accuracy "
              << nn::accuracy(model, data::as_examples(test_set))
              << ", checkpoint " << train_out << "\n";
    return kOk;
  }
  if (attack->parsed()) {
    const auto model = nn::load_model(atk_model);
    auto [test_set, opt_set] = load_split(atk_dataset, atk_split);
    whitebox::AttackConfig cfg =
        make_attack_config(eps, nj, taps, ber_max, e_max, fading, atk_slices,
                           atk_seed, rogue_class);
    cfg.solver.max_outer = max_outer;
    cfg.solver.max_ncg = max_ncg;
    cfg.solver.gamma0 = gamma0;
    cfg.solver.rho_pen = rho_pen;
    fs::create_directories(atk_out);
    std::vector<int> sources;
    if (all_classes) {
      for (std::size_t c = 0; c < opt_set.classes.size(); ++c)
        sources.push_back(static_cast<int>(c));
    } else {
      sources.push_back(atk_class);
    }
    for (const auto* sub : attack->get_subcommands()) {
      for (int src : sources) {
        whitebox::AttackArtifact a;
        if (sub->get_name() == "awj-u") {
          if (src < 0)
            throw SchemaError("awj-u needs --class or --all-classes");
          a = whitebox::attack_awj_untargeted(model, opt_set, src, cfg);
        } else if (sub->get_name() == "awj-t") {
          if (src < 0) throw SchemaError("awj-t needs --class");
          a = whitebox::attack_awj_targeted(model, opt_set, src, atk_target,
                                            cfg);
        } else {
          a = whitebox::attack_aws(model, opt_set, atk_target, payload_class,
                                   cfg);
        }
        const std::string path =
            atk_out + "/" + sub->get_name() + "-src" +
            std::to_string(a.source_class) + "-tgt" +
            std::to_string(a.target_class) + "-" + a.problem_digest + ".json";
        whitebox::save_artifact(a, path);
        std::cerr << "wrote " << path << " objective=" << a.best_objective
                  << "\n";
        if (sub->get_name() == "aws") break;  // aws ignores --all-classes
      }
    }
    return kOk;
  }
  if (fn_train->parsed()) {
    const auto model = nn::load_model(fn_model);
    const auto ds = data::load_dataset(fn_dataset);
    const auto scheme = ds.scheme_for(0);
    const dsp::ChannelModel chan = whitebox::adversary_channel(
        fn_fading, dsp::noise_variance_for_esn0(scheme, fn_oracle_snr));
    const firnet::FeedbackOracle oracle(model, chan, fn_normalize,
                                        mix_seed(fn_seed, 0x0AC1Eu));
    auto net =
        firnet::make_firnet(model.num_classes(), fn_taps, fn_eps, fn_layers);
    const auto payloads = clean_payloads(ds, fn_payloads, fn_seed);
    std::vector<Index> targets;
    for (Index c = 0; c < model.num_classes(); ++c) targets.push_back(c);
    firnet::FirnetHyper fh;
    fh.batch = fn_batch;
    fh.steps = fn_steps;
    fh.lr = fn_lr;
    fh.seed = fn_seed;
    fh.mode = fn_mode == "onebit" ? firnet::FeedbackMode::OneBit
                                  : firnet::FeedbackMode::Softmax;
    fh.round_robin_targets = fn_round_robin;
    const auto result =
        firnet::train_firnet(net, oracle, payloads, targets, fh);
    ensure_parent_dir(fn_out);
    firnet::save_firnet(net, fn_out);
    std::cerr << "final fooling " << result.final_fooling;
    if (result.collapsed)
      std::cerr << " (collapsed onto class " << result.collapsed_class
                << ", share " << result.collapse_fraction << ")";
    std::cerr << ", artifact " << fn_out << "\n";
    return kOk;
  }
  if (fn_apply->parsed()) {
    const auto net = firnet::load_firnet(fa_firnet);
    const auto ds = data::load_dataset(fa_dataset);
    const auto payloads = clean_payloads(ds, fa_count, fa_seed);
    fs::create_directories(fa_out);
    for (int i = 0; i < fa_count; ++i) {
      const CVec y = firnet::firnet_forward(net, payloads[i], fa_target);
      char name[64];
      std::snprintf(name, sizeof(name), "tx_%04d.iqf", i);
      dsp::write_iqf(fa_out + "/" + name, y);
      dsp::IqSidecar sc;
      sc.scheme = dsp::to_string(ds.scheme_for(0).kind);
      sc.seed = mix_seed(fa_seed, i);
      sc.label = std::to_string(fa_target);
      dsp::write_iqf_sidecar(fa_out + "/" + name, sc);
    }
    std::cerr << "wrote " << fa_count << " transformed payloads to " << fa_out
              << "\n";
    return kOk;
  }
  if (eval_cmd->parsed()) {
    const auto model = nn::load_model(ev_model);
    auto [test_set, opt_set] = load_split(ev_dataset, ev_split);
    eval::EvalOptions opt;
    opt.seeds = eval_seeds(ev_seeds, ev_seed_base);
    opt.max_slices_per_class = ev_max_slices;
    eval::EvalReport rep;
    if (!ev_attack.empty()) {
      const auto artifact = whitebox::load_artifact(ev_attack);
      rep = eval::run_attack_eval(model, artifact, test_set, opt);
    } else if (!ev_firnet.empty()) {
      const auto net = firnet::load_firnet(ev_firnet);
      const auto scheme = test_set.scheme_for(0);
      const dsp::ChannelModel chan = whitebox::adversary_channel(
          ev_fading, dsp::noise_variance_for_esn0(scheme, ev_oracle_snr));
      const firnet::FeedbackOracle oracle(model, chan, ev_normalize,
                                          mix_seed(ev_seed_base, 0x0AC1Eu));
      const auto payloads = clean_payloads(test_set, 200, ev_seed_base);
      std::vector<Index> targets;
      for (Index c = 0; c < model.num_classes(); ++c) targets.push_back(c);
      rep = eval::eval_firnet(net, oracle, payloads, targets, opt);
    } else {
      const auto conf = eval::confusion_matrix(model, test_set);
      rep.kind = "confusion";
      rep.classes = test_set.classes;
      rep.seeds = opt.seeds;
      rep.clean_accuracy = conf.accuracy;
      rep.confusion = conf.matrix;
    }
    rep.config_digest = run_digest(eval_cmd);
    const auto files = eval::emit_report(rep, ev_formats, ev_out);
    for (const auto& f : files) std::cerr << "wrote " << f << "\n";
    return kOk;
  }
  if (sweep_cmd->parsed()) {
    const auto model = nn::load_model(sw_model);
    auto [test_set, opt_set] = load_split(sw_dataset, sw_split);
    eval::EvalOptions opt;
    opt.seeds = eval_seeds(sw_seeds, sw_seed);
    opt.max_slices_per_class = sw_max_slices;
    std::vector<int> sources;
    if (sw_class >= 0) {
      sources.push_back(sw_class);
    } else {
      for (std::size_t c = 0; c < opt_set.classes.size(); ++c)
        sources.push_back(static_cast<int>(c));
    }
    eval::EvalReport rep;
    rep.kind = "sweep";
    rep.classes = test_set.classes;
    rep.seeds = opt.seeds;
    for (Index block : sw_nj) {
      for (double e : sw_eps) {
        double acc = 0.0, se = 0.0;
        for (int src : sources) {
          whitebox::AttackConfig cfg = make_attack_config(
              e, block, block, 1e-2, 0.0, sw_fading, sw_slices, sw_seed, -1);
          const auto artifact =
              whitebox::attack_awj_untargeted(model, opt_set, src, cfg);
          const auto r =
              eval::run_attack_eval(model, artifact, test_set, opt);
          acc += r.attacked_accuracy;
          se += r.attacked_accuracy_stderr;
        }
        rep.sweep.push_back({e, block,
                             acc / static_cast<double>(sources.size()),
                             se / static_cast<double>(sources.size())});
        std::cerr << "eps=" << e << " block=" << block << " attacked accuracy="
                  << acc / static_cast<double>(sources.size()) << "\n";
      }
    }
    rep.config_digest = run_digest(sweep_cmd);
    const auto files = eval::emit_report(rep, {"json", "svg"}, sw_out);
    for (const auto& f : files) std::cerr << "wrote " << f << "\n";
    return kOk;
  }
  if (report_cmd->parsed()) {
    std::ifstream f(rp_in);
    if (!f) throw IoError("cannot open: " + rp_in);
    const std::string text(std::istreambuf_iterator<char>(f), {});
    const auto rep = eval::report_from_json(text);
    const auto files = eval::emit_report(rep, rp_formats, rp_out);
    for (const auto& fpath : files) std::cerr << "wrote " << fpath << "\n";
    return kOk;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kSchema;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
