#include "wadv/whitebox.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wadv::whitebox {

using nlohmann::json;

AttackStrategy identity_fir(Index taps) {
  AttackStrategy s;
  s.kind = AttackKind::Synthesis;
  s.phi = CVec::Zero(taps);
  s.phi[0] = 1.0;
  return s;
}

CVec adversary_waveform(const AttackStrategy& strategy, const CVec* payload) {
  if (strategy.kind == AttackKind::Jamming) {
    if (payload != nullptr)
      throw std::invalid_argument("jamming takes no payload");
    return strategy.phi;
  }
  if (payload == nullptr)
    throw std::invalid_argument("synthesis requires a payload");
  return dsp::convolve_fir(*payload, strategy.phi);
}

namespace {

RVec pack(const CVec& c) {
  RVec r(2 * c.size());
  r.head(c.size()) = c.real();
  r.tail(c.size()) = c.imag();
  return r;
}

CVec unpack(const RVec& r) {
  const Index m = r.size() / 2;
  CVec c(m);
  c.real() = r.head(m);
  c.imag() = r.tail(m);
  return c;
}

/// adjoint of x -> gain * conv(x, taps): u[i] = gain * sum_k conj(h_k) G[i+k]
CVec channel_adjoint(const CVec& grad_z, const dsp::ChannelRealization& r) {
  return r.gain * dsp::conv_adjoint(grad_z, r.taps);
}

/// fold an x_A-space gradient back onto the tiled jamming block
CVec tile_fold(const CVec& u, Index nj, Index offset) {
  CVec g = CVec::Zero(nj);
  Index j = ((-offset) % nj + nj) % nj;
  for (Index i = 0; i < u.size(); ++i) {
    g[j] += u[i];
    if (++j == nj) j = 0;
  }
  return g;
}

/// adjoint of x_A = conv(payload, phi): g[m] = sum_i conj(payload[i-m]) u[i]
CVec payload_correlate(const CVec& u, const CVec& payload, Index taps) {
  return dsp::conv_taps_adjoint(u, payload, taps);
}

CVec adversary_tx(const GwapProblem& p, const GwapSlice& s, const CVec& phi) {
  if (p.kind == AttackKind::Jamming)
    return dsp::cyclic_tile(phi, p.n_i, s.offset);
  return dsp::convolve_fir(s.payload, phi);
}

/// gradient (packed complex, x_A index space) -> gradient w.r.t. phi
CVec strategy_fold(const GwapProblem& p, const GwapSlice& s, const CVec& u,
                   Index m) {
  if (p.kind == AttackKind::Jamming) return tile_fold(u, m, s.offset);
  return payload_correlate(u, s.payload, m);
}

}  // namespace

CVec received(const GwapProblem& p, const GwapSlice& s, const CVec& phi) {
  CVec z = dsp::apply_channel(adversary_tx(p, s, phi), s.channel);
  if (p.kind == AttackKind::Jamming) z += s.legit;
  return z;
}

CVec strategy_gradient(const GwapProblem& p, const nn::Classifier& model,
                       const AttackStrategy& strategy, Index cls,
                       Index slice_index) {
  if (strategy.kind != p.kind)
    throw std::invalid_argument("strategy kind does not match problem");
  const GwapSlice& s = p.slices.at(slice_index);
  if (s.channel.taps.size() == 0)
    throw std::invalid_argument("channel realization not fixed");
  const CVec z = received(p, s, strategy.phi);
  const CVec gz = nn::input_gradient(model, z, cls);
  const CVec u = channel_adjoint(gz, s.channel);
  return strategy_fold(p, s, u, strategy.phi.size());
}

RVec evaluate_constraints(const GwapProblem& p, const AttackStrategy& strategy,
                          Index slice_index) {
  const GwapSlice& s = p.slices.at(slice_index);
  if (s.tx_bits.empty())
    throw std::invalid_argument("missing tx bits for BER constraint");
  const CVec z = received(p, s, strategy.phi);
  const double ber = dsp::measure_ber(s.tx_bits, z, p.scheme);
  const double e =
      p.kind == AttackKind::Jamming
          ? dsp::energy(strategy.phi)
          : dsp::energy(dsp::convolve_fir(s.payload, strategy.phi));
  const Index m = strategy.phi.size();
  RVec g(2 + 2 * m);
  g[0] = ber - p.constraints.ber_max;
  g[1] = e - p.constraints.e_max;
  for (Index i = 0; i < m; ++i) {
    g[2 + i] = std::abs(strategy.phi[i].real()) - p.constraints.box_epsilon;
    g[2 + m + i] = std::abs(strategy.phi[i].imag()) - p.constraints.box_epsilon;
  }
  return g;
}

double calibrate_evm_threshold(const dsp::ModulationScheme& scheme,
                               double ber_max, std::uint64_t seed) {
  if (ber_max < 0.0 || ber_max > 0.5)
    throw std::invalid_argument("ber_max must be in [0, 0.5]");
  const Index nsym = 20000;
  const auto bits =
      dsp::random_bits(nsym * scheme.bits_per_symbol(), mix_seed(seed, 1));
  const CVec clean = dsp::modulate(bits, scheme);
  Rng rng(mix_seed(seed, 2));
  CVec unit_noise(clean.size());
  for (Index i = 0; i < clean.size(); ++i) unit_noise[i] = rng.cnormal(1.0);

  // common random numbers keep BER monotone in the variance during bisection
  const auto ber_at = [&](double var) {
    const CVec z = clean + std::sqrt(var) * unit_noise;
    return dsp::measure_ber(bits, z, scheme);
  };
  double lo = 1e-8, hi = 4.0;
  if (ber_at(hi) < ber_max) {
    lo = hi;
  } else {
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (ber_at(mid) < ber_max)
        lo = mid;
      else
        hi = mid;
    }
  }
  const double var = 0.5 * (lo + hi);
  const CVec z = clean + std::sqrt(var) * unit_noise;
  return dsp::mean_constellation_error(z, scheme);
}

CVec project_strategy(const GwapProblem& p, const CVec& phi) {
  const double eps = p.constraints.box_epsilon;
  CVec out(phi.size());
  for (Index i = 0; i < phi.size(); ++i)
    out[i] = Cplx{std::clamp(phi[i].real(), -eps, eps),
                  std::clamp(phi[i].imag(), -eps, eps)};
  const double e_max = p.constraints.e_max;
  if (e_max > 0.0) {
    double e = 0.0;
    if (p.kind == AttackKind::Jamming) {
      e = dsp::energy(out);
    } else {
      for (const auto& s : p.slices)
        e = std::max(e, dsp::energy(dsp::convolve_fir(s.payload, out)));
    }
    if (e > e_max) out *= std::sqrt(e_max / e);
  }
  return out;
}

namespace {

class GwapObjective : public solver::Problem {
 public:
  GwapObjective(const GwapProblem& p, const nn::Classifier& model)
      : p_(p), model_(model) {
    for (Index c = 0; c < p.class_weights.size(); ++c)
      if (p.class_weights[c] != 0.0) nz_classes_.push_back(c);
    nsym_ = p.n_i / p.scheme.samples_per_symbol;
    points_ = p.scheme.constellation();
  }

  Index dim() const override {
    return 2 * (p_.slices.empty() ? 0 : strategy_len());
  }
  Index num_constraints() const override {
    return 2 * static_cast<Index>(p_.slices.size());
  }

  Index strategy_len() const { return phi_len_; }
  void set_phi_len(Index m) { phi_len_ = m; }

  void eval(const RVec& x, double& f, RVec& g) const override {
    run(x, f, g, nullptr, nullptr);
  }

  void eval_grad(const RVec& x, double& f, RVec& g, RVec& df,
                 Mat& jac) const override {
    run(x, f, g, &df, &jac);
  }

  RVec project(const RVec& x) const override {
    return pack(project_strategy(p_, unpack(x)));
  }

 private:
  void run(const RVec& x, double& f, RVec& g, RVec* df, Mat* jac) const {
    const CVec phi = unpack(x);
    const Index s_count = static_cast<Index>(p_.slices.size());
    const Index m = phi.size();

    std::vector<double> obj(s_count), evm(s_count), en(s_count);
    std::vector<CVec> dobj, devm, den;
    if (df) {
      dobj.assign(s_count, CVec());
      devm.assign(s_count, CVec());
      den.assign(s_count, CVec());
    }

    parallel_for(s_count, [&](Index s) {
      const GwapSlice& sl = p_.slices[s];
      const CVec xa = adversary_tx(p_, sl, phi);
      CVec z = dsp::apply_channel(xa, sl.channel);
      if (p_.kind == AttackKind::Jamming) z += sl.legit;

      // constellation-error surrogate for C1
      const CVec sym = dsp::symbol_estimates(z, p_.scheme);
      CVec nearest(sym.size());
      double e_acc = 0.0;
      for (Index k = 0; k < sym.size(); ++k) {
        Index best = 0;
        double bd = std::norm(sym[k] - points_[0]);
        for (Index c = 1; c < points_.size(); ++c) {
          const double d = std::norm(sym[k] - points_[c]);
          if (d < bd) {
            bd = d;
            best = c;
          }
        }
        nearest[k] = points_[best];
        e_acc += bd;
      }
      evm[s] = e_acc / static_cast<double>(sym.size());
      en[s] = p_.kind == AttackKind::Jamming ? dsp::energy(phi)
                                             : dsp::energy(xa);

      if (!df) {
        const RVec probs = nn::forward(model_, z);
        double o = 0.0;
        for (Index c : nz_classes_) o += p_.class_weights[c] * probs[c];
        obj[s] = o;
        return;
      }

      const auto fg = nn::forward_with_gradients(model_, z, nz_classes_);
      double o = 0.0;
      CVec gz = CVec::Zero(z.size());
      for (std::size_t i = 0; i < nz_classes_.size(); ++i) {
        const double w = p_.class_weights[nz_classes_[i]];
        o += w * fg.probs[nz_classes_[i]];
        gz += w * fg.gradients[i];
      }
      obj[s] = o;
      dobj[s] = strategy_fold(p_, sl, channel_adjoint(gz, sl.channel), m);

      // EVM gradient: (2/nsym)(sym - nearest) pulled back through the
      // matched filter and the channel
      CVec gsym = (2.0 / static_cast<double>(sym.size())) * (sym - nearest);
      CVec gz_evm = dsp::symbol_estimates_adjoint(gsym, z.size(), p_.scheme);
      devm[s] = strategy_fold(p_, sl, channel_adjoint(gz_evm, sl.channel), m);

      if (p_.kind == AttackKind::Jamming) {
        den[s] = 2.0 * phi;
      } else {
        den[s] = 2.0 * payload_correlate(xa, sl.payload, m);
      }
    });

    const double inv_s = 1.0 / static_cast<double>(s_count);
    f = 0.0;
    g.resize(2 * s_count);
    for (Index s = 0; s < s_count; ++s) {
      f += obj[s] * inv_s;
      g[2 * s] = evm[s] - p_.evm_threshold;
      g[2 * s + 1] = en[s] - p_.constraints.e_max;
    }
    if (df) {
      CVec total = CVec::Zero(m);
      for (Index s = 0; s < s_count; ++s) total += dobj[s] * inv_s;
      *df = pack(total);
      jac->resize(2 * s_count, 2 * m);
      for (Index s = 0; s < s_count; ++s) {
        jac->row(2 * s) = pack(devm[s]).transpose();
        jac->row(2 * s + 1) = pack(den[s]).transpose();
      }
    }
  }

  const GwapProblem& p_;
  const nn::Classifier& model_;
  std::vector<Index> nz_classes_;
  Index nsym_ = 0;
  Index phi_len_ = 0;
  CVec points_;
};

}  // namespace

GwapResult solve_gwap(const GwapProblem& p, const nn::Classifier& model,
                      const AttackStrategy& init, const GwapOptions& opt) {
  if (init.kind != p.kind)
    throw std::invalid_argument("init strategy kind does not match problem");
  if (p.slices.empty()) throw std::invalid_argument("no optimization slices");
  if (p.class_weights.size() != model.num_classes())
    throw std::invalid_argument("class weight vector size mismatch");
  if (model.input_len != p.n_i)
    throw std::invalid_argument("model input length does not match problem");

  GwapObjective objective(p, model);
  objective.set_phi_len(init.phi.size());

  solver::Options sopt;
  sopt.max_outer = opt.max_outer;
  sopt.max_inner = opt.max_ncg;
  sopt.rho_pen = opt.rho_pen;
  sopt.gamma0 = opt.gamma0;
  sopt.tol = opt.tol;

  const solver::Result r = solver::maximize(objective, pack(init.phi), sopt);

  GwapResult out;
  out.strategy.kind = p.kind;
  out.strategy.phi = project_strategy(p, unpack(r.x));
  out.trace = r.trace;
  out.best_objective = r.best_objective;
  return out;
}

dsp::ChannelModel adversary_channel(const std::string& fading,
                                    double noise_variance) {
  if (fading == "none") {
    dsp::ChannelModel ch;
    ch.noise_variance = noise_variance;
    return ch;
  }
  if (fading == "high") return dsp::rayleigh_channel(4, noise_variance, 0.0);
  if (fading == "low") return dsp::rayleigh_channel(4, noise_variance, 20.0);
  throw SchemaError("unknown fading regime: " + fading);
}

namespace {

std::vector<Index> pick_class_slices(const data::Dataset& ds, int cls,
                                     int count, std::uint64_t seed) {
  std::vector<Index> idx;
  for (Index i = 0; i < static_cast<Index>(ds.slices.size()); ++i)
    if (ds.slices[i].label == cls) idx.push_back(i);
  if (idx.empty())
    throw std::invalid_argument("no optimization slices for class " +
                                std::to_string(cls));
  Rng rng(mix_seed(seed, 0x5E1Cu + static_cast<std::uint64_t>(cls)));
  for (Index i = static_cast<Index>(idx.size()) - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
  if (static_cast<Index>(idx.size()) > count) idx.resize(count);
  return idx;
}

std::string problem_digest(AttackKind kind, int source, int target,
                           const AttackConfig& c, const data::Dataset& ds) {
  std::ostringstream os;
  os << (kind == AttackKind::Jamming ? "jam" : "syn") << '|' << source << '|'
     << target << '|' << c.eps << '|' << c.nj << '|' << c.taps << '|'
     << c.ber_max << '|' << c.e_max << '|' << c.fading << '|' << c.num_slices
     << '|' << c.seed << '|' << ds.seed << '|' << ds.classes.size();
  return digest_hex(os.str());
}

}  // namespace

GwapProblem build_problem(AttackKind kind, const nn::Classifier& model,
                          const data::Dataset& optimization_set,
                          int payload_or_source_class,
                          const AttackConfig& config) {
  if (model.input_len != optimization_set.n_i)
    throw std::invalid_argument("model and dataset input lengths differ");

  GwapProblem p;
  p.kind = kind;
  p.n_i = optimization_set.n_i;
  p.class_weights = RVec::Zero(model.num_classes());
  p.constraints.ber_max = config.ber_max;
  p.constraints.box_epsilon = config.eps;

  const bool external_payload =
      kind == AttackKind::Synthesis && payload_or_source_class < 0;
  if (external_payload &&
      optimization_set.kind != data::DatasetKind::Fingerprint)
    throw std::invalid_argument(
        "external synthesis needs a payload class on modulation datasets");

  p.scheme = external_payload
                 ? optimization_set.scheme_for(0)
                 : optimization_set.scheme_for(payload_or_source_class);

  // the adversary channel: jamming carries no separate receiver-noise term
  // (the legit slice already contains it); synthesis is received alone
  double noise_var = 0.0;
  if (kind == AttackKind::Synthesis)
    noise_var = dsp::noise_variance_for_esn0(p.scheme, config.aws_noise_snr_db);
  const dsp::ChannelModel chan = adversary_channel(config.fading, noise_var);

  const Index nsym = p.n_i / p.scheme.samples_per_symbol;
  std::vector<Index> chosen;
  if (!external_payload)
    chosen = pick_class_slices(optimization_set, payload_or_source_class,
                               config.num_slices, config.seed);

  const int s_count =
      external_payload ? config.num_slices : static_cast<int>(chosen.size());
  for (int s = 0; s < s_count; ++s) {
    GwapSlice gs;
    gs.channel_seed = mix_seed(config.seed, 0xC4A0u + s);
    gs.channel = dsp::sample_realization(chan, p.n_i, gs.channel_seed);
    if (kind == AttackKind::Jamming) {
      const data::Slice& sl = optimization_set.slices[chosen[s]];
      gs.legit = sl.iq;
      gs.tx_bits = sl.meta.tx_bits;
      gs.offset = Rng(mix_seed(config.seed, 0x0FF0u + s))
                      .uniform_index(p.n_i);
    } else if (external_payload) {
      const std::uint64_t pseed = mix_seed(config.seed, 0xBB00u + s);
      gs.tx_bits =
          dsp::random_bits(nsym * p.scheme.bits_per_symbol(), pseed);
      gs.payload = dsp::modulate(gs.tx_bits, p.scheme);
    } else {
      const data::Slice& sl = optimization_set.slices[chosen[s]];
      gs.payload = sl.iq;
      gs.tx_bits = sl.meta.tx_bits;
    }
    p.has_tx_bits = p.has_tx_bits && !gs.tx_bits.empty();
    p.slices.push_back(std::move(gs));
  }

  // energy budget: jamming defaults to RMS amplitude eps over the block;
  // synthesis to twice the payload energy
  if (config.e_max > 0.0) {
    p.constraints.e_max = config.e_max;
  } else if (kind == AttackKind::Jamming) {
    p.constraints.e_max =
        std::max(config.eps * config.eps * static_cast<double>(config.nj),
                 1e-12);
  } else {
    double mean_e = 0.0;
    for (const auto& s : p.slices) mean_e += dsp::energy(s.payload);
    mean_e /= static_cast<double>(p.slices.size());
    p.constraints.e_max = 2.0 * mean_e;
  }

  p.evm_threshold = calibrate_evm_threshold(p.scheme, config.ber_max,
                                            mix_seed(config.seed, 0xCA11u));
  return p;
}

namespace {

AttackArtifact run_attack(AttackKind kind, const nn::Classifier& model,
                          const data::Dataset& ds, int source, int target,
                          const AttackConfig& config) {
  GwapProblem p = build_problem(kind, model, ds, source, config);
  for (Index c = 0; c < p.class_weights.size(); ++c)
    p.class_weights[c] = 0.0;
  if (target >= 0) p.class_weights[target] += 1.0;
  if (kind == AttackKind::Jamming) {
    p.class_weights[source] -= 1.0;
    if (config.adversary_class >= 0)
      p.class_weights[config.adversary_class] -= 1.0;
  } else if (source >= 0) {
    p.class_weights[source] -= 1.0;  // rogue payload class
  }

  AttackStrategy init;
  init.kind = kind;
  if (kind == AttackKind::Jamming) {
    init.phi = CVec(config.nj);
    Rng rng(mix_seed(config.seed, 0x1A17u));
    const double var = std::pow(config.eps / 10.0, 2);
    for (Index i = 0; i < config.nj; ++i)
      init.phi[i] = var > 0.0 ? rng.cnormal(var) : Cplx{0.0, 0.0};
  } else {
    init = identity_fir(config.taps);
  }

  const GwapResult r = solve_gwap(p, model, init, config.solver);

  AttackArtifact a;
  a.kind = kind;
  a.phi = r.strategy.phi;
  a.eps = config.eps;
  a.ber_max = config.ber_max;
  a.e_max = p.constraints.e_max;
  a.fading = config.fading;
  a.scheme_name = dsp::to_string(p.scheme.kind);
  a.source_class = source;
  a.target_class = target;
  a.rogue = kind == AttackKind::Jamming ? config.adversary_class >= 0
                                        : source >= 0;
  a.n_i = p.n_i;
  for (const auto& s : p.slices) a.channel_seeds.push_back(s.channel_seed);
  a.problem_digest = problem_digest(kind, source, target, config, ds);
  a.best_objective = r.best_objective;
  return a;
}

}  // namespace

AttackArtifact attack_awj_untargeted(const nn::Classifier& model,
                                     const data::Dataset& optimization_set,
                                     int source_class,
                                     const AttackConfig& config) {
  return run_attack(AttackKind::Jamming, model, optimization_set, source_class,
                    -1, config);
}

AttackArtifact attack_awj_targeted(const nn::Classifier& model,
                                   const data::Dataset& optimization_set,
                                   int source_class, int target_class,
                                   const AttackConfig& config) {
  if (source_class == target_class)
    throw std::invalid_argument("target class equals source class");
  return run_attack(AttackKind::Jamming, model, optimization_set, source_class,
                    target_class, config);
}

AttackArtifact attack_aws(const nn::Classifier& model,
                          const data::Dataset& optimization_set,
                          int target_class, int payload_class,
                          const AttackConfig& config) {
  if (payload_class == target_class)
    throw std::invalid_argument("target class equals payload class");
  return run_attack(AttackKind::Synthesis, model, optimization_set,
                    payload_class, target_class, config);
}

void save_artifact(const AttackArtifact& a, const std::string& path) {
  json j;
  j["format"] = 1;
  j["kind"] = a.kind == AttackKind::Jamming ? "jamming" : "synthesis";
  json phi = json::array();
  for (Index i = 0; i < a.phi.size(); ++i)
    phi.push_back({a.phi[i].real(), a.phi[i].imag()});
  j["phi"] = phi;
  j["eps"] = a.eps;
  j["ber_max"] = a.ber_max;
  j["e_max"] = a.e_max;
  j["fading"] = a.fading;
  j["scheme"] = a.scheme_name;
  j["source_class"] = a.source_class;
  j["target_class"] = a.target_class;
  j["rogue"] = a.rogue;
  j["n_i"] = a.n_i;
  j["channel_seeds"] = a.channel_seeds;
  j["problem_digest"] = a.problem_digest;
  j["best_objective"] = a.best_objective;
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << j.dump(2) << "\n";
}

AttackArtifact load_artifact(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw SchemaError("bad attack artifact: " + std::string(e.what()));
  }
  if (j.value("format", -1) != 1)
    throw SchemaError("unsupported artifact format");
  AttackArtifact a;
  a.kind = j.at("kind").get<std::string>() == "jamming"
               ? AttackKind::Jamming
               : AttackKind::Synthesis;
  const auto& phi = j.at("phi");
  a.phi = CVec(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i)
    a.phi[i] = Cplx{phi[i][0].get<double>(), phi[i][1].get<double>()};
  a.eps = j.at("eps").get<double>();
  a.ber_max = j.at("ber_max").get<double>();
  a.e_max = j.at("e_max").get<double>();
  a.fading = j.at("fading").get<std::string>();
  a.scheme_name = j.at("scheme").get<std::string>();
  a.source_class = j.at("source_class").get<int>();
  a.target_class = j.at("target_class").get<int>();
  a.rogue = j.at("rogue").get<bool>();
  a.n_i = j.at("n_i").get<Index>();
  a.channel_seeds = j.at("channel_seeds").get<std::vector<std::uint64_t>>();
  a.problem_digest = j.at("problem_digest").get<std::string>();
  a.best_objective = j.at("best_objective").get<double>();
  return a;
}

}  // namespace wadv::whitebox
