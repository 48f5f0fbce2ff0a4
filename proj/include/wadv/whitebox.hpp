#ifndef WADV_WHITEBOX_HPP
#define WADV_WHITEBOX_HPP

#include <string>
#include <vector>

#include "wadv/data.hpp"
#include "wadv/dsp.hpp"
#include "wadv/modulation.hpp"
#include "wadv/nn.hpp"
#include "wadv/solver.hpp"

namespace wadv::whitebox {

enum class AttackKind { Jamming, Synthesis };

/// The adversary's free variables: a jamming I/Q block of N_J samples or a
/// complex FIR of M taps applied to a payload.
struct AttackStrategy {
  AttackKind kind = AttackKind::Jamming;
  CVec phi;
};

AttackStrategy identity_fir(Index taps);

/// Jamming emits phi itself (tiled later across the slice); synthesis
/// convolves the payload with phi. Payload required iff synthesis.
CVec adversary_waveform(const AttackStrategy& strategy, const CVec* payload);

struct GwapConstraints {
  double ber_max = 1e-2;
  double e_max = 1.0;
  double box_epsilon = 0.1;
};

/// One optimization slice with its frozen adversary-channel draw. Gradients
/// are defined against the frozen realization only.
struct GwapSlice {
  CVec legit;                       // received legit waveform (jamming)
  CVec payload;                     // x_BB (synthesis)
  std::vector<std::uint8_t> tx_bits;
  dsp::ChannelRealization channel;  // frozen draw of the adversary channel
  Index offset = 0;                 // circular tile offset (jamming)
  std::uint64_t channel_seed = 0;
};

struct GwapProblem {
  AttackKind kind = AttackKind::Jamming;
  RVec class_weights;               // omega_c, one entry per class
  std::vector<GwapSlice> slices;
  dsp::ModulationScheme scheme;     // decoding scheme for the BER constraint
  GwapConstraints constraints;
  double evm_threshold = 0.0;       // surrogate threshold matching ber_max
  Index n_i = 0;
  bool has_tx_bits = true;
};

/// TNN input for slice s under strategy phi.
CVec received(const GwapProblem& p, const GwapSlice& s, const CVec& phi);

/// Exact chain-rule gradient of f_cls(z_s) w.r.t. phi through the frozen
/// channel realization, packed complex (re/im partials).
CVec strategy_gradient(const GwapProblem& p, const nn::Classifier& model,
                       const AttackStrategy& strategy, Index cls,
                       Index slice_index);

/// Hard audit form: [BER - ber_max, energy - e_max, |phi_re_i| - eps...,
/// |phi_im_i| - eps...]; satisfied entries are <= 0. BER by demodulation.
RVec evaluate_constraints(const GwapProblem& p, const AttackStrategy& strategy,
                          Index slice_index);

/// Offline calibration of the solver's differentiable surrogate for C1:
/// the mean nearest-constellation-point squared error measured at the noise
/// level where the demodulated BER equals ber_max.
double calibrate_evm_threshold(const dsp::ModulationScheme& scheme,
                               double ber_max, std::uint64_t seed);

/// Projects phi onto the hard box (|re|,|im| <= eps componentwise) and the
/// energy ball for the problem's attack kind.
CVec project_strategy(const GwapProblem& p, const CVec& phi);

struct GwapOptions {
  int max_outer = 8;
  int max_ncg = 10;
  double rho_pen = 1.0;
  double gamma0 = 0.1;
  double tol = 1e-6;
};

struct GwapResult {
  AttackStrategy strategy;
  solver::Trace trace;  // objective entries are (1/S) sum_s sum_c w_c f_c
  double best_objective = 0.0;
};

GwapResult solve_gwap(const GwapProblem& p, const nn::Classifier& model,
                      const AttackStrategy& init, const GwapOptions& opt);

/// ---- attack drivers ----

struct AttackConfig {
  double eps = 0.1;
  Index nj = 64;         // jamming block length
  Index taps = 8;        // synthesis FIR length
  double ber_max = 1e-2;
  double e_max = 0.0;    // 0 = derive from eps (jamming) / payload (synthesis)
  std::string fading = "none";  // none | high | low
  double aws_noise_snr_db = 20.0;
  int num_slices = 16;
  int adversary_class = -1;  // rogue class index; -1 = external
  std::uint64_t seed = 0;
  GwapOptions solver;
};

dsp::ChannelModel adversary_channel(const std::string& fading,
                                    double noise_variance);

/// Builds the per-class-weighted problem from dataset slices; exposed for
/// tests and the evaluation module.
GwapProblem build_problem(AttackKind kind, const nn::Classifier& model,
                          const data::Dataset& optimization_set,
                          int payload_or_source_class,
                          const AttackConfig& config);

struct AttackArtifact {
  AttackKind kind = AttackKind::Jamming;
  CVec phi;
  double eps = 0.0;
  double ber_max = 0.0;
  double e_max = 0.0;
  std::string fading;
  std::string scheme_name;
  int source_class = -1;  // c_L for jamming, payload class c_A for synthesis
  int target_class = -1;  // -1 for untargeted
  bool rogue = false;
  Index n_i = 0;
  std::vector<std::uint64_t> channel_seeds;
  std::string problem_digest;
  double best_objective = 0.0;
};

/// Untargeted jamming against one legitimate class.
AttackArtifact attack_awj_untargeted(const nn::Classifier& model,
                                     const data::Dataset& optimization_set,
                                     int source_class,
                                     const AttackConfig& config);

/// Targeted jamming: push slices of source_class toward target_class.
AttackArtifact attack_awj_targeted(const nn::Classifier& model,
                                   const data::Dataset& optimization_set,
                                   int source_class, int target_class,
                                   const AttackConfig& config);

/// Waveform synthesis toward target_class. payload_class >= 0 uses that
/// rogue class's optimization slices as payloads (and suppresses the class);
/// payload_class == -1 is an external adversary with clean generated
/// payloads.
AttackArtifact attack_aws(const nn::Classifier& model,
                          const data::Dataset& optimization_set,
                          int target_class, int payload_class,
                          const AttackConfig& config);

void save_artifact(const AttackArtifact& a, const std::string& path);
AttackArtifact load_artifact(const std::string& path);

}  // namespace wadv::whitebox

#endif  // WADV_WHITEBOX_HPP
