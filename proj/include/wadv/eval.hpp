#ifndef WADV_EVAL_HPP
#define WADV_EVAL_HPP

#include <string>
#include <vector>

#include "wadv/data.hpp"
#include "wadv/firnet.hpp"
#include "wadv/nn.hpp"
#include "wadv/whitebox.hpp"

namespace wadv::eval {

struct ConfusionResult {
  Mat matrix;  // row-normalized over true classes
  double accuracy = 0.0;
  std::vector<int> support;  // slices per true class
};

ConfusionResult confusion_matrix(const nn::Classifier& model,
                                 const data::Dataset& ds);

struct FoolingMatrix {
  Mat cells;               // rows: source class, cols: target class
  Eigen::MatrixXi counts;  // attacked slices per cell
};

struct ConstraintAudit {
  Index slice = 0;
  std::uint64_t seed = 0;
  double ber = 0.0;
  double energy = 0.0;
  bool ber_ok = true;
  bool energy_ok = true;
  bool box_ok = true;
};

struct SweepPoint {
  double eps = 0.0;
  Index block_len = 0;  // N_J or M
  double attacked_accuracy = 0.0;
  double stderr_ = 0.0;
};

struct EvalReport {
  int schema_version = 1;
  std::string kind;  // "attack", "replay", "fgsm", "sweep", "confusion"
  std::string config_digest;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> classes;
  double clean_accuracy = 0.0;
  double attacked_accuracy = 0.0;
  double attacked_accuracy_stderr = 0.0;
  double fooling_rate = 0.0;
  double fooling_rate_stderr = 0.0;
  Mat confusion;           // clean confusion over the evaluated slices
  Mat attacked_confusion;  // row-normalized
  FoolingMatrix fooling;
  std::vector<double> per_class_rates;
  std::vector<ConstraintAudit> audits;
  std::vector<SweepPoint> sweep;
};

struct EvalOptions {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int max_slices_per_class = 0;  // 0 = every test slice of the class
  double aws_noise_snr_db = 20.0;
};

/// Applies a solved strategy to held-out slices with fresh channel draws and
/// offsets; reports attacked accuracy, fooling, and per-slice hard audits.
EvalReport run_attack_eval(const nn::Classifier& model,
                           const whitebox::AttackArtifact& artifact,
                           const data::Dataset& test_set,
                           const EvalOptions& opt);

/// One artifact per (source, target) pair assembled into a fooling matrix.
FoolingMatrix fooling_matrix_from_artifacts(
    const nn::Classifier& model,
    const std::vector<whitebox::AttackArtifact>& artifacts,
    const data::Dataset& test_set, const EvalOptions& opt);

/// Replay attack: retransmit eavesdropped slices through the adversary's
/// channel; fooling per imitated device.
EvalReport baseline_replay(const nn::Classifier& model,
                           const data::Dataset& test_set,
                           const dsp::ChannelModel& adversary_channel,
                           const EvalOptions& opt);

/// Single-step signed-gradient jamming computed per slice against one
/// channel draw. in_sample=true evaluates on the same draw the perturbation
/// was computed for; false redraws the channel (generalization probe).
EvalReport baseline_fgsm(const nn::Classifier& model,
                         const data::Dataset& test_set, double eps,
                         const std::string& fading, bool in_sample,
                         const EvalOptions& opt);

/// FIRNet evaluation against the oracle's channel with fresh windows.
EvalReport eval_firnet(const firnet::FirNetModel& net,
                       const firnet::FeedbackOracle& oracle,
                       const std::vector<CVec>& payloads,
                       const std::vector<Index>& targets,
                       const EvalOptions& opt);

std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(const std::string& text);

/// Writes report-<digest>.json plus optional CSV matrices and SVG plots,
/// all named from the report's config digest. Returns the file paths.
std::vector<std::string> emit_report(const EvalReport& r,
                                     const std::vector<std::string>& formats,
                                     const std::string& outdir);

}  // namespace wadv::eval

#endif  // WADV_EVAL_HPP
