#ifndef WADV_FIRNET_HPP
#define WADV_FIRNET_HPP

#include <string>
#include <vector>

#include "wadv/dsp.hpp"
#include "wadv/nn.hpp"

namespace wadv::firnet {

/// Trainable complex FIR layer. Starts as the identity (tap 0 = 1, rest 0);
/// the box bound applies to the deviation from that initialization so the
/// identity start survives any epsilon.
struct FirLayer {
  CVec taps;
  CVec init;
  double box_epsilon = 0.1;
};

FirLayer make_fir_layer(Index num_taps, double box_epsilon);

/// One FIR-layer stack per target class.
struct FirNetModel {
  std::vector<std::vector<FirLayer>> banks;  // [target][layer]
  double box_epsilon = 0.1;

  Index num_classes() const { return static_cast<Index>(banks.size()); }
  Index num_layers() const {
    return banks.empty() ? 0 : static_cast<Index>(banks[0].size());
  }
  Index num_taps() const {
    return banks.empty() || banks[0].empty() ? 0 : banks[0][0].taps.size();
  }
};

FirNetModel make_firnet(Index num_classes, Index num_taps, double box_epsilon,
                        Index num_layers = 1);

/// Sequential complex FIR convolutions of the target-conditioned bank.
CVec firnet_forward(const FirNetModel& net, const CVec& z, Index target);

/// Clamps every layer's deviation from its init into the box.
void project_firnet(FirNetModel& net);

/// Simulated receiver chain D(P(H(.))): per-transmission channel draws, an
/// optional normalization step P, and the frozen classifier D. Exposes only
/// classifier outputs; weights and input gradients stay hidden unless the
/// graybox test switch was enabled at construction.
class FeedbackOracle {
 public:
  FeedbackOracle(nn::Classifier model, dsp::ChannelModel channel,
                 bool normalize, std::uint64_t seed,
                 bool allow_graybox = false);

  Index num_classes() const {
    return static_cast<Index>(model_.classes.size());
  }
  Index input_len() const { return model_.input_len; }

  /// Softmax outputs for a batch transmitted inside one coherence window:
  /// item i sees the channel draw derived from (seed, window, i).
  std::vector<RVec> query_softmax(const std::vector<CVec>& tx,
                                  std::uint64_t window) const;

  /// 1-bit feedback: number of batch items the receiver accepted, i.e.
  /// classified as their embedded target.
  Index query_acks(const std::vector<CVec>& tx,
                   const std::vector<Index>& targets,
                   std::uint64_t window) const;

  dsp::ChannelRealization channel_draw(Index n, std::uint64_t window,
                                       Index item) const;
  bool normalizes() const { return normalize_; }

  /// Graybox regression path only; throws unless enabled.
  const nn::Classifier& graybox_model() const;

 private:
  nn::Classifier model_;
  dsp::ChannelModel channel_;
  bool normalize_ = false;
  std::uint64_t seed_ = 0;
  bool allow_graybox_ = false;
};

enum class FeedbackMode { Softmax, OneBit };

struct FirnetBatchItem {
  const CVec* payload = nullptr;
  Index target = 0;
};

/// Softmax mode: mean negative log-likelihood of the targets under the
/// oracle. OneBit mode: miss fraction (M - A) / M.
double firnet_loss(const FeedbackOracle& oracle, const FirNetModel& net,
                   const std::vector<FirnetBatchItem>& batch,
                   FeedbackMode mode, std::uint64_t window);

/// Exact gradient of the softmax-mode batch loss with respect to the stacked
/// tap deviations (re/im interleaved, banks then layers then taps), via
/// backprop through the simulator. Graybox test path only.
RVec firnet_graybox_gradient(const FirNetModel& net,
                             const FeedbackOracle& oracle,
                             const std::vector<FirnetBatchItem>& batch,
                             std::uint64_t window);

struct FirnetHyper {
  int batch = 100;
  int steps = 400;
  double lr = 0.0;       // 0 = scale with box_epsilon
  double spsa_c = 0.0;   // probe radius; 0 = scale with box_epsilon
  int spsa_avg = 1;      // gradient estimates averaged per step
  std::uint64_t seed = 0;
  FeedbackMode mode = FeedbackMode::Softmax;
  bool graybox = false;  // exact backprop through the simulator (tests)
  bool round_robin_targets = false;  // default: random embedded labels
  int eval_every = 25;
  int eval_batch = 200;
  double collapse_threshold = 0.75;
};

struct FirnetTrainResult {
  std::vector<double> loss_curve;
  std::vector<double> fooling_curve;  // sampled every eval_every steps
  double final_fooling = 0.0;
  bool collapsed = false;
  Index collapsed_class = -1;
  double collapse_fraction = 0.0;
};

/// Blackbox training: simultaneous-perturbation gradient estimates on the
/// stacked tap deviations (two oracle calls per estimate), box projection
/// after every step. Channel draws are redrawn every batch.
FirnetTrainResult train_firnet(FirNetModel& net, const FeedbackOracle& oracle,
                               const std::vector<CVec>& payloads,
                               const std::vector<Index>& targets,
                               const FirnetHyper& hyper);

/// Fraction of (payload, target) probes classified as the target; also
/// reports the prediction concentration used for collapse detection.
struct FoolingEval {
  double fooling_rate = 0.0;
  Index top_class = -1;
  double top_fraction = 0.0;
};
FoolingEval eval_fooling(const FirNetModel& net, const FeedbackOracle& oracle,
                         const std::vector<CVec>& payloads,
                         const std::vector<Index>& targets, int count,
                         std::uint64_t window);

void save_firnet(const FirNetModel& net, const std::string& path);
FirNetModel load_firnet(const std::string& path);

}  // namespace wadv::firnet

#endif  // WADV_FIRNET_HPP
