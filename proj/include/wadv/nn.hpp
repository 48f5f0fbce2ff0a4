#ifndef WADV_NN_HPP
#define WADV_NN_HPP

#include <string>
#include <vector>

#include "wadv/common.hpp"

namespace wadv::nn {

enum class LayerKind { Conv1d, Relu, MaxPool, Dense, Dropout, Softmax };

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  int filters = 0;
  int width = 0;
  int stride = 1;    // conv1d
  int pool = 0;      // maxpool window
  int units = 0;     // dense
  double rate = 0.0; // dropout
};

LayerSpec conv1d(int filters, int width, int stride = 1);
LayerSpec relu();
LayerSpec maxpool(int size);
LayerSpec dense(int units);
LayerSpec dropout(double rate);
LayerSpec softmax();

struct LayerParams {
  Mat W;   // conv: filters x (in_ch*width); dense: units x in_dim
  RVec b;
};

/// Feed-forward classifier over complex baseband slices. The complex input
/// is presented to the layers as a 2 x N real matrix (I and Q rows).
struct Classifier {
  std::vector<LayerSpec> layers;
  std::vector<LayerParams> params;  // parallel to layers; empty if no params
  std::vector<std::string> classes;
  Index input_len = 0;  // N_I complex samples

  Index num_classes() const { return static_cast<Index>(classes.size()); }
};

/// Validates the layer chain against the input length and returns the
/// (channels, length) shape after each layer; dense outputs are (units, 1).
std::vector<std::pair<Index, Index>> shape_chain(
    const std::vector<LayerSpec>& layers, Index input_len);

/// Builds a classifier with seeded fan-in-scaled uniform init.
Classifier make_classifier(std::vector<LayerSpec> layers,
                           std::vector<std::string> classes, Index input_len,
                           std::uint64_t seed);

/// Reduced-depth modulation-recognition network (default 3 conv blocks;
/// deeper variants available via conv_blocks).
Classifier modulation_surrogate(std::vector<std::string> classes,
                                Index input_len, std::uint64_t seed,
                                int conv_blocks = 3);

/// Device-fingerprinting network: two conv/ReLU blocks with dropout 0.5
/// followed by two dense layers.
Classifier fingerprint_surrogate(std::vector<std::string> classes,
                                 Index input_len, std::uint64_t seed);

/// Class activation probabilities; dropout disabled.
RVec forward(const Classifier& model, const CVec& z);

/// argmax with ties broken toward the lowest class index
Index argmax_class(const RVec& probs);
Index predict(const Classifier& model, const CVec& z);

/// Exact reverse-mode gradient of the cls-th softmax output with respect to
/// the input, packed as d f / d Re(z[n]) + j * d f / d Im(z[n]).
CVec input_gradient(const Classifier& model, const CVec& z, Index cls);

/// One forward pass shared by the gradients of several output classes.
struct ForwardGradients {
  RVec probs;
  std::vector<CVec> gradients;  // one per requested class
};
ForwardGradients forward_with_gradients(const Classifier& model, const CVec& z,
                                        const std::vector<Index>& classes);

struct LabeledExample {
  const CVec* iq = nullptr;
  int label = 0;
};

struct TrainHyper {
  double l2_lambda = 1e-4;
  double lr = 1e-4;
  int epochs = 10;
  int batch = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> loss_curve;  // [0] = loss at init, then one per epoch
  std::vector<double> accuracy_curve;
};

/// Adam + categorical cross-entropy with l2 penalty on the kernels.
/// Deterministic given the seed, independent of the worker count.
TrainResult train(Classifier& model,
                  const std::vector<LabeledExample>& examples,
                  const TrainHyper& hyper);

double dataset_loss(const Classifier& model,
                    const std::vector<LabeledExample>& examples);
double accuracy(const Classifier& model,
                const std::vector<LabeledExample>& examples);

double weight_l2_norm(const Classifier& model);

/// Checkpoint: magic, u32 JSON header length, JSON header (layers, classes,
/// input length, version), then float32 weight blob. Weights are snapped to
/// float32 at init and after training so the round trip is bit-exact.
void save_model(const Classifier& model, const std::string& path);
Classifier load_model(const std::string& path);

}  // namespace wadv::nn

#endif  // WADV_NN_HPP
