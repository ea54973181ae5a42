#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpx/fixed_point.hpp"
#include "mpx/formats.hpp"
#include "mpx/linalg.hpp"
#include "mpx/random.hpp"

namespace mpx {

enum class Activation { ReLU, Tanh };
enum class StorageKind { Float32, Float16, Fixed };

/// Every training-time precision decision in one place: where parameters and
/// activations live, how values are rounded into that storage, the static
/// loss scale 2^k, whether a float32 master copy accumulates updates, and
/// whether matrix products accumulate in float32.
struct PrecisionPolicy {
  StorageKind storage = StorageKind::Float32;
  FixedFormat fixed_format{3, 12, true};
  FixedRounding rounding = FixedRounding::Nearest;
  int loss_scale_exponent = 0;
  bool master_copy = false;
  bool accumulate_widened = false;
  std::optional<double> clip_threshold;

  bool is_fixed() const { return storage == StorageKind::Fixed; }
  /// Storage float format; Fixed storage computes its products in float32.
  const FloatFormat& storage_float_format() const;
  const FloatFormat& accumulate_format() const;

  void validate() const;
};

struct Dataset {
  int feature_dim = 0;
  int num_classes = 0;
  std::vector<double> features; // samples x feature_dim, row-major
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  const double* sample(int i) const { return features.data() + static_cast<size_t>(i) * feature_dim; }
};

/// Gaussian class blobs on a circle, 2-D.
Dataset make_blobs(int samples, int classes, double spread, RandomSource& rng);
/// Two interleaved half-moons, 2-D, 2 classes.
Dataset make_moons(int samples, double noise, RandomSource& rng);
/// One sample per line: feature values then an integer label, comma-separated.
Dataset load_csv_dataset(std::istream& is);

struct SplitDataset {
  Dataset train;
  Dataset test;
};
SplitDataset split_dataset(const Dataset& d, double train_fraction, RandomSource& rng);

struct MlpModel {
  std::vector<int> layer_sizes;
  Activation activation = Activation::ReLU;
  // layer l maps layer_sizes[l] -> layer_sizes[l+1]; weights[l] is (out x in)
  // row-major, storage-format carriers
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  // float32 carriers, present when the policy keeps a master copy
  std::vector<std::vector<double>> master_weights;
  std::vector<std::vector<double>> master_biases;

  int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
};

/// Glorot-uniform init, quantized into the policy storage.
MlpModel init_model(const std::vector<int>& layer_sizes, Activation act,
                    const PrecisionPolicy& policy, RandomSource& rng);

struct Batch {
  int size = 0;
  int features = 0;
  std::vector<double> x; // size x features
  std::vector<int> y;
};

struct ForwardCache {
  // quantized activations per layer, a[0] = quantized input, layout batch x width
  std::vector<std::vector<double>> a;
  // pre-activations in the accumulation format, batch x width
  std::vector<std::vector<double>> z;
  std::vector<float> probs; // batch x classes, float32 softmax
  double loss = 0.0;        // mean cross-entropy, accumulated from float32 terms
  bool finite = true;
};

/// Run the policy forward path; matrix products go through gemm_mixed with
/// input = storage and accumulate = float32 when widened. Softmax and the
/// loss are always float32.
ForwardCache forward(const MlpModel& model, const Batch& batch, const PrecisionPolicy& policy,
                     RandomSource& rng);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  long zero_flushed = 0; // entries rounded to zero by storage quantization
  bool scale_overflow = false;
};

/// Backpropagation with the loss pre-scaled by 2^k; every gradient tensor
/// carries the 2^k factor and is quantized into storage (where the
/// zero-flush counting happens).
Gradients backward(const MlpModel& model, const Batch& batch, const ForwardCache& cache,
                   const PrecisionPolicy& policy, RandomSource& rng);

/// Unscale by 2^-k, clip if configured, update master (float32) or storage
/// weights directly in storage arithmetic. Returns the clipped-entry count.
long optimizer_step(MlpModel& model, const Gradients& grads, double learning_rate,
                    const PrecisionPolicy& policy, RandomSource& rng);

/// Policy-path accuracy; quantization during evaluation uses nearest
/// rounding so inference is deterministic. Fraction of correct argmax.
double evaluate(const MlpModel& model, const Dataset& d, const PrecisionPolicy& policy);

struct EpochRecord {
  int epoch;
  double loss;
  double test_accuracy;
  long zero_flushed;
  long clipped;
};

struct TrainingReport {
  std::vector<EpochRecord> epochs;
  bool diverged = false;
};

struct TrainOptions {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.05;
  uint64_t seed = 1;
};

/// Full run: init, epoch loop, per-epoch evaluation. Deterministic given the
/// seed. Row 0 is the initial evaluation; divergence aborts with a partial
/// report.
TrainingReport train(MlpModel& model, const SplitDataset& data, const PrecisionPolicy& policy,
                     const TrainOptions& opt);

/// `epoch,loss,test_accuracy,zero_flushed_count,clipped_count` rows.
void write_report_csv(std::ostream& os, const TrainingReport& report);

// ---------------------------------------------------------------------------
// config-file front end (flat key=value, the training external interface)

class Config;

struct TrainingSetup {
  std::vector<int> layer_sizes;
  Activation activation = Activation::ReLU;
  PrecisionPolicy policy;
  TrainOptions options;
  SplitDataset data;
};

/// Build a full run from a key=value config: layer_sizes, policy fields,
/// epochs, batch_size, learning_rate, seed and the dataset spec.
/// `default_seed` applies when the config does not pin one.
TrainingSetup setup_from_config(const Config& cfg, uint64_t default_seed = 1);

/// Seed one stream, generate data, init the model, train.
TrainingReport run_training(const TrainingSetup& setup);

// ---------------------------------------------------------------------------
// float64 reference path: same network function, no quantization anywhere.
// Serves as the oracle for gradient and loss-scaling checks.

struct RefCache {
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> z;
  std::vector<double> probs;
  double loss = 0.0;
};

RefCache reference_forward(const MlpModel& model, const Batch& batch);

struct RefGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

/// Reference gradients of (2^k * mean loss).
RefGradients reference_backward(const MlpModel& model, const Batch& batch, const RefCache& cache,
                                int loss_scale_exponent);

} // namespace mpx
