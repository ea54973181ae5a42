#include "mpx/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mpx/config.hpp"

namespace mpx {

namespace {

constexpr uint64_t kTrainStreamSalt = 0xa5a5a5a5deadbeefull;

const FloatFormat& acc_format_for(const PrecisionPolicy& p) {
  if (p.is_fixed()) return FloatFormat::single();
  if (p.accumulate_widened) return FloatFormat::single();
  return p.storage_float_format();
}

double clamp_to_fixed_range(double v, const FixedFormat& fmt) {
  double lo = std::ldexp(static_cast<double>(fmt.raw_min()), -fmt.fraction_bits);
  double hi = std::ldexp(static_cast<double>(fmt.raw_max()), -fmt.fraction_bits);
  return std::min(std::max(v, lo), hi);
}

// One storage rounding of v. Counts a flush when a nonzero value lands on
// zero. Fixed storage saturates instead of raising the conversion error.
double quantize_storage(double v, const PrecisionPolicy& p, FixedRounding mode, RandomSource& rng,
                        long* flushes) {
  double q;
  if (p.is_fixed()) {
    double c = clamp_to_fixed_range(v, p.fixed_format);
    q = (mode == FixedRounding::Stochastic ? round_stochastic(c, p.fixed_format, rng)
                                           : round_nearest(c, p.fixed_format))
            .value();
  } else {
    q = round_to_format(v, p.storage_float_format());
  }
  if (flushes && v != 0.0 && q == 0.0) ++*flushes;
  return q;
}

Matrix wrap(int r, int c, const std::vector<double>& vals, const FloatFormat& fmt) {
  return Matrix::quantize(r, c, fmt, vals); // values already on the format grid
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows, m.format);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
  return t;
}

double act_fn(double z, Activation a) {
  return a == Activation::ReLU ? (z > 0 ? z : 0.0) : std::tanh(z);
}

double act_deriv(double z, Activation a) {
  if (a == Activation::ReLU) return z > 0 ? 1.0 : 0.0;
  double t = std::tanh(z);
  return 1.0 - t * t;
}

// gemm input format: storage for float policies, float32 for fixed storage
// (grid values are exact in float32 for the widths the trainer accepts)
const FloatFormat& gemm_input_format(const PrecisionPolicy& p) {
  return p.is_fixed() ? FloatFormat::single() : p.storage_float_format();
}

} // namespace

const FloatFormat& PrecisionPolicy::storage_float_format() const {
  switch (storage) {
    case StorageKind::Float16: return FloatFormat::half();
    case StorageKind::Float32:
    case StorageKind::Fixed: return FloatFormat::single();
  }
  return FloatFormat::single();
}

const FloatFormat& PrecisionPolicy::accumulate_format() const { return acc_format_for(*this); }

void PrecisionPolicy::validate() const {
  if (loss_scale_exponent < 0) throw std::invalid_argument("policy: loss_scale_exponent must be >= 0");
  if (clip_threshold && *clip_threshold <= 0) {
    throw std::invalid_argument("policy: clip_threshold must be positive");
  }
  if (is_fixed()) {
    if (fixed_format.integer_bits + fixed_format.fraction_bits > 23) {
      throw std::invalid_argument("policy: fixed training formats must fit float32 exactly (m + n <= 23)");
    }
  } else if (rounding == FixedRounding::Stochastic) {
    throw std::invalid_argument("policy: stochastic rounding pairs with fixed storage only");
  }
}

Dataset make_blobs(int samples, int classes, double spread, RandomSource& rng) {
  if (samples <= 0 || classes < 2) throw std::invalid_argument("make_blobs: bad sizes");
  Dataset d;
  d.feature_dim = 2;
  d.num_classes = classes;
  d.features.reserve(static_cast<size_t>(samples) * 2);
  d.labels.reserve(samples);
  const double radius = 2.0;
  for (int s = 0; s < samples; ++s) {
    int c = s % classes;
    double angle = 2.0 * M_PI * c / classes;
    d.features.push_back(radius * std::cos(angle) + rng.gaussian(spread));
    d.features.push_back(radius * std::sin(angle) + rng.gaussian(spread));
    d.labels.push_back(c);
  }
  return d;
}

Dataset make_moons(int samples, double noise, RandomSource& rng) {
  if (samples <= 0) throw std::invalid_argument("make_moons: bad size");
  Dataset d;
  d.feature_dim = 2;
  d.num_classes = 2;
  for (int s = 0; s < samples; ++s) {
    int c = s % 2;
    double t = M_PI * rng.uniform();
    double x, y;
    if (c == 0) {
      x = std::cos(t);
      y = std::sin(t);
    } else {
      x = 1.0 - std::cos(t);
      y = 0.5 - std::sin(t);
    }
    d.features.push_back(x + rng.gaussian(noise));
    d.features.push_back(y + rng.gaussian(noise));
    d.labels.push_back(c);
  }
  return d;
}

Dataset load_csv_dataset(std::istream& is) {
  Dataset d;
  std::string line;
  int max_label = -1;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() < 2) throw std::runtime_error("dataset csv: need features and a label per line");
    int dim = static_cast<int>(row.size()) - 1;
    if (d.feature_dim == 0) d.feature_dim = dim;
    if (dim != d.feature_dim) throw std::runtime_error("dataset csv: inconsistent feature count");
    for (int i = 0; i < dim; ++i) {
      if (!std::isfinite(row[i])) throw std::runtime_error("dataset csv: non-finite feature");
      d.features.push_back(row[i]);
    }
    int label = static_cast<int>(row.back());
    if (label < 0) throw std::runtime_error("dataset csv: negative label");
    max_label = std::max(max_label, label);
    d.labels.push_back(label);
  }
  if (d.labels.empty()) throw std::runtime_error("dataset csv: empty");
  d.num_classes = max_label + 1;
  return d;
}

SplitDataset split_dataset(const Dataset& d, double train_fraction, RandomSource& rng) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw std::invalid_argument("split_dataset: fraction must be in (0, 1)");
  }
  std::vector<int> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = d.size() - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng.below(static_cast<uint64_t>(i) + 1)]);
  }
  int n_train = std::max(1, static_cast<int>(d.size() * train_fraction));
  n_train = std::min(n_train, d.size() - 1);
  SplitDataset out;
  for (auto* part : {&out.train, &out.test}) {
    part->feature_dim = d.feature_dim;
    part->num_classes = d.num_classes;
  }
  for (int i = 0; i < d.size(); ++i) {
    Dataset& part = i < n_train ? out.train : out.test;
    const double* f = d.sample(idx[i]);
    part.features.insert(part.features.end(), f, f + d.feature_dim);
    part.labels.push_back(d.labels[idx[i]]);
  }
  return out;
}

MlpModel init_model(const std::vector<int>& layer_sizes, Activation act,
                    const PrecisionPolicy& policy, RandomSource& rng) {
  policy.validate();
  if (layer_sizes.size() < 2) throw std::invalid_argument("init_model: need at least two layers");
  for (int s : layer_sizes) {
    if (s <= 0) throw std::invalid_argument("init_model: layer sizes must be positive");
  }
  MlpModel m;
  m.layer_sizes = layer_sizes;
  m.activation = act;
  RandomSource dummy(0);
  for (int l = 0; l + 1 < static_cast<int>(layer_sizes.size()); ++l) {
    int fan_in = layer_sizes[l], fan_out = layer_sizes[l + 1];
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<size_t>(fan_out) * fan_in);
    for (auto& v : w) v = rng.uniform(-limit, limit);
    std::vector<double> b(fan_out, 0.0);

    std::vector<double> master_w, master_b;
    if (policy.master_copy) {
      master_w.resize(w.size());
      for (size_t i = 0; i < w.size(); ++i) master_w[i] = round_to_format(w[i], FloatFormat::single());
      master_b.assign(b.size(), 0.0);
    }
    std::vector<double> storage_w(w.size());
    const std::vector<double>& src = policy.master_copy ? master_w : w;
    for (size_t i = 0; i < w.size(); ++i) {
      storage_w[i] = quantize_storage(src[i], policy, FixedRounding::Nearest, dummy, nullptr);
    }
    m.weights.push_back(std::move(storage_w));
    m.biases.push_back(std::move(b));
    if (policy.master_copy) {
      m.master_weights.push_back(std::move(master_w));
      m.master_biases.push_back(std::move(master_b));
    }
  }
  return m;
}

ForwardCache forward(const MlpModel& model, const Batch& batch, const PrecisionPolicy& policy,
                     RandomSource& rng) {
  if (batch.features != model.input_dim()) {
    throw std::invalid_argument("forward: batch feature width does not match the input layer");
  }
  const FloatFormat& in_fmt = gemm_input_format(policy);
  const FloatFormat& acc_fmt = policy.accumulate_format();
  const int L = model.num_layers();
  const int B = batch.size;

  ForwardCache cache;
  cache.a.resize(L + 1);
  cache.z.resize(L);

  cache.a[0].resize(batch.x.size());
  for (size_t i = 0; i < batch.x.size(); ++i) {
    cache.a[0][i] = quantize_storage(batch.x[i], policy, policy.rounding, rng, nullptr);
  }

  for (int l = 0; l < L; ++l) {
    int in = model.layer_sizes[l], out = model.layer_sizes[l + 1];
    Matrix a_mat = wrap(B, in, cache.a[l], in_fmt);
    Matrix wt = transpose(wrap(out, in, model.weights[l], in_fmt));
    AccumulationPolicy gp(in_fmt, acc_fmt, acc_fmt);
    Matrix z = gemm_mixed(a_mat, wt, gp);
    auto& zl = cache.z[l];
    zl.resize(static_cast<size_t>(B) * out);
    for (int s = 0; s < B; ++s) {
      for (int j = 0; j < out; ++j) {
        zl[static_cast<size_t>(s) * out + j] = add_round(z.at(s, j), model.biases[l][j], acc_fmt);
      }
    }
    if (l + 1 < L) {
      auto& al = cache.a[l + 1];
      al.resize(zl.size());
      for (size_t i = 0; i < zl.size(); ++i) {
        al[i] = quantize_storage(act_fn(zl[i], model.activation), policy, policy.rounding, rng, nullptr);
      }
    }
  }

  // softmax + cross-entropy in float32
  const int C = model.output_dim();
  cache.probs.resize(static_cast<size_t>(B) * C);
  double loss_sum = 0.0;
  const auto& logits = cache.z[L - 1];
  for (int s = 0; s < B; ++s) {
    float maxv = -HUGE_VALF;
    for (int c = 0; c < C; ++c) maxv = std::max(maxv, static_cast<float>(logits[static_cast<size_t>(s) * C + c]));
    float denom = 0.0f;
    for (int c = 0; c < C; ++c) {
      float e = std::exp(static_cast<float>(logits[static_cast<size_t>(s) * C + c]) - maxv);
      cache.probs[static_cast<size_t>(s) * C + c] = e;
      denom += e;
    }
    for (int c = 0; c < C; ++c) cache.probs[static_cast<size_t>(s) * C + c] /= denom;
    float p = cache.probs[static_cast<size_t>(s) * C + batch.y[s]];
    float ce = -std::log(std::max(p, 1e-30f));
    loss_sum += static_cast<double>(ce);
    if (!std::isfinite(ce)) cache.finite = false;
  }
  cache.loss = loss_sum / B;
  if (!std::isfinite(cache.loss)) cache.finite = false;
  return cache;
}

Gradients backward(const MlpModel& model, const Batch& batch, const ForwardCache& cache,
                   const PrecisionPolicy& policy, RandomSource& rng) {
  const FloatFormat& in_fmt = gemm_input_format(policy);
  const FloatFormat& acc_fmt = policy.accumulate_format();
  const int L = model.num_layers();
  const int B = batch.size;
  const int C = model.output_dim();
  const double scale = std::ldexp(1.0, policy.loss_scale_exponent);

  Gradients g;
  g.weights.resize(L);
  g.biases.resize(L);

  // scaled loss gradient wrt the logits, quantized into storage
  std::vector<double> dz(static_cast<size_t>(B) * C);
  for (int s = 0; s < B; ++s) {
    for (int c = 0; c < C; ++c) {
      size_t i = static_cast<size_t>(s) * C + c;
      double v = (static_cast<double>(cache.probs[i]) - (batch.y[s] == c ? 1.0 : 0.0)) / B;
      dz[i] = quantize_storage(v * scale, policy, policy.rounding, rng, &g.zero_flushed);
    }
  }

  for (int l = L - 1; l >= 0; --l) {
    int in = model.layer_sizes[l], out = model.layer_sizes[l + 1];
    AccumulationPolicy gp(in_fmt, acc_fmt, acc_fmt);

    Matrix dz_mat = wrap(B, out, dz, in_fmt);
    Matrix a_mat = wrap(B, in, cache.a[l], in_fmt);
    Matrix dw = gemm_mixed(transpose(dz_mat), a_mat, gp); // out x in
    auto& gw = g.weights[l];
    gw.resize(dw.data.size());
    for (size_t i = 0; i < gw.size(); ++i) {
      gw[i] = quantize_storage(dw.data[i], policy, policy.rounding, rng, &g.zero_flushed);
      if (!std::isfinite(gw[i])) g.scale_overflow = true;
    }

    auto& gb = g.biases[l];
    gb.assign(out, 0.0);
    for (int j = 0; j < out; ++j) {
      double acc = 0.0;
      for (int s = 0; s < B; ++s) acc = add_round(acc, dz[static_cast<size_t>(s) * out + j], acc_fmt);
      gb[j] = quantize_storage(acc, policy, policy.rounding, rng, &g.zero_flushed);
      if (!std::isfinite(gb[j])) g.scale_overflow = true;
    }

    if (l > 0) {
      Matrix w_mat = wrap(out, in, model.weights[l], in_fmt);
      Matrix da = gemm_mixed(dz_mat, w_mat, gp); // B x in
      std::vector<double> next(static_cast<size_t>(B) * in);
      for (int s = 0; s < B; ++s) {
        for (int j = 0; j < in; ++j) {
          double v = da.at(s, j) * act_deriv(cache.z[l - 1][static_cast<size_t>(s) * in + j], model.activation);
          next[static_cast<size_t>(s) * in + j] =
              quantize_storage(v, policy, policy.rounding, rng, &g.zero_flushed);
        }
      }
      dz = std::move(next);
    }
  }
  return g;
}

long optimizer_step(MlpModel& model, const Gradients& grads, double learning_rate,
                    const PrecisionPolicy& policy, RandomSource& rng) {
  const double unscale = std::ldexp(1.0, -policy.loss_scale_exponent);
  long clipped = 0;
  const FloatFormat& sf = policy.storage_float_format();

  auto step_tensor = [&](std::vector<double>& storage, std::vector<double>* master,
                         const std::vector<double>& grad) {
    for (size_t i = 0; i < storage.size(); ++i) {
      double gv = grad[i] * unscale; // exact binary unscaling
      if (policy.clip_threshold) {
        double t = *policy.clip_threshold;
        if (gv > t) { gv = t; ++clipped; }
        else if (gv < -t) { gv = -t; ++clipped; }
      }
      if (master) {
        double m = round_to_format((*master)[i] - learning_rate * gv, FloatFormat::single());
        (*master)[i] = m;
        storage[i] = quantize_storage(m, policy, policy.rounding, rng, nullptr);
      } else if (policy.is_fixed()) {
        storage[i] = quantize_storage(storage[i] - learning_rate * gv, policy, policy.rounding, rng, nullptr);
      } else {
        // storage-format arithmetic: round the scaled gradient, then the sum
        double u = mul_round(learning_rate, gv, sf);
        storage[i] = add_round(storage[i], -u, sf);
      }
    }
  };

  for (int l = 0; l < model.num_layers(); ++l) {
    step_tensor(model.weights[l], policy.master_copy ? &model.master_weights[l] : nullptr,
                grads.weights[l]);
    step_tensor(model.biases[l], policy.master_copy ? &model.master_biases[l] : nullptr,
                grads.biases[l]);
  }
  return clipped;
}

double evaluate(const MlpModel& model, const Dataset& d, const PrecisionPolicy& policy) {
  if (d.size() == 0) return 0.0;
  PrecisionPolicy eval_policy = policy;
  eval_policy.rounding = FixedRounding::Nearest; // deterministic inference
  RandomSource dummy(0);
  Batch b;
  b.size = d.size();
  b.features = d.feature_dim;
  b.x = d.features;
  b.y = d.labels;
  ForwardCache cache = forward(model, b, eval_policy, dummy);
  const int C = model.output_dim();
  int correct = 0;
  for (int s = 0; s < b.size; ++s) {
    int best = 0;
    for (int c = 1; c < C; ++c) {
      if (cache.probs[static_cast<size_t>(s) * C + c] > cache.probs[static_cast<size_t>(s) * C + best]) best = c;
    }
    if (best == b.y[s]) ++correct;
  }
  return static_cast<double>(correct) / b.size;
}

TrainingReport train(MlpModel& model, const SplitDataset& data, const PrecisionPolicy& policy,
                     const TrainOptions& opt) {
  policy.validate();
  if (data.train.size() == 0 || data.test.size() == 0) {
    throw std::invalid_argument("train: empty split");
  }
  if (data.train.num_classes > model.output_dim()) {
    throw std::invalid_argument("train: more labels than output units");
  }
  RandomSource rng(opt.seed ^ kTrainStreamSalt);
  TrainingReport report;

  auto mean_loss = [&](const Dataset& d) {
    PrecisionPolicy eval_policy = policy;
    eval_policy.rounding = FixedRounding::Nearest;
    RandomSource dummy(0);
    Batch b;
    b.size = d.size();
    b.features = d.feature_dim;
    b.x = d.features;
    b.y = d.labels;
    return forward(model, b, eval_policy, dummy).loss;
  };
  report.epochs.push_back(EpochRecord{0, mean_loss(data.train), evaluate(model, data.test, policy), 0, 0});

  std::vector<int> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    for (int i = data.train.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng.below(static_cast<uint64_t>(i) + 1)]);
    }
    double loss_sum = 0.0;
    long samples_seen = 0;
    long flushed = 0, clipped = 0;
    bool diverged = false;
    for (int start = 0; start < data.train.size(); start += opt.batch_size) {
      int bs = std::min(opt.batch_size, data.train.size() - start);
      Batch b;
      b.size = bs;
      b.features = data.train.feature_dim;
      b.x.reserve(static_cast<size_t>(bs) * b.features);
      for (int i = 0; i < bs; ++i) {
        const double* f = data.train.sample(order[start + i]);
        b.x.insert(b.x.end(), f, f + b.features);
        b.y.push_back(data.train.labels[order[start + i]]);
      }
      ForwardCache cache = forward(model, b, policy, rng);
      if (!cache.finite) { diverged = true; break; }
      Gradients g = backward(model, b, cache, policy, rng);
      if (g.scale_overflow) { diverged = true; break; }
      clipped += optimizer_step(model, g, opt.learning_rate, policy, rng);
      flushed += g.zero_flushed;
      loss_sum += cache.loss * bs;
      samples_seen += bs;
    }
    double epoch_loss = samples_seen > 0 ? loss_sum / samples_seen : HUGE_VAL;
    report.epochs.push_back(
        EpochRecord{epoch, epoch_loss, evaluate(model, data.test, policy), flushed, clipped});
    if (diverged || !std::isfinite(epoch_loss)) {
      report.diverged = true;
      break;
    }
  }
  return report;
}

void write_report_csv(std::ostream& os, const TrainingReport& report) {
  os << "epoch,loss,test_accuracy,zero_flushed_count,clipped_count\n";
  char buf[128];
  for (const auto& r : report.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%ld,%ld\n", r.epoch, r.loss, r.test_accuracy,
                  r.zero_flushed, r.clipped);
    os << buf;
  }
}

TrainingSetup setup_from_config(const Config& cfg, uint64_t default_seed) {
  TrainingSetup s;
  s.layer_sizes = cfg.get_int_list("layer_sizes");
  std::string act = cfg.get_string("activation", "relu");
  if (act == "relu") s.activation = Activation::ReLU;
  else if (act == "tanh") s.activation = Activation::Tanh;
  else throw std::runtime_error("config: activation must be relu or tanh");

  std::string storage = cfg.get_string("storage", "float32");
  if (storage == "float32") s.policy.storage = StorageKind::Float32;
  else if (storage == "float16") s.policy.storage = StorageKind::Float16;
  else if (storage == "fixed") s.policy.storage = StorageKind::Fixed;
  else throw std::runtime_error("config: storage must be float32, float16 or fixed");
  if (s.policy.storage == StorageKind::Fixed) {
    s.policy.fixed_format = FixedFormat(static_cast<int>(cfg.get_int("fixed_m", 3)),
                                        static_cast<int>(cfg.get_int("fixed_n", 12)), true);
  }
  std::string rounding = cfg.get_string("rounding", "nearest");
  if (rounding == "nearest") s.policy.rounding = FixedRounding::Nearest;
  else if (rounding == "stochastic") s.policy.rounding = FixedRounding::Stochastic;
  else throw std::runtime_error("config: rounding must be nearest or stochastic");
  s.policy.loss_scale_exponent = static_cast<int>(cfg.get_int("loss_scale_exponent", 0));
  s.policy.master_copy = cfg.get_bool("master_copy", false);
  s.policy.accumulate_widened = cfg.get_bool("accumulate_widened", false);
  if (cfg.has("clip_threshold")) s.policy.clip_threshold = cfg.get_double("clip_threshold");
  s.policy.validate();

  s.options.epochs = static_cast<int>(cfg.get_int("epochs", 50));
  s.options.batch_size = static_cast<int>(cfg.get_int("batch_size", 32));
  s.options.learning_rate = cfg.get_double("learning_rate", 0.05);
  s.options.seed = cfg.get_u64("seed", default_seed);
  if (s.options.epochs < 0 || s.options.batch_size < 1 || !(s.options.learning_rate >= 0)) {
    throw std::runtime_error("config: bad epochs/batch_size/learning_rate");
  }

  RandomSource data_rng(s.options.seed);
  std::string dataset = cfg.get_string("dataset", "blobs");
  Dataset full;
  if (dataset == "blobs") {
    full = make_blobs(static_cast<int>(cfg.get_int("dataset_samples", 512)),
                      static_cast<int>(cfg.get_int("dataset_classes", 2)),
                      cfg.get_double("dataset_noise", 0.35), data_rng);
  } else if (dataset == "moons") {
    full = make_moons(static_cast<int>(cfg.get_int("dataset_samples", 512)),
                      cfg.get_double("dataset_noise", 0.1), data_rng);
  } else if (dataset == "csv") {
    std::ifstream f(cfg.get_string("dataset_path"));
    if (!f) throw std::runtime_error("config: cannot open dataset_path");
    full = load_csv_dataset(f);
  } else {
    throw std::runtime_error("config: dataset must be blobs, moons or csv");
  }
  s.data = split_dataset(full, cfg.get_double("train_fraction", 0.67), data_rng);

  if (s.layer_sizes.front() != s.data.train.feature_dim) {
    throw std::runtime_error("config: first layer size must equal the feature count");
  }
  if (s.layer_sizes.back() < s.data.train.num_classes) {
    throw std::runtime_error("config: last layer smaller than the class count");
  }
  return s;
}

TrainingReport run_training(const TrainingSetup& setup) {
  RandomSource init_rng(setup.options.seed ^ 0x517cc1b727220a95ull);
  MlpModel model = init_model(setup.layer_sizes, setup.activation, setup.policy, init_rng);
  return train(model, setup.data, setup.policy, setup.options);
}

RefCache reference_forward(const MlpModel& model, const Batch& batch) {
  const int L = model.num_layers();
  const int B = batch.size;
  RefCache cache;
  cache.a.resize(L + 1);
  cache.z.resize(L);
  cache.a[0] = batch.x;
  for (int l = 0; l < L; ++l) {
    int in = model.layer_sizes[l], out = model.layer_sizes[l + 1];
    auto& zl = cache.z[l];
    zl.assign(static_cast<size_t>(B) * out, 0.0);
    for (int s = 0; s < B; ++s) {
      for (int j = 0; j < out; ++j) {
        double acc = model.biases[l][j];
        for (int k = 0; k < in; ++k) {
          acc += model.weights[l][static_cast<size_t>(j) * in + k] * cache.a[l][static_cast<size_t>(s) * in + k];
        }
        zl[static_cast<size_t>(s) * out + j] = acc;
      }
    }
    if (l + 1 < L) {
      auto& al = cache.a[l + 1];
      al.resize(zl.size());
      for (size_t i = 0; i < zl.size(); ++i) al[i] = act_fn(zl[i], model.activation);
    }
  }
  const int C = model.output_dim();
  cache.probs.resize(static_cast<size_t>(B) * C);
  double loss_sum = 0.0;
  for (int s = 0; s < B; ++s) {
    double maxv = -HUGE_VAL;
    for (int c = 0; c < C; ++c) maxv = std::max(maxv, cache.z[L - 1][static_cast<size_t>(s) * C + c]);
    double denom = 0.0;
    for (int c = 0; c < C; ++c) {
      double e = std::exp(cache.z[L - 1][static_cast<size_t>(s) * C + c] - maxv);
      cache.probs[static_cast<size_t>(s) * C + c] = e;
      denom += e;
    }
    for (int c = 0; c < C; ++c) cache.probs[static_cast<size_t>(s) * C + c] /= denom;
    loss_sum += -std::log(cache.probs[static_cast<size_t>(s) * C + batch.y[s]]);
  }
  cache.loss = loss_sum / B;
  return cache;
}

RefGradients reference_backward(const MlpModel& model, const Batch& batch, const RefCache& cache,
                                int loss_scale_exponent) {
  const int L = model.num_layers();
  const int B = batch.size;
  const int C = model.output_dim();
  const double scale = std::ldexp(1.0, loss_scale_exponent);

  RefGradients g;
  g.weights.resize(L);
  g.biases.resize(L);

  std::vector<double> dz(static_cast<size_t>(B) * C);
  for (int s = 0; s < B; ++s) {
    for (int c = 0; c < C; ++c) {
      size_t i = static_cast<size_t>(s) * C + c;
      dz[i] = scale * (cache.probs[i] - (batch.y[s] == c ? 1.0 : 0.0)) / B;
    }
  }

  for (int l = L - 1; l >= 0; --l) {
    int in = model.layer_sizes[l], out = model.layer_sizes[l + 1];
    auto& gw = g.weights[l];
    gw.assign(static_cast<size_t>(out) * in, 0.0);
    for (int j = 0; j < out; ++j) {
      for (int k = 0; k < in; ++k) {
        double acc = 0.0;
        for (int s = 0; s < B; ++s) {
          acc += dz[static_cast<size_t>(s) * out + j] * cache.a[l][static_cast<size_t>(s) * in + k];
        }
        gw[static_cast<size_t>(j) * in + k] = acc;
      }
    }
    auto& gb = g.biases[l];
    gb.assign(out, 0.0);
    for (int j = 0; j < out; ++j) {
      for (int s = 0; s < B; ++s) gb[j] += dz[static_cast<size_t>(s) * out + j];
    }
    if (l > 0) {
      std::vector<double> next(static_cast<size_t>(B) * in, 0.0);
      for (int s = 0; s < B; ++s) {
        for (int k = 0; k < in; ++k) {
          double acc = 0.0;
          for (int j = 0; j < out; ++j) {
            acc += dz[static_cast<size_t>(s) * out + j] * model.weights[l][static_cast<size_t>(j) * in + k];
          }
          next[static_cast<size_t>(s) * in + k] =
              acc * act_deriv(cache.z[l - 1][static_cast<size_t>(s) * in + k], model.activation);
        }
      }
      dz = std::move(next);
    }
  }
  return g;
}

} // namespace mpx
