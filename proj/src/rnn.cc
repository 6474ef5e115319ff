#include "xltag/rnn.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xltag/binary_io.h"
#include "xltag/cbow.h"
#include "xltag/errors.h"
#include "xltag/random.h"

namespace xltag {

namespace {

constexpr std::string_view kMagic = "XLRNN1";
constexpr uint32_t kFormatVersion = 1;
constexpr double kGradientCheckFloor = 1e-6;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out += v * M   (v: 1 x rows, M: rows x cols)
void add_vec_mat(std::span<const double> v, const Matrix &m,
                 std::span<double> out) {
  for (size_t i = 0; i < m.rows(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    std::span<const double> row = m.row(i);
    for (size_t j = 0; j < m.cols(); ++j) out[j] += vi * row[j];
  }
}

// out += M * d   (M: rows x cols, d: cols)
void add_mat_vec(const Matrix &m, std::span<const double> d,
                 std::span<double> out) {
  for (size_t i = 0; i < m.rows(); ++i) {
    std::span<const double> row = m.row(i);
    double s = 0.0;
    for (size_t j = 0; j < m.cols(); ++j) s += row[j] * d[j];
    out[i] += s;
  }
}

// G += v^T d
void add_outer(Matrix &g, std::span<const double> v, std::span<const double> d) {
  for (size_t i = 0; i < g.rows(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    std::span<double> row = g.row(i);
    for (size_t j = 0; j < g.cols(); ++j) row[j] += vi * d[j];
  }
}

void add_to(std::span<double> out, std::span<const double> v) {
  for (size_t i = 0; i < out.size(); ++i) out[i] += v[i];
}

void apply_sigmoid(std::span<double> v) {
  for (double &x : v) x = sigmoid(x);
}

void softmax(std::span<double> v) {
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double &x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double &x : v) x /= sum;
}

// delta = grad * s * (1 - s) elementwise, for sigmoid outputs s.
void sigmoid_backward(std::span<const double> s, std::span<double> grad) {
  for (size_t i = 0; i < grad.size(); ++i) grad[i] *= s[i] * (1.0 - s[i]);
}

void check_input(const RnnModel &model, const RnnSequence &input) {
  const bool uses_pos = model.config().pos_injection != PosInjection::kNone;
  if (!uses_pos && !input.pos.empty()) {
    throw ShapeError("POS stream given to a model without POS injection");
  }
  if (uses_pos && input.pos.size() != input.words.size()) {
    throw ShapeError("POS stream length " + std::to_string(input.pos.size()) +
                     " does not match sentence length " +
                     std::to_string(input.words.size()));
  }
  for (int p : input.pos) {
    if (p < 0 || static_cast<size_t>(p) >= model.config().pos_tagset_size) {
      throw ShapeError("POS index out of range: " + std::to_string(p));
    }
  }
  for (std::span<const uint32_t> w : input.words) {
    for (uint32_t i : w) {
      if (i >= model.input_dim()) {
        throw ShapeError("input dimension " + std::to_string(i) +
                         " outside model input size " +
                         std::to_string(model.input_dim()));
      }
    }
  }
}

void write_matrix(BinaryWriter &w, const Matrix &m) {
  w.write_u64(m.rows());
  w.write_u64(m.cols());
  w.write_f64_array(m.data());
}

void read_matrix(BinaryReader &r, Matrix &m) {
  uint64_t rows = r.read_u64(), cols = r.read_u64();
  if (rows != m.rows() || cols != m.cols()) {
    throw FormatError("matrix shape does not match model configuration");
  }
  r.read_f64_array(m.data());
}

void write_tagset(BinaryWriter &w, const TagSet &tagset) {
  w.write_string(tagset.name());
  w.write_u64(tagset.size());
  for (const std::string &label : tagset.labels()) w.write_string(label);
}

TagSet read_tagset(BinaryReader &r) {
  std::string name = r.read_string();
  uint64_t n = r.read_u64();
  std::vector<std::string> labels;
  for (uint64_t i = 0; i < n; ++i) labels.push_back(r.read_string());
  if (labels.empty()) return TagSet();
  return TagSet(std::move(name), std::move(labels));
}

}  // namespace

std::string pos_injection_name(PosInjection site) {
  switch (site) {
    case PosInjection::kNone:
      return "none";
    case PosInjection::kInput:
      return "input";
    case PosInjection::kRecurrent:
      return "recurrent";
    case PosInjection::kCompression:
      return "compression";
  }
  return "unknown";
}

PosInjection parse_pos_injection(const std::string &text) {
  if (text == "none") return PosInjection::kNone;
  if (text == "input" || text == "in") return PosInjection::kInput;
  if (text == "recurrent" || text == "h1") return PosInjection::kRecurrent;
  if (text == "compression" || text == "h2") return PosInjection::kCompression;
  throw ConfigError("unknown POS injection site: " + text);
}

void RnnConfig::validate() const {
  if (forward_size == 0 || compression_size == 0) {
    throw ConfigError("layer sizes must be at least 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if ((pos_injection != PosInjection::kNone) != (pos_tagset_size > 0)) {
    throw ConfigError(
        "POS tagset size must be positive exactly when POS injection is on");
  }
}

void RnnWeights::for_each(
    const std::function<void(const char *, Matrix &)> &fn) {
  const std::pair<const char *, Matrix *> all[] = {
      {"input_forward", &input_forward},
      {"recurrent_forward", &recurrent_forward},
      {"forward_compression", &forward_compression},
      {"compression_output", &compression_output},
      {"input_backward", &input_backward},
      {"recurrent_backward", &recurrent_backward},
      {"backward_compression", &backward_compression},
      {"pos_forward", &pos_forward},
      {"pos_backward", &pos_backward},
      {"pos_compression", &pos_compression},
      {"pos_output", &pos_output},
  };
  for (const auto &[name, m] : all) {
    if (!m->empty()) fn(name, *m);
  }
}

void RnnWeights::for_each(
    const std::function<void(const char *, const Matrix &)> &fn) const {
  const_cast<RnnWeights *>(this)->for_each(
      [&](const char *name, Matrix &m) { fn(name, m); });
}

RnnModel::RnnModel(const RnnConfig &config, size_t input_dim, TagSet tagset,
                   TagSet pos_tagset)
    : config_(config),
      input_dim_(input_dim),
      tagset_(std::move(tagset)),
      pos_tagset_(std::move(pos_tagset)) {
  config_.validate();
  if (input_dim_ == 0) throw ShapeError("input dimension must be positive");
  if (tagset_.size() == 0) throw ShapeError("output tagset is empty");
  if (pos_tagset_.size() != config_.pos_tagset_size) {
    throw ShapeError("POS tagset has " + std::to_string(pos_tagset_.size()) +
                     " labels, configuration expects " +
                     std::to_string(config_.pos_tagset_size));
  }
  const size_t n = input_dim_, f = config_.forward_size,
               c = config_.compression_size, k = tagset_.size(),
               p = config_.pos_tagset_size;
  weights_.input_forward = Matrix(n, f);
  weights_.recurrent_forward = Matrix(f, f);
  weights_.forward_compression = Matrix(f, c);
  weights_.compression_output = Matrix(c, k);
  if (config_.bidirectional) {
    weights_.input_backward = Matrix(n, f);
    weights_.recurrent_backward = Matrix(f, f);
    weights_.backward_compression = Matrix(f, c);
  }
  switch (config_.pos_injection) {
    case PosInjection::kNone:
      break;
    case PosInjection::kInput:
      weights_.pos_forward = Matrix(p, f);
      if (config_.bidirectional) weights_.pos_backward = Matrix(p, f);
      break;
    case PosInjection::kRecurrent:
      weights_.pos_compression = Matrix(p, c);
      break;
    case PosInjection::kCompression:
      weights_.pos_output = Matrix(p, k);
      break;
  }
}

void RnnModel::randomize(uint64_t seed, double range) {
  Rng rng(seed);
  weights_.for_each([&](const char *, Matrix &m) {
    for (double &x : m.data()) x = rng.uniform(-range, range);
  });
}

bool RnnModel::all_finite() const {
  bool finite = true;
  weights_.for_each([&](const char *, const Matrix &m) {
    for (double x : m.data()) finite = finite && std::isfinite(x);
  });
  return finite;
}

void RnnModel::save(const std::string &path) const {
  BinaryWriter w;
  w.write_magic(kMagic);
  w.write_u32(kFormatVersion);
  w.write_u64(config_.forward_size);
  w.write_u64(config_.compression_size);
  w.write_u8(config_.bidirectional ? 1 : 0);
  w.write_u8(static_cast<uint8_t>(config_.pos_injection));
  w.write_u64(config_.pos_tagset_size);
  w.write_f64(config_.learning_rate);
  w.write_u64(config_.max_epochs);
  w.write_u64(config_.bptt_horizon);
  w.write_u64(config_.seed);
  w.write_u64(input_dim_);
  write_tagset(w, tagset_);
  write_tagset(w, pos_tagset_);
  weights_.for_each([&](const char *, const Matrix &m) { write_matrix(w, m); });
  w.write_checksum();
  w.save(path);
}

RnnModel RnnModel::load(const std::string &path) {
  BinaryReader r = BinaryReader::from_file(path);
  r.expect_magic(kMagic);
  if (r.read_u32() != kFormatVersion) {
    throw FormatError(path + ": unsupported model version");
  }
  RnnConfig config;
  config.forward_size = r.read_u64();
  config.compression_size = r.read_u64();
  config.bidirectional = r.read_u8() != 0;
  uint8_t site = r.read_u8();
  if (site > 3) throw FormatError(path + ": bad POS injection site");
  config.pos_injection = static_cast<PosInjection>(site);
  config.pos_tagset_size = r.read_u64();
  config.learning_rate = r.read_f64();
  config.max_epochs = r.read_u64();
  config.bptt_horizon = r.read_u64();
  config.seed = r.read_u64();
  size_t input_dim = r.read_u64();
  TagSet tagset = read_tagset(r);
  TagSet pos_tagset = read_tagset(r);
  RnnModel model;
  try {
    model = RnnModel(config, input_dim, std::move(tagset), std::move(pos_tagset));
  } catch (const ConfigError &e) {
    throw FormatError(path + ": " + e.what());
  }
  model.weights_.for_each([&](const char *, Matrix &m) { read_matrix(r, m); });
  r.verify_checksum();
  r.expect_end();
  if (!model.all_finite()) throw FormatError(path + ": non-finite weights");
  return model;
}

RnnSequence encode_sentence(const ReprTable &repr, const Sentence &tokens,
                            Side side, std::vector<int> pos) {
  RnnSequence seq;
  seq.words.reserve(tokens.size());
  for (const std::string &token : tokens) {
    seq.words.push_back(repr.lookup(side, token));
  }
  seq.pos = std::move(pos);
  return seq;
}

LayerActivations forward_pass(const RnnModel &model, const RnnSequence &input) {
  check_input(model, input);
  const RnnConfig &config = model.config();
  const RnnWeights &w = model.weights();
  const size_t steps = input.size();
  const bool has_pos = config.pos_injection != PosInjection::kNone;

  LayerActivations act;
  act.forward = Matrix(steps, config.forward_size);
  act.compression = Matrix(steps, config.compression_size);
  act.output = Matrix(steps, model.num_tags());

  for (size_t t = 0; t < steps; ++t) {
    std::span<double> f = act.forward.row(t);
    for (uint32_t i : input.words[t]) add_to(f, w.input_forward.row(i));
    if (t > 0) add_vec_mat(act.forward.row(t - 1), w.recurrent_forward, f);
    if (config.pos_injection == PosInjection::kInput) {
      add_to(f, w.pos_forward.row(input.pos[t]));
    }
    apply_sigmoid(f);
  }

  if (config.bidirectional) {
    act.backward = Matrix(steps, config.forward_size);
    for (size_t t = steps; t-- > 0;) {
      std::span<double> b = act.backward.row(t);
      for (uint32_t i : input.words[t]) add_to(b, w.input_backward.row(i));
      if (t + 1 < steps) {
        add_vec_mat(act.backward.row(t + 1), w.recurrent_backward, b);
      }
      if (config.pos_injection == PosInjection::kInput) {
        add_to(b, w.pos_backward.row(input.pos[t]));
      }
      apply_sigmoid(b);
    }
  }

  for (size_t t = 0; t < steps; ++t) {
    std::span<double> c = act.compression.row(t);
    add_vec_mat(act.forward.row(t), w.forward_compression, c);
    if (config.bidirectional) {
      add_vec_mat(act.backward.row(t), w.backward_compression, c);
    }
    if (config.pos_injection == PosInjection::kRecurrent) {
      add_to(c, w.pos_compression.row(input.pos[t]));
    }
    apply_sigmoid(c);

    std::span<double> y = act.output.row(t);
    add_vec_mat(c, w.compression_output, y);
    if (has_pos && config.pos_injection == PosInjection::kCompression) {
      add_to(y, w.pos_output.row(input.pos[t]));
    }
    softmax(y);
  }
  return act;
}

double sentence_loss(const RnnModel &model, const RnnSequence &input,
                     std::span<const int> tags) {
  LayerActivations act = forward_pass(model, input);
  double loss = 0.0;
  for (size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] != kUnknownTag) loss -= std::log(act.output(t, tags[t]));
  }
  return loss;
}

RnnGradients backward_pass(const RnnModel &model, const RnnSequence &input,
                           std::span<const int> tags,
                           const LayerActivations &act) {
  const RnnConfig &config = model.config();
  const RnnWeights &w = model.weights();
  const size_t steps = input.size();
  const size_t f_size = config.forward_size, c_size = config.compression_size,
               k_size = model.num_tags();
  if (tags.size() != steps) {
    throw ShapeError("tag sequence length does not match sentence length");
  }

  RnnGradients g;
  g.dense.recurrent_forward = Matrix(f_size, f_size);
  g.dense.forward_compression = Matrix(f_size, c_size);
  g.dense.compression_output = Matrix(c_size, k_size);
  if (config.bidirectional) {
    g.dense.recurrent_backward = Matrix(f_size, f_size);
    g.dense.backward_compression = Matrix(f_size, c_size);
  }
  const size_t p_size = config.pos_tagset_size;
  switch (config.pos_injection) {
    case PosInjection::kNone:
      break;
    case PosInjection::kInput:
      g.dense.pos_forward = Matrix(p_size, f_size);
      if (config.bidirectional) g.dense.pos_backward = Matrix(p_size, f_size);
      break;
    case PosInjection::kRecurrent:
      g.dense.pos_compression = Matrix(p_size, c_size);
      break;
    case PosInjection::kCompression:
      g.dense.pos_output = Matrix(p_size, k_size);
      break;
  }
  g.forward_delta = Matrix(steps, f_size);
  if (config.bidirectional) g.backward_delta = Matrix(steps, f_size);

  // Output and compression layers are not recurrent: their deltas are local.
  Matrix compression_delta(steps, c_size);
  std::vector<double> output_delta(k_size);
  for (size_t t = 0; t < steps; ++t) {
    std::span<const double> y = act.output.row(t);
    if (tags[t] == kUnknownTag) continue;
    g.loss -= std::log(y[tags[t]]);
    std::copy(y.begin(), y.end(), output_delta.begin());
    output_delta[tags[t]] -= 1.0;

    add_outer(g.dense.compression_output, act.compression.row(t), output_delta);
    if (config.pos_injection == PosInjection::kCompression) {
      add_to(g.dense.pos_output.row(input.pos[t]), output_delta);
    }
    std::span<double> dc = compression_delta.row(t);
    add_mat_vec(w.compression_output, output_delta, dc);
    sigmoid_backward(act.compression.row(t), dc);

    add_outer(g.dense.forward_compression, act.forward.row(t), dc);
    if (config.bidirectional) {
      add_outer(g.dense.backward_compression, act.backward.row(t), dc);
    }
    if (config.pos_injection == PosInjection::kRecurrent) {
      add_to(g.dense.pos_compression.row(input.pos[t]), dc);
    }
  }

  const size_t horizon = config.bptt_horizon;
  const bool truncated = horizon > 0 && horizon + 1 < steps;

  // Forward layer: error flows from later steps to earlier ones.
  if (!truncated) {
    std::vector<double> df(f_size);
    for (size_t t = steps; t-- > 0;) {
      std::fill(df.begin(), df.end(), 0.0);
      add_mat_vec(w.forward_compression, compression_delta.row(t), df);
      if (t + 1 < steps) {
        add_mat_vec(w.recurrent_forward, g.forward_delta.row(t + 1), df);
      }
      sigmoid_backward(act.forward.row(t), df);
      std::copy(df.begin(), df.end(), g.forward_delta.row(t).begin());
    }
  } else {
    std::vector<double> d(f_size), next(f_size);
    for (size_t t = 0; t < steps; ++t) {
      std::fill(d.begin(), d.end(), 0.0);
      add_mat_vec(w.forward_compression, compression_delta.row(t), d);
      sigmoid_backward(act.forward.row(t), d);
      const size_t stop = t >= horizon ? t - horizon : 0;
      for (size_t s = t;; --s) {
        add_to(g.forward_delta.row(s), d);
        if (s == stop) break;
        std::fill(next.begin(), next.end(), 0.0);
        add_mat_vec(w.recurrent_forward, d, next);
        sigmoid_backward(act.forward.row(s - 1), next);
        d.swap(next);
      }
    }
  }
  for (size_t t = 1; t < steps; ++t) {
    add_outer(g.dense.recurrent_forward, act.forward.row(t - 1),
              g.forward_delta.row(t));
  }
  if (config.pos_injection == PosInjection::kInput) {
    for (size_t t = 0; t < steps; ++t) {
      add_to(g.dense.pos_forward.row(input.pos[t]), g.forward_delta.row(t));
    }
  }

  if (config.bidirectional) {
    // Backward layer: b(t) feeds b(t-1), so error flows towards later steps.
    if (!truncated) {
      std::vector<double> db(f_size);
      for (size_t t = 0; t < steps; ++t) {
        std::fill(db.begin(), db.end(), 0.0);
        add_mat_vec(w.backward_compression, compression_delta.row(t), db);
        if (t > 0) {
          add_mat_vec(w.recurrent_backward, g.backward_delta.row(t - 1), db);
        }
        sigmoid_backward(act.backward.row(t), db);
        std::copy(db.begin(), db.end(), g.backward_delta.row(t).begin());
      }
    } else {
      std::vector<double> d(f_size), next(f_size);
      for (size_t t = 0; t < steps; ++t) {
        std::fill(d.begin(), d.end(), 0.0);
        add_mat_vec(w.backward_compression, compression_delta.row(t), d);
        sigmoid_backward(act.backward.row(t), d);
        const size_t stop = std::min(steps - 1, t + horizon);
        for (size_t s = t;; ++s) {
          add_to(g.backward_delta.row(s), d);
          if (s == stop) break;
          std::fill(next.begin(), next.end(), 0.0);
          add_mat_vec(w.recurrent_backward, d, next);
          sigmoid_backward(act.backward.row(s + 1), next);
          d.swap(next);
        }
      }
    }
    for (size_t t = 0; t + 1 < steps; ++t) {
      add_outer(g.dense.recurrent_backward, act.backward.row(t + 1),
                g.backward_delta.row(t));
    }
    if (config.pos_injection == PosInjection::kInput) {
      for (size_t t = 0; t < steps; ++t) {
        add_to(g.dense.pos_backward.row(input.pos[t]), g.backward_delta.row(t));
      }
    }
  }
  return g;
}

RnnWeights dense_gradients(const RnnModel &model, const RnnSequence &input,
                           const RnnGradients &gradients) {
  RnnWeights full = gradients.dense;
  const RnnWeights &w = model.weights();
  full.input_forward = Matrix(w.input_forward.rows(), w.input_forward.cols());
  for (size_t t = 0; t < input.size(); ++t) {
    for (uint32_t i : input.words[t]) {
      add_to(full.input_forward.row(i), gradients.forward_delta.row(t));
    }
  }
  if (model.config().bidirectional) {
    full.input_backward = Matrix(w.input_backward.rows(), w.input_backward.cols());
    for (size_t t = 0; t < input.size(); ++t) {
      for (uint32_t i : input.words[t]) {
        add_to(full.input_backward.row(i), gradients.backward_delta.row(t));
      }
    }
  }
  return full;
}

void apply_gradients(RnnModel &model, const RnnSequence &input,
                     const RnnGradients &gradients, double learning_rate) {
  RnnWeights &w = model.weights();
  auto step = [learning_rate](std::span<double> target,
                              std::span<const double> grad) {
    for (size_t i = 0; i < target.size(); ++i) {
      target[i] -= learning_rate * grad[i];
    }
  };
  step(w.recurrent_forward.data(), gradients.dense.recurrent_forward.data());
  step(w.forward_compression.data(), gradients.dense.forward_compression.data());
  step(w.compression_output.data(), gradients.dense.compression_output.data());
  step(w.recurrent_backward.data(), gradients.dense.recurrent_backward.data());
  step(w.backward_compression.data(),
       gradients.dense.backward_compression.data());
  step(w.pos_forward.data(), gradients.dense.pos_forward.data());
  step(w.pos_backward.data(), gradients.dense.pos_backward.data());
  step(w.pos_compression.data(), gradients.dense.pos_compression.data());
  step(w.pos_output.data(), gradients.dense.pos_output.data());
  for (size_t t = 0; t < input.size(); ++t) {
    for (uint32_t i : input.words[t]) {
      step(w.input_forward.row(i), gradients.forward_delta.row(t));
      if (model.config().bidirectional) {
        step(w.input_backward.row(i), gradients.backward_delta.row(t));
      }
    }
  }
}

double accuracy(const RnnModel &model, std::span<const RnnExample> examples) {
  size_t correct = 0, total = 0;
  for (const RnnExample &ex : examples) {
    LayerActivations act = forward_pass(model, ex.input);
    for (size_t t = 0; t < ex.tags.size(); ++t) {
      if (ex.tags[t] == kUnknownTag) continue;
      ++total;
      if (argmax(act.output.row(t)) == ex.tags[t]) ++correct;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

bool EpochSchedule::record(double accuracy) {
  if (accuracy > best_) {
    best_ = accuracy;
    stale_epochs_ = 0;
    return true;
  }
  ++stale_epochs_;
  learning_rate_ /= 2.0;
  return false;
}

TrainResult train(RnnModel model, std::span<const RnnExample> train_set,
                  std::span<const RnnExample> validation) {
  const RnnConfig &config = model.config();
  if (train_set.empty()) throw TrainingError("training set is empty");
  if (validation.empty()) throw TrainingError("validation set is empty");
  if (config.max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  for (const RnnExample &ex : train_set) {
    if (ex.tags.size() != ex.input.size()) {
      throw ShapeError("training example has mismatched tags");
    }
    for (int tag : ex.tags) {
      if (tag != kUnknownTag &&
          (tag < 0 || static_cast<size_t>(tag) >= model.num_tags())) {
        throw TagsetError("training tag index out of range");
      }
    }
  }

  TrainResult result;
  result.model = model;
  EpochSchedule schedule(config.learning_rate);
  Rng rng(config.seed);
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = schedule.learning_rate();
    rng.shuffle(order);
    for (size_t index : order) {
      const RnnExample &ex = train_set[index];
      if (ex.input.size() == 0) continue;
      LayerActivations act = forward_pass(model, ex.input);
      RnnGradients grads = backward_pass(model, ex.input, ex.tags, act);
      if (!std::isfinite(grads.loss)) {
        throw DivergenceError("non-finite loss in epoch " +
                                  std::to_string(epoch) + " at sentence " +
                                  std::to_string(index),
                              static_cast<int>(epoch), index);
      }
      record.train_loss += grads.loss;
      apply_gradients(model, ex.input, grads, record.learning_rate);
    }
    record.validation_accuracy = accuracy(model, validation);
    record.improved = schedule.record(record.validation_accuracy);
    result.log.push_back(record);
    if (record.improved) result.model = model;
    if (schedule.should_stop()) break;
  }
  result.best_accuracy = schedule.best_accuracy();
  return result;
}

TaggingResult tag_sentence(const RnnModel &model, const ReprTable &repr,
                           const Sentence &tokens, Side side,
                           std::span<const int> pos, const CbowModel *cbow) {
  if (repr.dim() != model.input_dim()) {
    throw ShapeError("representation has " + std::to_string(repr.dim()) +
                     " dimensions, model expects " +
                     std::to_string(model.input_dim()));
  }
  TaggingResult result;
  result.resolved = tokens;
  result.oov.resize(tokens.size());
  for (size_t t = 0; t < tokens.size(); ++t) {
    result.oov[t] = !repr.contains(side, tokens[t]);
    if (result.oov[t] && cbow != nullptr) {
      std::vector<std::string> context =
          context_window(tokens, t, cbow->window());
      result.resolved[t] = resolve_oov(tokens[t], context, *cbow, repr, side);
    }
  }
  RnnSequence input = encode_sentence(repr, result.resolved, side,
                                      std::vector<int>(pos.begin(), pos.end()));
  LayerActivations act = forward_pass(model, input);
  for (size_t t = 0; t < tokens.size(); ++t) {
    std::span<const double> y = act.output.row(t);
    result.distributions.emplace_back(y.begin(), y.end());
    result.tags.push_back(argmax(y));
  }
  return result;
}

GradientCheckReport gradient_check(const RnnConfig &config, double epsilon,
                                   const GradientCheckOptions &options) {
  RnnConfig full = config;
  full.bptt_horizon = 0;
  std::vector<std::string> labels, pos_labels;
  for (size_t i = 0; i < options.num_tags; ++i) {
    labels.push_back("T" + std::to_string(i));
  }
  for (size_t i = 0; i < config.pos_tagset_size; ++i) {
    pos_labels.push_back("P" + std::to_string(i));
  }
  RnnModel model(full, options.input_dim, TagSet("tags", labels),
                 pos_labels.empty() ? TagSet() : TagSet("pos", pos_labels));
  if (!options.zero_weights) model.randomize(config.seed, options.weight_range);

  // Random sparse inputs; each token activates about a third of the
  // dimensions, and the middle token is left OOV when the sentence is long
  // enough.
  Rng rng(config.seed + 1);
  std::vector<std::vector<uint32_t>> words(options.length);
  RnnSequence input;
  std::vector<int> tags;
  for (size_t t = 0; t < options.length; ++t) {
    if (!(options.length >= 3 && t == options.length / 2)) {
      for (uint32_t i = 0; i < options.input_dim; ++i) {
        if (rng.uniform() < 0.35) words[t].push_back(i);
      }
    }
    input.words.push_back(words[t]);
    tags.push_back(static_cast<int>(rng.below(options.num_tags)));
    if (config.pos_tagset_size > 0) {
      input.pos.push_back(static_cast<int>(rng.below(config.pos_tagset_size)));
    }
  }

  LayerActivations act = forward_pass(model, input);
  RnnWeights analytic =
      dense_gradients(model, input, backward_pass(model, input, tags, act));

  GradientCheckReport report;
  std::vector<std::span<const double>> analytic_data;
  analytic.for_each([&](const char *, const Matrix &m) {
    analytic_data.push_back(m.data());
  });
  size_t matrix_index = 0;
  model.weights().for_each([&](const char *, Matrix &m) {
    std::span<const double> expected = analytic_data[matrix_index++];
    std::span<double> data = m.data();
    for (size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + epsilon;
      const double plus = sentence_loss(model, input, tags);
      data[i] = saved - epsilon;
      const double minus = sentence_loss(model, input, tags);
      data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double a = expected[i];
      if (!std::isfinite(numeric) || !std::isfinite(a)) {
        report.all_finite = false;
        continue;
      }
      const double abs_err = std::abs(a - numeric);
      const double scale =
          std::max({std::abs(a), std::abs(numeric), kGradientCheckFloor});
      report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
      report.max_relative_error =
          std::max(report.max_relative_error, abs_err / scale);
      ++report.parameters_checked;
    }
  });
  return report;
}

}  // namespace xltag
