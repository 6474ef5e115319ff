#ifndef XLTAG_RNN_H_
#define XLTAG_RNN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xltag/corpus.h"
#include "xltag/matrix.h"
#include "xltag/representation.h"
#include "xltag/tag_distribution.h"

namespace xltag {

class CbowModel;

// Where a one-hot POS vector joins the network. The POS units sit next to
// the named layer, so their weights feed the pre-activation of the layer
// that consumes it:
//   kInput       forward (and backward) recurrent layers
//   kRecurrent   compression layer
//   kCompression output layer
enum class PosInjection : uint8_t {
  kNone = 0,
  kInput = 1,
  kRecurrent = 2,
  kCompression = 3,
};

std::string pos_injection_name(PosInjection site);
// Accepts none, input, recurrent, compression (and the short forms in, h1,
// h2). Throws ConfigError otherwise.
PosInjection parse_pos_injection(const std::string &text);

struct RnnConfig {
  size_t forward_size = 160;
  size_t compression_size = 160;
  bool bidirectional = false;
  PosInjection pos_injection = PosInjection::kNone;
  size_t pos_tagset_size = 0;
  double learning_rate = 0.1;
  size_t max_epochs = 20;
  // Number of past steps an output error is propagated through; 0 = whole
  // sentence.
  size_t bptt_horizon = 0;
  uint64_t seed = 1;

  // Throws ConfigError when an invariant does not hold.
  void validate() const;
  bool operator==(const RnnConfig &) const = default;
};

// All weight matrices, stored so that a row vector times the matrix gives the
// next layer's pre-activation. Matrices a configuration does not use are
// empty.
struct RnnWeights {
  Matrix input_forward;         // N x F
  Matrix recurrent_forward;     // F x F
  Matrix forward_compression;   // F x C
  Matrix compression_output;    // C x K
  Matrix input_backward;        // N x B (bidirectional)
  Matrix recurrent_backward;    // B x B
  Matrix backward_compression;  // B x C
  Matrix pos_forward;           // P x F (kInput)
  Matrix pos_backward;          // P x B (kInput, bidirectional)
  Matrix pos_compression;       // P x C (kRecurrent)
  Matrix pos_output;            // P x K (kCompression)

  // Visits every allocated matrix in a fixed order.
  void for_each(const std::function<void(const char *, Matrix &)> &fn);
  void for_each(const std::function<void(const char *, const Matrix &)> &fn) const;

  bool operator==(const RnnWeights &) const = default;
};

class RnnModel {
 public:
  RnnModel() = default;
  // Allocates zero weights. |pos_tagset| must have config.pos_tagset_size
  // labels when POS injection is enabled, and be empty otherwise.
  RnnModel(const RnnConfig &config, size_t input_dim, TagSet tagset,
           TagSet pos_tagset = {});

  // Fills every weight uniformly in [-range, range] from |seed|.
  void randomize(uint64_t seed, double range);

  const RnnConfig &config() const { return config_; }
  size_t input_dim() const { return input_dim_; }
  size_t num_tags() const { return tagset_.size(); }
  const TagSet &tagset() const { return tagset_; }
  const TagSet &pos_tagset() const { return pos_tagset_; }
  RnnWeights &weights() { return weights_; }
  const RnnWeights &weights() const { return weights_; }

  bool all_finite() const;

  // XLRNN1 format: magic, u32 version, config block, u64 N, tagset and POS
  // tagset (name + labels), matrices (u64 rows, u64 cols, f64 row-major),
  // trailing FNV-1a 64 checksum.
  void save(const std::string &path) const;
  static RnnModel load(const std::string &path);

  bool operator==(const RnnModel &) const = default;

 private:
  RnnConfig config_;
  size_t input_dim_ = 0;
  TagSet tagset_;
  TagSet pos_tagset_;
  RnnWeights weights_;
};

// Network input for one sentence: the active dimensions of each token's
// common vector (spans must outlive the sequence) and, for POS-injection
// models, one POS tag index per token.
struct RnnSequence {
  std::vector<std::span<const uint32_t>> words;
  std::vector<int> pos;

  size_t size() const { return words.size(); }
};

struct RnnExample {
  RnnSequence input;
  // Gold tag per token; kUnknownTag tokens carry no loss.
  std::vector<int> tags;
};

RnnSequence encode_sentence(const ReprTable &repr, const Sentence &tokens,
                            Side side, std::vector<int> pos = {});

// Per-step layer activations; row t of each matrix is time step t.
struct LayerActivations {
  Matrix forward;      // f(t)
  Matrix backward;     // b(t), bidirectional only
  Matrix compression;  // c(t)
  Matrix output;       // y(t)
};

// Throws ShapeError on a dimension mismatch or when the POS stream does not
// match the model's injection setting.
LayerActivations forward_pass(const RnnModel &model, const RnnSequence &input);

// Loss gradients for one sentence. Input matrices are not materialized: the
// gradient of a row i of input_forward is the sum of forward_delta rows t
// over the steps whose word has dimension i active.
struct RnnGradients {
  RnnWeights dense;
  Matrix forward_delta;   // T x F
  Matrix backward_delta;  // T x B
  double loss = 0.0;
};

// Cross-entropy loss summed over tokens.
double sentence_loss(const RnnModel &model, const RnnSequence &input,
                     std::span<const int> tags);

// Backpropagation through time over |trace| (from forward_pass).
RnnGradients backward_pass(const RnnModel &model, const RnnSequence &input,
                           std::span<const int> tags,
                           const LayerActivations &trace);

// Expands the sparse input gradients into full matrices.
RnnWeights dense_gradients(const RnnModel &model, const RnnSequence &input,
                           const RnnGradients &gradients);

// weights -= learning_rate * gradients.
void apply_gradients(RnnModel &model, const RnnSequence &input,
                     const RnnGradients &gradients, double learning_rate);

// Fraction of tokens (gold tag known) whose argmax output equals the gold tag.
double accuracy(const RnnModel &model, std::span<const RnnExample> examples);

// Learning-rate schedule: the rate is halved after every epoch whose
// validation accuracy does not beat the best so far; training stops after
// |patience| consecutive such epochs.
class EpochSchedule {
 public:
  explicit EpochSchedule(double learning_rate, size_t patience = 2)
      : learning_rate_(learning_rate), patience_(patience) {}

  double learning_rate() const { return learning_rate_; }
  double best_accuracy() const { return best_; }
  bool should_stop() const { return stale_epochs_ >= patience_; }

  // Returns true if |accuracy| improves on the best so far.
  bool record(double accuracy);

 private:
  double learning_rate_;
  size_t patience_;
  double best_ = -1.0;
  size_t stale_epochs_ = 0;
};

struct EpochRecord {
  size_t epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double validation_accuracy = 0.0;
  bool improved = false;

  bool operator==(const EpochRecord &) const = default;
};

struct TrainResult {
  RnnModel model;  // best-validation snapshot
  std::vector<EpochRecord> log;
  double best_accuracy = 0.0;
};

// SGD with BPTT, one update per sentence, sentence order reshuffled every
// epoch from config.seed. Throws TrainingError on empty training or
// validation data and DivergenceError on a non-finite loss.
TrainResult train(RnnModel model, std::span<const RnnExample> train_set,
                  std::span<const RnnExample> validation);

struct TaggingResult {
  std::vector<int> tags;
  std::vector<TagDistribution> distributions;
  // Token had no common vector on the tagged side.
  std::vector<bool> oov;
  // Word actually fed to the network (differs from the token when an OOV
  // word was resolved through CBOW).
  std::vector<std::string> resolved;
};

// Tags |tokens| of language |side|. With |cbow| set, OOV tokens are first
// replaced by their closest known word in context; otherwise they enter the
// network as zero vectors.
TaggingResult tag_sentence(const RnnModel &model, const ReprTable &repr,
                           const Sentence &tokens, Side side,
                           std::span<const int> pos = {},
                           const CbowModel *cbow = nullptr);

struct GradientCheckOptions {
  size_t input_dim = 12;
  size_t num_tags = 3;
  size_t length = 3;
  double weight_range = 0.5;
  // All weights zero instead of random.
  bool zero_weights = false;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  bool all_finite = true;
  size_t parameters_checked = 0;
};

// Compares the BPTT gradient of every weight of a random small model on a
// random sentence against central finite differences with step |epsilon|.
// The relative error of a weight is |analytic - numeric| divided by
// max(|analytic|, |numeric|, 1e-6). config.bptt_horizon is ignored.
GradientCheckReport gradient_check(const RnnConfig &config, double epsilon,
                                   const GradientCheckOptions &options = {});

}  // namespace xltag

#endif  // XLTAG_RNN_H_
