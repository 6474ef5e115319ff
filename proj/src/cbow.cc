#include "xltag/cbow.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xltag/binary_io.h"
#include "xltag/errors.h"
#include "xltag/random.h"

namespace xltag {

namespace {

constexpr std::string_view kMagic = "XLCBW1";
constexpr double kUnigramPower = 0.75;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Cumulative unigram^0.75 distribution for negative sampling.
class NegativeSampler {
 public:
  explicit NegativeSampler(const Vocabulary &vocab) {
    cumulative_.reserve(vocab.size());
    double total = 0.0;
    for (size_t i = 0; i < vocab.size(); ++i) {
      total += std::pow(static_cast<double>(vocab.frequency(i)), kUnigramPower);
      cumulative_.push_back(total);
    }
  }

  int sample(Rng &rng) const {
    double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<int>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

std::vector<std::vector<int>> encode(const std::vector<Sentence> &sentences,
                                     const Vocabulary &vocab) {
  std::vector<std::vector<int>> ids;
  ids.reserve(sentences.size());
  for (const Sentence &s : sentences) {
    std::vector<int> row;
    row.reserve(s.size());
    for (const std::string &w : s) row.push_back(*vocab.id(w));
    ids.push_back(std::move(row));
  }
  return ids;
}

// Averages the input embeddings of the window around |pos| into |hidden|.
// Returns the context size.
size_t average_context(const Matrix &input, const std::vector<int> &sentence,
                       size_t pos, size_t window, std::vector<double> &hidden,
                       std::vector<int> &context) {
  context.clear();
  size_t lo = pos >= window ? pos - window : 0;
  size_t hi = std::min(sentence.size(), pos + window + 1);
  for (size_t j = lo; j < hi; ++j) {
    if (j != pos) context.push_back(sentence[j]);
  }
  std::fill(hidden.begin(), hidden.end(), 0.0);
  if (context.empty()) return 0;
  for (int c : context) {
    std::span<const double> row = input.row(c);
    for (size_t k = 0; k < hidden.size(); ++k) hidden[k] += row[k];
  }
  for (double &h : hidden) h /= static_cast<double>(context.size());
  return context.size();
}

}  // namespace

double CbowModel::cosine(int a, int b) const {
  std::span<const double> x = input_.row(a), y = input_.row(b);
  double nx = std::sqrt(dot(x, x)), ny = std::sqrt(dot(y, y));
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return dot(x, y) / (nx * ny);
}

std::vector<double> CbowModel::context_embedding(
    std::span<const std::string> context) const {
  std::vector<double> hidden;
  size_t known = 0;
  for (const std::string &w : context) {
    std::optional<int> id = vocab_.id(w);
    if (!id) continue;
    if (hidden.empty()) hidden.assign(dim(), 0.0);
    std::span<const double> row = input_.row(*id);
    for (size_t k = 0; k < hidden.size(); ++k) hidden[k] += row[k];
    ++known;
  }
  for (double &h : hidden) h /= static_cast<double>(known);
  return hidden;
}

CbowModel init_cbow(const std::vector<Sentence> &sentences,
                    const CbowOptions &options) {
  if (options.window == 0 || options.dim == 0) {
    throw ConfigError("CBOW window and dimension must be at least 1");
  }
  size_t tokens = 0;
  for (const Sentence &s : sentences) tokens += s.size();
  if (tokens == 0) throw TrainingError("CBOW training corpus is empty");

  CbowModel model;
  model.options_ = options;
  model.vocab_ = build_vocabulary(sentences, Side::kTarget);
  const size_t v = model.vocab_.size();
  model.input_ = Matrix(v, options.dim);
  model.output_ = Matrix(v, options.dim);
  Rng rng(options.seed);
  for (double &x : model.input_.data()) {
    x = (rng.uniform() - 0.5) / static_cast<double>(options.dim);
  }
  return model;
}

CbowModel train_cbow(const std::vector<Sentence> &sentences,
                     const CbowOptions &options) {
  CbowModel model = init_cbow(sentences, options);
  const std::vector<std::vector<int>> ids = encode(sentences, model.vocab_);
  const NegativeSampler sampler(model.vocab_);
  const uint64_t total_tokens = model.vocab_.total_count();
  const uint64_t schedule_length = options.epochs * total_tokens + 1;
  const size_t dim = options.dim;

  // Initialization consumed the seed's stream; draw negatives from a derived
  // stream so that init_cbow() stays independent of training.
  Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> hidden(dim), hidden_grad(dim);
  std::vector<int> context;
  uint64_t processed = 0;

  for (size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (const std::vector<int> &sentence : ids) {
      for (size_t pos = 0; pos < sentence.size(); ++pos, ++processed) {
        double lr = options.learning_rate *
                    std::max(1.0 - static_cast<double>(processed) /
                                       static_cast<double>(schedule_length),
                             1e-4);
        if (average_context(model.input_, sentence, pos, options.window,
                            hidden, context) == 0) {
          continue;
        }
        std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
        for (size_t d = 0; d <= options.negatives; ++d) {
          int target;
          double label;
          if (d == 0) {
            target = sentence[pos];
            label = 1.0;
          } else {
            target = sampler.sample(rng);
            if (target == sentence[pos]) continue;
            label = 0.0;
          }
          std::span<double> out = model.output_.row(target);
          double g = (label - sigmoid(dot(hidden, out))) * lr;
          for (size_t k = 0; k < dim; ++k) hidden_grad[k] += g * out[k];
          for (size_t k = 0; k < dim; ++k) out[k] += g * hidden[k];
        }
        for (int c : context) {
          std::span<double> in = model.input_.row(c);
          for (size_t k = 0; k < dim; ++k) in[k] += hidden_grad[k];
        }
      }
    }
  }
  return model;
}

double cbow_loss(const CbowModel &model, const std::vector<Sentence> &sentences,
                 uint64_t seed) {
  const std::vector<std::vector<int>> ids = encode(sentences, model.vocab_);
  const NegativeSampler sampler(model.vocab_);
  Rng rng(seed);
  std::vector<double> hidden(model.dim());
  std::vector<int> context;
  double loss = 0.0;
  for (const std::vector<int> &sentence : ids) {
    for (size_t pos = 0; pos < sentence.size(); ++pos) {
      size_t n = average_context(model.input_, sentence, pos, model.window(),
                                 hidden, context);
      for (size_t d = 0; d <= model.negatives(); ++d) {
        int target = d == 0 ? sentence[pos] : sampler.sample(rng);
        if (n == 0 || (d > 0 && target == sentence[pos])) continue;
        double score = dot(hidden, model.output_.row(target));
        loss -= std::log(sigmoid(d == 0 ? score : -score));
      }
    }
  }
  return loss;
}

std::vector<std::string> context_window(const Sentence &sentence,
                                        size_t position, size_t window) {
  std::vector<std::string> context;
  size_t lo = position >= window ? position - window : 0;
  size_t hi = std::min(sentence.size(), position + window + 1);
  for (size_t j = lo; j < hi; ++j) {
    if (j != position) context.push_back(sentence[j]);
  }
  return context;
}

std::string resolve_oov(const std::string &word,
                        std::span<const std::string> context,
                        const CbowModel &cbow, const ReprTable &repr,
                        Side side) {
  if (repr.contains(side, word)) return word;
  std::vector<double> hidden = cbow.context_embedding(context);
  if (hidden.empty()) return word;

  const Vocabulary &vocab = cbow.vocabulary();
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (size_t id = 0; id < vocab.size(); ++id) {
    if (!repr.contains(side, vocab.word(id))) continue;
    double score = dot(hidden, cbow.output_embeddings().row(id));
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(id);
    }
  }
  return best < 0 ? word : vocab.word(best);
}

void CbowModel::save(const std::string &path) const {
  BinaryWriter w;
  w.write_magic(kMagic);
  w.write_u64(vocab_.size());
  w.write_u64(options_.dim);
  w.write_u64(options_.window);
  w.write_u64(options_.negatives);
  for (size_t i = 0; i < vocab_.size(); ++i) {
    w.write_string(vocab_.word(i));
    w.write_u64(vocab_.frequency(i));
  }
  w.write_f64_array(input_.data());
  w.write_f64_array(output_.data());
  w.save(path);
}

CbowModel CbowModel::load(const std::string &path) {
  BinaryReader r = BinaryReader::from_file(path);
  r.expect_magic(kMagic);
  CbowModel model;
  uint64_t v = r.read_u64();
  model.options_.dim = r.read_u64();
  model.options_.window = r.read_u64();
  model.options_.negatives = r.read_u64();
  for (uint64_t i = 0; i < v; ++i) {
    std::string word = r.read_string();
    uint64_t freq = r.read_u64();
    if (model.vocab_.id(word)) throw FormatError(path + ": duplicate word");
    model.vocab_.count(word, freq);
  }
  model.input_ = Matrix(v, model.options_.dim);
  model.output_ = Matrix(v, model.options_.dim);
  r.read_f64_array(model.input_.data());
  r.read_f64_array(model.output_.data());
  r.expect_end();
  for (const Matrix *m : {&model.input_, &model.output_}) {
    for (double x : m->data()) {
      if (!std::isfinite(x)) throw FormatError(path + ": non-finite weight");
    }
  }
  return model;
}

bool CbowModel::operator==(const CbowModel &other) const {
  return vocab_.words() == other.vocab_.words() && dim() == other.dim() &&
         window() == other.window() && negatives() == other.negatives() &&
         input_ == other.input_ && output_ == other.output_;
}

}  // namespace xltag
