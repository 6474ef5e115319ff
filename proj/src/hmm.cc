#include "xltag/hmm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xltag/binary_io.h"
#include "xltag/errors.h"

namespace xltag {

namespace {

constexpr std::string_view kMagic = "XLHMM1";
constexpr double kProbabilityFloor = 1e-12;
// Log scores closer than this count as tied during Viterbi decoding.
constexpr double kTieTolerance = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_floored(double p) { return std::log(std::max(p, kProbabilityFloor)); }

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Suffix of the last |length| UTF-8 code points, or empty if the word is
// shorter.
std::string suffix(const std::string &word, size_t length) {
  size_t pos = word.size();
  for (size_t n = 0; n < length; ++n) {
    if (pos == 0) return {};
    --pos;
    while (pos > 0 && (static_cast<unsigned char>(word[pos]) & 0xC0) == 0x80) {
      --pos;
    }
  }
  return word.substr(pos);
}

size_t code_points(const std::string &word) {
  size_t n = 0;
  for (char c : word) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

// Precomputed log transitions, indexed [t1][t2][t3] over S states.
class TransitionTable {
 public:
  explicit TransitionTable(const HmmModel &model)
      : s_(model.num_tags() + 1), table_(s_ * s_ * s_) {
    for (size_t a = 0; a < s_; ++a) {
      for (size_t b = 0; b < s_; ++b) {
        for (size_t c = 0; c < s_; ++c) {
          table_[(a * s_ + b) * s_ + c] = model.log_transition(a, b, c);
        }
      }
    }
  }
  double operator()(int a, int b, int c) const {
    return table_[(a * s_ + b) * s_ + c];
  }

 private:
  size_t s_;
  std::vector<double> table_;
};

std::vector<std::vector<double>> emission_lattice(const HmmModel &model,
                                                  const Sentence &tokens) {
  std::vector<std::vector<double>> e;
  e.reserve(tokens.size());
  for (const std::string &w : tokens) e.push_back(model.log_emissions(w));
  return e;
}

}  // namespace

double HmmModel::transition(int t1, int t2, int t3) const {
  const size_t s = states();
  const double p1 = unigram_[t3] / total_;
  double p2 = p1;
  if (bigram_context_[t2] > 0.0) p2 = bigram_[t2 * s + t3] / bigram_context_[t2];
  double p3 = p2;
  const size_t ctx = static_cast<size_t>(t1) * s + t2;
  if (trigram_context_[ctx] > 0.0) p3 = trigram_[ctx * s + t3] / trigram_context_[ctx];
  return lambdas_[0] * p1 + lambdas_[1] * p2 + lambdas_[2] * p3;
}

double HmmModel::log_transition(int t1, int t2, int t3) const {
  return log_floored(transition(t1, t2, t3));
}

std::vector<double> HmmModel::suffix_tag_probabilities(
    const std::string &word) const {
  const size_t k = num_tags();
  std::vector<double> p = tag_probability_;
  const size_t longest =
      std::min<size_t>(options_.max_suffix_length, code_points(word));
  for (size_t len = 1; len <= longest; ++len) {
    auto it = suffixes_.find(suffix(word, len));
    if (it == suffixes_.end()) break;
    double total = 0.0;
    for (double c : it->second) total += c;
    if (total <= 0.0) break;
    for (size_t t = 0; t < k; ++t) {
      p[t] = (it->second[t] / total + theta_ * p[t]) / (1.0 + theta_);
    }
  }
  return p;
}

double HmmModel::emission(const std::string &word, int tag) const {
  auto it = lexicon_.find(word);
  if (it != lexicon_.end()) {
    return tag_counts_[tag] > 0.0 ? it->second[tag] / tag_counts_[tag] : 0.0;
  }
  if (tag_probability_[tag] <= 0.0) return 0.0;
  return suffix_tag_probabilities(word)[tag] / tag_probability_[tag];
}

std::vector<double> HmmModel::log_emissions(const std::string &word) const {
  const size_t k = num_tags();
  std::vector<double> out(k);
  auto it = lexicon_.find(word);
  if (it != lexicon_.end()) {
    for (size_t t = 0; t < k; ++t) {
      out[t] = log_floored(tag_counts_[t] > 0.0 ? it->second[t] / tag_counts_[t]
                                                : 0.0);
    }
    return out;
  }
  std::vector<double> p = suffix_tag_probabilities(word);
  for (size_t t = 0; t < k; ++t) {
    out[t] = log_floored(tag_probability_[t] > 0.0 ? p[t] / tag_probability_[t]
                                                   : 0.0);
  }
  return out;
}

void HmmModel::finalize() {
  const size_t s = states(), k = num_tags();
  total_ = 0.0;
  for (double c : unigram_) total_ += c;
  bigram_context_.assign(s, 0.0);
  trigram_context_.assign(s * s, 0.0);
  for (size_t a = 0; a < s; ++a) {
    for (size_t b = 0; b < s; ++b) {
      bigram_context_[a] += bigram_[a * s + b];
      for (size_t c = 0; c < s; ++c) {
        trigram_context_[a * s + b] += trigram_[(a * s + b) * s + c];
      }
    }
  }
  tag_counts_.assign(k, 0.0);
  for (const auto &[word, counts] : lexicon_) {
    for (size_t t = 0; t < k; ++t) tag_counts_[t] += counts[t];
  }
  double tokens = 0.0;
  for (double c : tag_counts_) tokens += c;
  tag_probability_.assign(k, 0.0);
  for (size_t t = 0; t < k; ++t) tag_probability_[t] = tag_counts_[t] / tokens;

  // Successive-abstraction weight: sample variance of the tag probabilities.
  theta_ = 0.0;
  if (k > 1) {
    const double mean = 1.0 / static_cast<double>(k);
    for (double p : tag_probability_) theta_ += (p - mean) * (p - mean);
    theta_ /= static_cast<double>(k - 1);
  }
}

HmmModel train_hmm(const std::vector<TaggedSentence> &corpus,
                   const TagSet &tagset, const HmmOptions &options) {
  HmmModel model;
  model.tagset_ = tagset;
  model.options_ = options;
  const size_t k = tagset.size(), s = k + 1;
  const int bound = static_cast<int>(k);
  model.unigram_.assign(s, 0.0);
  model.bigram_.assign(s * s, 0.0);
  model.trigram_.assign(s * s * s, 0.0);

  std::map<std::string, double> frequency;
  size_t tagged_tokens = 0;
  for (const TaggedSentence &sentence : corpus) {
    if (sentence.tokens.size() != sentence.tags.size()) {
      throw ConsistencyError("tagged sentence has mismatched tokens and tags");
    }
    if (sentence.tokens.empty()) continue;
    std::vector<int> padded = {bound, bound};
    for (int tag : sentence.tags) {
      if (tag != kUnknownTag && (tag < 0 || static_cast<size_t>(tag) >= k)) {
        throw TagsetError("tag index out of range for tagset " + tagset.name());
      }
      padded.push_back(tag);
    }
    padded.push_back(bound);
    // N-grams touching an unprojected token are skipped, the token still
    // separates its neighbours.
    for (size_t i = 2; i < padded.size(); ++i) {
      const int a = padded[i - 2], b = padded[i - 1], c = padded[i];
      if (c == kUnknownTag) continue;
      model.unigram_[c] += 1.0;
      if (b == kUnknownTag) continue;
      model.bigram_[b * s + c] += 1.0;
      if (a == kUnknownTag) continue;
      model.trigram_[(a * s + b) * s + c] += 1.0;
    }
    for (size_t i = 0; i < sentence.tokens.size(); ++i) {
      const int tag = sentence.tags[i];
      if (tag == kUnknownTag) continue;
      std::vector<double> &counts = model.lexicon_[sentence.tokens[i]];
      counts.resize(k, 0.0);
      counts[tag] += 1.0;
      frequency[sentence.tokens[i]] += 1.0;
      ++tagged_tokens;
    }
  }
  if (tagged_tokens == 0) throw TrainingError("HMM training corpus is empty");

  for (const auto &[word, counts] : model.lexicon_) {
    if (frequency[word] > static_cast<double>(options.rare_threshold)) continue;
    const size_t longest =
        std::min<size_t>(options.max_suffix_length, code_points(word));
    for (size_t len = 1; len <= longest; ++len) {
      std::vector<double> &sc = model.suffixes_[suffix(word, len)];
      sc.resize(k, 0.0);
      for (size_t t = 0; t < k; ++t) sc[t] += counts[t];
    }
  }

  model.finalize();

  // Deleted interpolation: each trigram votes, with its count, for the
  // estimator that best predicts it once the trigram itself is removed. Ties
  // go to the higher order.
  std::array<double, 3> votes = {0.0, 0.0, 0.0};
  const double n = model.total_;
  for (size_t a = 0; a < s; ++a) {
    for (size_t b = 0; b < s; ++b) {
      for (size_t c = 0; c < s; ++c) {
        const double f = model.trigram_[(a * s + b) * s + c];
        if (f <= 0.0) continue;
        const double ctx3 = model.trigram_context_[a * s + b];
        const double ctx2 = model.bigram_context_[b];
        const double r3 = ctx3 > 1.0 ? (f - 1.0) / (ctx3 - 1.0) : 0.0;
        const double r2 =
            ctx2 > 1.0 ? (model.bigram_[b * s + c] - 1.0) / (ctx2 - 1.0) : 0.0;
        const double r1 = n > 1.0 ? (model.unigram_[c] - 1.0) / (n - 1.0) : 0.0;
        if (r3 >= r2 && r3 >= r1) {
          votes[2] += f;
        } else if (r2 >= r1) {
          votes[1] += f;
        } else {
          votes[0] += f;
        }
      }
    }
  }
  const double total_votes = votes[0] + votes[1] + votes[2];
  if (total_votes > 0.0) {
    for (int i = 0; i < 3; ++i) model.lambdas_[i] = votes[i] / total_votes;
  }
  return model;
}

std::vector<int> viterbi(const HmmModel &model, const Sentence &tokens) {
  const size_t len = tokens.size();
  if (len == 0) return {};
  const int k = static_cast<int>(model.num_tags());
  const int bound = model.boundary();
  const size_t s = k + 1;
  const TransitionTable trans(model);
  const auto emit = emission_lattice(model, tokens);

  // best[i][p * k + c]: best log score of positions i+1.. and the end
  // transition, given tag p at i-1 (boundary for i = 0) and c at i.
  std::vector<std::vector<double>> best(len, std::vector<double>(s * k, kNegInf));
  auto candidate = [&](size_t i, int p, int c, int next) {
    return trans(p, c, next) + emit[i + 1][next] + best[i + 1][c * k + next];
  };
  for (size_t i = len; i-- > 0;) {
    for (int p = 0; p <= k; ++p) {
      if ((i == 0) != (p == bound)) continue;
      for (int c = 0; c < k; ++c) {
        double v;
        if (i + 1 == len) {
          v = trans(p, c, bound);
        } else {
          v = kNegInf;
          for (int next = 0; next < k; ++next) {
            v = std::max(v, candidate(i, p, c, next));
          }
        }
        best[i][p * k + c] = v;
      }
    }
  }

  std::vector<int> tags(len);
  double top = kNegInf;
  std::vector<double> first(k);
  for (int c = 0; c < k; ++c) {
    first[c] = trans(bound, bound, c) + emit[0][c] + best[0][bound * k + c];
    top = std::max(top, first[c]);
  }
  for (int c = 0; c < k; ++c) {
    if (first[c] >= top - kTieTolerance) {
      tags[0] = c;
      break;
    }
  }
  int prev = bound;
  for (size_t i = 0; i + 1 < len; ++i) {
    const double target = best[i][prev * k + tags[i]];
    for (int next = 0; next < k; ++next) {
      if (candidate(i, prev, tags[i], next) >= target - kTieTolerance) {
        tags[i + 1] = next;
        break;
      }
    }
    prev = tags[i];
  }
  return tags;
}

namespace {

struct ForwardBackward {
  std::vector<std::vector<double>> alpha;
  std::vector<std::vector<double>> beta;
  double log_z = kNegInf;
};

ForwardBackward forward_backward(const HmmModel &model, const Sentence &tokens) {
  const size_t len = tokens.size();
  const int k = static_cast<int>(model.num_tags());
  const int bound = model.boundary();
  const size_t s = k + 1;
  const TransitionTable trans(model);
  const auto emit = emission_lattice(model, tokens);

  ForwardBackward fb;
  fb.alpha.assign(len, std::vector<double>(s * k, kNegInf));
  fb.beta.assign(len, std::vector<double>(s * k, kNegInf));
  for (int c = 0; c < k; ++c) {
    fb.alpha[0][bound * k + c] = trans(bound, bound, c) + emit[0][c];
  }
  for (size_t i = 1; i < len; ++i) {
    for (int p = 0; p < k; ++p) {
      for (int c = 0; c < k; ++c) {
        double v = kNegInf;
        for (int q = 0; q <= k; ++q) {
          const double a = fb.alpha[i - 1][q * k + p];
          if (a == kNegInf) continue;
          v = log_sum_exp(v, a + trans(q, p, c));
        }
        fb.alpha[i][p * k + c] = v + emit[i][c];
      }
    }
  }
  for (size_t i = len; i-- > 0;) {
    for (int p = 0; p <= k; ++p) {
      if ((i == 0) != (p == bound)) continue;
      for (int c = 0; c < k; ++c) {
        double v;
        if (i + 1 == len) {
          v = trans(p, c, bound);
        } else {
          v = kNegInf;
          for (int next = 0; next < k; ++next) {
            v = log_sum_exp(v, trans(p, c, next) + emit[i + 1][next] +
                                   fb.beta[i + 1][c * k + next]);
          }
        }
        fb.beta[i][p * k + c] = v;
      }
    }
  }
  for (int p = 0; p <= k; ++p) {
    for (int c = 0; c < k; ++c) {
      const double a = fb.alpha[len - 1][p * k + c];
      if (a == kNegInf) continue;
      fb.log_z = log_sum_exp(fb.log_z, a + trans(p, c, bound));
    }
  }
  return fb;
}

}  // namespace

std::vector<TagDistribution> posterior(const HmmModel &model,
                                       const Sentence &tokens) {
  const size_t len = tokens.size();
  if (len == 0) return {};
  const int k = static_cast<int>(model.num_tags());
  const ForwardBackward fb = forward_backward(model, tokens);
  std::vector<TagDistribution> out(len, TagDistribution(k, 0.0));
  for (size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (int p = 0; p <= k; ++p) {
      for (int c = 0; c < k; ++c) {
        const double a = fb.alpha[i][p * k + c];
        if (a == kNegInf) continue;
        const double m = std::exp(a + fb.beta[i][p * k + c] - fb.log_z);
        out[i][c] += m;
        sum += m;
      }
    }
    for (double &x : out[i]) x /= sum;
  }
  return out;
}

double sequence_log_likelihood(const HmmModel &model, const Sentence &tokens) {
  if (tokens.empty()) return model.log_transition(model.boundary(), model.boundary(),
                                                  model.boundary());
  return forward_backward(model, tokens).log_z;
}

double sequence_log_score(const HmmModel &model, const Sentence &tokens,
                          const std::vector<int> &tags) {
  if (tags.size() != tokens.size()) {
    throw ConsistencyError("tag sequence length does not match tokens");
  }
  const int bound = model.boundary();
  int a = bound, b = bound;
  double score = 0.0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    score += model.log_transition(a, b, tags[i]);
    score += model.log_emissions(tokens[i])[tags[i]];
    a = b;
    b = tags[i];
  }
  return score + model.log_transition(a, b, bound);
}

void HmmModel::save(const std::string &path) const {
  BinaryWriter w;
  w.write_magic(kMagic);
  w.write_u64(options_.rare_threshold);
  w.write_u64(options_.max_suffix_length);
  w.write_string(tagset_.name());
  w.write_u64(tagset_.size());
  for (const std::string &label : tagset_.labels()) w.write_string(label);
  w.write_f64_array(unigram_);
  w.write_f64_array(bigram_);
  w.write_f64_array(trigram_);
  for (double l : lambdas_) w.write_f64(l);
  for (const auto *table : {&lexicon_, &suffixes_}) {
    w.write_u64(table->size());
    for (const auto &[key, counts] : *table) {
      w.write_string(key);
      w.write_f64_array(counts);
    }
  }
  w.save(path);
}

HmmModel HmmModel::load(const std::string &path) {
  BinaryReader r = BinaryReader::from_file(path);
  r.expect_magic(kMagic);
  HmmModel model;
  model.options_.rare_threshold = r.read_u64();
  model.options_.max_suffix_length = r.read_u64();
  std::string name = r.read_string();
  uint64_t k = r.read_u64();
  std::vector<std::string> labels;
  for (uint64_t i = 0; i < k; ++i) labels.push_back(r.read_string());
  model.tagset_ = TagSet(std::move(name), std::move(labels));
  const size_t s = k + 1;
  model.unigram_.resize(s);
  model.bigram_.resize(s * s);
  model.trigram_.resize(s * s * s);
  r.read_f64_array(model.unigram_);
  r.read_f64_array(model.bigram_);
  r.read_f64_array(model.trigram_);
  for (double &l : model.lambdas_) l = r.read_f64();
  for (auto *table : {&model.lexicon_, &model.suffixes_}) {
    uint64_t n = r.read_u64();
    for (uint64_t i = 0; i < n; ++i) {
      std::string key = r.read_string();
      std::vector<double> counts(k);
      r.read_f64_array(counts);
      table->emplace(std::move(key), std::move(counts));
    }
  }
  r.expect_end();
  model.finalize();
  return model;
}

}  // namespace xltag
