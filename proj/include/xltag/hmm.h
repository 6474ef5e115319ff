#ifndef XLTAG_HMM_H_
#define XLTAG_HMM_H_

#include <array>
#include <map>
#include <string>
#include <vector>

#include "xltag/corpus.h"
#include "xltag/tag_distribution.h"

namespace xltag {

struct HmmOptions {
  // Words seen at most this often feed the suffix model.
  uint64_t rare_threshold = 10;
  // Longest suffix, in code points, used for unknown words.
  uint64_t max_suffix_length = 4;

  bool operator==(const HmmOptions &) const = default;
};

// Second-order (trigram) HMM tagger in the style of TnT: deleted-interpolation
// transition smoothing, maximum-likelihood emissions for known words and a
// successive-abstraction suffix model for unknown ones.
//
// Transition states are the K tags plus a boundary state (index K) that pads
// the sentence start twice and marks its end once.
class HmmModel {
 public:
  HmmModel() = default;

  const TagSet &tagset() const { return tagset_; }
  const HmmOptions &options() const { return options_; }
  size_t num_tags() const { return tagset_.size(); }
  int boundary() const { return static_cast<int>(tagset_.size()); }

  // {unigram, bigram, trigram} interpolation weights.
  const std::array<double, 3> &lambdas() const { return lambdas_; }

  // Smoothed P(t3 | t1, t2); arguments range over tags and the boundary.
  double transition(int t1, int t2, int t3) const;
  // P(word | tag) for known words; for unknown words the suffix-model score
  // P(tag | suffix) / P(tag), which is proportional to P(word | tag).
  double emission(const std::string &word, int tag) const;
  bool is_known(const std::string &word) const { return lexicon_.count(word) > 0; }

  // Logs of the above, with probabilities floored at 1e-12 so every tag
  // sequence keeps a finite score.
  double log_transition(int t1, int t2, int t3) const;
  std::vector<double> log_emissions(const std::string &word) const;

  // Words with their per-tag counts.
  const std::map<std::string, std::vector<double>> &lexicon() const {
    return lexicon_;
  }

  // XLHMM1 format: magic, options, tagset, unigram/bigram/trigram counts,
  // lambdas, lexicon and suffix tables; f64 little-endian.
  void save(const std::string &path) const;
  static HmmModel load(const std::string &path);

  bool operator==(const HmmModel &) const = default;

 private:
  friend HmmModel train_hmm(const std::vector<TaggedSentence> &, const TagSet &,
                            const HmmOptions &);

  size_t states() const { return tagset_.size() + 1; }
  // Derives context counts, tag probabilities and theta from the raw counts.
  void finalize();
  std::vector<double> suffix_tag_probabilities(const std::string &word) const;

  TagSet tagset_;
  HmmOptions options_;
  std::vector<double> unigram_;  // predicted-state counts, size S
  std::vector<double> bigram_;   // S x S
  std::vector<double> trigram_;  // S x S x S
  std::array<double, 3> lambdas_ = {1.0, 0.0, 0.0};
  std::map<std::string, std::vector<double>> lexicon_;
  std::map<std::string, std::vector<double>> suffixes_;

  // Derived by finalize().
  double total_ = 0.0;
  std::vector<double> bigram_context_;
  std::vector<double> trigram_context_;
  std::vector<double> tag_counts_;
  std::vector<double> tag_probability_;
  double theta_ = 0.0;
};

// Throws TrainingError if the corpus holds no tagged token.
HmmModel train_hmm(const std::vector<TaggedSentence> &corpus,
                   const TagSet &tagset, const HmmOptions &options = {});

// Exact Viterbi decoding. Among equally scored sequences the
// lexicographically smallest tag-index sequence wins.
std::vector<int> viterbi(const HmmModel &model, const Sentence &tokens);

// Per-position tag marginals from forward-backward.
std::vector<TagDistribution> posterior(const HmmModel &model,
                                       const Sentence &tokens);

// log P(tokens, tags) including the start padding and end transition.
double sequence_log_score(const HmmModel &model, const Sentence &tokens,
                          const std::vector<int> &tags);

// log of the sum of P(tokens, tags) over all tag sequences.
double sequence_log_likelihood(const HmmModel &model, const Sentence &tokens);

}  // namespace xltag

#endif  // XLTAG_HMM_H_
