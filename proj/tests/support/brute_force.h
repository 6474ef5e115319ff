#ifndef XLTAG_TESTS_BRUTE_FORCE_H_
#define XLTAG_TESTS_BRUTE_FORCE_H_

// Exhaustive-enumeration oracles for the HMM tagger and a dense
// re-implementation of IBM Model 1 EM. Test-only.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "xltag/corpus.h"
#include "xltag/hmm.h"
#include "xltag/random.h"

namespace xltag::oracle {

struct Enumeration {
  // Lexicographically smallest sequence among those within |tie| of the best.
  std::vector<int> best;
  double best_score = -std::numeric_limits<double>::infinity();
  double log_total = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> marginals;
};

// Scores every tag sequence by summing transition and emission logs left to
// right, the boundary state padding the start twice and closing the end.
inline Enumeration enumerate_hmm(const HmmModel &model, const Sentence &tokens,
                                 double tie = 1e-9) {
  const int k = static_cast<int>(model.num_tags());
  const int bound = model.boundary();
  const size_t len = tokens.size();
  std::vector<std::vector<double>> emit;
  for (const std::string &w : tokens) emit.push_back(model.log_emissions(w));

  std::vector<std::vector<int>> sequences;
  std::vector<double> scores;
  std::vector<int> tags(len, 0);
  while (true) {
    double score = 0.0;
    int a = bound, b = bound;
    for (size_t i = 0; i < len; ++i) {
      score += model.log_transition(a, b, tags[i]) + emit[i][tags[i]];
      a = b;
      b = tags[i];
    }
    score += model.log_transition(a, b, bound);
    sequences.push_back(tags);
    scores.push_back(score);
    size_t pos = len;
    while (pos > 0 && tags[pos - 1] == k - 1) tags[--pos] = 0;
    if (pos == 0) break;
    ++tags[pos - 1];
  }

  Enumeration e;
  e.best_score = *std::max_element(scores.begin(), scores.end());
  for (size_t s = 0; s < scores.size(); ++s) {
    if (scores[s] >= e.best_score - tie) {
      e.best = sequences[s];
      break;
    }
  }
  double total = 0.0;
  for (double s : scores) total += std::exp(s - e.best_score);
  e.log_total = e.best_score + std::log(total);
  e.marginals.assign(len, std::vector<double>(k, 0.0));
  for (size_t s = 0; s < scores.size(); ++s) {
    const double p = std::exp(scores[s] - e.log_total);
    for (size_t i = 0; i < len; ++i) e.marginals[i][sequences[s][i]] += p;
  }
  return e;
}

// A random tagged corpus with word-dependent tag preferences, for building
// random HMMs.
inline std::vector<TaggedSentence> random_tagged_corpus(Rng &rng, size_t tags,
                                                        size_t sentences) {
  static const std::vector<std::string> words = {"ka", "kab", "mob", "tic",
                                                 "tica", "ro", "lob", "sab"};
  std::vector<std::vector<double>> preference(words.size(),
                                              std::vector<double>(tags));
  for (auto &row : preference) {
    for (double &p : row) p = rng.uniform() * rng.uniform();
  }
  std::vector<TaggedSentence> corpus;
  for (size_t s = 0; s < sentences; ++s) {
    TaggedSentence ts;
    const size_t len = 1 + rng.below(6);
    for (size_t i = 0; i < len; ++i) {
      const size_t w = rng.below(words.size());
      double total = 0.0;
      for (double p : preference[w]) total += p;
      double u = rng.uniform() * total;
      size_t t = 0;
      while (t + 1 < tags && u >= preference[w][t]) u -= preference[w][t++];
      ts.tokens.push_back(words[w]);
      ts.tags.push_back(static_cast<int>(t));
    }
    corpus.push_back(std::move(ts));
  }
  return corpus;
}

inline Sentence random_test_sentence(Rng &rng, size_t len) {
  static const std::vector<std::string> words = {"ka",   "kab", "mob", "tic",
                                                 "zzab", "ro",  "qtica", "new"};
  Sentence s;
  for (size_t i = 0; i < len; ++i) s.push_back(words[rng.below(words.size())]);
  return s;
}

// Dense IBM Model 1 EM: t[e][f] with the NULL word as the last source row,
// initialized uniformly over the whole target vocabulary.
struct DenseIbm1 {
  std::map<std::string, int> source_ids, target_ids;
  std::vector<std::vector<double>> t;

  explicit DenseIbm1(const ParallelCorpus &corpus) {
    for (const SentencePair &p : corpus.pairs()) {
      for (const std::string &e : p.source) source_ids.emplace(e, source_ids.size());
      for (const std::string &f : p.target) target_ids.emplace(f, target_ids.size());
    }
    t.assign(source_ids.size() + 1,
             std::vector<double>(target_ids.size(), 1.0 / target_ids.size()));
  }

  void iterate(const ParallelCorpus &corpus) {
    const size_t null_row = source_ids.size();
    std::vector<std::vector<double>> count(t.size(),
                                           std::vector<double>(t[0].size(), 0.0));
    for (const SentencePair &p : corpus.pairs()) {
      for (const std::string &fw : p.target) {
        const int f = target_ids.at(fw);
        double z = t[null_row][f];
        for (const std::string &ew : p.source) z += t[source_ids.at(ew)][f];
        count[null_row][f] += t[null_row][f] / z;
        for (const std::string &ew : p.source) {
          const int e = source_ids.at(ew);
          count[e][f] += t[e][f] / z;
        }
      }
    }
    for (size_t e = 0; e < t.size(); ++e) {
      double total = 0.0;
      for (double c : count[e]) total += c;
      for (size_t f = 0; f < t[e].size(); ++f) {
        t[e][f] = total > 0.0 ? count[e][f] / total : 0.0;
      }
    }
  }
};

}  // namespace xltag::oracle

#endif  // XLTAG_TESTS_BRUTE_FORCE_H_
