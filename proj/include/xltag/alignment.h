#ifndef XLTAG_ALIGNMENT_H_
#define XLTAG_ALIGNMENT_H_

#include <map>
#include <string>
#include <vector>

#include "xltag/corpus.h"

namespace xltag {

// IBM Model 1 lexical translation probabilities t(target | source), with an
// extra NULL source row.
class TranslationTable {
 public:
  TranslationTable(Vocabulary source, Vocabulary target);

  const Vocabulary &source_vocabulary() const { return source_; }
  const Vocabulary &target_vocabulary() const { return target_; }

  // Row index of the NULL source word.
  int null_row() const { return static_cast<int>(source_.size()); }
  size_t rows() const { return rows_.size(); }

  // t(target | source row); 0 for pairs that never co-occurred.
  double probability(int source_row, int target_id) const;
  // By surface form; unknown words have probability 0.
  double probability(const std::string &source, const std::string &target) const;
  double null_probability(const std::string &target) const;

  // Nonzero entries of a row, ordered by target id.
  const std::map<int, double> &row(int source_row) const { return rows_[source_row]; }

  // Sum of a row over all target words.
  double row_sum(int source_row) const;

 private:
  friend TranslationTable train_ibm1(const ParallelCorpus &, int,
                                     std::vector<double> *);

  Vocabulary source_;
  Vocabulary target_;
  // Before the first EM step every entry is implicitly 1 / |target vocab|.
  bool uniform_ = true;
  std::vector<std::map<int, double>> rows_;
};

// Expectation maximization from the uniform table. Each target token
// distributes one count over the sentence's source tokens plus NULL in
// proportion to t(target | source). If |log_likelihoods| is set it receives
// the corpus log-likelihood of the initial table followed by the value after
// each iteration. Throws ConfigError for iterations < 1.
TranslationTable train_ibm1(const ParallelCorpus &corpus, int iterations,
                            std::vector<double> *log_likelihoods = nullptr);

// sum over pairs and target tokens of log((1/(l+1)) sum_i t(f_j | e_i)),
// where l is the source length and e_0 is NULL.
double ibm1_log_likelihood(const TranslationTable &table,
                           const ParallelCorpus &corpus);

inline constexpr int kNullLink = -1;

// links[j] is the source position aligned to target position j, or kNullLink.
struct AlignmentLinks {
  std::vector<int> links;

  bool operator==(const AlignmentLinks &) const = default;
};

// Links each target token to the source token with the highest t(target |
// source); ties go to the leftmost source position. NULL wins only when its
// probability is strictly higher, or when the target word is unknown.
AlignmentLinks align(const TranslationTable &table, const SentencePair &pair);
std::vector<AlignmentLinks> align_corpus(const TranslationTable &table,
                                         const ParallelCorpus &corpus);

// Pharaoh-style "source-target" pairs per line; NULL links are omitted.
void save_links(const std::string &path,
                const std::vector<AlignmentLinks> &links);
// Needs the corpus to recover target lengths. Throws ConsistencyError when
// the line count or a position does not fit the corpus.
std::vector<AlignmentLinks> load_links(const std::string &path,
                                       const ParallelCorpus &corpus);

struct ProjectionResult {
  // Target sentences with projected tags (kUnknownTag where unaligned).
  std::vector<TaggedSentence> sentences;
  // Corpus index of each kept sentence.
  std::vector<size_t> kept;
};

// Copies each source tag to the aligned target token. Sentences whose
// fraction of NULL links exceeds |max_null_fraction| are dropped. Throws
// ConsistencyError on mismatched lengths.
ProjectionResult project_tags(const std::vector<TaggedSentence> &tagged_source,
                              const std::vector<Sentence> &targets,
                              const std::vector<AlignmentLinks> &links,
                              double max_null_fraction = 0.5);

}  // namespace xltag

#endif  // XLTAG_ALIGNMENT_H_
