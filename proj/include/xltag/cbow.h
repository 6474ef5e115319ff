#ifndef XLTAG_CBOW_H_
#define XLTAG_CBOW_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xltag/corpus.h"
#include "xltag/matrix.h"
#include "xltag/representation.h"

namespace xltag {

struct CbowOptions {
  size_t window = 5;
  size_t dim = 100;
  size_t negatives = 5;
  size_t epochs = 5;
  // Initial rate; decays linearly to 1e-4 of its value over all epochs.
  double learning_rate = 0.025;
  uint64_t seed = 1;
};

// Continuous bag-of-words embeddings trained with negative sampling.
class CbowModel {
 public:
  CbowModel() : vocab_(Side::kTarget) {}

  const Vocabulary &vocabulary() const { return vocab_; }
  size_t dim() const { return options_.dim; }
  size_t window() const { return options_.window; }
  size_t negatives() const { return options_.negatives; }

  const Matrix &input_embeddings() const { return input_; }
  const Matrix &output_embeddings() const { return output_; }

  double cosine(int a, int b) const;

  // Mean input embedding of the in-vocabulary |context| words; empty if none
  // of them is known.
  std::vector<double> context_embedding(std::span<const std::string> context) const;

  // XLCBW1 format: magic, u64 vocab size, dim, window, negatives, then per
  // word (string, u64 frequency), then the input and output matrices as
  // row-major f64.
  void save(const std::string &path) const;
  static CbowModel load(const std::string &path);

  bool operator==(const CbowModel &other) const;

 private:
  friend CbowModel init_cbow(const std::vector<Sentence> &, const CbowOptions &);
  friend CbowModel train_cbow(const std::vector<Sentence> &, const CbowOptions &);
  friend double cbow_loss(const CbowModel &, const std::vector<Sentence> &, uint64_t);

  Vocabulary vocab_;
  CbowOptions options_;
  Matrix input_;
  Matrix output_;
};

// Builds the vocabulary and the seeded initial embeddings without training.
CbowModel init_cbow(const std::vector<Sentence> &sentences,
                    const CbowOptions &options);

// Throws TrainingError on an empty corpus, ConfigError on zero window/dim.
CbowModel train_cbow(const std::vector<Sentence> &sentences,
                     const CbowOptions &options);

// Negative-sampling objective summed over every position of |sentences|, with
// negatives drawn from a generator seeded by |seed| (same draws for a fixed
// seed, whatever the model state).
double cbow_loss(const CbowModel &model, const std::vector<Sentence> &sentences,
                 uint64_t seed);

// The symmetric window of |window| tokens around |position|, clipped at the
// sentence boundaries, excluding the token itself.
std::vector<std::string> context_window(const Sentence &sentence,
                                        size_t position, size_t window);

// Replaces an out-of-vocabulary |word| (no common vector on |side|) by the
// known word the CBOW model scores highest given |context|. Candidates are
// CBOW vocabulary words with a nonempty common vector; the score is the dot
// product of the mean context input embedding with the candidate's output
// embedding, ties to the lowest vocabulary id. Returns |word| unchanged if it
// is not OOV or if no context word is in the CBOW vocabulary.
std::string resolve_oov(const std::string &word,
                        std::span<const std::string> context,
                        const CbowModel &cbow, const ReprTable &repr, Side side);

}  // namespace xltag

#endif  // XLTAG_CBOW_H_
