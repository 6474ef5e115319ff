#ifndef XLTAG_COMBINER_H_
#define XLTAG_COMBINER_H_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xltag/corpus.h"
#include "xltag/tag_distribution.h"

namespace xltag {

// mu * p1 + (1 - mu) * p2. Throws ShapeError on a size mismatch and
// ConfigError for mu outside [0, 1].
TagDistribution interpolate(std::span<const double> p1,
                            std::span<const double> p2, double mu);

// Argmax of the interpolated distribution at every position, ties to the
// lowest tag index. Throws ConsistencyError on a length mismatch.
std::vector<int> combined_tag(const std::vector<TagDistribution> &hmm_posteriors,
                              const std::vector<TagDistribution> &rnn_distributions,
                              double mu);

struct EvalReport {
  size_t tokens = 0;
  size_t correct = 0;
  size_t oov_tokens = 0;
  size_t oov_correct = 0;
  // (gold, predicted) -> count.
  std::map<std::pair<int, int>, size_t> confusion;

  double accuracy() const {
    return tokens == 0 ? 0.0 : static_cast<double>(correct) / tokens;
  }
  // Absent when the corpus has no OOV token.
  std::optional<double> oov_accuracy() const {
    if (oov_tokens == 0) return std::nullopt;
    return static_cast<double>(oov_correct) / oov_tokens;
  }
};

// Per-token accuracy over all tokens and over tokens flagged OOV. Gold tokens
// with kUnknownTag are skipped. Throws ConsistencyError on a length mismatch.
EvalReport evaluate(const std::vector<TaggedSentence> &gold,
                    const std::vector<std::vector<int>> &predicted,
                    const std::vector<std::vector<bool>> &oov);

// Both systems' distributions for every token of one sentence.
struct SystemOutputs {
  std::vector<TagDistribution> hmm;
  std::vector<TagDistribution> rnn;
  std::vector<bool> oov;
};

struct CombinerConfig {
  double grid_step = 0.05;
  // When set, mu is not tuned.
  std::optional<double> fixed_mu;
};

struct TuningResult {
  // mu tuned on each half; fold 0 is the first ceil(S/2) sentences.
  std::array<double, 2> fold_mu = {0.0, 0.0};
  // Each half tagged with the mu tuned on the other half, pooled.
  EvalReport report;
  std::vector<std::vector<int>> predicted;
};

// The grid 0, step, 2 * step, ..., 1 (1 is always included).
std::vector<double> mu_grid(double step);

// Two-fold cross-validation of mu. On each half the grid value with the
// highest per-token accuracy is selected, ties to the smaller mu. Throws
// DataError for fewer than two sentences.
TuningResult tune_mu(const std::vector<TaggedSentence> &gold,
                     const std::vector<SystemOutputs> &outputs,
                     const CombinerConfig &config = {});

// Human-readable report and flat key=value file. The TuningResult forms add
// the per-fold mu values.
std::string format_report(const EvalReport &report, const TagSet &tagset);
std::string format_report(const TuningResult &result, const TagSet &tagset);
std::string format_key_values(const EvalReport &report);
std::string format_key_values(const TuningResult &result);

}  // namespace xltag

#endif  // XLTAG_COMBINER_H_
