#include "xltag/combiner.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "xltag/errors.h"

namespace xltag {

bool is_distribution(std::span<const double> values, double tolerance) {
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

TagDistribution interpolate(std::span<const double> p1,
                            std::span<const double> p2, double mu) {
  if (p1.size() != p2.size()) {
    throw ShapeError("distributions over different tagsets (" +
                     std::to_string(p1.size()) + " vs " +
                     std::to_string(p2.size()) + " tags)");
  }
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw ConfigError("interpolation weight must lie in [0, 1]");
  }
  TagDistribution out(p1.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = mu * p1[i] + (1.0 - mu) * p2[i];
  }
  return out;
}

std::vector<int> combined_tag(const std::vector<TagDistribution> &hmm_posteriors,
                              const std::vector<TagDistribution> &rnn_distributions,
                              double mu) {
  if (hmm_posteriors.size() != rnn_distributions.size()) {
    throw ConsistencyError("systems tagged different numbers of tokens");
  }
  std::vector<int> tags;
  tags.reserve(hmm_posteriors.size());
  for (size_t i = 0; i < hmm_posteriors.size(); ++i) {
    tags.push_back(argmax(interpolate(hmm_posteriors[i], rnn_distributions[i], mu)));
  }
  return tags;
}

EvalReport evaluate(const std::vector<TaggedSentence> &gold,
                    const std::vector<std::vector<int>> &predicted,
                    const std::vector<std::vector<bool>> &oov) {
  if (gold.size() != predicted.size() || (!oov.empty() && oov.size() != gold.size())) {
    throw ConsistencyError("gold and predicted corpora differ in sentence count");
  }
  EvalReport report;
  for (size_t s = 0; s < gold.size(); ++s) {
    const std::vector<int> &g = gold[s].tags;
    if (predicted[s].size() != g.size() ||
        (!oov.empty() && oov[s].size() != g.size())) {
      throw ConsistencyError("sentence " + std::to_string(s) +
                             ": prediction length differs from gold");
    }
    for (size_t i = 0; i < g.size(); ++i) {
      if (g[i] == kUnknownTag) continue;
      const bool hit = predicted[s][i] == g[i];
      ++report.tokens;
      report.correct += hit;
      ++report.confusion[{g[i], predicted[s][i]}];
      if (!oov.empty() && oov[s][i]) {
        ++report.oov_tokens;
        report.oov_correct += hit;
      }
    }
  }
  return report;
}

std::vector<double> mu_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ConfigError("mu grid step must be in (0, 1]");
  std::vector<double> grid;
  const int n = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int i = 0; i <= n; ++i) grid.push_back(std::min(1.0, i * step));
  if (grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

namespace {

std::vector<std::vector<int>> tag_range(const std::vector<SystemOutputs> &outputs,
                                        size_t begin, size_t end, double mu) {
  std::vector<std::vector<int>> out;
  for (size_t s = begin; s < end; ++s) {
    out.push_back(combined_tag(outputs[s].hmm, outputs[s].rnn, mu));
  }
  return out;
}

std::vector<TaggedSentence> slice(const std::vector<TaggedSentence> &v,
                                  size_t begin, size_t end) {
  return {v.begin() + begin, v.begin() + end};
}

std::vector<std::vector<bool>> oov_range(const std::vector<SystemOutputs> &outputs,
                                         size_t begin, size_t end) {
  std::vector<std::vector<bool>> out;
  for (size_t s = begin; s < end; ++s) out.push_back(outputs[s].oov);
  return out;
}

double best_mu(const std::vector<TaggedSentence> &gold,
               const std::vector<SystemOutputs> &outputs, size_t begin,
               size_t end, const std::vector<double> &grid) {
  const std::vector<TaggedSentence> part = slice(gold, begin, end);
  double best = grid.front();
  double best_acc = -1.0;
  for (double mu : grid) {
    double acc = evaluate(part, tag_range(outputs, begin, end, mu), {}).accuracy();
    if (acc > best_acc) {
      best_acc = acc;
      best = mu;
    }
  }
  return best;
}

}  // namespace

TuningResult tune_mu(const std::vector<TaggedSentence> &gold,
                     const std::vector<SystemOutputs> &outputs,
                     const CombinerConfig &config) {
  if (gold.size() < 2) throw DataError("mu tuning needs at least two sentences");
  if (gold.size() != outputs.size()) {
    throw ConsistencyError("system outputs do not match the gold corpus");
  }
  const size_t half = (gold.size() + 1) / 2;
  TuningResult result;
  if (config.fixed_mu) {
    interpolate(std::vector<double>{}, std::vector<double>{}, *config.fixed_mu);
    result.fold_mu = {*config.fixed_mu, *config.fixed_mu};
  } else {
    const std::vector<double> grid = mu_grid(config.grid_step);
    result.fold_mu[0] = best_mu(gold, outputs, 0, half, grid);
    result.fold_mu[1] = best_mu(gold, outputs, half, gold.size(), grid);
  }
  // Each half is tagged with the weight tuned on the other one.
  result.predicted = tag_range(outputs, 0, half, result.fold_mu[1]);
  for (std::vector<int> &tags :
       tag_range(outputs, half, gold.size(), result.fold_mu[0])) {
    result.predicted.push_back(std::move(tags));
  }
  result.report = evaluate(gold, result.predicted, oov_range(outputs, 0, gold.size()));
  return result;
}

std::string format_report(const EvalReport &r, const TagSet &tagset) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "accuracy (all words): %.4f  (%zu/%zu)\n",
                r.accuracy(), r.correct, r.tokens);
  out << buf;
  if (auto oov = r.oov_accuracy()) {
    std::snprintf(buf, sizeof(buf), "accuracy (OOV):       %.4f  (%zu/%zu)\n",
                  *oov, r.oov_correct, r.oov_tokens);
    out << buf;
  } else {
    out << "accuracy (OOV):       n/a (no OOV tokens)\n";
  }
  out << "confusion (gold -> predicted: count)\n";
  for (const auto &[key, count] : r.confusion) {
    out << "  " << tagset.label(key.first) << " -> " << tagset.label(key.second)
        << ": " << count << '\n';
  }
  return out.str();
}

std::string format_report(const TuningResult &result, const TagSet &tagset) {
  std::ostringstream out;
  char buf[160];
  out << "# Combined tagger evaluation\n";
  out << "# OOV token: token without a common word vector on its side\n";
  std::snprintf(buf, sizeof(buf), "mu tuned on fold 1 (tags fold 2): %.2f\n",
                result.fold_mu[0]);
  out << buf;
  std::snprintf(buf, sizeof(buf), "mu tuned on fold 2 (tags fold 1): %.2f\n",
                result.fold_mu[1]);
  out << buf;
  out << format_report(result.report, tagset);
  return out.str();
}

namespace {

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string format_key_values(const EvalReport &r) {
  std::ostringstream out;
  out << "accuracy_all=" << number(r.accuracy()) << '\n';
  if (auto oov = r.oov_accuracy()) {
    out << "accuracy_oov=" << number(*oov) << '\n';
  } else {
    out << "accuracy_oov=NA\n";
  }
  out << "tokens=" << r.tokens << '\n';
  out << "correct=" << r.correct << '\n';
  out << "oov_tokens=" << r.oov_tokens << '\n';
  out << "oov_correct=" << r.oov_correct << '\n';
  return out.str();
}

std::string format_key_values(const TuningResult &result) {
  return format_key_values(result.report) +
         "mu_fold1=" + number(result.fold_mu[0]) + '\n' +
         "mu_fold2=" + number(result.fold_mu[1]) + '\n';
}

}  // namespace xltag
