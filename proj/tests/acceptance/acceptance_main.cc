// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "brute_force.h"
#include "cli_pipeline.h"
#include "scalar_oracle.h"
#include "synthetic.h"
#include "xltag/alignment.h"
#include "xltag/cbow.h"
#include "xltag/combiner.h"
#include "xltag/hmm.h"
#include "xltag/random.h"
#include "xltag/rnn.h"

namespace xltag {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds; 0 = none
  std::function<Outcome()> run;
};

std::string fmt(const char *format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

// Training settings shared by the synthetic tagging experiments.
RnnConfig small_config(bool bidirectional, uint64_t seed) {
  RnnConfig config;
  config.forward_size = 32;
  config.compression_size = 32;
  config.bidirectional = bidirectional;
  config.learning_rate = 0.1;
  config.max_epochs = 15;
  config.seed = seed;
  return config;
}

RnnModel trained(const RnnConfig &config, size_t input_dim, const TagSet &tags,
                 const TagSet &pos_tags, std::span<const RnnExample> train_set,
                 std::span<const RnnExample> validation) {
  RnnModel model(config, input_dim, tags, pos_tags);
  model.randomize(config.seed, 0.1);
  return train(std::move(model), train_set, validation).model;
}

// Accuracy over tokens for which |keep| holds.
double filtered_accuracy(const RnnModel &model,
                         std::span<const RnnExample> examples,
                         const std::function<bool(size_t, size_t)> &keep) {
  size_t total = 0, correct = 0;
  for (size_t s = 0; s < examples.size(); ++s) {
    LayerActivations act = forward_pass(model, examples[s].input);
    for (size_t t = 0; t < examples[s].tags.size(); ++t) {
      if (!keep(s, t)) continue;
      std::span<const double> row = act.output.row(t);
      ++total;
      if (argmax(TagDistribution(row.begin(), row.end())) == examples[s].tags[t]) {
        ++correct;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

Outcome gradient_correctness() {
  Rng rng(2024);
  const PosInjection sites[] = {PosInjection::kNone, PosInjection::kInput,
                                PosInjection::kRecurrent,
                                PosInjection::kCompression};
  double worst = 0.0;
  size_t configs = 0, params = 0;
  bool finite = true;
  for (int rep = 0; rep < 3; ++rep) {
    for (bool bidirectional : {false, true}) {
      for (PosInjection site : sites) {
        RnnConfig config;
        config.forward_size = 2 + rng.below(4);
        config.compression_size = 2 + rng.below(4);
        config.bidirectional = bidirectional;
        config.pos_injection = site;
        config.pos_tagset_size = site == PosInjection::kNone ? 0 : 2 + rng.below(3);
        config.seed = 100 + configs;
        GradientCheckOptions options;
        options.input_dim = 6 + rng.below(9);
        options.num_tags = 2 + rng.below(3);
        options.length = 2 + rng.below(4);
        GradientCheckReport r = gradient_check(config, 1e-5, options);
        worst = std::max(worst, r.max_relative_error);
        finite = finite && r.all_finite;
        params += r.parameters_checked;
        ++configs;
      }
    }
  }
  Outcome o;
  o.pass = finite && worst < 1e-4 && configs >= 20;
  o.detail = fmt("%.0f configurations, %.0f weights, max relative error %.2e",
                 configs, params, worst);
  return o;
}

Outcome forward_oracle() {
  oracle::TinyWeights w;
  double worst = 0.0;
  for (bool bidirectional : {false, true}) {
    oracle::Outputs expected = oracle::scalar_forward(w, bidirectional);
    LayerActivations act =
        forward_pass(oracle::tiny_model(w, bidirectional), oracle::tiny_input());
    for (int t = 0; t < 3; ++t) {
      for (int k = 0; k < 2; ++k) {
        worst = std::max(worst, std::abs(act.output(t, k) - expected[t][k]));
      }
    }
  }
  return {worst <= 1e-12, fmt("SRNN and BRNN max |diff| %.2e", worst)};
}

Outcome cross_lingual_transfer() {
  synthetic::Corpus corpus = synthetic::grammar_corpus(500, 11);
  ReprTable repr = synthetic::build_multi_repr(corpus);
  auto train_set = synthetic::examples(corpus, repr, Side::kSource, 0, 400);
  auto validation = synthetic::examples(corpus, repr, Side::kSource, 400, 450);
  auto test = synthetic::examples(corpus, repr, Side::kTarget, 450, 500);
  RnnModel model = trained(small_config(false, 3), repr.dim(), corpus.tagset, {},
                           train_set, validation);
  const double acc = accuracy(model, test);
  return {acc >= 0.95, fmt("SRNN target-side accuracy %.4f", acc)};
}

Outcome right_context() {
  synthetic::Corpus corpus = synthetic::next_token_corpus(500, 12);
  ReprTable repr = synthetic::build_multi_repr(corpus);
  auto train_set = synthetic::examples(corpus, repr, Side::kSource, 0, 400);
  auto validation = synthetic::examples(corpus, repr, Side::kSource, 400, 450);
  auto test = synthetic::examples(corpus, repr, Side::kTarget, 450, 500);
  auto ambiguous = [&](size_t s, size_t t) {
    return corpus.source[450 + s][t] == "z";
  };
  RnnModel brnn = trained(small_config(true, 5), repr.dim(), corpus.tagset, {},
                          train_set, validation);
  RnnModel srnn = trained(small_config(false, 5), repr.dim(), corpus.tagset, {},
                          train_set, validation);
  const double b = filtered_accuracy(brnn, test, ambiguous);
  const double s = filtered_accuracy(srnn, test, ambiguous);
  return {b >= 0.95 && s <= 0.60,
          fmt("accuracy on next-token-dependent tokens: BRNN %.4f, SRNN %.4f", b, s)};
}

Outcome oov_resolution() {
  synthetic::Corpus corpus = synthetic::oov_corpus(500, 13);
  ReprTable repr = synthetic::build_multi_repr(corpus);
  auto train_set = synthetic::examples(corpus, repr, Side::kSource, 0, 450);
  auto validation = synthetic::examples(corpus, repr, Side::kSource, 450, 500);
  RnnModel model = trained(small_config(false, 7), repr.dim(), corpus.tagset, {},
                           train_set, validation);

  // Two of every six tokens are content slots, so a swap rate of 0.6 makes
  // about 20% of the tokens OOV.
  std::vector<TaggedSentence> test =
      synthetic::oov_test_set(300, 14, 0.6, corpus.tagset);
  // Unlabeled target-language text for CBOW: the parallel target side plus
  // the test sentences themselves.
  std::vector<Sentence> text = corpus.targets[0];
  for (const TaggedSentence &s : test) text.push_back(s.tokens);
  CbowOptions cbow_options;
  cbow_options.dim = 30;
  cbow_options.window = 2;
  cbow_options.epochs = 20;
  cbow_options.seed = 15;
  CbowModel cbow = train_cbow(text, cbow_options);

  size_t tokens = 0, oov = 0, plain_correct = 0, resolved_correct = 0;
  for (const TaggedSentence &s : test) {
    TaggingResult plain = tag_sentence(model, repr, s.tokens, Side::kTarget);
    TaggingResult resolved =
        tag_sentence(model, repr, s.tokens, Side::kTarget, {}, &cbow);
    tokens += s.tokens.size();
    for (size_t t = 0; t < s.tokens.size(); ++t) {
      if (!plain.oov[t]) continue;
      ++oov;
      plain_correct += plain.tags[t] == s.tags[t];
      resolved_correct += resolved.tags[t] == s.tags[t];
    }
  }
  const double rate = static_cast<double>(oov) / tokens;
  const double zero = static_cast<double>(plain_correct) / oov;
  const double cbow_acc = static_cast<double>(resolved_correct) / oov;
  Outcome o;
  o.pass = std::abs(rate - 0.2) <= 0.03 && cbow_acc - zero >= 0.10;
  o.detail = fmt("OOV rate %.3f; OOV accuracy zero-vector %.4f, CBOW %.4f",
                 rate, zero, cbow_acc);
  return o;
}

Outcome multilinguality() {
  synthetic::Corpus corpus = synthetic::grammar_corpus(500, 16, 2);
  ReprTable repr = synthetic::build_multi_repr(corpus);
  auto train_set = synthetic::examples(corpus, repr, Side::kSource, 0, 400);
  auto validation = synthetic::examples(corpus, repr, Side::kSource, 400, 450);
  RnnModel model = trained(small_config(false, 17), repr.dim(), corpus.tagset,
                           {}, train_set, validation);
  const double a1 = accuracy(
      model, synthetic::examples(corpus, repr, side_from_index(1), 450, 500));
  const double a2 = accuracy(
      model, synthetic::examples(corpus, repr, side_from_index(2), 450, 500));
  return {a1 >= 0.90 && a2 >= 0.90,
          fmt("target language 1 accuracy %.4f, target language 2 accuracy %.4f",
              a1, a2)};
}

Outcome hmm_oracle() {
  Rng rng(77);
  double worst_marginal = 0.0, worst_likelihood = 0.0;
  size_t mismatches = 0, sentences = 0;
  for (int m = 0; m < 100; ++m) {
    const size_t k = 2 + m % 3;
    std::vector<std::string> labels;
    for (size_t i = 0; i < k; ++i) labels.push_back("T" + std::to_string(i));
    TagSet tagset("random", labels);
    HmmModel model =
        train_hmm(oracle::random_tagged_corpus(rng, k, 5 + rng.below(30)), tagset);
    for (size_t len = 1; len <= 4; ++len) {
      for (int rep = 0; rep < 3; ++rep) {
        Sentence tokens = oracle::random_test_sentence(rng, len);
        oracle::Enumeration e = oracle::enumerate_hmm(model, tokens, 1e-12);
        ++sentences;
        if (viterbi(model, tokens) != e.best) ++mismatches;
        std::vector<TagDistribution> post = posterior(model, tokens);
        for (size_t i = 0; i < len; ++i) {
          for (size_t t = 0; t < k; ++t) {
            worst_marginal =
                std::max(worst_marginal, std::abs(post[i][t] - e.marginals[i][t]));
          }
        }
        worst_likelihood = std::max(
            worst_likelihood,
            std::abs(sequence_log_likelihood(model, tokens) - e.log_total));
      }
    }
  }
  Outcome o;
  o.pass = mismatches == 0 && worst_marginal <= 1e-9 && worst_likelihood <= 1e-9;
  o.detail = fmt("%.0f Viterbi mismatches, max marginal diff %.2e, max "
                 "log-likelihood diff %.2e",
                 mismatches, worst_marginal, worst_likelihood) +
             " over " + std::to_string(sentences) + " sentences";
  return o;
}

double table_difference(const TranslationTable &table,
                        const oracle::DenseIbm1 &dense) {
  double worst = 0.0;
  for (const auto &[f, fid] : dense.target_ids) {
    for (const auto &[e, eid] : dense.source_ids) {
      worst = std::max(worst, std::abs(table.probability(e, f) - dense.t[eid][fid]));
    }
    worst = std::max(worst, std::abs(table.null_probability(f) -
                                     dense.t[dense.source_ids.size()][fid]));
  }
  return worst;
}

Outcome ibm1_oracle() {
  ParallelCorpus toy({{{"a", "b"}, {"x", "y"}}, {{"a"}, {"x"}}});
  // First EM step from the uniform table, by hand.
  TranslationTable one = train_ibm1(toy, 1);
  double worst = 0.0;
  worst = std::max(worst, std::abs(one.probability("a", "x") - 5.0 / 7.0));
  worst = std::max(worst, std::abs(one.probability("a", "y") - 2.0 / 7.0));
  worst = std::max(worst, std::abs(one.probability("b", "x") - 0.5));
  worst = std::max(worst, std::abs(one.probability("b", "y") - 0.5));
  worst = std::max(worst, std::abs(one.null_probability("x") - 5.0 / 7.0));
  worst = std::max(worst, std::abs(one.null_probability("y") - 2.0 / 7.0));
  oracle::DenseIbm1 dense(toy);
  for (int it = 1; it <= 10; ++it) {
    dense.iterate(toy);
    worst = std::max(worst, table_difference(train_ibm1(toy, it), dense));
  }

  Rng rng(88);
  size_t decreases = 0;
  for (int c = 0; c < 50; ++c) {
    std::vector<SentencePair> pairs;
    const size_t vs = 2 + rng.below(5), vt = 2 + rng.below(5);
    const size_t n = 2 + rng.below(6);
    for (size_t i = 0; i < n; ++i) {
      SentencePair p;
      const size_t ls = 1 + rng.below(5), lt = 1 + rng.below(5);
      for (size_t j = 0; j < ls; ++j) p.source.push_back("s" + std::to_string(rng.below(vs)));
      for (size_t j = 0; j < lt; ++j) p.target.push_back("t" + std::to_string(rng.below(vt)));
      pairs.push_back(std::move(p));
    }
    ParallelCorpus corpus(std::move(pairs));
    std::vector<double> ll;
    train_ibm1(corpus, 10, &ll);
    for (size_t i = 1; i < ll.size(); ++i) {
      if (ll[i] < ll[i - 1] - 1e-10 * std::abs(ll[i - 1])) ++decreases;
    }
  }
  return {worst <= 1e-9 && decreases == 0,
          fmt("max table diff over 10 iterations %.2e; %.0f log-likelihood "
              "decreases on 50 random corpora",
              worst, decreases)};
}

TagDistribution random_distribution(Rng &rng, size_t k) {
  TagDistribution d(k);
  double total = 0.0;
  for (double &p : d) total += p = rng.uniform() + 1e-3;
  for (double &p : d) p /= total;
  return d;
}

Outcome combiner_identities() {
  Rng rng(99);
  const size_t k = 4;
  size_t mismatches = 0;
  std::vector<TaggedSentence> gold;
  std::vector<SystemOutputs> outputs;
  size_t hmm_correct = 0, rnn_correct = 0, tokens = 0;
  for (int s = 0; s < 40; ++s) {
    std::vector<TagDistribution> hmm, rnn;
    const size_t len = 1 + rng.below(8);
    for (size_t i = 0; i < len; ++i) {
      hmm.push_back(random_distribution(rng, k));
      rnn.push_back(random_distribution(rng, k));
    }
    std::vector<int> at1 = combined_tag(hmm, rnn, 1.0);
    std::vector<int> at0 = combined_tag(hmm, rnn, 0.0);
    for (size_t i = 0; i < len; ++i) {
      mismatches += at1[i] != argmax(hmm[i]);
      mismatches += at0[i] != argmax(rnn[i]);
    }

    // Complementary systems: each token is confidently right in one system
    // and mildly wrong in the other.
    TaggedSentence g;
    SystemOutputs out;
    for (size_t i = 0; i < len; ++i) {
      const int tag = static_cast<int>(rng.below(k));
      const int wrong = static_cast<int>((tag + 1) % k);
      TagDistribution sure(k, 0.1 / (k - 1)), unsure(k, 0.0);
      sure[tag] = 0.9;
      unsure[wrong] = 0.4;
      unsure[tag] = 0.35;
      for (size_t j = 0; j < k; ++j) {
        if (static_cast<int>(j) != tag && static_cast<int>(j) != wrong) {
          unsure[j] = 0.25 / (k - 2);
        }
      }
      const bool hmm_right = rng.below(2) == 0;
      g.tokens.push_back("w");
      g.tags.push_back(tag);
      out.hmm.push_back(hmm_right ? sure : unsure);
      out.rnn.push_back(hmm_right ? unsure : sure);
      out.oov.push_back(false);
      hmm_correct += hmm_right;
      rnn_correct += !hmm_right;
      ++tokens;
    }
    gold.push_back(std::move(g));
    outputs.push_back(std::move(out));
  }
  TuningResult tuned = tune_mu(gold, outputs);
  const double pooled = tuned.report.accuracy();
  const double best_single =
      static_cast<double>(std::max(hmm_correct, rnn_correct)) / tokens;
  return {mismatches == 0 && pooled >= best_single,
          fmt("%.0f boundary mismatches; pooled %.4f vs best single system %.4f",
              mismatches, pooled, best_single)};
}

Outcome pos_injection() {
  synthetic::Corpus corpus = synthetic::supersense_corpus(500, 18);
  ReprTable repr = synthetic::build_multi_repr(corpus);
  const PosInjection sites[] = {PosInjection::kInput, PosInjection::kRecurrent,
                                PosInjection::kCompression};
  auto test_plain = synthetic::examples(corpus, repr, Side::kTarget, 450, 500);
  auto test_pos = synthetic::examples(corpus, repr, Side::kTarget, 450, 500, true);

  RnnModel plain = trained(
      small_config(true, 19), repr.dim(), corpus.tagset, {},
      synthetic::examples(corpus, repr, Side::kSource, 0, 400),
      synthetic::examples(corpus, repr, Side::kSource, 400, 450));
  const double without = accuracy(plain, test_plain);

  auto train_set = synthetic::examples(corpus, repr, Side::kSource, 0, 400, true);
  auto validation = synthetic::examples(corpus, repr, Side::kSource, 400, 450, true);
  bool pass = true;
  std::string detail = fmt("no POS %.4f", without);
  for (PosInjection site : sites) {
    RnnConfig config = small_config(true, 19);
    config.pos_injection = site;
    config.pos_tagset_size = corpus.pos_tagset.size();
    RnnModel model = trained(config, repr.dim(), corpus.tagset, corpus.pos_tagset,
                             train_set, validation);
    const double acc = accuracy(model, test_pos);
    pass = pass && acc >= 0.95 && acc - without >= 0.10;
    detail += ", " + pos_injection_name(site) + fmt(" %.4f", acc);
  }
  return {pass, detail};
}

Outcome determinism() {
  testing::PipelineRun first = testing::run_pipeline("acceptance_run_a");
  testing::PipelineRun second = testing::run_pipeline("acceptance_run_b");
  if (first.exit_code != 0 || second.exit_code != 0) {
    return {false, "pipeline failed: " + first.log + second.log};
  }
  size_t differing = 0;
  std::string names;
  for (const auto &[name, bytes] : first.artifacts) {
    auto it = second.artifacts.find(name);
    if (it == second.artifacts.end() || it->second != bytes) {
      ++differing;
      names += " " + name;
    }
  }
  differing += second.artifacts.size() != first.artifacts.size();
  return {differing == 0 && !first.artifacts.empty(),
          std::to_string(first.artifacts.size()) + " artifacts compared, " +
              std::to_string(differing) + " differ" + names};
}

}  // namespace
}  // namespace xltag

int main() {
  using namespace xltag;
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", 30.0, gradient_correctness},
      {2, "forward-pass oracle", 0.0, forward_oracle},
      {3, "cross-lingual transfer", 60.0, cross_lingual_transfer},
      {4, "BRNN right context", 0.0, right_context},
      {5, "OOV resolution", 0.0, oov_resolution},
      {6, "multilinguality", 0.0, multilinguality},
      {7, "HMM oracle equivalence", 0.0, hmm_oracle},
      {8, "IBM Model 1 oracle", 0.0, ibm1_oracle},
      {9, "combiner identities", 0.0, combiner_identities},
      {10, "POS injection layering", 0.0, pos_injection},
      {11, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const Criterion &c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.time_limit > 0.0 && seconds >= c.time_limit) {
      o.pass = false;
      o.detail += " (time limit exceeded)";
    }
    std::printf("[%s] C%d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), o.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
