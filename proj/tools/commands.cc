#include "commands.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "config_file.h"
#include "xltag/alignment.h"
#include "xltag/cbow.h"
#include "xltag/combiner.h"
#include "xltag/corpus.h"
#include "xltag/errors.h"
#include "xltag/hmm.h"
#include "xltag/representation.h"
#include "xltag/rnn.h"

namespace xltag::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  uint64_t seed = 1;
  bool lowercase = true;
};

// Component seeds derived from the global one.
uint64_t cbow_seed(const Common &c) { return c.seed; }
uint64_t rnn_seed(const Common &c) { return c.seed + 1; }

void require_input(const std::string &path, const std::string &flag) {
  if (path.empty()) throw ConfigError("--" + flag + " is required");
  if (!fs::is_regular_file(path)) {
    throw ConfigError("--" + flag + ": no such file: " + path);
  }
}

void require_output(const std::string &path, const std::string &flag) {
  if (path.empty()) throw ConfigError("--" + flag + " is required");
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw ConfigError("--" + flag + ": no such directory: " + parent.string());
  }
}

void optional_input(const std::string &path, const std::string &flag) {
  if (!path.empty()) require_input(path, flag);
}

void optional_output(const std::string &path, const std::string &flag) {
  if (!path.empty()) require_output(path, flag);
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream file(path, std::ios::binary);
  file << text;
  if (!file) throw DataError("cannot write file: " + path);
}

TaggedCorpusOptions tagged_options(const Common &c, bool allow_unknown) {
  return {c.lowercase, allow_unknown};
}

std::vector<Sentence> tokens_of(const std::vector<TaggedSentence> &tagged) {
  std::vector<Sentence> out;
  for (const TaggedSentence &s : tagged) out.push_back(s.tokens);
  return out;
}

// POS tags of |corpus| from a file tagged over |pos_tagset|; tokens must
// match sentence by sentence.
std::vector<std::vector<int>> load_pos_stream(const std::string &path,
                                              const TagSet &pos_tagset,
                                              const std::vector<Sentence> &corpus,
                                              const Common &c) {
  std::vector<TaggedSentence> pos =
      load_tagged_corpus(path, pos_tagset, tagged_options(c, false));
  if (pos.size() != corpus.size()) {
    throw ConsistencyError(path + ": " + std::to_string(pos.size()) +
                           " POS sentences for " + std::to_string(corpus.size()) +
                           " sentences");
  }
  std::vector<std::vector<int>> out;
  for (size_t i = 0; i < pos.size(); ++i) {
    if (pos[i].tokens != corpus[i]) {
      throw ConsistencyError(path + ": tokens of sentence " + std::to_string(i + 1) +
                             " differ from the tagged text");
    }
    out.push_back(std::move(pos[i].tags));
  }
  return out;
}

// POS stream for tagging: from a POS-tagged file or from an HMM POS tagger.
struct PosSource {
  std::string input;
  std::string hmm;
};

void add_pos_source(CLI::App *cmd, PosSource &p) {
  cmd->add_option("--pos-input", p.input,
                  "POS-tagged version of the input (token<TAB>POS)");
  cmd->add_option("--pos-hmm", p.hmm, "HMM POS tagger producing the POS stream");
}

void validate_pos_source(const PosSource &p, const RnnModel &model) {
  optional_input(p.input, "pos-input");
  optional_input(p.hmm, "pos-hmm");
  const bool wants = model.config().pos_injection != PosInjection::kNone;
  if (!p.input.empty() && !p.hmm.empty()) {
    throw ConfigError("--pos-input and --pos-hmm are mutually exclusive");
  }
  if (wants && p.input.empty() && p.hmm.empty()) {
    throw ConfigError("model uses POS injection; give --pos-input or --pos-hmm");
  }
  if (!wants && (!p.input.empty() || !p.hmm.empty())) {
    throw ConfigError("model has no POS injection; drop --pos-input/--pos-hmm");
  }
}

std::vector<std::vector<int>> pos_stream(const PosSource &p, const RnnModel &model,
                                         const std::vector<Sentence> &corpus,
                                         const Common &c) {
  if (model.config().pos_injection == PosInjection::kNone) return {};
  if (!p.input.empty()) return load_pos_stream(p.input, model.pos_tagset(), corpus, c);
  HmmModel hmm = HmmModel::load(p.hmm);
  std::vector<int> to_model;
  for (const std::string &label : hmm.tagset().labels()) {
    auto index = model.pos_tagset().index_of(label);
    if (!index) {
      throw TagsetError("POS tag '" + label + "' of " + p.hmm +
                        " is not in the model's POS tagset");
    }
    to_model.push_back(*index);
  }
  std::vector<std::vector<int>> out;
  for (const Sentence &s : corpus) {
    std::vector<int> tags = viterbi(hmm, s);
    for (int &t : tags) t = to_model[t];
    out.push_back(std::move(tags));
  }
  return out;
}

void require_same_tagset(const TagSet &a, const TagSet &b, const std::string &what) {
  if (a.labels() != b.labels()) {
    throw TagsetError(what + " uses tagset '" + b.name() +
                      "', which differs from '" + a.name() + "'");
  }
}

// ---------------------------------------------------------------------------

struct BuildReprArgs {
  std::string source;
  std::vector<std::string> targets;
  std::string output;
};

void build_repr_cmd(const Common &c, const BuildReprArgs &a, std::ostream &out) {
  require_input(a.source, "source");
  if (a.targets.empty()) throw ConfigError("--target is required");
  for (const std::string &t : a.targets) require_input(t, "target");
  require_output(a.output, "output");

  ParallelCorpus corpus = load_parallel_corpus(a.source, a.targets[0], c.lowercase);
  ReprTable repr = build_representation(corpus);
  for (size_t k = 1; k < a.targets.size(); ++k) {
    std::vector<Sentence> extra = load_sentences(a.targets[k], c.lowercase);
    if (extra.size() != corpus.size()) {
      throw AlignmentError(a.targets[k] + " has " + std::to_string(extra.size()) +
                           " lines, expected " + std::to_string(corpus.size()));
    }
    repr.add_side(side_from_index(static_cast<int>(k + 1)), extra);
  }
  repr.save(a.output);
  out << "bi-sentences " << repr.dim() << ", entries " << repr.size() << '\n';
}

struct TrainCbowArgs {
  std::vector<std::string> text;
  std::string output;
  CbowOptions options;
};

void train_cbow_cmd(const Common &c, TrainCbowArgs a, std::ostream &out) {
  if (a.text.empty()) throw ConfigError("--text is required");
  for (const std::string &t : a.text) require_input(t, "text");
  require_output(a.output, "output");
  if (a.options.window == 0 || a.options.dim == 0) {
    throw ConfigError("CBOW window and dimension must be positive");
  }
  if (!(a.options.learning_rate > 0.0)) {
    throw ConfigError("CBOW learning rate must be positive");
  }
  a.options.seed = cbow_seed(c);

  std::vector<Sentence> sentences;
  for (const std::string &t : a.text) {
    for (Sentence &s : load_sentences(t, c.lowercase)) sentences.push_back(std::move(s));
  }
  CbowModel model = train_cbow(sentences, a.options);
  model.save(a.output);
  out << "vocabulary " << model.vocabulary().size() << ", dimension "
      << model.dim() << '\n';
}

struct TrainRnnArgs {
  std::string repr;
  std::string train;
  std::string train_side = "source";
  std::string validation;
  std::string validation_side = "source";
  std::string tagset;
  std::string pos_tagset;
  std::string train_pos;
  std::string validation_pos;
  std::string pos_injection = "none";
  std::string output;
  std::string log;
  RnnConfig config;
};

std::vector<RnnExample> load_examples(const std::string &path,
                                      const std::string &pos_path,
                                      const std::string &side_name,
                                      const TagSet &tagset, const TagSet &pos_tagset,
                                      bool with_pos, const ReprTable &repr,
                                      const Common &c) {
  const Side side = parse_side(side_name);
  std::vector<TaggedSentence> tagged =
      load_tagged_corpus(path, tagset, tagged_options(c, true));
  std::vector<std::vector<int>> pos;
  if (with_pos) pos = load_pos_stream(pos_path, pos_tagset, tokens_of(tagged), c);
  std::vector<RnnExample> out;
  for (size_t i = 0; i < tagged.size(); ++i) {
    RnnExample ex;
    ex.input = encode_sentence(repr, tagged[i].tokens, side,
                               with_pos ? pos[i] : std::vector<int>{});
    ex.tags = tagged[i].tags;
    out.push_back(std::move(ex));
  }
  return out;
}

std::string format_epoch(const EpochRecord &r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "epoch=%zu lr=%.6f train_loss=%.6f validation_accuracy=%.6f%s\n",
                r.epoch, r.learning_rate, r.train_loss, r.validation_accuracy,
                r.improved ? " best" : "");
  return buf;
}

void train_rnn_cmd(const Common &c, TrainRnnArgs a, std::ostream &out) {
  require_input(a.repr, "repr");
  require_input(a.train, "train");
  require_input(a.validation, "validation");
  require_input(a.tagset, "tagset");
  require_output(a.output, "output");
  optional_output(a.log, "log");
  parse_side(a.train_side);
  parse_side(a.validation_side);
  a.config.pos_injection = parse_pos_injection(a.pos_injection);
  a.config.seed = rnn_seed(c);
  const bool with_pos = a.config.pos_injection != PosInjection::kNone;
  if (with_pos) {
    require_input(a.pos_tagset, "pos-tagset");
    require_input(a.train_pos, "train-pos");
    require_input(a.validation_pos, "validation-pos");
  } else if (!a.pos_tagset.empty() || !a.train_pos.empty() ||
             !a.validation_pos.empty()) {
    throw ConfigError("POS files given but --pos-injection is none");
  }
  if (a.config.max_epochs == 0) throw ConfigError("max-epochs must be at least 1");

  TagSet tagset = TagSet::load(a.tagset);
  TagSet pos_tagset = with_pos ? TagSet::load(a.pos_tagset) : TagSet();
  a.config.pos_tagset_size = pos_tagset.size();
  a.config.validate();

  ReprTable repr = ReprTable::load(a.repr);
  std::vector<RnnExample> train_set =
      load_examples(a.train, a.train_pos, a.train_side, tagset, pos_tagset,
                    with_pos, repr, c);
  std::vector<RnnExample> validation =
      load_examples(a.validation, a.validation_pos, a.validation_side, tagset,
                    pos_tagset, with_pos, repr, c);

  RnnModel model(a.config, repr.dim(), tagset, pos_tagset);
  model.randomize(a.config.seed, 0.1);
  TrainResult result = train(std::move(model), train_set, validation);

  std::string log;
  for (const EpochRecord &r : result.log) log += format_epoch(r);
  result.model.save(a.output);
  if (a.log.empty()) {
    out << log;
  } else {
    write_text(a.log, log);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", result.best_accuracy);
  out << "best validation accuracy " << buf << '\n';
}

// Model inputs shared by tag and combine.
struct TaggerArgs {
  std::string model;
  std::string repr;
  std::string side = "target";
  std::string cbow;
  bool oov_resolve = false;
  PosSource pos;
};

void add_tagger_options(CLI::App *cmd, TaggerArgs &t) {
  cmd->add_option("--model", t.model, "RNN model file");
  cmd->add_option("--repr", t.repr, "representation file");
  cmd->add_option("--side", t.side, "language of the input: source, target or 2, 3, ...");
  cmd->add_option("--cbow", t.cbow, "CBOW model for OOV resolution");
  cmd->add_flag("--oov-resolve", t.oov_resolve,
                "replace OOV tokens by their closest known word in context");
  add_pos_source(cmd, t.pos);
}

struct Tagger {
  RnnModel model;
  ReprTable repr;
  Side side = Side::kTarget;
  std::optional<CbowModel> cbow;
};

void validate_tagger_paths(const TaggerArgs &t) {
  require_input(t.model, "model");
  require_input(t.repr, "repr");
  parse_side(t.side);
  if (t.oov_resolve) {
    require_input(t.cbow, "cbow");
  } else if (!t.cbow.empty()) {
    throw ConfigError("--cbow is only used with --oov-resolve");
  }
  optional_input(t.pos.input, "pos-input");
  optional_input(t.pos.hmm, "pos-hmm");
}

Tagger load_tagger(const TaggerArgs &t) {
  Tagger tagger;
  tagger.model = RnnModel::load(t.model);
  validate_pos_source(t.pos, tagger.model);
  tagger.repr = ReprTable::load(t.repr);
  if (tagger.repr.dim() != tagger.model.input_dim()) {
    throw ShapeError("representation has " + std::to_string(tagger.repr.dim()) +
                     " bi-sentences but the model expects " +
                     std::to_string(tagger.model.input_dim()));
  }
  tagger.side = parse_side(t.side);
  if (t.oov_resolve) tagger.cbow = CbowModel::load(t.cbow);
  return tagger;
}

std::vector<TaggingResult> run_tagger(const Tagger &tagger, const TaggerArgs &t,
                                      const std::vector<Sentence> &sentences,
                                      const Common &c) {
  std::vector<std::vector<int>> pos = pos_stream(t.pos, tagger.model, sentences, c);
  std::vector<TaggingResult> out;
  for (size_t i = 0; i < sentences.size(); ++i) {
    out.push_back(tag_sentence(tagger.model, tagger.repr, sentences[i], tagger.side,
                               pos.empty() ? std::span<const int>() : pos[i],
                               tagger.cbow ? &*tagger.cbow : nullptr));
  }
  return out;
}

struct TagArgs {
  TaggerArgs tagger;
  std::string input;
  std::string output;
};

void tag_cmd(const Common &c, const TagArgs &a, std::ostream &out) {
  validate_tagger_paths(a.tagger);
  require_input(a.input, "input");
  require_output(a.output, "output");

  Tagger tagger = load_tagger(a.tagger);
  std::vector<Sentence> sentences = load_sentences(a.input, c.lowercase);
  std::vector<TaggingResult> results = run_tagger(tagger, a.tagger, sentences, c);
  std::vector<TaggedSentence> tagged;
  size_t tokens = 0, oov = 0;
  for (size_t i = 0; i < sentences.size(); ++i) {
    tagged.push_back({sentences[i], results[i].tags});
    tokens += sentences[i].size();
    oov += std::count(results[i].oov.begin(), results[i].oov.end(), true);
  }
  save_tagged_corpus(a.output, tagged, tagger.model.tagset());
  out << "tagged " << sentences.size() << " sentences, " << tokens << " tokens, "
      << oov << " OOV\n";
}

struct AlignArgs {
  std::string source;
  std::string target;
  std::string output;
  int iterations = 5;
};

void align_cmd(const Common &c, const AlignArgs &a, std::ostream &out) {
  require_input(a.source, "source");
  require_input(a.target, "target");
  require_output(a.output, "output");
  if (a.iterations < 1) throw ConfigError("--iterations must be at least 1");

  ParallelCorpus corpus = load_parallel_corpus(a.source, a.target, c.lowercase);
  std::vector<double> ll;
  TranslationTable table = train_ibm1(corpus, a.iterations, &ll);
  save_links(a.output, align_corpus(table, corpus));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", ll.back());
  out << "log-likelihood " << buf << '\n';
}

struct ProjectArgs {
  std::string source_tagged;
  std::string target;
  std::string links;
  std::string tagset;
  std::string output;
  double max_null_fraction = 0.5;
};

ParallelCorpus pair_up(const std::vector<TaggedSentence> &source,
                       const std::vector<Sentence> &targets,
                       const std::string &target_path) {
  if (source.size() != targets.size()) {
    throw AlignmentError("tagged source has " + std::to_string(source.size()) +
                         " sentences but " + target_path + " has " +
                         std::to_string(targets.size()));
  }
  std::vector<SentencePair> pairs;
  for (size_t i = 0; i < source.size(); ++i) {
    pairs.push_back({source[i].tokens, targets[i]});
  }
  return ParallelCorpus(std::move(pairs));
}

void project_cmd(const Common &c, const ProjectArgs &a, std::ostream &out) {
  require_input(a.source_tagged, "source-tagged");
  require_input(a.target, "target");
  require_input(a.links, "links");
  require_input(a.tagset, "tagset");
  require_output(a.output, "output");
  if (!(a.max_null_fraction >= 0.0 && a.max_null_fraction <= 1.0)) {
    throw ConfigError("--max-null-fraction must lie in [0, 1]");
  }

  TagSet tagset = TagSet::load(a.tagset);
  std::vector<TaggedSentence> source =
      load_tagged_corpus(a.source_tagged, tagset, tagged_options(c, false));
  std::vector<Sentence> targets = load_sentences(a.target, c.lowercase);
  ParallelCorpus corpus = pair_up(source, targets, a.target);
  std::vector<AlignmentLinks> links = load_links(a.links, corpus);
  ProjectionResult result =
      project_tags(source, targets, links, a.max_null_fraction);
  save_tagged_corpus(a.output, result.sentences, tagset);
  out << "kept " << result.kept.size() << " of " << targets.size()
      << " sentences\n";
}

struct TrainHmmArgs {
  std::string train;
  std::string tagset;
  std::string output;
  HmmOptions options;
};

void validate_hmm_options(const HmmOptions &o) {
  if (o.max_suffix_length == 0) {
    throw ConfigError("--max-suffix-length must be at least 1");
  }
}

void train_hmm_cmd(const Common &c, const TrainHmmArgs &a, std::ostream &out) {
  require_input(a.train, "train");
  require_input(a.tagset, "tagset");
  require_output(a.output, "output");
  validate_hmm_options(a.options);

  TagSet tagset = TagSet::load(a.tagset);
  HmmModel model = train_hmm(
      load_tagged_corpus(a.train, tagset, tagged_options(c, true)), tagset, a.options);
  model.save(a.output);
  out << "known words " << model.lexicon().size() << '\n';
}

struct BaselineArgs {
  std::string source_tagged;
  std::string target;
  std::string tagset;
  std::string links_output;
  std::string projected_output;
  std::string hmm_output;
  int iterations = 5;
  double max_null_fraction = 0.5;
  HmmOptions options;
};

void baseline_cmd(const Common &c, const BaselineArgs &a, std::ostream &out) {
  require_input(a.source_tagged, "source-tagged");
  require_input(a.target, "target");
  require_input(a.tagset, "tagset");
  require_output(a.links_output, "links-output");
  require_output(a.projected_output, "projected-output");
  require_output(a.hmm_output, "hmm-output");
  if (a.iterations < 1) throw ConfigError("--iterations must be at least 1");
  if (!(a.max_null_fraction >= 0.0 && a.max_null_fraction <= 1.0)) {
    throw ConfigError("--max-null-fraction must lie in [0, 1]");
  }
  validate_hmm_options(a.options);

  TagSet tagset = TagSet::load(a.tagset);
  std::vector<TaggedSentence> source =
      load_tagged_corpus(a.source_tagged, tagset, tagged_options(c, false));
  std::vector<Sentence> targets = load_sentences(a.target, c.lowercase);
  ParallelCorpus corpus = pair_up(source, targets, a.target);
  TranslationTable table = train_ibm1(corpus, a.iterations);
  std::vector<AlignmentLinks> links = align_corpus(table, corpus);
  ProjectionResult projected =
      project_tags(source, targets, links, a.max_null_fraction);
  HmmModel hmm = train_hmm(projected.sentences, tagset, a.options);

  save_links(a.links_output, links);
  save_tagged_corpus(a.projected_output, projected.sentences, tagset);
  hmm.save(a.hmm_output);
  out << "kept " << projected.kept.size() << " of " << targets.size()
      << " sentences; known words " << hmm.lexicon().size() << '\n';
}

struct CombineArgs {
  TaggerArgs tagger;
  std::string gold;
  std::string tagset;
  std::string hmm;
  std::string report;
  std::string key_values;
  std::string predicted;
  double mu = 0.0;
  double grid_step = 0.05;
};

void write_reports(const std::string &report, const std::string &report_text,
                   const std::string &key_values, const std::string &kv_text,
                   std::ostream &out) {
  if (report.empty()) {
    out << report_text;
  } else {
    write_text(report, report_text);
  }
  if (!key_values.empty()) write_text(key_values, kv_text);
}

void combine_cmd(const Common &c, const CombineArgs &a, bool fixed_mu,
                 std::ostream &out) {
  validate_tagger_paths(a.tagger);
  require_input(a.gold, "gold");
  require_input(a.tagset, "tagset");
  require_input(a.hmm, "hmm");
  optional_output(a.report, "report");
  optional_output(a.key_values, "key-values");
  optional_output(a.predicted, "predicted");
  if (!(a.grid_step > 0.0 && a.grid_step <= 1.0)) {
    throw ConfigError("--grid-step must lie in (0, 1]");
  }

  TagSet tagset = TagSet::load(a.tagset);
  Tagger tagger = load_tagger(a.tagger);
  require_same_tagset(tagset, tagger.model.tagset(), a.tagger.model);
  HmmModel hmm = HmmModel::load(a.hmm);
  require_same_tagset(tagset, hmm.tagset(), a.hmm);
  std::vector<TaggedSentence> gold =
      load_tagged_corpus(a.gold, tagset, tagged_options(c, false));
  std::vector<Sentence> sentences = tokens_of(gold);

  std::vector<TaggingResult> rnn = run_tagger(tagger, a.tagger, sentences, c);
  std::vector<SystemOutputs> outputs;
  for (size_t i = 0; i < sentences.size(); ++i) {
    outputs.push_back({posterior(hmm, sentences[i]), rnn[i].distributions, rnn[i].oov});
  }
  CombinerConfig config;
  config.grid_step = a.grid_step;
  if (fixed_mu) config.fixed_mu = a.mu;
  TuningResult result = tune_mu(gold, outputs, config);

  if (!a.predicted.empty()) {
    std::vector<TaggedSentence> predicted;
    for (size_t i = 0; i < sentences.size(); ++i) {
      predicted.push_back({sentences[i], result.predicted[i]});
    }
    save_tagged_corpus(a.predicted, predicted, tagset);
  }
  write_reports(a.report, format_report(result, tagset), a.key_values,
                format_key_values(result), out);
}

struct EvaluateArgs {
  std::string gold;
  std::string predicted;
  std::string tagset;
  std::string repr;
  std::string side = "target";
  std::string report;
  std::string key_values;
};

void evaluate_cmd(const Common &c, const EvaluateArgs &a, std::ostream &out) {
  require_input(a.gold, "gold");
  require_input(a.predicted, "predicted");
  require_input(a.tagset, "tagset");
  optional_input(a.repr, "repr");
  const Side side = parse_side(a.side);
  optional_output(a.report, "report");
  optional_output(a.key_values, "key-values");

  TagSet tagset = TagSet::load(a.tagset);
  std::vector<TaggedSentence> gold =
      load_tagged_corpus(a.gold, tagset, tagged_options(c, false));
  std::vector<TaggedSentence> predicted =
      load_tagged_corpus(a.predicted, tagset, tagged_options(c, false));
  if (gold.size() != predicted.size()) {
    throw ConsistencyError("gold has " + std::to_string(gold.size()) +
                           " sentences, predictions " +
                           std::to_string(predicted.size()));
  }
  std::vector<std::vector<int>> tags;
  for (size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].tokens != predicted[i].tokens) {
      throw ConsistencyError("tokens of sentence " + std::to_string(i + 1) +
                             " differ between gold and predictions");
    }
    tags.push_back(predicted[i].tags);
  }
  std::vector<std::vector<bool>> oov;
  if (!a.repr.empty()) {
    ReprTable repr = ReprTable::load(a.repr);
    for (const TaggedSentence &s : gold) {
      std::vector<bool> flags;
      for (const std::string &w : s.tokens) flags.push_back(!repr.contains(side, w));
      oov.push_back(std::move(flags));
    }
  }
  EvalReport report = evaluate(gold, tags, oov);
  write_reports(a.report,
                "# Tagger evaluation\n"
                "# OOV token: token without a common word vector on its side\n" +
                    format_report(report, tagset),
                a.key_values, format_key_values(report), out);
}

// ---------------------------------------------------------------------------

void add_common(CLI::App *cmd, Common &c) {
  cmd->option_defaults()->always_capture_default();
  cmd->add_option("--config", c.config, "flat key = value file of defaults");
  cmd->add_option("--seed", c.seed, "global random seed");
  cmd->add_flag("--lowercase,!--no-lowercase", c.lowercase,
                "lowercase all text (default on)");
}

bool mentions(const std::vector<std::string> &args, const CLI::Option *opt) {
  for (const std::string &name : opt->get_lnames()) {
    const std::string flag = "--" + name;
    for (const std::string &arg : args) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) return true;
    }
  }
  return false;
}

std::string config_path(const std::vector<std::string> &args) {
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return "";
}

// Appends "--key=value" for every config entry not already given on the
// command line. Keys no subcommand knows are an error; keys that belong to
// other subcommands are ignored.
std::vector<std::string> apply_config(const CLI::App &app,
                                      std::vector<std::string> args) {
  const std::string path = config_path(args);
  if (path.empty()) return args;
  const CLI::App *chosen = nullptr;
  for (const std::string &arg : args) {
    for (const CLI::App *sub : app.get_subcommands({})) {
      if (sub->get_name() == arg) chosen = sub;
    }
    if (chosen) break;
  }
  if (!chosen) return args;
  for (const auto &[key, value] : load_config_file(path)) {
    if (key == "config") throw ConfigError("config files cannot nest");
    const std::string flag = "--" + key;
    if (const CLI::Option *opt = chosen->get_option_no_throw(flag)) {
      if (!mentions(args, opt)) args.push_back(flag + "=" + value);
      continue;
    }
    bool known = false;
    for (const CLI::App *sub : app.get_subcommands({})) {
      known = known || sub->get_option_no_throw(flag) != nullptr;
    }
    if (!known) throw ConfigError(path + ": unknown key '" + key + "'");
  }
  return args;
}

int report_error(std::ostream &err, const std::string &message, int code) {
  err << "error: " << message << '\n';
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string> &raw_args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Cross-lingual sequence tagging from parallel corpora", "xltag"};
  app.require_subcommand(1);

  Common common;
  BuildReprArgs build_repr;
  TrainCbowArgs train_cbow_args;
  TrainRnnArgs train_rnn;
  TagArgs tag;
  AlignArgs align_args;
  ProjectArgs project;
  TrainHmmArgs train_hmm_args;
  BaselineArgs baseline;
  CombineArgs combine;
  EvaluateArgs evaluate_args;
  std::function<void()> action;

  auto *cmd = app.add_subcommand("build-repr", "build the common word representation");
  add_common(cmd, common);
  cmd->add_option("--source", build_repr.source, "source side, one sentence per line");
  cmd->add_option("--target", build_repr.targets,
                  "target side; repeat for further languages (sides 2, 3, ...)");
  cmd->add_option("--output", build_repr.output, "representation file");
  cmd->callback([&] { action = [&] { build_repr_cmd(common, build_repr, out); }; });

  cmd = app.add_subcommand("train-cbow", "train CBOW embeddings for OOV resolution");
  add_common(cmd, common);
  cmd->add_option("--text", train_cbow_args.text, "training text; may repeat");
  cmd->add_option("--output", train_cbow_args.output, "CBOW model file");
  cmd->add_option("--cbow-dim", train_cbow_args.options.dim);
  cmd->add_option("--cbow-window", train_cbow_args.options.window);
  cmd->add_option("--cbow-negatives", train_cbow_args.options.negatives);
  cmd->add_option("--cbow-epochs", train_cbow_args.options.epochs);
  cmd->add_option("--cbow-learning-rate", train_cbow_args.options.learning_rate);
  cmd->callback([&] { action = [&] { train_cbow_cmd(common, train_cbow_args, out); }; });

  cmd = app.add_subcommand("train-rnn", "train an RNN tagger");
  add_common(cmd, common);
  cmd->add_option("--repr", train_rnn.repr, "representation file");
  cmd->add_option("--train", train_rnn.train, "tagged training corpus");
  cmd->add_option("--train-side", train_rnn.train_side);
  cmd->add_option("--validation", train_rnn.validation, "tagged validation corpus");
  cmd->add_option("--validation-side", train_rnn.validation_side);
  cmd->add_option("--tagset", train_rnn.tagset, "tagset file, one label per line");
  cmd->add_option("--pos-tagset", train_rnn.pos_tagset);
  cmd->add_option("--train-pos", train_rnn.train_pos, "POS-tagged training corpus");
  cmd->add_option("--validation-pos", train_rnn.validation_pos);
  cmd->add_option("--pos-injection", train_rnn.pos_injection,
                  "none, input, recurrent or compression");
  cmd->add_option("--forward-size", train_rnn.config.forward_size);
  cmd->add_option("--compression-size", train_rnn.config.compression_size);
  cmd->add_flag("--bidirectional", train_rnn.config.bidirectional);
  cmd->add_option("--learning-rate", train_rnn.config.learning_rate);
  cmd->add_option("--max-epochs", train_rnn.config.max_epochs);
  cmd->add_option("--bptt-horizon", train_rnn.config.bptt_horizon,
                  "steps of backpropagation per output, 0 = whole sentence");
  cmd->add_option("--output", train_rnn.output, "model file");
  cmd->add_option("--log", train_rnn.log, "epoch log file (default stdout)");
  cmd->callback([&] { action = [&] { train_rnn_cmd(common, train_rnn, out); }; });

  cmd = app.add_subcommand("tag", "tag text with an RNN model");
  add_common(cmd, common);
  add_tagger_options(cmd, tag.tagger);
  cmd->add_option("--input", tag.input, "text, one sentence per line");
  cmd->add_option("--output", tag.output, "tagged corpus");
  cmd->callback([&] { action = [&] { tag_cmd(common, tag, out); }; });

  cmd = app.add_subcommand("align", "IBM Model 1 word alignment");
  add_common(cmd, common);
  cmd->add_option("--source", align_args.source);
  cmd->add_option("--target", align_args.target);
  cmd->add_option("--iterations", align_args.iterations, "EM iterations");
  cmd->add_option("--output", align_args.output, "links file");
  cmd->callback([&] { action = [&] { align_cmd(common, align_args, out); }; });

  cmd = app.add_subcommand("project", "project source tags through alignment links");
  add_common(cmd, common);
  cmd->add_option("--source-tagged", project.source_tagged);
  cmd->add_option("--target", project.target);
  cmd->add_option("--links", project.links);
  cmd->add_option("--tagset", project.tagset);
  cmd->add_option("--max-null-fraction", project.max_null_fraction);
  cmd->add_option("--output", project.output, "projected tagged corpus");
  cmd->callback([&] { action = [&] { project_cmd(common, project, out); }; });

  cmd = app.add_subcommand("train-hmm", "train the trigram HMM tagger");
  add_common(cmd, common);
  cmd->add_option("--train", train_hmm_args.train);
  cmd->add_option("--tagset", train_hmm_args.tagset);
  cmd->add_option("--rare-threshold", train_hmm_args.options.rare_threshold);
  cmd->add_option("--max-suffix-length", train_hmm_args.options.max_suffix_length);
  cmd->add_option("--output", train_hmm_args.output, "HMM model file");
  cmd->callback([&] { action = [&] { train_hmm_cmd(common, train_hmm_args, out); }; });

  cmd = app.add_subcommand("baseline", "align, project and train the HMM in one step");
  add_common(cmd, common);
  cmd->add_option("--source-tagged", baseline.source_tagged);
  cmd->add_option("--target", baseline.target);
  cmd->add_option("--tagset", baseline.tagset);
  cmd->add_option("--iterations", baseline.iterations);
  cmd->add_option("--max-null-fraction", baseline.max_null_fraction);
  cmd->add_option("--rare-threshold", baseline.options.rare_threshold);
  cmd->add_option("--max-suffix-length", baseline.options.max_suffix_length);
  cmd->add_option("--links-output", baseline.links_output);
  cmd->add_option("--projected-output", baseline.projected_output);
  cmd->add_option("--hmm-output", baseline.hmm_output);
  cmd->callback([&] { action = [&] { baseline_cmd(common, baseline, out); }; });

  cmd = app.add_subcommand("combine", "interpolate HMM and RNN taggers");
  add_common(cmd, common);
  add_tagger_options(cmd, combine.tagger);
  cmd->add_option("--gold", combine.gold, "gold tagged test corpus");
  cmd->add_option("--tagset", combine.tagset);
  cmd->add_option("--hmm", combine.hmm, "HMM model file");
  CLI::Option *mu = cmd->add_option("--mu", combine.mu, "fixed HMM weight")
                        ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--grid-step", combine.grid_step);
  cmd->add_option("--report", combine.report, "report file (default stdout)");
  cmd->add_option("--key-values", combine.key_values, "key=value report file");
  cmd->add_option("--predicted", combine.predicted, "combined tags output");
  cmd->callback([&] {
    action = [&] { combine_cmd(common, combine, mu->count() > 0, out); };
  });

  cmd = app.add_subcommand("evaluate", "per-token accuracy of a tagged corpus");
  add_common(cmd, common);
  cmd->add_option("--gold", evaluate_args.gold);
  cmd->add_option("--predicted", evaluate_args.predicted);
  cmd->add_option("--tagset", evaluate_args.tagset);
  cmd->add_option("--repr", evaluate_args.repr, "representation for OOV marking");
  cmd->add_option("--side", evaluate_args.side);
  cmd->add_option("--report", evaluate_args.report, "report file (default stdout)");
  cmd->add_option("--key-values", evaluate_args.key_values);
  cmd->callback([&] { action = [&] { evaluate_cmd(common, evaluate_args, out); }; });

  try {
    std::vector<std::string> args = apply_config(app, raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError &e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitConfig;
    }
    if (action) action();
    return kExitOk;
  } catch (const ConfigError &e) {
    return report_error(err, e.what(), kExitConfig);
  } catch (const DivergenceError &e) {
    return report_error(err, e.what(), kExitDivergence);
  } catch (const Error &e) {
    return report_error(err, e.what(), kExitData);
  } catch (const std::exception &e) {
    return report_error(err, e.what(), kExitData);
  }
}

int run_cli(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace xltag::cli
