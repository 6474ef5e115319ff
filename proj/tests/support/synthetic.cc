#include "synthetic.h"

#include <map>

#include "xltag/random.h"

namespace xltag::synthetic {

namespace {

TagSet universal_tagset() {
  return TagSet("universal", {"NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP",
                              "NUM", "CONJ", "PRT", ".", "X"});
}

std::vector<std::string> word_list(const std::string &stem, size_t n) {
  std::vector<std::string> words;
  for (size_t i = 0; i < n; ++i) words.push_back(stem + std::to_string(i));
  return words;
}

void add_mirrors(Corpus &corpus, size_t languages) {
  corpus.targets.assign(languages, {});
  for (size_t k = 0; k < languages; ++k) {
    for (const Sentence &s : corpus.source) {
      Sentence t;
      for (const std::string &w : s) t.push_back(translate(w, k));
      corpus.targets[k].push_back(std::move(t));
    }
  }
}

}  // namespace

std::string translate(const std::string &word, size_t language) {
  return "l" + std::to_string(language + 1) + "_" + word;
}

ParallelCorpus Corpus::parallel(size_t target) const {
  std::vector<SentencePair> pairs;
  for (size_t i = 0; i < source.size(); ++i) {
    pairs.push_back({source[i], targets[target][i]});
  }
  return ParallelCorpus(std::move(pairs));
}

const std::vector<Sentence> &Corpus::side(Side side) const {
  int index = static_cast<int>(side);
  return index == 0 ? source : targets[index - 1];
}

std::vector<TaggedSentence> Corpus::tagged(Side s, size_t begin,
                                           size_t end) const {
  std::vector<TaggedSentence> out;
  for (size_t i = begin; i < end; ++i) out.push_back({side(s)[i], tags[i]});
  return out;
}

std::vector<TaggedSentence> Corpus::pos_tagged(Side s, size_t begin,
                                               size_t end) const {
  std::vector<TaggedSentence> out;
  for (size_t i = begin; i < end; ++i) out.push_back({side(s)[i], pos[i]});
  return out;
}

Corpus grammar_corpus(size_t pairs, uint64_t seed, size_t target_languages) {
  Corpus corpus;
  corpus.tagset = universal_tagset();
  const TagSet &ts = corpus.tagset;
  auto tag = [&](const char *label) { return *ts.index_of(label); };
  const std::vector<std::vector<const char *>> templates = {
      {"DET", "NOUN", "VERB", "."},
      {"DET", "ADJ", "NOUN", "VERB", "DET", "NOUN", "."},
      {"PRON", "VERB", "ADV", "."},
      {"DET", "NOUN", "VERB", "ADP", "DET", "NOUN", "."},
      {"NUM", "NOUN", "VERB", "CONJ", "PRON", "VERB", "."},
      {"PRON", "VERB", "PRT", "DET", "ADJ", "NOUN", "."},
  };
  const std::map<std::string, std::vector<std::string>> lexicon = {
      {"DET", word_list("det", 4)},   {"NOUN", word_list("noun", 40)},
      {"VERB", word_list("verb", 30)}, {"ADJ", word_list("adj", 20)},
      {"ADV", word_list("adv", 10)},  {"PRON", word_list("pron", 6)},
      {"ADP", word_list("adp", 6)},   {"NUM", word_list("num", 8)},
      {"CONJ", word_list("conj", 3)}, {"PRT", word_list("prt", 3)},
      {".", {"."}},                   {"X", word_list("x", 2)},
  };
  Rng rng(seed);
  for (size_t i = 0; i < pairs; ++i) {
    const auto &tmpl = templates[rng.below(templates.size())];
    Sentence s;
    std::vector<int> t;
    for (const char *label : tmpl) {
      const std::vector<std::string> &words = lexicon.at(label);
      s.push_back(words[rng.below(words.size())]);
      t.push_back(tag(label));
    }
    corpus.source.push_back(std::move(s));
    corpus.tags.push_back(std::move(t));
  }
  add_mirrors(corpus, target_languages);
  return corpus;
}

Corpus next_token_corpus(size_t pairs, uint64_t seed) {
  Corpus corpus;
  corpus.tagset = TagSet("next", {"A", "B", "P", "Q"});
  const std::vector<std::string> p_words = word_list("p", 10);
  const std::vector<std::string> q_words = word_list("q", 10);
  Rng rng(seed);
  for (size_t i = 0; i < pairs; ++i) {
    Sentence s;
    std::vector<int> t;
    const size_t chunks = 2 + rng.below(3);
    for (size_t c = 0; c < chunks; ++c) {
      const bool p = rng.below(2) == 0;
      s.push_back("z");
      t.push_back(p ? 0 : 1);
      s.push_back(p ? p_words[rng.below(p_words.size())]
                    : q_words[rng.below(q_words.size())]);
      t.push_back(p ? 2 : 3);
    }
    corpus.source.push_back(std::move(s));
    corpus.tags.push_back(std::move(t));
  }
  add_mirrors(corpus, 1);
  return corpus;
}

namespace {

// Shared generator of the oov_corpus() grammar; |oov_rate| > 0 swaps class
// words for unseen ones.
TaggedSentence oov_sentence(Rng &rng, const TagSet &ts, double oov_rate,
                            size_t &unseen_counter) {
  static const std::vector<std::string> dets = word_list("d", 3);
  static const std::vector<std::string> nouns = word_list("noun", 30);
  static const std::vector<std::string> verbs = word_list("verb", 30);
  static const std::vector<std::string> noun_markers = word_list("nm", 3);
  static const std::vector<std::string> verb_markers = word_list("vm", 3);
  TaggedSentence s;
  for (int chunk = 0; chunk < 2; ++chunk) {
    const bool noun = rng.below(2) == 0;
    s.tokens.push_back(dets[rng.below(dets.size())]);
    s.tags.push_back(*ts.index_of("DET"));
    std::string word = noun ? nouns[rng.below(nouns.size())]
                            : verbs[rng.below(verbs.size())];
    if (oov_rate > 0.0 && rng.uniform() < oov_rate) {
      word = "unseen" + std::to_string(unseen_counter++);
    }
    s.tokens.push_back(word);
    s.tags.push_back(*ts.index_of(noun ? "NOUN" : "VERB"));
    s.tokens.push_back(noun ? noun_markers[rng.below(noun_markers.size())]
                            : verb_markers[rng.below(verb_markers.size())]);
    s.tags.push_back(*ts.index_of(noun ? "ADP" : "ADV"));
  }
  return s;
}

}  // namespace

Corpus oov_corpus(size_t pairs, uint64_t seed) {
  Corpus corpus;
  corpus.tagset = universal_tagset();
  Rng rng(seed);
  size_t unseen = 0;
  for (size_t i = 0; i < pairs; ++i) {
    TaggedSentence s = oov_sentence(rng, corpus.tagset, 0.0, unseen);
    corpus.source.push_back(std::move(s.tokens));
    corpus.tags.push_back(std::move(s.tags));
  }
  add_mirrors(corpus, 1);
  return corpus;
}

std::vector<TaggedSentence> oov_test_set(size_t sentences, uint64_t seed,
                                         double oov_rate, const TagSet &tagset) {
  Rng rng(seed);
  size_t unseen = 0;
  std::vector<TaggedSentence> out;
  for (size_t i = 0; i < sentences; ++i) {
    TaggedSentence s = oov_sentence(rng, tagset, oov_rate, unseen);
    for (std::string &w : s.tokens) {
      if (w.rfind("unseen", 0) != 0) w = translate(w, 0);
    }
    out.push_back(std::move(s));
  }
  return out;
}

Corpus supersense_corpus(size_t pairs, uint64_t seed) {
  Corpus corpus;
  corpus.tagset = TagSet("supersense", {"O", "noun.person", "noun.artifact",
                                        "verb.social", "verb.motion"});
  corpus.pos_tagset = TagSet("pos", {"NOUN", "VERB", "DET"});
  const std::vector<std::string> person = word_list("person", 15);
  const std::vector<std::string> artifact = word_list("artifact", 15);
  const std::vector<std::string> dets = word_list("det", 3);
  Rng rng(seed);
  for (size_t i = 0; i < pairs; ++i) {
    Sentence s;
    std::vector<int> t, p;
    const size_t len = 4 + rng.below(4);
    for (size_t k = 0; k < len; ++k) {
      if (k % 3 == 0) {
        s.push_back(dets[rng.below(dets.size())]);
        t.push_back(0);
        p.push_back(2);
        continue;
      }
      const bool is_person = rng.below(2) == 0;
      const bool is_noun = rng.below(2) == 0;
      s.push_back(is_person ? person[rng.below(person.size())]
                            : artifact[rng.below(artifact.size())]);
      p.push_back(is_noun ? 0 : 1);
      t.push_back(is_noun ? (is_person ? 1 : 2) : (is_person ? 3 : 4));
    }
    corpus.source.push_back(std::move(s));
    corpus.tags.push_back(std::move(t));
    corpus.pos.push_back(std::move(p));
  }
  add_mirrors(corpus, 1);
  return corpus;
}

ReprTable build_multi_repr(const Corpus &corpus) {
  ReprTable repr(corpus.size());
  repr.add_side(Side::kSource, corpus.source);
  for (size_t k = 0; k < corpus.targets.size(); ++k) {
    repr.add_side(side_from_index(static_cast<int>(k + 1)), corpus.targets[k]);
  }
  return repr;
}

std::vector<RnnExample> examples(const Corpus &corpus, const ReprTable &repr,
                                 Side side, size_t begin, size_t end,
                                 bool with_pos) {
  std::vector<RnnExample> out;
  for (size_t i = begin; i < end; ++i) {
    RnnExample ex;
    ex.input = encode_sentence(repr, corpus.side(side)[i], side,
                               with_pos ? corpus.pos[i] : std::vector<int>{});
    ex.tags = corpus.tags[i];
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace xltag::synthetic
