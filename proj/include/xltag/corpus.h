#ifndef XLTAG_CORPUS_H_
#define XLTAG_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xltag {

using Sentence = std::vector<std::string>;

// Language side of a word. Values beyond kTarget are allowed and identify
// additional target languages of a multi-parallel corpus.
enum class Side : uint8_t { kSource = 0, kTarget = 1 };

inline Side side_from_index(int index) { return static_cast<Side>(index); }
std::string side_name(Side side);
// Accepts "source", "target" or a numeric language index.
Side parse_side(std::string_view text);

struct SentencePair {
  Sentence source;
  Sentence target;

  bool operator==(const SentencePair &) const = default;
};

// Sentence-aligned bilingual corpus. Pair indices 0..N-1 are the dimensions
// of the common word representation, so they must stay stable.
class ParallelCorpus {
 public:
  ParallelCorpus() = default;
  // Throws FormatError if any side of any pair is empty.
  explicit ParallelCorpus(std::vector<SentencePair> pairs);

  size_t size() const { return pairs_.size(); }
  const SentencePair &pair(size_t i) const { return pairs_[i]; }
  const std::vector<SentencePair> &pairs() const { return pairs_; }
  const Sentence &side(size_t i, Side side) const {
    return side == Side::kSource ? pairs_[i].source : pairs_[i].target;
  }

  bool operator==(const ParallelCorpus &) const = default;

 private:
  std::vector<SentencePair> pairs_;
};

// Ordered tag inventory; the position of a label is its index.
class TagSet {
 public:
  TagSet() = default;
  // Throws TagsetError on empty or duplicate labels.
  TagSet(std::string name, std::vector<std::string> labels);

  static TagSet load(const std::string &path);
  void save(const std::string &path) const;

  const std::string &name() const { return name_; }
  const std::vector<std::string> &labels() const { return labels_; }
  size_t size() const { return labels_.size(); }
  const std::string &label(int index) const { return labels_[index]; }
  std::optional<int> index_of(std::string_view label) const;

  bool operator==(const TagSet &other) const {
    return name_ == other.name_ && labels_ == other.labels_;
  }

 private:
  std::string name_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

// Tag index for tokens whose tag could not be projected.
inline constexpr int kUnknownTag = -1;
inline constexpr std::string_view kUnknownTagLabel = "__UNK_TAG__";

struct TaggedSentence {
  Sentence tokens;
  std::vector<int> tags;

  bool operator==(const TaggedSentence &) const = default;
};

struct TaggedCorpusOptions {
  bool lowercase = false;
  // Accept the "__UNK_TAG__" marker (projected corpora).
  bool allow_unknown = false;
};

std::vector<TaggedSentence> parse_tagged_corpus(
    std::istream &in, const TagSet &tagset,
    const TaggedCorpusOptions &options = {});
std::vector<TaggedSentence> load_tagged_corpus(
    const std::string &path, const TagSet &tagset,
    const TaggedCorpusOptions &options = {});
void write_tagged_corpus(std::ostream &out,
                         const std::vector<TaggedSentence> &sentences,
                         const TagSet &tagset);
void save_tagged_corpus(const std::string &path,
                        const std::vector<TaggedSentence> &sentences,
                        const TagSet &tagset);

ParallelCorpus load_parallel_corpus(const std::string &source_path,
                                    const std::string &target_path,
                                    bool lowercase);
void save_parallel_corpus(const ParallelCorpus &corpus,
                          const std::string &source_path,
                          const std::string &target_path);

// One whitespace-tokenized sentence per line. Blank lines are rejected with
// the offending line number.
std::vector<Sentence> load_sentences(const std::string &path, bool lowercase);
void save_sentences(const std::string &path,
                    const std::vector<Sentence> &sentences);

Sentence tokenize(std::string_view line, bool lowercase);

// Lowercases ASCII and the common Latin, Greek and Cyrillic letters of a
// UTF-8 string. Other code points pass through unchanged.
std::string to_lower_utf8(std::string_view text);

class Vocabulary {
 public:
  explicit Vocabulary(Side side) : side_(side) {}

  Side side() const { return side_; }
  size_t size() const { return words_.size(); }

  // Returns the word's id, adding it with frequency 0 if new.
  int add(const std::string &word);
  void count(const std::string &word, uint64_t n = 1) {
    frequencies_[add(word)] += n;
  }

  std::optional<int> id(std::string_view word) const;
  const std::string &word(int id) const { return words_[id]; }
  uint64_t frequency(int id) const { return frequencies_[id]; }
  const std::vector<std::string> &words() const { return words_; }
  uint64_t total_count() const;

 private:
  Side side_;
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> words_;
  std::vector<uint64_t> frequencies_;
};

// Ids are assigned in order of first occurrence.
Vocabulary build_vocabulary(const ParallelCorpus &corpus, Side side);
Vocabulary build_vocabulary(const std::vector<Sentence> &sentences, Side side);

}  // namespace xltag

#endif  // XLTAG_CORPUS_H_
