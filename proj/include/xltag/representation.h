#ifndef XLTAG_REPRESENTATION_H_
#define XLTAG_REPRESENTATION_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xltag/corpus.h"

namespace xltag {

// Binary occurrence vector of a word over the N bi-sentences of a parallel
// corpus, stored as the sorted set of active dimensions. An out-of-vocabulary
// word has no active dimension.
struct CommonWordVector {
  std::vector<uint32_t> indices;
  size_t dim = 0;

  bool empty() const { return indices.empty(); }
  bool operator==(const CommonWordVector &) const = default;
};

// Common word representation for every (side, word) of a parallel corpus.
// Words with the same surface form on different sides are distinct entries.
class ReprTable {
 public:
  struct Key {
    uint8_t side;
    std::string word;
    auto operator<=>(const Key &) const = default;
  };

  ReprTable() = default;
  explicit ReprTable(size_t dim) : dim_(dim) {}

  size_t dim() const { return dim_; }
  size_t size() const { return entries_.size(); }

  // Indexes one side of the corpus; sentences[i] is that side of bi-sentence
  // i. Throws ShapeError unless sentences.size() == dim().
  void add_side(Side side, const std::vector<Sentence> &sentences);

  // Active dimensions of |word|; empty for words never seen on |side|.
  std::span<const uint32_t> lookup(Side side, const std::string &word) const;
  bool contains(Side side, const std::string &word) const {
    return !lookup(side, word).empty();
  }
  CommonWordVector vector(Side side, const std::string &word) const;

  const std::map<Key, std::vector<uint32_t>> &entries() const {
    return entries_;
  }

  // XLREP1 format: magic, u64 N, u64 entry count, then per entry a side byte,
  // the word (u32 length + bytes), u64 index count and u32 indices.
  void save(const std::string &path) const;
  static ReprTable load(const std::string &path);

  bool operator==(const ReprTable &) const = default;

 private:
  size_t dim_ = 0;
  std::map<Key, std::vector<uint32_t>> entries_;
};

ReprTable build_representation(const ParallelCorpus &corpus);

}  // namespace xltag

#endif  // XLTAG_REPRESENTATION_H_
