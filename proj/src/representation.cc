#include "xltag/representation.h"

#include "xltag/binary_io.h"
#include "xltag/errors.h"

namespace xltag {

namespace {
constexpr std::string_view kMagic = "XLREP1";
}  // namespace

void ReprTable::add_side(Side side, const std::vector<Sentence> &sentences) {
  if (sentences.size() != dim_) {
    throw ShapeError("representation has " + std::to_string(dim_) +
                     " bi-sentences but side has " +
                     std::to_string(sentences.size()));
  }
  const uint8_t side_id = static_cast<uint8_t>(side);
  for (size_t i = 0; i < sentences.size(); ++i) {
    for (const std::string &word : sentences[i]) {
      std::vector<uint32_t> &indices = entries_[Key{side_id, word}];
      // Sentences are visited in order, so the list stays sorted.
      if (indices.empty() || indices.back() != i) {
        indices.push_back(static_cast<uint32_t>(i));
      }
    }
  }
}

std::span<const uint32_t> ReprTable::lookup(Side side,
                                            const std::string &word) const {
  auto it = entries_.find(Key{static_cast<uint8_t>(side), word});
  if (it == entries_.end()) return {};
  return it->second;
}

CommonWordVector ReprTable::vector(Side side, const std::string &word) const {
  std::span<const uint32_t> indices = lookup(side, word);
  return CommonWordVector{{indices.begin(), indices.end()}, dim_};
}

void ReprTable::save(const std::string &path) const {
  BinaryWriter w;
  w.write_magic(kMagic);
  w.write_u64(dim_);
  w.write_u64(entries_.size());
  for (const auto &[key, indices] : entries_) {
    w.write_u8(key.side);
    w.write_string(key.word);
    w.write_u64(indices.size());
    for (uint32_t i : indices) w.write_u32(i);
  }
  w.save(path);
}

ReprTable ReprTable::load(const std::string &path) {
  BinaryReader r = BinaryReader::from_file(path);
  r.expect_magic(kMagic);
  ReprTable table(r.read_u64());
  uint64_t count = r.read_u64();
  for (uint64_t e = 0; e < count; ++e) {
    Key key;
    key.side = r.read_u8();
    key.word = r.read_string();
    uint64_t n = r.read_u64();
    std::vector<uint32_t> indices;
    indices.reserve(n);
    for (uint64_t k = 0; k < n; ++k) {
      uint32_t index = r.read_u32();
      if (index >= table.dim_ || (!indices.empty() && index <= indices.back())) {
        throw FormatError(path + ": invalid index list for '" + key.word + "'");
      }
      indices.push_back(index);
    }
    table.entries_.emplace(std::move(key), std::move(indices));
  }
  r.expect_end();
  return table;
}

ReprTable build_representation(const ParallelCorpus &corpus) {
  ReprTable table(corpus.size());
  std::vector<Sentence> source, target;
  source.reserve(corpus.size());
  target.reserve(corpus.size());
  for (const SentencePair &p : corpus.pairs()) {
    source.push_back(p.source);
    target.push_back(p.target);
  }
  table.add_side(Side::kSource, source);
  table.add_side(Side::kTarget, target);
  return table;
}

}  // namespace xltag
