#include "xltag/corpus.h"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xltag/errors.h"

namespace xltag {

namespace {

std::ifstream open_input(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

void strip_cr(std::string &line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::vector<std::string> read_lines(const std::string &path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    lines.push_back(std::move(line));
  }
  return lines;
}

void append_utf8(std::string &out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

char32_t lower_code_point(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin Extended-A pairs upper/lower as even/odd, except the dotted I and
  // the range 0x139-0x148 / 0x179-0x17E where the pairing is shifted by one.
  if (cp >= 0x100 && cp <= 0x137 && cp != 0x130) return cp | 1;
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
    return (cp & 1) ? cp + 1 : cp;
  }
  if (cp >= 0x14A && cp <= 0x177) return cp | 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

}  // namespace

std::string side_name(Side side) {
  switch (side) {
    case Side::kSource:
      return "source";
    case Side::kTarget:
      return "target";
  }
  return "lang" + std::to_string(static_cast<int>(side));
}

Side parse_side(std::string_view text) {
  if (text == "source") return Side::kSource;
  if (text == "target") return Side::kTarget;
  int value = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0 ||
      value > 255) {
    throw ConfigError("invalid side: " + std::string(text));
  }
  return side_from_index(value);
}

ParallelCorpus::ParallelCorpus(std::vector<SentencePair> pairs)
    : pairs_(std::move(pairs)) {
  for (size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].source.empty() || pairs_[i].target.empty()) {
      throw FormatError("empty sentence in bi-sentence " + std::to_string(i));
    }
  }
}

TagSet::TagSet(std::string name, std::vector<std::string> labels)
    : name_(std::move(name)), labels_(std::move(labels)) {
  if (labels_.empty()) throw TagsetError("tagset '" + name_ + "' is empty");
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw TagsetError("empty tag label");
    if (!index_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw TagsetError("duplicate tag label: " + labels_[i]);
    }
  }
}

TagSet TagSet::load(const std::string &path) {
  std::vector<std::string> labels;
  for (std::string &line : read_lines(path)) {
    size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t");
    labels.push_back(line.substr(b, e - b + 1));
  }
  return TagSet(std::filesystem::path(path).stem().string(), std::move(labels));
}

void TagSet::save(const std::string &path) const {
  std::ofstream out = open_output(path);
  for (const std::string &label : labels_) out << label << '\n';
}

std::optional<int> TagSet::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TaggedSentence> parse_tagged_corpus(
    std::istream &in, const TagSet &tagset,
    const TaggedCorpusOptions &options) {
  std::vector<TaggedSentence> sentences;
  TaggedSentence current;
  std::string line;
  size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) sentences.push_back(std::move(current));
    current = TaggedSentence();
  };
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      flush();
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected token<TAB>tag");
    }
    std::string token = line.substr(0, tab);
    std::string label = line.substr(tab + 1);
    int tag;
    if (options.allow_unknown && label == kUnknownTagLabel) {
      tag = kUnknownTag;
    } else if (auto index = tagset.index_of(label)) {
      tag = *index;
    } else {
      throw TagsetError("line " + std::to_string(line_no) + ": unknown tag '" +
                        label + "' for tagset '" + tagset.name() + "'");
    }
    current.tokens.push_back(options.lowercase ? to_lower_utf8(token) : token);
    current.tags.push_back(tag);
  }
  flush();
  return sentences;
}

std::vector<TaggedSentence> load_tagged_corpus(
    const std::string &path, const TagSet &tagset,
    const TaggedCorpusOptions &options) {
  std::ifstream in = open_input(path);
  try {
    return parse_tagged_corpus(in, tagset, options);
  } catch (const DataError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_tagged_corpus(std::ostream &out,
                         const std::vector<TaggedSentence> &sentences,
                         const TagSet &tagset) {
  for (const TaggedSentence &s : sentences) {
    if (s.tokens.size() != s.tags.size()) {
      throw ConsistencyError("tagged sentence has mismatched tokens and tags");
    }
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i] << '\t';
      if (s.tags[i] == kUnknownTag) {
        out << kUnknownTagLabel;
      } else {
        out << tagset.label(s.tags[i]);
      }
      out << '\n';
    }
    out << '\n';
  }
}

void save_tagged_corpus(const std::string &path,
                        const std::vector<TaggedSentence> &sentences,
                        const TagSet &tagset) {
  std::ofstream out = open_output(path);
  write_tagged_corpus(out, sentences, tagset);
}

Sentence tokenize(std::string_view line, bool lowercase) {
  Sentence tokens;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    if (i > start) {
      std::string_view token = line.substr(start, i - start);
      tokens.push_back(lowercase ? to_lower_utf8(token) : std::string(token));
    }
  }
  return tokens;
}

std::vector<Sentence> load_sentences(const std::string &path, bool lowercase) {
  std::vector<std::string> lines = read_lines(path);
  std::vector<Sentence> sentences;
  sentences.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) {
      throw FormatError(path + ": empty sentence at line " +
                        std::to_string(i + 1));
    }
    sentences.push_back(tokenize(lines[i], lowercase));
  }
  return sentences;
}

void save_sentences(const std::string &path,
                    const std::vector<Sentence> &sentences) {
  std::ofstream out = open_output(path);
  for (const Sentence &s : sentences) {
    for (size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << '\n';
  }
}

ParallelCorpus load_parallel_corpus(const std::string &source_path,
                                    const std::string &target_path,
                                    bool lowercase) {
  std::vector<Sentence> source = load_sentences(source_path, lowercase);
  std::vector<Sentence> target = load_sentences(target_path, lowercase);
  if (source.size() != target.size()) {
    throw AlignmentError("parallel corpus line counts differ: " + source_path +
                         " has " + std::to_string(source.size()) + ", " +
                         target_path + " has " + std::to_string(target.size()));
  }
  std::vector<SentencePair> pairs(source.size());
  for (size_t i = 0; i < source.size(); ++i) {
    pairs[i].source = std::move(source[i]);
    pairs[i].target = std::move(target[i]);
  }
  return ParallelCorpus(std::move(pairs));
}

void save_parallel_corpus(const ParallelCorpus &corpus,
                          const std::string &source_path,
                          const std::string &target_path) {
  std::vector<Sentence> source, target;
  for (const SentencePair &p : corpus.pairs()) {
    source.push_back(p.source);
    target.push_back(p.target);
  }
  save_sentences(source_path, source);
  save_sentences(target_path, target);
}

std::string to_lower_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3
                                : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > text.size()) {
      // Invalid UTF-8: copy the byte through untouched.
      out.push_back(text[i++]);
      continue;
    }
    char32_t cp = len == 1 ? c : c & (0xFF >> (len + 1));
    bool valid = true;
    for (size_t k = 1; k < len; ++k) {
      unsigned char cc = static_cast<unsigned char>(text[i + k]);
      if ((cc >> 6) != 0x2) valid = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!valid) {
      out.push_back(text[i++]);
      continue;
    }
    append_utf8(out, lower_code_point(cp));
    i += len;
  }
  return out;
}

int Vocabulary::add(const std::string &word) {
  auto [it, inserted] = ids_.emplace(word, static_cast<int>(words_.size()));
  if (inserted) {
    words_.push_back(word);
    frequencies_.push_back(0);
  }
  return it->second;
}

std::optional<int> Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

uint64_t Vocabulary::total_count() const {
  uint64_t total = 0;
  for (uint64_t f : frequencies_) total += f;
  return total;
}

Vocabulary build_vocabulary(const ParallelCorpus &corpus, Side side) {
  Vocabulary vocab(side);
  for (size_t i = 0; i < corpus.size(); ++i) {
    for (const std::string &w : corpus.side(i, side)) vocab.count(w);
  }
  return vocab;
}

Vocabulary build_vocabulary(const std::vector<Sentence> &sentences, Side side) {
  Vocabulary vocab(side);
  for (const Sentence &s : sentences) {
    for (const std::string &w : s) vocab.count(w);
  }
  return vocab;
}

}  // namespace xltag
