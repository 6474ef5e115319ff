#include "xltag/alignment.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "xltag/errors.h"

namespace xltag {

TranslationTable::TranslationTable(Vocabulary source, Vocabulary target)
    : source_(std::move(source)),
      target_(std::move(target)),
      rows_(source_.size() + 1) {}

double TranslationTable::probability(int source_row, int target_id) const {
  if (uniform_) return 1.0 / static_cast<double>(target_.size());
  const std::map<int, double> &r = rows_[source_row];
  auto it = r.find(target_id);
  return it == r.end() ? 0.0 : it->second;
}

double TranslationTable::probability(const std::string &source,
                                     const std::string &target) const {
  std::optional<int> s = source_.id(source), t = target_.id(target);
  if (!s || !t) return 0.0;
  return probability(*s, *t);
}

double TranslationTable::null_probability(const std::string &target) const {
  std::optional<int> t = target_.id(target);
  return t ? probability(null_row(), *t) : 0.0;
}

double TranslationTable::row_sum(int source_row) const {
  if (uniform_) return 1.0;
  double sum = 0.0;
  for (const auto &[target, p] : rows_[source_row]) sum += p;
  return sum;
}

namespace {

struct EncodedPair {
  std::vector<int> source;  // source rows, NULL row appended last
  std::vector<int> target;
};

std::vector<EncodedPair> encode(const ParallelCorpus &corpus,
                                const TranslationTable &table) {
  std::vector<EncodedPair> out(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    for (const std::string &w : corpus.pair(i).source) {
      out[i].source.push_back(*table.source_vocabulary().id(w));
    }
    out[i].source.push_back(table.null_row());
    for (const std::string &w : corpus.pair(i).target) {
      out[i].target.push_back(*table.target_vocabulary().id(w));
    }
  }
  return out;
}

}  // namespace

double ibm1_log_likelihood(const TranslationTable &table,
                           const ParallelCorpus &corpus) {
  double ll = 0.0;
  for (const SentencePair &pair : corpus.pairs()) {
    const double norm = 1.0 / static_cast<double>(pair.source.size() + 1);
    for (const std::string &f : pair.target) {
      double sum = table.null_probability(f);
      for (const std::string &e : pair.source) sum += table.probability(e, f);
      ll += std::log(norm * sum);
    }
  }
  return ll;
}

TranslationTable train_ibm1(const ParallelCorpus &corpus, int iterations,
                            std::vector<double> *log_likelihoods) {
  if (iterations < 1) throw ConfigError("IBM Model 1 needs at least 1 iteration");
  TranslationTable table(build_vocabulary(corpus, Side::kSource),
                         build_vocabulary(corpus, Side::kTarget));
  const std::vector<EncodedPair> pairs = encode(corpus, table);
  if (log_likelihoods) {
    log_likelihoods->clear();
    log_likelihoods->push_back(ibm1_log_likelihood(table, corpus));
  }

  std::vector<std::map<int, double>> counts(table.rows());
  std::vector<double> denominators;
  for (int iter = 0; iter < iterations; ++iter) {
    for (std::map<int, double> &row : counts) row.clear();
    for (const EncodedPair &pair : pairs) {
      for (int f : pair.target) {
        double denom = 0.0;
        for (int e : pair.source) denom += table.probability(e, f);
        if (denom <= 0.0) continue;
        for (int e : pair.source) {
          counts[e][f] += table.probability(e, f) / denom;
        }
      }
    }
    for (size_t e = 0; e < counts.size(); ++e) {
      double total = 0.0;
      for (const auto &[f, c] : counts[e]) total += c;
      std::map<int, double> &row = table.rows_[e];
      row.clear();
      if (total <= 0.0) continue;
      for (const auto &[f, c] : counts[e]) row.emplace(f, c / total);
    }
    table.uniform_ = false;
    if (log_likelihoods) {
      log_likelihoods->push_back(ibm1_log_likelihood(table, corpus));
    }
  }
  return table;
}

AlignmentLinks align(const TranslationTable &table, const SentencePair &pair) {
  AlignmentLinks result;
  result.links.reserve(pair.target.size());
  std::vector<std::optional<int>> source_ids;
  for (const std::string &e : pair.source) {
    source_ids.push_back(table.source_vocabulary().id(e));
  }
  for (const std::string &f : pair.target) {
    std::optional<int> fid = table.target_vocabulary().id(f);
    int best = kNullLink;
    double best_p = 0.0;
    if (fid) {
      for (size_t i = 0; i < source_ids.size(); ++i) {
        if (!source_ids[i]) continue;
        double p = table.probability(*source_ids[i], *fid);
        if (p > best_p) {
          best_p = p;
          best = static_cast<int>(i);
        }
      }
      if (table.probability(table.null_row(), *fid) > best_p) best = kNullLink;
    }
    result.links.push_back(best);
  }
  return result;
}

std::vector<AlignmentLinks> align_corpus(const TranslationTable &table,
                                         const ParallelCorpus &corpus) {
  std::vector<AlignmentLinks> out;
  out.reserve(corpus.size());
  for (const SentencePair &pair : corpus.pairs()) out.push_back(align(table, pair));
  return out;
}

void save_links(const std::string &path,
                const std::vector<AlignmentLinks> &links) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const AlignmentLinks &l : links) {
    bool first = true;
    for (size_t j = 0; j < l.links.size(); ++j) {
      if (l.links[j] == kNullLink) continue;
      out << (first ? "" : " ") << l.links[j] << '-' << j;
      first = false;
    }
    out << '\n';
  }
}

std::vector<AlignmentLinks> load_links(const std::string &path,
                                       const ParallelCorpus &corpus) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<AlignmentLinks> out;
  std::string line;
  while (std::getline(in, line)) {
    const size_t i = out.size();
    if (i >= corpus.size()) {
      throw ConsistencyError(path + ": more alignment lines than bi-sentences");
    }
    const SentencePair &pair = corpus.pair(i);
    AlignmentLinks l;
    l.links.assign(pair.target.size(), kNullLink);
    std::istringstream fields(line);
    std::string item;
    while (fields >> item) {
      size_t dash = item.find('-');
      int s = -1, t = -1;
      try {
        if (dash == std::string::npos) throw std::invalid_argument(item);
        s = std::stoi(item.substr(0, dash));
        t = std::stoi(item.substr(dash + 1));
      } catch (const std::exception &) {
        throw FormatError(path + ": bad link '" + item + "' on line " +
                          std::to_string(i + 1));
      }
      if (s < 0 || t < 0 || static_cast<size_t>(s) >= pair.source.size() ||
          static_cast<size_t>(t) >= pair.target.size()) {
        throw ConsistencyError(path + ": link '" + item +
                               "' out of range on line " + std::to_string(i + 1));
      }
      l.links[t] = s;
    }
    out.push_back(std::move(l));
  }
  if (out.size() != corpus.size()) {
    throw ConsistencyError(path + ": " + std::to_string(out.size()) +
                           " alignment lines for " +
                           std::to_string(corpus.size()) + " bi-sentences");
  }
  return out;
}

ProjectionResult project_tags(const std::vector<TaggedSentence> &tagged_source,
                              const std::vector<Sentence> &targets,
                              const std::vector<AlignmentLinks> &links,
                              double max_null_fraction) {
  if (tagged_source.size() != links.size() || targets.size() != links.size()) {
    throw ConsistencyError(
        "projection needs one tagged source sentence and one target sentence "
        "per alignment");
  }
  ProjectionResult result;
  for (size_t i = 0; i < links.size(); ++i) {
    const TaggedSentence &src = tagged_source[i];
    const std::vector<int> &l = links[i].links;
    if (l.size() != targets[i].size()) {
      throw ConsistencyError("alignment " + std::to_string(i) +
                             " does not match the target sentence length");
    }
    TaggedSentence projected;
    projected.tokens = targets[i];
    size_t nulls = 0;
    for (int s : l) {
      if (s == kNullLink) {
        projected.tags.push_back(kUnknownTag);
        ++nulls;
        continue;
      }
      if (static_cast<size_t>(s) >= src.tags.size()) {
        throw ConsistencyError("alignment " + std::to_string(i) +
                               " points past the source sentence");
      }
      projected.tags.push_back(src.tags[s]);
    }
    if (!l.empty() && static_cast<double>(nulls) / static_cast<double>(l.size()) >
                          max_null_fraction) {
      continue;
    }
    result.sentences.push_back(std::move(projected));
    result.kept.push_back(i);
  }
  return result;
}

}  // namespace xltag
