#include <cmath>

#include "brute_force.h"
#include "doctest.h"
#include "temp_dir.h"
#include "xltag/alignment.h"
#include "xltag/errors.h"
#include "xltag/random.h"

namespace xltag {
namespace {

ParallelCorpus toy() {
  return ParallelCorpus({{{"a", "b"}, {"x", "y"}}, {{"a"}, {"x"}}});
}

TEST_CASE("first EM step from the uniform table") {
  TranslationTable t = train_ibm1(toy(), 1);
  CHECK(t.probability("a", "x") == doctest::Approx(5.0 / 7).epsilon(1e-12));
  CHECK(t.probability("a", "y") == doctest::Approx(2.0 / 7).epsilon(1e-12));
  CHECK(t.probability("b", "x") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.probability("b", "y") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.null_probability("x") == doctest::Approx(5.0 / 7).epsilon(1e-12));
  CHECK(t.null_probability("y") == doctest::Approx(2.0 / 7).epsilon(1e-12));
}

TEST_CASE("EM matches the dense oracle every iteration") {
  ParallelCorpus c = toy();
  oracle::DenseIbm1 dense(c);
  for (int it = 1; it <= 8; ++it) {
    dense.iterate(c);
    TranslationTable t = train_ibm1(c, it);
    for (const auto &[e, eid] : dense.source_ids) {
      for (const auto &[f, fid] : dense.target_ids) {
        CHECK(std::abs(t.probability(e, f) - dense.t[eid][fid]) <= 1e-12);
      }
    }
  }
  // With the NULL word competing for every target token, t(x|a) passes 0.9
  // at the sixth iteration.
  CHECK(train_ibm1(c, 5).probability("a", "x") == doctest::Approx(0.877598).epsilon(1e-6));
  CHECK(train_ibm1(c, 6).probability("a", "x") > 0.9);
}

TEST_CASE("rows stay normalized and the likelihood never drops") {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SentencePair> pairs;
    for (size_t i = 0, n = 2 + rng.below(6); i < n; ++i) {
      SentencePair p;
      for (size_t k = 0, len = 1 + rng.below(4); k < len; ++k) {
        p.source.push_back("s" + std::to_string(rng.below(5)));
      }
      for (size_t k = 0, len = 1 + rng.below(4); k < len; ++k) {
        p.target.push_back("t" + std::to_string(rng.below(5)));
      }
      pairs.push_back(std::move(p));
    }
    ParallelCorpus c(pairs);
    std::vector<double> ll;
    TranslationTable t = train_ibm1(c, 10, &ll);
    REQUIRE(ll.size() == 11);
    for (size_t i = 1; i < ll.size(); ++i) CHECK(ll[i] >= ll[i - 1] - 1e-12);
    CHECK(ll.back() == doctest::Approx(ibm1_log_likelihood(t, c)).epsilon(1e-12));
    for (size_t r = 0; r < t.rows(); ++r) {
      CHECK(t.row_sum(static_cast<int>(r)) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("iterations must be positive") {
  CHECK_THROWS_AS(train_ibm1(toy(), 0), ConfigError);
}

TEST_CASE("align") {
  ParallelCorpus c = toy();
  TranslationTable t = train_ibm1(c, 5);
  CHECK(align(t, c.pair(0)).links[0] == 0);

  SUBCASE("unseen target word goes to NULL") {
    CHECK(align(t, {{"a"}, {"zz"}}).links == std::vector<int>{kNullLink});
  }
  SUBCASE("identical source tokens: leftmost wins") {
    CHECK(align(t, {{"b", "a", "a"}, {"x"}}).links == std::vector<int>{1});
  }
}

TEST_CASE("links file round trip") {
  ParallelCorpus c = toy();
  std::vector<AlignmentLinks> links = {{{1, kNullLink}}, {{0}}};
  auto dir = testing::fresh_dir("links");
  const std::string path = (dir / "l.txt").string();
  save_links(path, links);
  CHECK(testing::read_file(path) == "1-0\n0-0\n");
  CHECK(load_links(path, c) == links);

  testing::write_file(dir / "bad.txt", "0-5\n0-0\n");
  CHECK_THROWS_AS(load_links((dir / "bad.txt").string(), c), ConsistencyError);
  testing::write_file(dir / "short.txt", "0-0\n");
  CHECK_THROWS_AS(load_links((dir / "short.txt").string(), c), ConsistencyError);
}

TEST_CASE("project_tags") {
  // DET = 0, NOUN = 1
  std::vector<TaggedSentence> source = {{{"the", "cat"}, {0, 1}},
                                        {{"a", "dog"}, {0, 1}},
                                        {{"big", "dog"}, {1, 1}}};
  std::vector<Sentence> targets = {{"le", "chat"}, {"un", "chien"}, {"x", "y", "z"}};
  std::vector<AlignmentLinks> links = {{{0, 1}},
                                       {{kNullLink, kNullLink}},
                                       {{1, kNullLink, 0}}};
  ProjectionResult r = project_tags(source, targets, links, 0.5);
  REQUIRE(r.kept == std::vector<size_t>{0, 2});
  CHECK(r.sentences[0].tokens == Sentence{"le", "chat"});
  CHECK(r.sentences[0].tags == std::vector<int>{0, 1});
  CHECK(r.sentences[1].tags == std::vector<int>{1, kUnknownTag, 1});

  CHECK(project_tags(source, targets, links, 1.0).kept.size() == 3);
  CHECK(project_tags(source, targets, links, 0.0).kept == std::vector<size_t>{0});

  std::vector<AlignmentLinks> ragged = {{{0}}, {{0, 0}}, {{0, 0, 0}}};
  CHECK_THROWS_AS(project_tags(source, targets, ragged), ConsistencyError);
  std::vector<AlignmentLinks> out_of_range = {{{0, 2}}, {{0, 0}}, {{0, 0, 0}}};
  CHECK_THROWS_AS(project_tags(source, targets, out_of_range), ConsistencyError);
}

}  // namespace
}  // namespace xltag
