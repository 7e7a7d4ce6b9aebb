#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <doctest.h>

#include "normine/errors.hpp"
#include "normine/rng.hpp"
#include "normine/seqmodel.hpp"
#include "oracle_pyp.hpp"

using namespace normine;
using normine::testing::OraclePyp;

namespace {

Symbol F(int code) { return Symbol::directed(Direction::forward, code); }
Symbol B(int code) { return Symbol::directed(Direction::backward, code); }

EventSequence seq_of(std::vector<Symbol> events) {
  EventSequence s;
  s.id = "t";
  s.country_a = "AAA";
  s.country_b = "BBB";
  s.events = std::move(events);
  return s;
}

Corpus random_corpus(std::mt19937_64& rng, std::size_t n, int max_code,
                     std::size_t max_len) {
  Corpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Symbol> events;
    const std::size_t len = uniform_below(rng, max_len + 1);
    for (std::size_t k = 0; k < len; ++k) {
      const int code = 1 + static_cast<int>(uniform_below(rng, max_code));
      const Direction dir =
          uniform_below(rng, 2) == 0 ? Direction::forward : Direction::backward;
      events.push_back(Symbol::directed(dir, code));
    }
    corpus.push_back(seq_of(std::move(events)));
  }
  return corpus;
}

std::vector<Symbol> random_context(std::mt19937_64& rng, std::size_t len,
                                   int max_code) {
  std::vector<Symbol> ctx;
  for (std::size_t k = 0; k < len; ++k) {
    const int code = 1 + static_cast<int>(uniform_below(rng, max_code));
    const Direction dir =
        uniform_below(rng, 2) == 0 ? Direction::forward : Direction::backward;
    ctx.push_back(Symbol::directed(dir, code));
  }
  return ctx;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("single-event corpus has the hand-computed terminator probability") {
  Corpus corpus{seq_of({F(1)})};
  const SequenceModel model = train_base(corpus);

  // direct counts: [F1]{END:1}, [B1]{END:1}, root{F1:1, B1:1};
  // propagation adds END twice at the root, giving
  // p(END | F1) = 0.25 + 0.75 * (1.5/5 + 2.5/(5*41)) = 397/820
  const std::vector<Symbol> ctx{F(1)};
  const double got = model.predict_symbol(ctx, Symbol::end());
  CHECK(got == doctest::Approx(397.0 / 820.0).epsilon(1e-14));
  CHECK(got == doctest::Approx(0.4841463414634146).epsilon(1e-14));

  // orientation symmetry from dual-copy training
  const std::vector<Symbol> rev{B(1)};
  CHECK(model.predict_symbol(rev, Symbol::end()) ==
        doctest::Approx(got).epsilon(1e-15));
}

TEST_CASE("trie prediction matches the dictionary reference on random data") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    PyParams params;
    params.max_depth = 1 + uniform_below(rng, 4);
    params.discount = 0.25 * static_cast<double>(uniform_below(rng, 3));
    params.strength = 0.5 + 0.5 * static_cast<double>(uniform_below(rng, 3));

    const Corpus corpus = random_corpus(rng, 30, 5, 6);
    const SequenceModel model = train_base(corpus, params);
    OraclePyp oracle(params);
    for (const auto& s : corpus) oracle.add_dual(s.events);
    oracle.finalize();

    for (int q = 0; q < 200; ++q) {
      const auto ctx = random_context(rng, uniform_below(rng, 7), 6);
      const int id = static_cast<int>(uniform_below(rng, Symbol::alphabet_size));
      const Symbol s = Symbol::from_id(id);
      CHECK(model.predict_symbol(ctx, s) ==
            doctest::Approx(oracle.predict(ctx, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("predictions are a positive distribution in every context") {
  std::mt19937_64 rng(11);
  const Corpus corpus = random_corpus(rng, 40, 8, 8);
  const SequenceModel model = train_base(corpus);

  for (int q = 0; q < 100; ++q) {
    const auto ctx = random_context(rng, uniform_below(rng, 12), 20);
    const auto dist = model.predict(ctx);
    double sum = 0.0;
    for (double p : dist) {
      CHECK(p > 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("untrained model is uniform") {
  SequenceModel model;
  const auto dist = model.predict({});
  for (double p : dist)
    CHECK(p == doctest::Approx(1.0 / Symbol::alphabet_size).epsilon(1e-15));
}

TEST_CASE("contexts beyond the depth bound are truncated") {
  std::mt19937_64 rng(13);
  PyParams params;
  params.max_depth = 3;
  const Corpus corpus = random_corpus(rng, 25, 4, 7);
  const SequenceModel model = train_base(corpus, params);

  for (int q = 0; q < 50; ++q) {
    const auto ctx = random_context(rng, 5 + uniform_below(rng, 4), 5);
    const std::vector<Symbol> tail(ctx.end() - 3, ctx.end());
    for (int id = 0; id < Symbol::alphabet_size; ++id) {
      const Symbol s = Symbol::from_id(id);
      CHECK(model.predict_symbol(ctx, s) == model.predict_symbol(tail, s));
    }
  }
}

TEST_CASE("base model is symmetric under direction reversal") {
  std::mt19937_64 rng(17);
  const Corpus corpus = random_corpus(rng, 30, 6, 6);
  const SequenceModel model = train_base(corpus);

  for (int q = 0; q < 100; ++q) {
    const auto ctx = random_context(rng, uniform_below(rng, 6), 7);
    std::vector<Symbol> rev;
    for (Symbol s : ctx) rev.push_back(s.reversed());
    const int id = static_cast<int>(uniform_below(rng, Symbol::alphabet_size));
    const Symbol s = Symbol::from_id(id);
    CHECK(model.predict_symbol(ctx, s) ==
          doctest::Approx(model.predict_symbol(rev, s.reversed()))
              .epsilon(1e-13));
  }
}

TEST_CASE("inclusion models train only on copies containing the set") {
  // code 2 appears only backward in the data, so only the flipped copy
  // feeds the {2} model; code 3 never appears and that model stays uniform
  Corpus corpus{seq_of({F(1), B(2)}), seq_of({F(1)})};
  std::vector<std::string> warnings;
  const ModelBank bank = train_bank(corpus, {}, &warnings);

  const auto untrained = bank.incl_dist(ScoringBank::set_for_code(3), {});
  for (double p : untrained)
    CHECK(p == doctest::Approx(1.0 / Symbol::alphabet_size).epsilon(1e-15));

  const auto trained = bank.incl_dist(ScoringBank::set_for_code(2), {});
  CHECK(trained[F(2).id()] > 1.0 / Symbol::alphabet_size);

  bool mentions_three = false;
  for (const auto& w : warnings)
    if (w.find("{3}") != std::string::npos) mentions_three = true;
  CHECK(mentions_three);
}

TEST_CASE("directed inclusion queries flip context and symbol for backward") {
  std::mt19937_64 rng(19);
  const Corpus corpus = random_corpus(rng, 40, 6, 6);
  const ModelBank bank = train_bank(corpus);

  for (int q = 0; q < 60; ++q) {
    const auto ctx = random_context(rng, uniform_below(rng, 5), 7);
    std::vector<Symbol> rev;
    for (Symbol s : ctx) rev.push_back(s.reversed());
    const int set = static_cast<int>(uniform_below(rng, ScoringBank::num_incl_sets));
    const int id = static_cast<int>(uniform_below(rng, Symbol::alphabet_size));
    const Symbol s = Symbol::from_id(id);

    CHECK(prob_incl(bank, DirSet::fwd, set, s, ctx) ==
          bank.incl_dist(set, ctx)[s.id()]);
    CHECK(prob_incl(bank, DirSet::bwd, set, s, ctx) ==
          bank.incl_dist(set, rev)[s.reversed().id()]);
  }
}

TEST_CASE("exclusion renormalizes the background over the remaining symbols") {
  std::mt19937_64 rng(23);
  const Corpus corpus = random_corpus(rng, 40, 6, 6);
  const ModelBank bank = train_bank(corpus);
  const std::vector<int> codes{2, 5};

  for (int q = 0; q < 40; ++q) {
    const auto ctx = random_context(rng, uniform_below(rng, 5), 7);
    const auto base = bank.base_dist(ctx);
    for (DirSet doi : {DirSet::fwd, DirSet::bwd, DirSet::both}) {
      double excluded = 0.0;
      for (Direction d : {Direction::forward, Direction::backward}) {
        if (!contains(doi, d)) continue;
        for (int code : codes) excluded += base[Symbol::directed(d, code).id()];
      }
      double sum = 0.0;
      for (int id = 0; id < Symbol::alphabet_size; ++id) {
        const Symbol s = Symbol::from_id(id);
        const double p = prob_excl(bank, doi, codes, s, ctx);
        const bool is_excluded = !s.is_end() && contains(doi, s.direction()) &&
                                 (s.code() == 2 || s.code() == 5);
        if (is_excluded) {
          CHECK(p == 0.0);
        } else {
          CHECK(p == doctest::Approx(base[id] / (1.0 - excluded)).epsilon(1e-13));
        }
        sum += p;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(prob_excl(bank, doi, codes, Symbol::end(), ctx) > 0.0);
    }
  }
}

TEST_CASE("bank serialization round-trips and is byte-stable") {
  std::mt19937_64 rng(29);
  const Corpus corpus = random_corpus(rng, 35, 6, 6);
  const ModelBank bank = train_bank(corpus);

  const std::string path = temp_path("normine_bank_roundtrip.bin");
  save_bank(bank, path);
  const ModelBank loaded = load_bank(path);

  for (int q = 0; q < 80; ++q) {
    const auto ctx = random_context(rng, uniform_below(rng, 6), 7);
    const auto a = bank.base_dist(ctx);
    const auto b = loaded.base_dist(ctx);
    for (int id = 0; id < Symbol::alphabet_size; ++id) CHECK(a[id] == b[id]);
    const int set = static_cast<int>(uniform_below(rng, ScoringBank::num_incl_sets));
    const auto ia = bank.incl_dist(set, ctx);
    const auto ib = loaded.incl_dist(set, ctx);
    for (int id = 0; id < Symbol::alphabet_size; ++id) CHECK(ia[id] == ib[id]);
  }

  const std::string path2 = temp_path("normine_bank_roundtrip2.bin");
  save_bank(loaded, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string bytes1((std::istreambuf_iterator<char>(f1)),
                           std::istreambuf_iterator<char>());
  const std::string bytes2((std::istreambuf_iterator<char>(f2)),
                           std::istreambuf_iterator<char>());
  CHECK(bytes1 == bytes2);
  CHECK(!bytes1.empty());

  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("corrupt bank files are rejected") {
  std::mt19937_64 rng(31);
  const Corpus corpus = random_corpus(rng, 10, 3, 4);
  const ModelBank bank = train_bank(corpus);
  const std::string path = temp_path("normine_bank_corrupt.bin");
  save_bank(bank, path);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  in.close();

  SUBCASE("bad magic") {
    bytes[0] = 'X';
    std::ofstream(path, std::ios::binary) << bytes;
    CHECK_THROWS_AS(load_bank(path), input_error);
  }
  SUBCASE("truncated") {
    std::ofstream(path, std::ios::binary)
        << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_AS(load_bank(path), input_error);
  }
  SUBCASE("trailing data") {
    std::ofstream(path, std::ios::binary) << bytes << "extra";
    CHECK_THROWS_AS(load_bank(path), input_error);
  }
  SUBCASE("missing file") {
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_bank(path), input_error);
  }
  std::filesystem::remove(path);
}

TEST_CASE("model parameters are validated") {
  PyParams params;
  params.discount = 1.0;
  CHECK_THROWS_AS(SequenceModel{params}, input_error);
  params.discount = -0.1;
  CHECK_THROWS_AS(SequenceModel{params}, input_error);
  params.discount = 0.5;
  params.strength = -0.6;
  CHECK_THROWS_AS(SequenceModel{params}, input_error);
  params.strength = 1.0;
  params.max_depth = 65;
  CHECK_THROWS_AS(SequenceModel{params}, input_error);
}

TEST_CASE("sampling is deterministic per seed and follows the model") {
  std::mt19937_64 rng(37);
  const Corpus corpus = random_corpus(rng, 50, 4, 5);
  const ModelBank bank = train_bank(corpus);

  std::mt19937_64 r1(99), r2(99);
  const auto a = sample_sequence(bank.base(), r1);
  const auto b = sample_sequence(bank.base(), r2);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->events.size() == b->events.size());
  for (std::size_t i = 0; i < a->events.size(); ++i)
    CHECK(a->events[i] == b->events[i]);

  // first-symbol frequencies track the root distribution
  const auto root = bank.base_dist({});
  std::array<double, Symbol::alphabet_size> freq{};
  std::mt19937_64 r3(123);
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const auto s = sample_sequence(bank.base(), r3);
    REQUIRE(s.has_value());
    const Symbol first = s->events.empty() ? Symbol::end() : s->events[0];
    freq[first.id()] += 1.0 / draws;
  }
  for (int id = 0; id < Symbol::alphabet_size; ++id)
    CHECK(std::abs(freq[id] - root[id]) < 0.03);

  // a tiny cap forces redraw-signalling nullopt on long draws
  SampleOptions tight;
  tight.max_length = 0;
  std::mt19937_64 r4(5);
  int gave_up = 0;
  for (int i = 0; i < 50; ++i)
    if (!sample_sequence(bank.base(), r4, tight)) ++gave_up;
  CHECK(gave_up > 0);
}
