#ifndef NORMINE_SEQUENCE_HPP
#define NORMINE_SEQUENCE_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "normine/symbols.hpp"

namespace normine {

// A directed event sequence for one country pair within one relevance
// group.  `events` holds the directed tokens; the terminator is implicit
// and always appended on serialization (`terminated` records that the
// sequence was closed by ingest rather than truncated).
struct EventSequence {
  std::string id;
  std::string country_a;  // forward orientation is a -> b
  std::string country_b;
  std::vector<Symbol> events;
  bool terminated = true;
  // Aligned provenance; empty for synthetic corpora.  A cloned event
  // carries "id#ordinal".
  std::vector<std::string> source_ids;
  std::vector<int> days;  // yyyymmdd per event
};

using Corpus = std::vector<EventSequence>;

// Corpus text format: one sequence per line, space-separated tokens
// ("F04 B11 END").  The sidecar (<path>.meta) carries one tab-separated
// line per sequence: id, country pair, source event ids, days.
void write_corpus(const Corpus& corpus, const std::string& path);
void write_corpus_meta(const Corpus& corpus, const std::string& path);
Corpus read_corpus(const std::string& path);

struct CorpusStats {
  std::size_t sequences = 0;
  std::size_t max_length = 0;  // events only, terminator excluded
  std::map<std::size_t, std::size_t> length_histogram;
  std::array<std::uint64_t, Symbol::alphabet_size> symbol_counts{};
};

CorpusStats corpus_stats(const Corpus& corpus);
std::string format_corpus_stats(const CorpusStats& stats);

}  // namespace normine

#endif
