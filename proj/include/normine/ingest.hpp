#ifndef NORMINE_INGEST_HPP
#define NORMINE_INGEST_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "normine/sequence.hpp"

namespace normine {

// One bilateral event row, already truncated to its two-digit root code.
// Country and type codes keep their raw text; absent fields are empty.
struct RawEvent {
  std::uint64_t id = 0;
  std::uint32_t day = 0;  // YYYYMMDD, validated as a calendar date
  int root_code = 0;      // 1..20
  std::string actor1_country, actor1_type;
  std::string actor2_country, actor2_type;
};

struct MentionRecord {
  std::uint64_t event_id = 0;
  std::string identifier;  // source document, never empty
};

struct IngestDiagnostics {
  std::size_t event_files = 0, mention_files = 0;
  std::size_t event_rows = 0, event_rows_skipped = 0;
  std::size_t mention_rows = 0, mention_rows_skipped = 0;
  std::size_t events_nonbilateral = 0;   // dropped by the actor filter
  std::size_t events_outside_window = 0;
  std::size_t events_duplicate_id = 0;
  std::size_t events_kept = 0;
  std::size_t mentions_filtered = 0;     // identifier matched a source filter
  std::size_t mentions_unknown_event = 0;
  std::size_t mentions_duplicate = 0;
  std::size_t documents = 0;
  std::size_t events_cloned = 0;         // originals replaced by clones
  std::size_t clones_created = 0;
  std::size_t groups = 0;
  std::size_t sequences = 0;
};

// Line-at-a-time reader; gzip-compressed and plain files both work.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // false at end of input; strips the trailing newline (and CR)
  bool next(std::string& line);

 private:
  struct Impl;
  Impl* impl_;
};

// Single-row parsers; nullopt on a malformed row (caller counts).
std::optional<RawEvent> parse_event_row(std::string_view line);
std::optional<MentionRecord> parse_mention_row(std::string_view line);

// Whole-stream conveniences.
std::vector<RawEvent> parse_events(std::istream& in,
                                   std::size_t* skipped = nullptr);
std::vector<MentionRecord> parse_mentions(std::istream& in,
                                          std::size_t* skipped = nullptr);

// Keeps events with two distinct country codes and government type codes on
// both actors.
std::vector<RawEvent> filter_events(std::vector<RawEvent> events,
                                    IngestDiagnostics* diag = nullptr);

// Inclusive day window; 0 leaves that side open.
std::vector<RawEvent> window_events(std::vector<RawEvent> events,
                                    std::uint32_t start_day,
                                    std::uint32_t end_day,
                                    IngestDiagnostics* diag = nullptr);

// A post-clone event: `ordinal` numbers the clones of one original in
// mention-encounter order (0 and cloned=false for an uncloned event).
struct EventRef {
  std::uint64_t id = 0;
  std::uint32_t ordinal = 0;
  bool cloned = false;
  std::size_t event_index = 0;  // into the filtered event list
};

struct RelevanceGroup {
  std::vector<EventRef> members;  // sorted by (id, ordinal)
};

// Mutual-relevance partition: drop mentions matching a source filter,
// deduplicate (event, document) pairs, clone events mentioned in more than
// `clone_threshold` documents (one clone per document), then take connected
// components of the share-a-document relation.  Groups come back sorted by
// their smallest member.
std::vector<RelevanceGroup> build_relevance_groups(
    const std::vector<RawEvent>& events,
    const std::vector<MentionRecord>& mentions, std::size_t clone_threshold,
    const std::vector<std::string>& source_filters,
    IngestDiagnostics* diag = nullptr);

// One sequence per (group, unordered country pair): day-sorted, same-day
// runs shuffled with the seeded generator, oriented so the first event is
// forward, terminator appended.
Corpus build_sequences(const std::vector<RelevanceGroup>& groups,
                       const std::vector<RawEvent>& events,
                       std::uint64_t rng_seed);

struct IngestOptions {
  std::string events_dir;
  std::string mentions_dir;
  std::size_t clone_threshold = 250;
  std::vector<std::string> source_filters{"BBC"};
  std::uint32_t window_start = 0;  // YYYYMMDD inclusive, 0 = open
  std::uint32_t window_end = 0;
  std::uint64_t seed = 1;
};

// Full pipeline over directories of table files, streamed in lexicographic
// name order.
Corpus run_ingest(const IngestOptions& opts, IngestDiagnostics* diag = nullptr);

std::string format_ingest_report(const IngestDiagnostics& diag);
void write_ingest_report(const IngestDiagnostics& diag, const std::string& path);

}  // namespace normine

#endif
