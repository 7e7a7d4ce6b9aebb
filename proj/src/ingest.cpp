#include "normine/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <zlib.h>

#include "normine/errors.hpp"
#include "normine/rng.hpp"
#include "normine/union_find.hpp"

namespace normine {

namespace {

constexpr std::size_t kEventColumns = 61;
constexpr std::size_t kMentionColumns = 16;
constexpr std::size_t kColId = 0;
constexpr std::size_t kColDay = 1;
constexpr std::size_t kColA1Country = 7;
constexpr std::size_t kColA1Type = 12;
constexpr std::size_t kColA2Country = 17;
constexpr std::size_t kColA2Type = 22;
constexpr std::size_t kColEventCode = 26;
constexpr std::size_t kColMentionId = 0;
constexpr std::size_t kColMentionIdentifier = 5;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool valid_day(std::uint32_t day) {
  const std::uint32_t y = day / 10000, m = day / 100 % 100, d = day % 100;
  if (y < 1000 || y > 9999 || m < 1 || m > 12 || d < 1) return false;
  static constexpr std::uint32_t lengths[12] = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  std::uint32_t len = lengths[m - 1];
  if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) len = 29;
  return d <= len;
}

bool bilateral_gov(const RawEvent& e) {
  return !e.actor1_country.empty() && !e.actor2_country.empty() &&
         e.actor1_country != e.actor2_country && e.actor1_type == "GOV" &&
         e.actor2_type == "GOV";
}

bool inside_window(const RawEvent& e, std::uint32_t start_day,
                   std::uint32_t end_day) {
  return (start_day == 0 || e.day >= start_day) &&
         (end_day == 0 || e.day <= end_day);
}

}  // namespace

// ---------------------------------------------------------------------------
// file reading

struct LineReader::Impl {
  gzFile file = nullptr;
  std::string path;
  bool eof = false;
  char buf[1 << 16];
};

// zlib reads plain files through the same handle, so one reader covers
// both compressed and uncompressed tables
LineReader::LineReader(const std::string& path) : impl_(new Impl) {
  impl_->path = path;
  impl_->file = gzopen(path.c_str(), "rb");
  if (!impl_->file) {
    delete impl_;
    throw input_error("cannot open input file: " + path);
  }
}

LineReader::~LineReader() {
  if (impl_->file) gzclose(impl_->file);
  delete impl_;
}

bool LineReader::next(std::string& line) {
  line.clear();
  if (impl_->eof) return false;
  bool got_any = false;
  while (true) {
    if (gzgets(impl_->file, impl_->buf, sizeof impl_->buf) == nullptr) {
      int errnum = 0;
      const char* msg = gzerror(impl_->file, &errnum);
      require_input(errnum == Z_OK || errnum == Z_STREAM_END,
                    "read error in " + impl_->path + ": " +
                        (msg ? msg : "unknown"));
      impl_->eof = true;
      return got_any;
    }
    got_any = true;
    line += impl_->buf;
    if (!line.empty() && line.back() == '\n') {
      line.pop_back();
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
  }
}

// ---------------------------------------------------------------------------
// row parsing

std::optional<RawEvent> parse_event_row(std::string_view line) {
  const auto cols = split_tabs(line);
  if (cols.size() != kEventColumns) return std::nullopt;

  RawEvent e;
  if (!parse_uint(cols[kColId], e.id)) return std::nullopt;
  if (!parse_uint(cols[kColDay], e.day) || !valid_day(e.day))
    return std::nullopt;

  const std::string_view code = cols[kColEventCode];
  if (code.size() < 2 || code[0] < '0' || code[0] > '9' || code[1] < '0' ||
      code[1] > '9')
    return std::nullopt;
  e.root_code = (code[0] - '0') * 10 + (code[1] - '0');
  if (e.root_code < 1 || e.root_code > Symbol::num_codes) return std::nullopt;

  e.actor1_country = cols[kColA1Country];
  e.actor1_type = cols[kColA1Type];
  e.actor2_country = cols[kColA2Country];
  e.actor2_type = cols[kColA2Type];
  return e;
}

std::optional<MentionRecord> parse_mention_row(std::string_view line) {
  const auto cols = split_tabs(line);
  if (cols.size() != kMentionColumns) return std::nullopt;
  MentionRecord m;
  if (!parse_uint(cols[kColMentionId], m.event_id)) return std::nullopt;
  if (cols[kColMentionIdentifier].empty()) return std::nullopt;
  m.identifier = cols[kColMentionIdentifier];
  return m;
}

std::vector<RawEvent> parse_events(std::istream& in, std::size_t* skipped) {
  std::vector<RawEvent> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto e = parse_event_row(line)) {
      out.push_back(std::move(*e));
    } else if (skipped) {
      ++*skipped;
    }
  }
  return out;
}

std::vector<MentionRecord> parse_mentions(std::istream& in,
                                          std::size_t* skipped) {
  std::vector<MentionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto m = parse_mention_row(line)) {
      out.push_back(std::move(*m));
    } else if (skipped) {
      ++*skipped;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// event filters

std::vector<RawEvent> filter_events(std::vector<RawEvent> events,
                                    IngestDiagnostics* diag) {
  std::vector<RawEvent> out;
  out.reserve(events.size());
  for (auto& e : events) {
    if (bilateral_gov(e)) {
      out.push_back(std::move(e));
    } else if (diag) {
      ++diag->events_nonbilateral;
    }
  }
  return out;
}

std::vector<RawEvent> window_events(std::vector<RawEvent> events,
                                    std::uint32_t start_day,
                                    std::uint32_t end_day,
                                    IngestDiagnostics* diag) {
  std::vector<RawEvent> out;
  out.reserve(events.size());
  for (auto& e : events) {
    if (inside_window(e, start_day, end_day)) {
      out.push_back(std::move(e));
    } else if (diag) {
      ++diag->events_outside_window;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// relevance grouping

std::vector<RelevanceGroup> build_relevance_groups(
    const std::vector<RawEvent>& events,
    const std::vector<MentionRecord>& mentions, std::size_t clone_threshold,
    const std::vector<std::string>& source_filters, IngestDiagnostics* diag) {
  require_input(clone_threshold >= 1, "clone threshold must be at least 1");

  std::unordered_map<std::uint64_t, std::size_t> by_id;
  by_id.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i)
    require_input(by_id.emplace(events[i].id, i).second,
                  "duplicate global event id: " + std::to_string(events[i].id));

  // Surviving (event, document) pairs; documents interned in encounter
  // order so everything downstream is independent of hash layout.
  std::unordered_map<std::string, std::uint32_t> doc_ids;
  std::vector<std::vector<std::uint32_t>> event_docs(events.size());
  std::unordered_set<std::uint64_t> seen_pairs;
  for (const auto& m : mentions) {
    bool filtered = false;
    for (const auto& needle : source_filters) {
      if (m.identifier.find(needle) != std::string::npos) {
        filtered = true;
        break;
      }
    }
    if (filtered) {
      if (diag) ++diag->mentions_filtered;
      continue;
    }
    const auto it = by_id.find(m.event_id);
    if (it == by_id.end()) {
      if (diag) ++diag->mentions_unknown_event;
      continue;
    }
    const auto [doc_it, inserted] =
        doc_ids.emplace(m.identifier, static_cast<std::uint32_t>(doc_ids.size()));
    const std::uint32_t doc = doc_it->second;
    (void)inserted;
    const std::uint64_t key =
        static_cast<std::uint64_t>(it->second) << 32 | doc;
    if (!seen_pairs.insert(key).second) {
      if (diag) ++diag->mentions_duplicate;
      continue;
    }
    event_docs[it->second].push_back(doc);
  }
  if (diag) diag->documents = doc_ids.size();

  // One node per post-clone event; a clone is tied to a single document.
  std::vector<EventRef> nodes;
  std::vector<std::vector<std::size_t>> doc_members(doc_ids.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& docs = event_docs[i];
    if (docs.size() > clone_threshold) {
      if (diag) {
        ++diag->events_cloned;
        diag->clones_created += docs.size();
      }
      for (std::uint32_t k = 0; k < docs.size(); ++k) {
        doc_members[docs[k]].push_back(nodes.size());
        nodes.push_back({events[i].id, k, true, i});
      }
    } else {
      for (const std::uint32_t doc : docs)
        doc_members[doc].push_back(nodes.size());
      nodes.push_back({events[i].id, 0, false, i});
    }
  }

  UnionFind uf(nodes.size());
  for (const auto& members : doc_members)
    for (std::size_t j = 1; j < members.size(); ++j)
      uf.unite(members[0], members[j]);

  std::unordered_map<std::size_t, std::size_t> group_of_root;
  std::vector<RelevanceGroup> groups;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const std::size_t root = uf.find(n);
    const auto [it, inserted] = group_of_root.emplace(root, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].members.push_back(nodes[n]);
  }

  const auto ref_key = [](const EventRef& r) {
    return std::make_pair(r.id, r.ordinal);
  };
  for (auto& g : groups)
    std::sort(g.members.begin(), g.members.end(),
              [&](const EventRef& a, const EventRef& b) {
                return ref_key(a) < ref_key(b);
              });
  std::sort(groups.begin(), groups.end(),
            [&](const RelevanceGroup& a, const RelevanceGroup& b) {
              return ref_key(a.members.front()) < ref_key(b.members.front());
            });
  if (diag) diag->groups = groups.size();
  return groups;
}

// ---------------------------------------------------------------------------
// sequence construction

Corpus build_sequences(const std::vector<RelevanceGroup>& groups,
                       const std::vector<RawEvent>& events,
                       std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  Corpus corpus;
  for (const auto& group : groups) {
    // ordered map keeps the per-pair emission order independent of hashing
    std::map<std::pair<std::string, std::string>, std::vector<EventRef>> pairs;
    for (const auto& ref : group.members) {
      const RawEvent& e = events[ref.event_index];
      const std::string& lo = std::min(e.actor1_country, e.actor2_country);
      const std::string& hi = std::max(e.actor1_country, e.actor2_country);
      pairs[{lo, hi}].push_back(ref);
    }

    for (auto& [pair_key, refs] : pairs) {
      std::sort(refs.begin(), refs.end(),
                [&](const EventRef& a, const EventRef& b) {
                  const auto ka = std::make_tuple(events[a.event_index].day,
                                                  a.id, a.ordinal);
                  const auto kb = std::make_tuple(events[b.event_index].day,
                                                  b.id, b.ordinal);
                  return ka < kb;
                });
      // same-day runs get a seeded random order on top of the sorted base
      std::size_t run = 0;
      while (run < refs.size()) {
        std::size_t end = run + 1;
        while (end < refs.size() && events[refs[end].event_index].day ==
                                        events[refs[run].event_index].day)
          ++end;
        if (end - run > 1) deterministic_shuffle(refs, run, end, rng);
        run = end;
      }

      const RawEvent& first = events[refs.front().event_index];
      EventSequence seq;
      seq.id = std::to_string(corpus.size());
      seq.country_a = first.actor1_country;
      seq.country_b = first.actor2_country;
      seq.terminated = true;
      for (const auto& ref : refs) {
        const RawEvent& e = events[ref.event_index];
        const Direction dir = e.actor1_country == seq.country_a
                                  ? Direction::forward
                                  : Direction::backward;
        seq.events.push_back(Symbol::directed(dir, e.root_code));
        std::string src = std::to_string(ref.id);
        if (ref.cloned) src += "#" + std::to_string(ref.ordinal);
        seq.source_ids.push_back(std::move(src));
        seq.days.push_back(e.day);
      }
      corpus.push_back(std::move(seq));
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// directory pipeline

namespace {

std::vector<std::string> list_table_files(const std::string& dir) {
  require_input(std::filesystem::is_directory(dir),
                "not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Corpus run_ingest(const IngestOptions& opts, IngestDiagnostics* diag) {
  IngestDiagnostics local;
  IngestDiagnostics& d = diag ? *diag : local;

  // Pass 1: events.  Filters run per row so only surviving events are held.
  std::vector<RawEvent> events;
  std::unordered_set<std::uint64_t> seen_ids;
  for (const auto& path : list_table_files(opts.events_dir)) {
    ++d.event_files;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
      ++d.event_rows;
      auto parsed = parse_event_row(line);
      if (!parsed) {
        ++d.event_rows_skipped;
        continue;
      }
      if (!bilateral_gov(*parsed)) {
        ++d.events_nonbilateral;
        continue;
      }
      if (!inside_window(*parsed, opts.window_start, opts.window_end)) {
        ++d.events_outside_window;
        continue;
      }
      if (!seen_ids.insert(parsed->id).second) {
        ++d.events_duplicate_id;
        continue;
      }
      events.push_back(std::move(*parsed));
    }
  }
  d.events_kept = events.size();

  // Pass 2: mentions.  Source filter and unknown-id checks run per row;
  // only pairs that can produce an edge are kept.
  std::unordered_set<std::uint64_t> known;
  known.reserve(events.size());
  for (const auto& e : events) known.insert(e.id);
  std::vector<MentionRecord> mentions;
  for (const auto& path : list_table_files(opts.mentions_dir)) {
    ++d.mention_files;
    LineReader reader(path);
    std::string line;
    while (reader.next(line)) {
      ++d.mention_rows;
      auto parsed = parse_mention_row(line);
      if (!parsed) {
        ++d.mention_rows_skipped;
        continue;
      }
      bool filtered = false;
      for (const auto& needle : opts.source_filters) {
        if (parsed->identifier.find(needle) != std::string::npos) {
          filtered = true;
          break;
        }
      }
      if (filtered) {
        ++d.mentions_filtered;
        continue;
      }
      if (!known.count(parsed->event_id)) {
        ++d.mentions_unknown_event;
        continue;
      }
      mentions.push_back(std::move(*parsed));
    }
  }

  // The row-level filters above already ran, so the group builder only adds
  // dedup and clone counts here.
  const auto groups = build_relevance_groups(
      events, mentions, opts.clone_threshold, opts.source_filters, &d);
  Corpus corpus = build_sequences(groups, events, opts.seed);
  d.sequences = corpus.size();
  return corpus;
}

// ---------------------------------------------------------------------------
// diagnostics report

std::string format_ingest_report(const IngestDiagnostics& diag) {
  std::ostringstream out;
  out << "event_files\t" << diag.event_files << '\n'
      << "event_rows\t" << diag.event_rows << '\n'
      << "event_rows_skipped\t" << diag.event_rows_skipped << '\n'
      << "events_nonbilateral\t" << diag.events_nonbilateral << '\n'
      << "events_outside_window\t" << diag.events_outside_window << '\n'
      << "events_duplicate_id\t" << diag.events_duplicate_id << '\n'
      << "events_kept\t" << diag.events_kept << '\n'
      << "mention_files\t" << diag.mention_files << '\n'
      << "mention_rows\t" << diag.mention_rows << '\n'
      << "mention_rows_skipped\t" << diag.mention_rows_skipped << '\n'
      << "mentions_filtered\t" << diag.mentions_filtered << '\n'
      << "mentions_unknown_event\t" << diag.mentions_unknown_event << '\n'
      << "mentions_duplicate\t" << diag.mentions_duplicate << '\n'
      << "documents\t" << diag.documents << '\n'
      << "events_cloned\t" << diag.events_cloned << '\n'
      << "clones_created\t" << diag.clones_created << '\n'
      << "groups\t" << diag.groups << '\n'
      << "sequences\t" << diag.sequences << '\n';
  return out.str();
}

void write_ingest_report(const IngestDiagnostics& diag,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "cannot open report file for writing: " + path);
  out << format_ingest_report(diag);
  out.flush();
  require_input(out.good(), "write failed: " + path);
}

}  // namespace normine
