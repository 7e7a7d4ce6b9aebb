#include "normine/sequence.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "normine/errors.hpp"

namespace normine {

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "cannot open corpus file for writing: " + path);
  std::string line;
  for (const auto& seq : corpus) {
    line.clear();
    for (Symbol s : seq.events) {
      line += s.str();
      line += ' ';
    }
    line += "END\n";
    out << line;
  }
  out.flush();
  require_input(out.good(), "write failed: " + path);
}

void write_corpus_meta(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "cannot open metadata file for writing: " + path);
  for (const auto& seq : corpus) {
    out << seq.id << '\t' << seq.country_a << ':' << seq.country_b << '\t';
    for (std::size_t i = 0; i < seq.source_ids.size(); ++i) {
      if (i) out << ',';
      out << seq.source_ids[i];
    }
    out << '\t';
    for (std::size_t i = 0; i < seq.days.size(); ++i) {
      if (i) out << ',';
      out << seq.days[i];
    }
    out << '\n';
  }
  out.flush();
  require_input(out.good(), "write failed: " + path);
}

Corpus read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require_input(in.good(), "cannot open corpus file: " + path);
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    EventSequence seq;
    seq.id = std::to_string(corpus.size() + 1);
    std::istringstream tokens(line);
    std::string token;
    bool saw_end = false;
    while (tokens >> token) {
      require_input(!saw_end, path + ":" + std::to_string(lineno) +
                                  ": tokens after END");
      auto sym = Symbol::parse(token);
      require_input(sym.has_value(), path + ":" + std::to_string(lineno) +
                                         ": bad token '" + token + "'");
      if (sym->is_end()) {
        saw_end = true;
      } else {
        seq.events.push_back(*sym);
      }
    }
    require_input(saw_end,
                  path + ":" + std::to_string(lineno) + ": missing END");
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.sequences = corpus.size();
  for (const auto& seq : corpus) {
    stats.max_length = std::max(stats.max_length, seq.events.size());
    ++stats.length_histogram[seq.events.size()];
    for (Symbol s : seq.events) ++stats.symbol_counts[s.id()];
    ++stats.symbol_counts[Symbol::end_id];
  }
  return stats;
}

std::string format_corpus_stats(const CorpusStats& stats) {
  std::ostringstream out;
  out << "sequences\t" << stats.sequences << '\n';
  out << "max_length\t" << stats.max_length << '\n';
  for (const auto& [len, count] : stats.length_histogram)
    out << "length\t" << len << '\t' << count << '\n';
  for (int id = 0; id < Symbol::alphabet_size; ++id) {
    if (stats.symbol_counts[id] == 0) continue;
    out << "symbol\t" << Symbol::from_id(id).str() << '\t'
        << stats.symbol_counts[id] << '\n';
  }
  return out.str();
}

}  // namespace normine
