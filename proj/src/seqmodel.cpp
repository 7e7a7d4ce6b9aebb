#include "normine/seqmodel.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "normine/errors.hpp"
#include "normine/rng.hpp"

namespace normine {

namespace {

constexpr int kMaxDepthCap = 64;

void validate_params(const PyParams& p) {
  require_input(p.max_depth >= 0 && p.max_depth <= kMaxDepthCap,
                "max_depth must be in [0, 64]");
  require_input(p.discount >= 0.0 && p.discount < 1.0,
                "discount must be in [0, 1)");
  require_input(p.strength > -p.discount, "strength must exceed -discount");
}

constexpr double kUniform = 1.0 / Symbol::alphabet_size;

}  // namespace

std::uint32_t* SequenceModel::Node::find_count(std::uint8_t sym) {
  for (auto& [s, c] : counts)
    if (s == sym) return &c;
  return nullptr;
}

const std::uint32_t* SequenceModel::Node::find_count(std::uint8_t sym) const {
  for (const auto& [s, c] : counts)
    if (s == sym) return &c;
  return nullptr;
}

std::uint32_t SequenceModel::Node::find_child(std::uint8_t sym) const {
  for (const auto& [s, n] : children)
    if (s == sym) return n;
  return 0;
}

void SequenceModel::Node::add(std::uint8_t sym, std::uint32_t n) {
  if (auto* c = find_count(sym)) {
    *c += n;
  } else {
    counts.emplace_back(sym, n);
  }
  total += n;
}

SequenceModel::SequenceModel(PyParams params) : params_(params) {
  validate_params(params_);
  nodes_.resize(1);  // empty-context root
}

std::uint32_t SequenceModel::walk_create(std::span<const Symbol> symbols,
                                         std::size_t pos) {
  const std::size_t k =
      std::min(pos, static_cast<std::size_t>(params_.max_depth));
  std::uint32_t node = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    const std::uint8_t sym = symbols[pos - j].id();
    std::uint32_t child = nodes_[node].find_child(sym);
    if (child == 0) {
      child = static_cast<std::uint32_t>(nodes_.size());
      nodes_[node].children.emplace_back(sym, child);
      Node fresh;
      fresh.parent = node;
      fresh.depth = static_cast<std::uint8_t>(j);
      nodes_.push_back(std::move(fresh));
    }
    node = child;
  }
  return node;
}

void SequenceModel::add_sequence(std::span<const Symbol> symbols) {
  require_invariant(!finalized_ || nodes_[0].total == 0,
                    "add_sequence after finalize");
  finalized_ = false;
  for (std::size_t pos = 0; pos < symbols.size(); ++pos) {
    const std::uint32_t node = walk_create(symbols, pos);
    nodes_[node].add(symbols[pos].id(), 1);
  }
}

void SequenceModel::finalize() {
  if (finalized_) return;
  // Deepest contexts first: once a node's counts are final it forwards one
  // count per seen symbol to its suffix context.
  std::vector<std::uint32_t> order(nodes_.size() - 1);
  std::iota(order.begin(), order.end(), 1u);
  std::stable_sort(order.begin(), order.end(),
                   [this](std::uint32_t a, std::uint32_t b) {
                     return nodes_[a].depth > nodes_[b].depth;
                   });
  for (std::uint32_t idx : order) {
    const std::uint32_t parent = nodes_[idx].parent;
    // Copy out: add() may grow the parent's counts vector while iterating.
    const auto entries = nodes_[idx].counts;
    for (const auto& [sym, c] : entries) {
      (void)c;
      nodes_[parent].add(sym, 1);
    }
  }
  finalized_ = true;
}

std::array<double, Symbol::alphabet_size> SequenceModel::predict(
    std::span<const Symbol> context) const {
  require_invariant(finalized_, "predict before finalize");
  std::array<double, Symbol::alphabet_size> dist;
  dist.fill(kUniform);

  std::array<std::uint32_t, kMaxDepthCap + 1> path;
  std::size_t plen = 1;
  path[0] = 0;
  const std::size_t len = context.size();
  const std::size_t k =
      std::min(len, static_cast<std::size_t>(params_.max_depth));
  std::uint32_t node = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    const std::uint32_t child = nodes_[node].find_child(context[len - j].id());
    if (child == 0) break;
    node = child;
    path[plen++] = child;
  }

  const double d = params_.discount;
  const double th = params_.strength;
  for (std::size_t i = 0; i < plen; ++i) {
    const Node& nd = nodes_[path[i]];
    if (nd.total == 0) continue;  // untrained root
    const double denom = static_cast<double>(nd.total) + th;
    const double backoff = (th + d * static_cast<double>(nd.counts.size())) / denom;
    for (double& p : dist) p *= backoff;
    for (const auto& [sym, c] : nd.counts)
      dist[sym] += (static_cast<double>(c) - d) / denom;
  }
  return dist;
}

double SequenceModel::predict_symbol(std::span<const Symbol> context,
                                     Symbol s) const {
  require_invariant(finalized_, "predict before finalize");
  std::array<std::uint32_t, kMaxDepthCap + 1> path;
  std::size_t plen = 1;
  path[0] = 0;
  const std::size_t len = context.size();
  const std::size_t k =
      std::min(len, static_cast<std::size_t>(params_.max_depth));
  std::uint32_t node = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    const std::uint32_t child = nodes_[node].find_child(context[len - j].id());
    if (child == 0) break;
    node = child;
    path[plen++] = child;
  }

  const double d = params_.discount;
  const double th = params_.strength;
  double p = kUniform;
  for (std::size_t i = 0; i < plen; ++i) {
    const Node& nd = nodes_[path[i]];
    if (nd.total == 0) continue;
    const double denom = static_cast<double>(nd.total) + th;
    const double backoff = (th + d * static_cast<double>(nd.counts.size())) / denom;
    const std::uint32_t* c = nd.find_count(s.id());
    const double direct =
        c ? (static_cast<double>(*c) - d) / denom : 0.0;
    p = direct + backoff * p;
  }
  return p;
}

// ---------------------------------------------------------------------------
// training

namespace {

void append_with_end(std::vector<Symbol>& buf, const EventSequence& seq,
                     bool flip) {
  buf.clear();
  buf.reserve(seq.events.size() + 1);
  for (Symbol s : seq.events) buf.push_back(flip ? s.reversed() : s);
  buf.push_back(Symbol::end());
}

}  // namespace

SequenceModel train_base(const Corpus& corpus, PyParams params) {
  SequenceModel model(params);
  std::vector<Symbol> buf;
  for (const auto& seq : corpus) {
    for (bool flip : {false, true}) {
      append_with_end(buf, seq, flip);
      model.add_sequence(buf);
    }
  }
  model.finalize();
  return model;
}

ModelBank train_bank(const Corpus& corpus, PyParams params,
                     std::vector<std::string>* warnings) {
  ModelBank bank;
  bank.base_ = SequenceModel(params);
  bank.incl_.assign(ScoringBank::num_incl_sets, SequenceModel(params));

  std::vector<Symbol> buf;
  std::array<std::uint64_t, ScoringBank::num_incl_sets> copies_used{};
  for (const auto& seq : corpus) {
    for (bool flip : {false, true}) {
      append_with_end(buf, seq, flip);
      bank.base_.add_sequence(buf);
      bool has_set[ScoringBank::num_incl_sets] = {};
      for (Symbol s : buf) {
        if (s.is_end() || s.direction() != Direction::forward) continue;
        has_set[ScoringBank::set_for_code(s.code())] = true;
        if (is_sanction_code(s.code())) has_set[ScoringBank::sanction_set_id] = true;
      }
      for (int set = 0; set < ScoringBank::num_incl_sets; ++set) {
        if (!has_set[set]) continue;
        bank.incl_[set].add_sequence(buf);
        ++copies_used[set];
      }
    }
  }
  bank.base_.finalize();
  for (auto& m : bank.incl_) m.finalize();

  if (warnings) {
    for (int set = 0; set < ScoringBank::num_incl_sets; ++set) {
      if (copies_used[set] != 0) continue;
      std::string codes;
      for (int c : ScoringBank::set_codes(set)) {
        if (!codes.empty()) codes += ",";
        codes += std::to_string(c);
      }
      warnings->push_back("inclusion filter {" + codes +
                          "} matched no training copies; model stays uniform");
    }
  }
  return bank;
}

// ---------------------------------------------------------------------------
// bank access

std::span<const int> ScoringBank::set_codes(int set_id) {
  static constexpr std::array<int, Symbol::num_codes> singles = [] {
    std::array<int, Symbol::num_codes> a{};
    for (int i = 0; i < Symbol::num_codes; ++i) a[i] = i + 1;
    return a;
  }();
  if (set_id == sanction_set_id)
    return {sanction_codes.data(), sanction_codes.size()};
  require_input(set_id >= 0 && set_id < Symbol::num_codes,
                "unknown inclusion set id " + std::to_string(set_id));
  return {&singles[set_id], 1};
}

const SequenceModel& ModelBank::incl(int set_id) const {
  require_input(set_id >= 0 && set_id < num_incl_sets,
                "unknown inclusion set id " + std::to_string(set_id));
  require_invariant(incl_.size() == num_incl_sets, "bank is not trained");
  return incl_[set_id];
}

std::array<double, Symbol::alphabet_size> ModelBank::base_dist(
    std::span<const Symbol> context) const {
  return base_.predict(context);
}

std::array<double, Symbol::alphabet_size> ModelBank::incl_dist(
    int set_id, std::span<const Symbol> context) const {
  return incl(set_id).predict(context);
}

double prob_incl(const ScoringBank& bank, DirSet doi, int set_id, Symbol s,
                 std::span<const Symbol> context) {
  require_invariant(doi != DirSet::none, "empty direction set");
  if (doi == DirSet::bwd) {
    std::vector<Symbol> flipped(context.size());
    for (std::size_t i = 0; i < context.size(); ++i)
      flipped[i] = context[i].reversed();
    return bank.incl_dist(set_id, flipped)[s.reversed().id()];
  }
  return bank.incl_dist(set_id, context)[s.id()];
}

double prob_excl(const ScoringBank& bank, DirSet doi, std::span<const int> codes,
                 Symbol s, std::span<const Symbol> context) {
  require_invariant(doi != DirSet::none, "empty direction set");
  const auto dist = bank.base_dist(context);
  double excluded = 0.0;
  bool s_excluded = false;
  for (Direction d : {Direction::forward, Direction::backward}) {
    if (!contains(doi, d)) continue;
    for (int code : codes) {
      const Symbol ex = Symbol::directed(d, code);
      excluded += dist[ex.id()];
      if (ex == s) s_excluded = true;
    }
  }
  if (s_excluded) return 0.0;
  require_invariant(excluded < 1.0, "excluded symbols carry the whole mass");
  return dist[s.id()] / (1.0 - excluded);
}

// ---------------------------------------------------------------------------
// sampling

std::optional<EventSequence> sample_sequence(const SequenceModel& model,
                                             std::mt19937_64& rng,
                                             const SampleOptions& opts) {
  EventSequence seq;
  for (;;) {
    const auto dist = model.predict(seq.events);
    const double r = uniform_double(rng);
    double cum = 0.0;
    int picked = Symbol::alphabet_size - 1;
    for (int id = 0; id < Symbol::alphabet_size; ++id) {
      cum += dist[id];
      if (r < cum) {
        picked = id;
        break;
      }
    }
    const Symbol s = Symbol::from_id(picked);
    if (s.is_end()) return seq;
    seq.events.push_back(s);
    if (seq.events.size() > opts.max_length) return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr char kMagic[4] = {'N', 'M', 'B', 'K'};
constexpr std::uint32_t kVersion = 1;

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    require_input(out.good(), "cannot open bank file for writing: " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
};

struct Reader {
  std::ifstream in;
  std::string path;
  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    require_input(in.good(), "cannot open bank file: " + p);
  }
  void bytes(void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    require_input(in.gcount() == static_cast<std::streamsize>(n),
                  "truncated bank file: " + path);
  }
  std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
};

}  // namespace

struct ModelSerde {
  static void save(Writer& w, const SequenceModel& m) {
    w.u32(static_cast<std::uint32_t>(m.nodes_.size()));
    for (std::size_t i = 0; i < m.nodes_.size(); ++i) {
      const auto& nd = m.nodes_[i];
      w.u32(nd.parent);
      w.u8(nd.depth);
      // edge symbol: looked up from the parent at load time via children,
      // stored explicitly to avoid an O(n^2) rebuild
      std::uint8_t edge = 0;
      if (i != 0) {
        for (const auto& [sym, child] : m.nodes_[nd.parent].children) {
          if (child == i) {
            edge = sym;
            break;
          }
        }
      }
      w.u8(edge);
      w.u32(static_cast<std::uint32_t>(nd.counts.size()));
      for (const auto& [sym, c] : nd.counts) {
        w.u8(sym);
        w.u32(c);
      }
    }
  }

  static SequenceModel load(Reader& r, const PyParams& params) {
    SequenceModel m(params);
    const std::uint32_t n = r.u32();
    require_input(n >= 1, "corrupt bank file: empty model: " + r.path);
    m.nodes_.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      auto& nd = m.nodes_[i];
      nd.parent = r.u32();
      nd.depth = r.u8();
      const std::uint8_t edge = r.u8();
      require_input(i == 0 || (nd.parent < i && edge < Symbol::alphabet_size),
                    "corrupt bank file: bad node links: " + r.path);
      if (i != 0) {
        require_input(nd.depth == m.nodes_[nd.parent].depth + 1,
                      "corrupt bank file: bad node depth: " + r.path);
        m.nodes_[nd.parent].children.emplace_back(edge, i);
      }
      const std::uint32_t n_counts = r.u32();
      require_input(n_counts <= Symbol::alphabet_size,
                    "corrupt bank file: bad count list: " + r.path);
      nd.counts.reserve(n_counts);
      nd.total = 0;
      for (std::uint32_t j = 0; j < n_counts; ++j) {
        const std::uint8_t sym = r.u8();
        const std::uint32_t c = r.u32();
        require_input(sym < Symbol::alphabet_size && c > 0,
                      "corrupt bank file: bad count entry: " + r.path);
        nd.counts.emplace_back(sym, c);
        nd.total += c;
      }
    }
    m.finalized_ = true;
    return m;
  }
};

void save_bank(const ModelBank& bank, const std::string& path) {
  require_invariant(bank.incl_.size() == ScoringBank::num_incl_sets,
                    "bank is not trained");
  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(bank.params().max_depth));
  w.f64(bank.params().discount);
  w.f64(bank.params().strength);
  w.u32(1 + ScoringBank::num_incl_sets);
  ModelSerde::save(w, bank.base_);
  for (const auto& m : bank.incl_) ModelSerde::save(w, m);
  w.out.flush();
  require_input(w.out.good(), "write failed: " + path);
}

ModelBank load_bank(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, sizeof magic);
  require_input(std::memcmp(magic, kMagic, sizeof kMagic) == 0,
                "not a model bank file: " + path);
  const std::uint32_t version = r.u32();
  require_input(version == kVersion,
                "unsupported bank file version " + std::to_string(version) +
                    " (expected " + std::to_string(kVersion) + "): " + path);
  PyParams params;
  params.max_depth = static_cast<int>(r.u32());
  params.discount = r.f64();
  params.strength = r.f64();
  validate_params(params);
  const std::uint32_t n_models = r.u32();
  require_input(n_models == 1 + ScoringBank::num_incl_sets,
                "corrupt bank file: wrong model count: " + path);
  ModelBank bank;
  bank.base_ = ModelSerde::load(r, params);
  bank.incl_.reserve(ScoringBank::num_incl_sets);
  for (int i = 0; i < ScoringBank::num_incl_sets; ++i)
    bank.incl_.push_back(ModelSerde::load(r, params));
  r.in.peek();
  require_input(r.in.eof(), "trailing data in bank file: " + path);
  return bank;
}

}  // namespace normine
