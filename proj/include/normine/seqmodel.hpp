#ifndef NORMINE_SEQMODEL_HPP
#define NORMINE_SEQMODEL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "normine/sequence.hpp"
#include "normine/symbols.hpp"

namespace normine {

struct PyParams {
  int max_depth = 8;       // longest context length stored
  double discount = 0.5;   // in [0, 1)
  double strength = 1.0;   // > -discount
};

// Bounded-depth Pitman-Yor context-trie sequence model with the one-table
// cap.  Each occurrence is seated at its deepest stored context; a context
// that has seen a symbol at all forwards exactly one count for it to its
// suffix context.  Prediction interpolates
//   p(e|u) = (c(u,e) - d*t(u,e)) / (c(u,.) + th)
//          + (th + d*t(u,.)) / (c(u,.) + th) * p(e|suffix(u))
// down to the uniform base 1/41, with t(u,e) = 1 iff c(u,e) > 0.
// Contexts with no counts at some depth fall through to the truncation,
// so an untrained model is exactly uniform.
class SequenceModel {
 public:
  SequenceModel() : SequenceModel(PyParams{}) {}
  explicit SequenceModel(PyParams params);

  // Seats one sequence (terminator included as the final symbol).
  // Call finalize() after the last add before any prediction.
  void add_sequence(std::span<const Symbol> symbols);
  void finalize();

  std::array<double, Symbol::alphabet_size> predict(
      std::span<const Symbol> context) const;
  double predict_symbol(std::span<const Symbol> context, Symbol s) const;

  const PyParams& params() const { return params_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::uint64_t total_count() const { return nodes_[0].total; }

 private:
  friend void save_bank(const class ModelBank&, const std::string&);
  friend ModelBank load_bank(const std::string&);
  friend struct ModelSerde;

  struct Node {
    // Sparse per-symbol counts in first-touch order; distinct symbol count
    // is counts.size(), total kept alongside.
    std::vector<std::pair<std::uint8_t, std::uint32_t>> counts;
    std::vector<std::pair<std::uint8_t, std::uint32_t>> children;  // symbol -> node
    std::uint64_t total = 0;
    std::uint32_t parent = 0;
    std::uint8_t depth = 0;

    std::uint32_t* find_count(std::uint8_t sym);
    const std::uint32_t* find_count(std::uint8_t sym) const;
    std::uint32_t find_child(std::uint8_t sym) const;  // 0 = none
    void add(std::uint8_t sym, std::uint32_t n);
  };

  std::uint32_t walk_create(std::span<const Symbol> context, std::size_t pos);

  PyParams params_;
  std::vector<Node> nodes_;  // nodes_[0] is the empty-context root
  bool finalized_ = true;    // an empty model needs no propagation
};

// Model access used by the norm-likelihood machinery.  Distributions are
// over the full 41-symbol alphabet.  Inclusion-set ids: 0..19 are the
// singleton sets {1}..{20}; 20 is the sanction set {11,12,16}.
class ScoringBank {
 public:
  static constexpr int num_incl_sets = Symbol::num_codes + 1;
  static constexpr int sanction_set_id = Symbol::num_codes;

  virtual ~ScoringBank() = default;
  virtual std::array<double, Symbol::alphabet_size> base_dist(
      std::span<const Symbol> context) const = 0;
  virtual std::array<double, Symbol::alphabet_size> incl_dist(
      int set_id, std::span<const Symbol> context) const = 0;

  static int set_for_code(int code) { return code - 1; }
  // Codes belonging to an inclusion set.
  static std::span<const int> set_codes(int set_id);
};

// Background model plus the 21 inclusion-filtered variants.  The variant
// for a code set is trained only on training copies that contain at least
// one forward-direction event with a code in the set.
class ModelBank : public ScoringBank {
 public:
  ModelBank() = default;

  const SequenceModel& base() const { return base_; }
  const SequenceModel& incl(int set_id) const;

  std::array<double, Symbol::alphabet_size> base_dist(
      std::span<const Symbol> context) const override;
  std::array<double, Symbol::alphabet_size> incl_dist(
      int set_id, std::span<const Symbol> context) const override;

  const PyParams& params() const { return base_.params(); }

 private:
  friend ModelBank train_bank(const Corpus&, PyParams, std::vector<std::string>*);
  friend void save_bank(const ModelBank&, const std::string&);
  friend ModelBank load_bank(const std::string&);

  SequenceModel base_;
  std::vector<SequenceModel> incl_;  // indexed by set id, size num_incl_sets
};

// Training always presents each sequence twice: as-is and with every
// event direction flipped, so the background model is symmetric in
// orientation and one filtered model per code serves both directions.
SequenceModel train_base(const Corpus& corpus, PyParams params = {});
ModelBank train_bank(const Corpus& corpus, PyParams params = {},
                     std::vector<std::string>* warnings = nullptr);

void save_bank(const ModelBank& bank, const std::string& path);
ModelBank load_bank(const std::string& path);

// p(symbol | context) under the inclusion model for `set_id`, for events of
// interest in directions `doi`.  A backward-only doi is answered by the
// forward-trained model on the direction-flipped symbol and context.
double prob_incl(const ScoringBank& bank, DirSet doi, int set_id, Symbol s,
                 std::span<const Symbol> context);

// Background distribution with the symbols {d in doi} x codes zeroed and
// the rest renormalized.  The terminator is never excluded.
double prob_excl(const ScoringBank& bank, DirSet doi, std::span<const int> codes,
                 Symbol s, std::span<const Symbol> context);

struct SampleOptions {
  std::size_t max_length = 10000;  // events before the terminator
};

// Ancestral draw from the model until the terminator; nullopt when the
// length cap is hit (caller discards and redraws).
std::optional<EventSequence> sample_sequence(const SequenceModel& model,
                                             std::mt19937_64& rng,
                                             const SampleOptions& opts = {});

}  // namespace normine

#endif
