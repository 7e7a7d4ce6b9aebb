#ifndef NORMINE_NORMS_HPP
#define NORMINE_NORMS_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "normine/seqmodel.hpp"
#include "normine/sequence.hpp"
#include "normine/symbols.hpp"

namespace normine {

enum class Modality : std::uint8_t { obligation, prohibition };
enum class RelDir : std::uint8_t { same, opposite };

// A candidate norm.  Unconditional: O(ec) / P(ec) — the event class is
// obligatory / forbidden in both directions from the start of a sequence.
// Conditional: O(cc,ec,+/-) / P(cc,ec,+/-) — the first occurrence of the
// condition class activates the norm for the event class in the same (+)
// or opposite (-) direction as that occurrence.
struct NormHypothesis {
  Modality modality = Modality::obligation;
  int condition_code = 0;  // 0 = unconditional
  int event_code = 1;
  RelDir rel_dir = RelDir::same;  // meaningful only when conditional

  bool conditional() const { return condition_code != 0; }
  std::string str() const;
  static std::optional<NormHypothesis> parse(std::string_view text);

  // Position in the enumeration order; also the tie-break rank.
  int canonical_index() const;

  friend bool operator==(const NormHypothesis& a, const NormHypothesis& b) {
    return a.canonical_index() == b.canonical_index();
  }
};

// All 1640 hypotheses in canonical order: the 40 unconditional ones first
// (O then P, by event code), then the 1600 conditional ones (modality,
// condition code, event code, then + before -).
std::vector<NormHypothesis> enumerate_hypotheses();

// ---------------------------------------------------------------------------
// norm life-cycle state machine

enum class NormState : std::uint8_t {
  inactive,
  activating,
  active,
  fulfilled,
  viol_no_sanc,
  viol_sanc,
};

enum class Assumption : std::uint8_t {
  unresolved,
  comp,           // the norm will be complied with
  nocomp_sanc,    // violated, and the violation draws a sanction
  nocomp_nosanc,  // violated with impunity
};

struct NormStateMachine {
  NormHypothesis norm;
  NormState state = NormState::inactive;
  DirSet doi = DirSet::none;  // directions of interest, set at activation
  Assumption assumption = Assumption::unresolved;
};

// Fresh machine: conditional norms wait for their condition, unconditional
// ones are born activating with both directions in scope.
NormStateMachine nsm_new(const NormHypothesis& norm);

// Feeds one symbol.  Receiving in `activating` with an unresolved
// assumption is a contract violation: the assumption mixture must be
// applied first.  fulfilled and viol_sanc absorb everything.
NormStateMachine nsm_receive(NormStateMachine m, Symbol s);

// Applies one branch assumption to an activating machine.  Obligations
// under a no-comply assumption jump straight to viol_no_sanc (a missed
// obligation has no deadline to wait for); everything else goes active.
NormStateMachine nsm_resolve(NormStateMachine m, Assumption a);

// ---------------------------------------------------------------------------
// counting and parameter estimation

struct NormCounts {
  std::uint64_t triggers = 0;
  std::uint64_t fulfilments = 0;
  std::uint64_t violations = 0;
  std::uint64_t sanctioned = 0;

  std::uint64_t unsanctioned() const { return violations - sanctioned; }
};

// Per-sequence outcome of a norm; at most one trigger, one fulfilment, one
// violation, and one sanction are counted per sequence.
NormCounts count_norm_stats(const NormHypothesis& norm, const Corpus& corpus);

struct NormParams {
  double p_comp = 0.5;
  double p_sanc = 0.5;
};

// Add-one smoothed rates: p_comp = (t - v + 1) / (t + 2),
// p_sanc = (s + 1) / (v + 2).
NormParams estimate_params(const NormCounts& counts);

// ---------------------------------------------------------------------------
// sequence likelihood under a norm

struct ScoringOptions {
  // Default: a violation's sanction may arrive any number of events after
  // the violation, with the sanction-inclusion model scoring the gap.
  // Strict: the sanction must be the very next symbol, and sequences whose
  // sanction arrives later score zero in every branch.
  bool strict_sanction = false;
};

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

double seq_loglik_base(const ScoringBank& bank, const EventSequence& seq);

double seq_loglik_norm(const NormHypothesis& norm, const NormParams& params,
                       const EventSequence& seq, const ScoringBank& bank,
                       const ScoringOptions& opts = {});

// Instrumented variant exposing the per-branch decomposition at the
// activation point.
struct BranchScores {
  bool triggered = false;
  std::size_t activation_index = 0;  // first position scored under the mixture
  DirSet doi = DirSet::none;
  double prefix_loglik = 0.0;  // background-scored symbols before activation
  double w_comp = 0.0, w_sanc = 0.0, w_nosanc = 0.0;  // linear mixture weights
  double comp = kLogZero, sanc = kLogZero, nosanc = kLogZero;  // branch logliks
  double total = 0.0;
};

BranchScores seq_loglik_norm_detail(const NormHypothesis& norm,
                                    const NormParams& params,
                                    const EventSequence& seq,
                                    const ScoringBank& bank,
                                    const ScoringOptions& opts = {});

// seq_loglik_norm minus seq_loglik_base with the prediction tables built
// once.  Exactly zero whenever the norm never triggers on the sequence.
double seq_loglik_advantage(const NormHypothesis& norm, const NormParams& params,
                            const EventSequence& seq, const ScoringBank& bank,
                            const ScoringOptions& opts = {});

// The per-step next-symbol distribution a machine in `m`'s state draws
// from / is scored against.  Not defined for `activating` (the mixture
// point) and states that cannot consume a symbol.
std::array<double, Symbol::alphabet_size> step_distribution(
    const ScoringBank& bank, const NormStateMachine& m,
    std::span<const Symbol> context);

// ---------------------------------------------------------------------------
// mining

struct NormScore {
  NormHypothesis norm;
  double log_odds = 0.0;
  NormCounts counts;
  NormParams params;
};

struct MineOptions {
  double prior_log_odds = 0.0;
  int workers = 1;
  ScoringOptions scoring;
  std::size_t block_sequences = 64;  // sequences scored per parallel block
  // Progress callback (sequences done, total); called from the driver thread.
  void (*progress)(std::size_t, std::size_t) = nullptr;
};

// Scores every hypothesis against the corpus: posterior log-odds is the
// prior plus the summed per-sequence log-likelihood advantage over the
// background model.  Results are sorted by log-odds descending, ties by
// canonical order.  Output is identical for any worker count: each
// hypothesis accumulates its sum in corpus order.
std::vector<NormScore> mine(const Corpus& corpus,
                            const std::vector<NormHypothesis>& hypotheses,
                            const ScoringBank& bank, const MineOptions& opts = {});

void write_mine_csv(const std::vector<NormScore>& scores,
                    const std::string& path);
void write_mine_report(const std::vector<NormScore>& scores,
                       const Corpus& corpus, double prior_log_odds,
                       const std::string& path);

}  // namespace normine

#endif
