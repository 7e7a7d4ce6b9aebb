#ifndef NORMINE_EVAL_HPP
#define NORMINE_EVAL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "normine/norms.hpp"
#include "normine/seqmodel.hpp"
#include "normine/sequence.hpp"

namespace normine {

// Twice the log-likelihood advantage of the norm model over the background
// model on a whole corpus.
double lrt_statistic(const NormHypothesis& norm, const NormParams& params,
                     const Corpus& corpus, const ScoringBank& bank,
                     const ScoringOptions& opts = {});

// Rank-based tail probability of `observed` among `null_stats`; add-one
// smoothed so it never reaches zero.
double empirical_pvalue(double observed, const std::vector<double>& null_stats);

// Draws `size` sequences from the background model.  Sequences hitting the
// length cap are redrawn; more than 100 consecutive cap hits abort.
Corpus generate_null_corpus(const ModelBank& bank, std::size_t size,
                            std::uint64_t seed,
                            const SampleOptions& opts = {});

struct PlantedNormSpec {
  NormHypothesis norm;
  NormParams params;
};

struct PlantStats {
  std::size_t triggered = 0;
  std::size_t comp = 0;
  std::size_t sanc = 0;
  std::size_t nosanc = 0;
  std::size_t redraws = 0;
};

// Draws sequences that obey the norm statistically: the state machine runs
// alongside generation, constrained states draw from the same per-step
// distributions the scorer uses, and the branch taken at each activation is
// drawn once from the mixture weights and then enforced by redrawing the
// remainder until it is consistent with that branch.
Corpus plant_norm_corpus(const ModelBank& bank, const PlantedNormSpec& spec,
                         std::size_t size, std::uint64_t seed,
                         const SampleOptions& opts = {},
                         PlantStats* stats = nullptr);

struct EvalOptions {
  std::size_t n_synth = 58;         // null corpora drawn for the reference
  std::size_t synth_size = 0;       // 0: match the evaluated corpus
  bool reestimate = true;           // re-fit p_comp/p_sanc on each null corpus
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  ScoringOptions scoring;
  SampleOptions sampling;
};

struct EvalResult {
  NormHypothesis norm;
  NormParams params;                // estimated on the evaluated corpus
  double observed_lrt = 0.0;
  std::vector<double> null_lrts;    // one per synthetic corpus
  double p_value = 1.0;
};

// Significance test for one norm: observed statistic on `corpus` against the
// statistic's distribution over freshly drawn background corpora.
EvalResult evaluate_norm(const NormHypothesis& norm, const Corpus& corpus,
                         const ModelBank& bank, const EvalOptions& opts = {});

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

// Equal-width bins, bin count by the log2 rule.
std::vector<HistogramBin> sturges_histogram(const std::vector<double>& values);

void write_lrt_report(const EvalResult& result, const std::string& path);
void write_histogram_csv(const std::vector<HistogramBin>& bins,
                         const std::string& path);

}  // namespace normine

#endif
