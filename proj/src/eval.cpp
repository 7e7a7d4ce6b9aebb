#include "normine/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "normine/errors.hpp"
#include "normine/parallel.hpp"
#include "normine/rng.hpp"

namespace normine {

namespace {

Symbol draw_symbol(const std::array<double, Symbol::alphabet_size>& dist,
                   std::mt19937_64& rng) {
  const double u = uniform_double(rng);
  double cum = 0.0;
  for (int id = 0; id < Symbol::alphabet_size; ++id) {
    cum += dist[id];
    if (u < cum) return Symbol::from_id(id);
  }
  return Symbol::end();  // rounding residue collapses onto the terminator
}

EventSequence make_synthetic(std::size_t index, std::vector<Symbol> events) {
  EventSequence seq;
  seq.id = std::to_string(index);
  seq.country_a = "A";
  seq.country_b = "B";
  seq.events = std::move(events);
  seq.terminated = true;
  return seq;
}

}  // namespace

double lrt_statistic(const NormHypothesis& norm, const NormParams& params,
                     const Corpus& corpus, const ScoringBank& bank,
                     const ScoringOptions& opts) {
  double adv = 0.0;
  for (const auto& seq : corpus)
    adv += seq_loglik_advantage(norm, params, seq, bank, opts);
  return 2.0 * adv;
}

double empirical_pvalue(double observed, const std::vector<double>& null_stats) {
  require_input(!null_stats.empty(), "empty null sample");
  std::size_t k = 0;
  for (double v : null_stats)
    if (v >= observed) ++k;
  return static_cast<double>(k + 1) / static_cast<double>(null_stats.size() + 1);
}

Corpus generate_null_corpus(const ModelBank& bank, std::size_t size,
                            std::uint64_t seed, const SampleOptions& opts) {
  std::mt19937_64 rng(seed);
  Corpus corpus;
  corpus.reserve(size);
  std::size_t consecutive_failures = 0;
  while (corpus.size() < size) {
    auto drawn = sample_sequence(bank.base(), rng, opts);
    if (!drawn) {
      require_input(++consecutive_failures <= 100,
                    "sampling hit the length cap 100 times in a row; "
                    "raise max_length");
      continue;
    }
    consecutive_failures = 0;
    drawn->id = std::to_string(corpus.size());
    drawn->country_a = "A";
    drawn->country_b = "B";
    corpus.push_back(std::move(*drawn));
  }
  return corpus;
}

Corpus plant_norm_corpus(const ModelBank& bank, const PlantedNormSpec& spec,
                         std::size_t size, std::uint64_t seed,
                         const SampleOptions& opts, PlantStats* stats) {
  const NormHypothesis& norm = spec.norm;
  std::mt19937_64 rng(seed);
  Corpus corpus;
  corpus.reserve(size);

  // Outcome check against the branch pinned at activation.  Obligation
  // no-comply branches additionally require the obliged event to be absent
  // after activation, mirroring the scorer's consistency gates.
  const auto consistent = [&](Assumption a, const NormStateMachine& m,
                              const std::vector<Symbol>& events,
                              std::size_t from, DirSet doi) {
    if (norm.modality == Modality::obligation && a != Assumption::comp) {
      for (std::size_t i = from; i < events.size(); ++i)
        if (contains(doi, events[i].direction()) &&
            events[i].code() == norm.event_code)
          return false;
    }
    switch (a) {
      case Assumption::comp:
        return norm.modality == Modality::obligation
                   ? m.state == NormState::fulfilled
                   : m.state == NormState::active;
      case Assumption::nocomp_sanc:
        return m.state == NormState::viol_sanc;
      case Assumption::nocomp_nosanc:
        return m.state == NormState::viol_no_sanc;
      default:
        return false;
    }
  };

  constexpr std::size_t kMaxFailed = 10000;
  const char* kInfeasible =
      "more than 10000 rejected drafts for one sequence; the norm is "
      "infeasible under this background model";

  std::vector<Symbol> events;
  while (corpus.size() < size) {
    std::size_t failed = 0;
    bool done = false;
    while (!done) {
      require_input(failed < kMaxFailed, kInfeasible);

      // Background prose until the first activation (or a clean end).
      events.clear();
      NormStateMachine m = nsm_new(norm);
      bool capped = false, finished = false;
      while (m.state == NormState::inactive) {
        if (events.size() >= opts.max_length) {
          capped = true;
          break;
        }
        const Symbol s = draw_symbol(step_distribution(bank, m, events), rng);
        if (s.is_end()) {
          finished = true;
          break;
        }
        events.push_back(s);
        m = nsm_receive(m, s);
      }
      if (capped) {
        ++failed;
        continue;
      }
      if (finished) {
        done = true;  // untriggered draw, accepted as-is
        break;
      }

      require_invariant(m.state == NormState::activating,
                        "activation expected after the trigger");
      const double pc = std::pow(spec.params.p_comp, dirset_size(m.doi));
      const double u = uniform_double(rng);
      Assumption branch;
      if (u < pc) {
        branch = Assumption::comp;
      } else if (u < pc + (1.0 - pc) * spec.params.p_sanc) {
        branch = Assumption::nocomp_sanc;
      } else {
        branch = Assumption::nocomp_nosanc;
      }
      m = nsm_resolve(m, branch);
      const NormStateMachine pinned = m;
      const std::size_t prefix_len = events.size();
      const DirSet doi = m.doi;

      // Remainder under the pinned branch; redraw it until the realized
      // outcome matches the branch, so compliance and sanction rates track
      // the requested parameters instead of each branch's escape rate.
      while (!done) {
        require_input(failed < kMaxFailed, kInfeasible);
        events.resize(prefix_len);
        m = pinned;
        bool rcapped = false;
        while (true) {
          if (events.size() >= opts.max_length) {
            rcapped = true;
            break;
          }
          const Symbol s = draw_symbol(step_distribution(bank, m, events), rng);
          if (s.is_end()) break;
          events.push_back(s);
          m = nsm_receive(m, s);
        }
        if (!rcapped && consistent(branch, m, events, prefix_len, doi)) {
          done = true;
          if (stats) {
            ++stats->triggered;
            if (branch == Assumption::comp) ++stats->comp;
            else if (branch == Assumption::nocomp_sanc) ++stats->sanc;
            else ++stats->nosanc;
          }
        } else {
          ++failed;
        }
      }
    }
    if (stats) stats->redraws += failed;
    corpus.push_back(make_synthetic(corpus.size(), events));
  }
  return corpus;
}

EvalResult evaluate_norm(const NormHypothesis& norm, const Corpus& corpus,
                         const ModelBank& bank, const EvalOptions& opts) {
  require_input(!corpus.empty(), "empty corpus");
  require_input(opts.n_synth > 0, "need at least one synthetic corpus");

  EvalResult result;
  result.norm = norm;
  result.params = estimate_params(count_norm_stats(norm, corpus));
  result.observed_lrt =
      lrt_statistic(norm, result.params, corpus, bank, opts.scoring);

  const std::size_t synth_size =
      opts.synth_size > 0 ? opts.synth_size : corpus.size();
  result.null_lrts.assign(opts.n_synth, 0.0);
  parallel_ranges(opts.n_synth, opts.workers,
                  [&](std::size_t begin, std::size_t end) {
                    for (std::size_t j = begin; j < end; ++j) {
                      const Corpus null_corpus = generate_null_corpus(
                          bank, synth_size, opts.seed + 1 + j, opts.sampling);
                      const NormParams p =
                          opts.reestimate
                              ? estimate_params(count_norm_stats(norm, null_corpus))
                              : result.params;
                      result.null_lrts[j] =
                          lrt_statistic(norm, p, null_corpus, bank, opts.scoring);
                    }
                  });
  result.p_value = empirical_pvalue(result.observed_lrt, result.null_lrts);
  return result;
}

std::vector<HistogramBin> sturges_histogram(const std::vector<double>& values) {
  if (values.empty()) return {};
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const std::size_t k = static_cast<std::size_t>(
      1.0 + std::ceil(std::log2(static_cast<double>(values.size()))));
  std::vector<HistogramBin> bins(std::max<std::size_t>(k, 1));
  const double width = (hi - lo) / static_cast<double>(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    bins[i].left = lo + width * static_cast<double>(i);
    bins[i].right = lo + width * static_cast<double>(i + 1);
  }
  bins.back().right = hi;
  for (double v : values) {
    std::size_t idx =
        width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
    if (idx >= bins.size()) idx = bins.size() - 1;
    ++bins[idx].count;
  }
  return bins;
}

void write_lrt_report(const EvalResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "cannot open report file for writing: " + path);
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  out << "norm\t" << result.norm.str() << '\n';
  out << "p_comp\t" << num(result.params.p_comp) << '\n';
  out << "p_sanc\t" << num(result.params.p_sanc) << '\n';
  out << "observed_lrt\t" << num(result.observed_lrt) << '\n';
  out << "null_corpora\t" << result.null_lrts.size() << '\n';
  out << "p_value\t" << num(result.p_value) << '\n';
  for (double v : result.null_lrts) out << "null_lrt\t" << num(v) << '\n';
  out.flush();
  require_input(out.good(), "write failed: " + path);
}

void write_histogram_csv(const std::vector<HistogramBin>& bins,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "cannot open csv file for writing: " + path);
  out << "bin_left,bin_right,count\n";
  char buf[96];
  for (const auto& b : bins) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,", b.left, b.right);
    out << buf << b.count << '\n';
  }
  out.flush();
  require_input(out.good(), "write failed: " + path);
}

}  // namespace normine
