#include "normine.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "normine/errors.hpp"
#include "normine/eval.hpp"
#include "normine/ingest.hpp"
#include "normine/norms.hpp"
#include "normine/seqmodel.hpp"
#include "normine/sequence.hpp"

struct nm_corpus {
  normine::Corpus value;
};
struct nm_bank {
  normine::ModelBank value;
};
struct nm_mine_result {
  std::vector<normine::NormScore> scores;
  double prior_log_odds = 0.0;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
nm_status guarded(Fn&& fn) {
  try {
    fn();
    return NM_OK;
  } catch (const normine::input_error& e) {
    g_last_error = e.what();
    return NM_ERR_INPUT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return NM_ERR_INTERNAL;
  }
}

nm_status bad_arg(const char* msg) {
  g_last_error = msg;
  return NM_ERR_INPUT;
}

}  // namespace

extern "C" {

const char* nm_version(void) { return "0.1.0"; }

const char* nm_last_error(void) { return g_last_error.c_str(); }

void nm_string_free(char* s) { std::free(s); }

/* -------------------------------------------------------------- ingest */

void nm_ingest_options_default(nm_ingest_options* opts) {
  if (!opts) return;
  opts->events_dir = nullptr;
  opts->mentions_dir = nullptr;
  opts->clone_threshold = 250;
  opts->source_filters = nullptr;
  opts->n_source_filters = 0;
  opts->window_start = 0;
  opts->window_end = 0;
  opts->seed = 1;
}

nm_status nm_ingest(const nm_ingest_options* opts, nm_corpus** corpus_out,
                    char** report_out) {
  if (!opts || !corpus_out) return bad_arg("null argument");
  if (!opts->events_dir || !opts->mentions_dir)
    return bad_arg("events_dir and mentions_dir are required");
  return guarded([&] {
    normine::IngestOptions o;
    o.events_dir = opts->events_dir;
    o.mentions_dir = opts->mentions_dir;
    o.clone_threshold = opts->clone_threshold;
    if (opts->source_filters) {
      o.source_filters.assign(opts->source_filters,
                              opts->source_filters + opts->n_source_filters);
    }
    o.window_start = opts->window_start;
    o.window_end = opts->window_end;
    o.seed = opts->seed;
    normine::IngestDiagnostics diag;
    auto corpus = normine::run_ingest(o, &diag);
    *corpus_out = new nm_corpus{std::move(corpus)};
    if (report_out) *report_out = dup_string(normine::format_ingest_report(diag));
  });
}

/* -------------------------------------------------------------- corpus */

nm_status nm_corpus_read(const char* path, nm_corpus** corpus_out) {
  if (!path || !corpus_out) return bad_arg("null argument");
  return guarded(
      [&] { *corpus_out = new nm_corpus{normine::read_corpus(path)}; });
}

nm_status nm_corpus_write(const nm_corpus* corpus, const char* path,
                          int with_meta) {
  if (!corpus || !path) return bad_arg("null argument");
  return guarded([&] {
    normine::write_corpus(corpus->value, path);
    if (with_meta)
      normine::write_corpus_meta(corpus->value, std::string(path) + ".meta");
  });
}

size_t nm_corpus_size(const nm_corpus* corpus) {
  return corpus ? corpus->value.size() : 0;
}

nm_status nm_corpus_stats_text(const nm_corpus* corpus, char** text_out) {
  if (!corpus || !text_out) return bad_arg("null argument");
  return guarded([&] {
    *text_out =
        dup_string(normine::format_corpus_stats(normine::corpus_stats(corpus->value)));
  });
}

void nm_corpus_free(nm_corpus* corpus) { delete corpus; }

/* -------------------------------------------------------------- models */

void nm_model_params_default(nm_model_params* params) {
  if (!params) return;
  const normine::PyParams defaults;
  params->max_depth = defaults.max_depth;
  params->discount = defaults.discount;
  params->strength = defaults.strength;
}

nm_status nm_train(const nm_corpus* corpus, const nm_model_params* params,
                   nm_bank** bank_out, char** warnings_out) {
  if (!corpus || !bank_out) return bad_arg("null argument");
  return guarded([&] {
    normine::PyParams p;
    if (params) {
      p.max_depth = params->max_depth;
      p.discount = params->discount;
      p.strength = params->strength;
    }
    std::vector<std::string> warnings;
    auto bank = normine::train_bank(corpus->value, p, &warnings);
    *bank_out = new nm_bank{std::move(bank)};
    if (warnings_out) {
      if (warnings.empty()) {
        *warnings_out = nullptr;
      } else {
        std::string joined;
        for (const auto& w : warnings) {
          if (!joined.empty()) joined += '\n';
          joined += w;
        }
        *warnings_out = dup_string(joined);
      }
    }
  });
}

nm_status nm_bank_save(const nm_bank* bank, const char* path) {
  if (!bank || !path) return bad_arg("null argument");
  return guarded([&] { normine::save_bank(bank->value, path); });
}

nm_status nm_bank_load(const char* path, nm_bank** bank_out) {
  if (!path || !bank_out) return bad_arg("null argument");
  return guarded([&] { *bank_out = new nm_bank{normine::load_bank(path)}; });
}

void nm_bank_free(nm_bank* bank) { delete bank; }

/* -------------------------------------------------------------- mining */

void nm_mine_options_default(nm_mine_options* opts) {
  if (!opts) return;
  const normine::MineOptions defaults;
  opts->prior_log_odds = defaults.prior_log_odds;
  opts->workers = defaults.workers;
  opts->strict_sanction = defaults.scoring.strict_sanction ? 1 : 0;
  opts->block_sequences = defaults.block_sequences;
}

nm_status nm_mine(const nm_corpus* corpus, const nm_bank* bank,
                  const nm_mine_options* opts, nm_mine_result** result_out) {
  if (!corpus || !bank || !result_out) return bad_arg("null argument");
  return guarded([&] {
    normine::MineOptions o;
    if (opts) {
      o.prior_log_odds = opts->prior_log_odds;
      o.workers = opts->workers;
      o.scoring.strict_sanction = opts->strict_sanction != 0;
      o.block_sequences = opts->block_sequences;
    }
    auto scores = normine::mine(corpus->value, normine::enumerate_hypotheses(),
                                bank->value, o);
    *result_out = new nm_mine_result{std::move(scores), o.prior_log_odds};
  });
}

size_t nm_mine_result_size(const nm_mine_result* result) {
  return result ? result->scores.size() : 0;
}

nm_status nm_mine_result_entry(const nm_mine_result* result, size_t rank,
                               char** norm_out, double* log_odds_out) {
  if (!result) return bad_arg("null argument");
  if (rank >= result->scores.size()) return bad_arg("rank out of range");
  return guarded([&] {
    const auto& s = result->scores[rank];
    if (norm_out) *norm_out = dup_string(s.norm.str());
    if (log_odds_out) *log_odds_out = s.log_odds;
  });
}

nm_status nm_mine_result_write_csv(const nm_mine_result* result,
                                   const char* path) {
  if (!result || !path) return bad_arg("null argument");
  return guarded([&] { normine::write_mine_csv(result->scores, path); });
}

nm_status nm_mine_result_write_report(const nm_mine_result* result,
                                      const nm_corpus* corpus,
                                      const char* path) {
  if (!result || !corpus || !path) return bad_arg("null argument");
  return guarded([&] {
    normine::write_mine_report(result->scores, corpus->value,
                               result->prior_log_odds, path);
  });
}

void nm_mine_result_free(nm_mine_result* result) { delete result; }

/* ---------------------------------------------------------- evaluation */

void nm_eval_options_default(nm_eval_options* opts) {
  if (!opts) return;
  const normine::EvalOptions defaults;
  opts->n_synth = defaults.n_synth;
  opts->synth_size = defaults.synth_size;
  opts->reestimate = defaults.reestimate ? 1 : 0;
  opts->seed = defaults.seed;
  opts->workers = static_cast<int>(defaults.workers);
  opts->strict_sanction = defaults.scoring.strict_sanction ? 1 : 0;
  opts->max_sample_length = defaults.sampling.max_length;
}

nm_status nm_evaluate(const char* norm_text, const nm_corpus* corpus,
                      const nm_bank* bank, const nm_eval_options* opts,
                      const char* report_path, const char* hist_csv_path,
                      double* observed_out, double* p_value_out) {
  if (!norm_text || !corpus || !bank) return bad_arg("null argument");
  return guarded([&] {
    const auto parsed = normine::NormHypothesis::parse(norm_text);
    normine::require_input(parsed.has_value(),
                           std::string("unparseable norm: ") + norm_text);
    const normine::NormHypothesis norm = *parsed;
    normine::EvalOptions o;
    if (opts) {
      o.n_synth = opts->n_synth;
      o.synth_size = opts->synth_size;
      o.reestimate = opts->reestimate != 0;
      o.seed = opts->seed;
      o.workers = opts->workers > 0 ? static_cast<std::size_t>(opts->workers) : 1;
      o.scoring.strict_sanction = opts->strict_sanction != 0;
      o.sampling.max_length = opts->max_sample_length;
    }
    const auto result = normine::evaluate_norm(norm, corpus->value, bank->value, o);
    if (report_path) normine::write_lrt_report(result, report_path);
    if (hist_csv_path)
      normine::write_histogram_csv(normine::sturges_histogram(result.null_lrts),
                                   hist_csv_path);
    if (observed_out) *observed_out = result.observed_lrt;
    if (p_value_out) *p_value_out = result.p_value;
  });
}

/* ----------------------------------------------------------- synthesis */

nm_status nm_sample_corpus(const nm_bank* bank, size_t size,
                           unsigned long long seed, size_t max_length,
                           nm_corpus** corpus_out) {
  if (!bank || !corpus_out) return bad_arg("null argument");
  return guarded([&] {
    normine::SampleOptions opts;
    if (max_length > 0) opts.max_length = max_length;
    *corpus_out = new nm_corpus{
        normine::generate_null_corpus(bank->value, size, seed, opts)};
  });
}

nm_status nm_plant_corpus(const nm_bank* bank, const char* norm_text,
                          double p_comp, double p_sanc, size_t size,
                          unsigned long long seed, size_t max_length,
                          nm_corpus** corpus_out, char** stats_out) {
  if (!bank || !norm_text || !corpus_out) return bad_arg("null argument");
  return guarded([&] {
    normine::require_input(p_comp >= 0.0 && p_comp <= 1.0,
                           "p_comp must lie in [0, 1]");
    normine::require_input(p_sanc >= 0.0 && p_sanc <= 1.0,
                           "p_sanc must lie in [0, 1]");
    const auto parsed = normine::NormHypothesis::parse(norm_text);
    normine::require_input(parsed.has_value(),
                           std::string("unparseable norm: ") + norm_text);
    normine::PlantedNormSpec spec;
    spec.norm = *parsed;
    spec.params = {p_comp, p_sanc};
    normine::SampleOptions opts;
    if (max_length > 0) opts.max_length = max_length;
    normine::PlantStats stats;
    *corpus_out = new nm_corpus{
        normine::plant_norm_corpus(bank->value, spec, size, seed, opts, &stats)};
    if (stats_out) {
      std::ostringstream text;
      text << "triggered=" << stats.triggered << " comp=" << stats.comp
           << " sanc=" << stats.sanc << " nosanc=" << stats.nosanc
           << " redraws=" << stats.redraws;
      *stats_out = dup_string(text.str());
    }
  });
}

} /* extern "C" */
