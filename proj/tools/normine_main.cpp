// Command-line front end over the C library interface.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <normine.h>

namespace {

int fail(nm_status status) {
  std::fprintf(stderr, "error: %s\n", nm_last_error());
  return static_cast<int>(status);
}

bool write_text_file(const std::string& path, const char* text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return false;
  const bool ok = std::fputs(text, f) >= 0;
  return (std::fclose(f) == 0) && ok;
}

struct IngestArgs {
  std::string events_dir, mentions_dir, out, report;
  std::size_t clone_threshold = 250;
  std::vector<std::string> source_filters;
  bool no_source_filter = false;
  unsigned window_start = 0, window_end = 0;
  unsigned long long seed = 1;
  bool no_meta = false;
};

int run_ingest(const IngestArgs& args) {
  nm_ingest_options opts;
  nm_ingest_options_default(&opts);
  opts.events_dir = args.events_dir.c_str();
  opts.mentions_dir = args.mentions_dir.c_str();
  opts.clone_threshold = args.clone_threshold;
  std::vector<const char*> filters;
  for (const auto& f : args.source_filters) filters.push_back(f.c_str());
  if (args.no_source_filter || !filters.empty()) {
    opts.source_filters = filters.data();
    opts.n_source_filters = filters.size();
    if (filters.empty()) {
      static const char* none = nullptr;
      opts.source_filters = &none;  // present but empty: no filtering
    }
  }
  opts.window_start = args.window_start;
  opts.window_end = args.window_end;
  opts.seed = args.seed;

  nm_corpus* corpus = nullptr;
  char* report = nullptr;
  nm_status st = nm_ingest(&opts, &corpus, &report);
  if (st != NM_OK) return fail(st);

  st = nm_corpus_write(corpus, args.out.c_str(), args.no_meta ? 0 : 1);
  if (st != NM_OK) {
    nm_string_free(report);
    nm_corpus_free(corpus);
    return fail(st);
  }
  if (!args.report.empty() && !write_text_file(args.report, report)) {
    std::fprintf(stderr, "error: cannot write report file: %s\n",
                 args.report.c_str());
    nm_string_free(report);
    nm_corpus_free(corpus);
    return 2;
  }
  nm_string_free(report);

  char* stats = nullptr;
  if (nm_corpus_stats_text(corpus, &stats) == NM_OK) {
    std::fputs(stats, stdout);
    nm_string_free(stats);
  }
  nm_corpus_free(corpus);
  return 0;
}

struct TrainArgs {
  std::string corpus, out;
  nm_model_params params{};
};

int run_train(const TrainArgs& args) {
  nm_corpus* corpus = nullptr;
  nm_status st = nm_corpus_read(args.corpus.c_str(), &corpus);
  if (st != NM_OK) return fail(st);

  nm_bank* bank = nullptr;
  char* warnings = nullptr;
  st = nm_train(corpus, &args.params, &bank, &warnings);
  nm_corpus_free(corpus);
  if (st != NM_OK) return fail(st);
  if (warnings) {
    std::fprintf(stderr, "%s\n", warnings);
    nm_string_free(warnings);
  }

  st = nm_bank_save(bank, args.out.c_str());
  nm_bank_free(bank);
  if (st != NM_OK) return fail(st);
  std::printf("bank written to %s\n", args.out.c_str());
  return 0;
}

struct MineArgs {
  std::string corpus, bank, csv, report;
  nm_mine_options opts{};
  std::size_t top = 10;
};

int run_mine(const MineArgs& args) {
  nm_corpus* corpus = nullptr;
  nm_status st = nm_corpus_read(args.corpus.c_str(), &corpus);
  if (st != NM_OK) return fail(st);
  nm_bank* bank = nullptr;
  st = nm_bank_load(args.bank.c_str(), &bank);
  if (st != NM_OK) {
    nm_corpus_free(corpus);
    return fail(st);
  }

  std::fprintf(stderr, "scoring hypotheses over %zu sequences...\n",
               nm_corpus_size(corpus));
  nm_mine_result* result = nullptr;
  st = nm_mine(corpus, bank, &args.opts, &result);
  nm_bank_free(bank);
  if (st != NM_OK) {
    nm_corpus_free(corpus);
    return fail(st);
  }

  if (!args.csv.empty()) {
    st = nm_mine_result_write_csv(result, args.csv.c_str());
    if (st != NM_OK) {
      nm_mine_result_free(result);
      nm_corpus_free(corpus);
      return fail(st);
    }
  }
  if (!args.report.empty()) {
    st = nm_mine_result_write_report(result, corpus, args.report.c_str());
    if (st != NM_OK) {
      nm_mine_result_free(result);
      nm_corpus_free(corpus);
      return fail(st);
    }
  }

  const std::size_t n = nm_mine_result_size(result);
  for (std::size_t i = 0; i < n && i < args.top; ++i) {
    char* norm = nullptr;
    double log_odds = 0.0;
    if (nm_mine_result_entry(result, i, &norm, &log_odds) == NM_OK) {
      std::printf("%s\t%.6f\n", norm, log_odds);
      nm_string_free(norm);
    }
  }
  nm_mine_result_free(result);
  nm_corpus_free(corpus);
  return 0;
}

struct EvalArgs {
  std::string corpus, bank, norm, report, hist;
  nm_eval_options opts{};
  bool frozen_params = false;
};

int run_evaluate(const EvalArgs& args) {
  nm_corpus* corpus = nullptr;
  nm_status st = nm_corpus_read(args.corpus.c_str(), &corpus);
  if (st != NM_OK) return fail(st);
  nm_bank* bank = nullptr;
  st = nm_bank_load(args.bank.c_str(), &bank);
  if (st != NM_OK) {
    nm_corpus_free(corpus);
    return fail(st);
  }

  nm_eval_options opts = args.opts;
  if (args.frozen_params) opts.reestimate = 0;
  double observed = 0.0, p_value = 1.0;
  st = nm_evaluate(args.norm.c_str(), corpus, bank, &opts,
                   args.report.empty() ? nullptr : args.report.c_str(),
                   args.hist.empty() ? nullptr : args.hist.c_str(), &observed,
                   &p_value);
  nm_bank_free(bank);
  nm_corpus_free(corpus);
  if (st != NM_OK) return fail(st);
  std::printf("norm\t%s\nobserved_lrt\t%.6f\np_value\t%.6f\n",
              args.norm.c_str(), observed, p_value);
  return 0;
}

struct SynthArgs {
  std::string bank, out, norm;
  std::size_t size = 1000;
  unsigned long long seed = 1;
  std::size_t max_length = 0;
  double p_comp = 0.5, p_sanc = 0.5;
  bool no_meta = false;
};

int run_synth(const SynthArgs& args) {
  nm_bank* bank = nullptr;
  nm_status st = nm_bank_load(args.bank.c_str(), &bank);
  if (st != NM_OK) return fail(st);

  nm_corpus* corpus = nullptr;
  char* stats = nullptr;
  if (args.norm.empty()) {
    st = nm_sample_corpus(bank, args.size, args.seed, args.max_length, &corpus);
  } else {
    st = nm_plant_corpus(bank, args.norm.c_str(), args.p_comp, args.p_sanc,
                         args.size, args.seed, args.max_length, &corpus, &stats);
  }
  nm_bank_free(bank);
  if (st != NM_OK) return fail(st);
  if (stats) {
    std::fprintf(stderr, "%s\n", stats);
    nm_string_free(stats);
  }

  st = nm_corpus_write(corpus, args.out.c_str(), args.no_meta ? 0 : 1);
  nm_corpus_free(corpus);
  if (st != NM_OK) return fail(st);
  std::printf("corpus written to %s\n", args.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine and evaluate behavioural norms in bilateral event "
               "sequences"};
  app.set_version_flag("--version", nm_version());
  app.set_config("--config", "", "Read options from an INI file");
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand(
      "ingest", "Build an event-sequence corpus from raw data tables");
  ingest->add_option("--events", ingest_args.events_dir,
                     "Directory of events-table files")->required();
  ingest->add_option("--mentions", ingest_args.mentions_dir,
                     "Directory of mentions-table files")->required();
  ingest->add_option("--out", ingest_args.out, "Corpus output file")->required();
  ingest->add_option("--report", ingest_args.report, "Diagnostics report file");
  ingest->add_option("--clone-threshold", ingest_args.clone_threshold,
                     "Mention count above which an event is cloned per mention");
  ingest->add_option("--source-filter", ingest_args.source_filters,
                     "Discard mentions whose identifier contains this "
                     "substring (default: BBC)");
  ingest->add_flag("--no-source-filter", ingest_args.no_source_filter,
                   "Keep all mentions regardless of source");
  ingest->add_option("--window-start", ingest_args.window_start,
                     "First day to keep, YYYYMMDD inclusive");
  ingest->add_option("--window-end", ingest_args.window_end,
                     "Last day to keep, YYYYMMDD inclusive");
  ingest->add_option("--seed", ingest_args.seed,
                     "Seed for same-day tie shuffling");
  ingest->add_flag("--no-meta", ingest_args.no_meta,
                   "Skip the provenance sidecar file");

  TrainArgs train_args;
  nm_model_params_default(&train_args.params);
  auto* train = app.add_subcommand(
      "train", "Fit the background and inclusion sequence models");
  train->add_option("--corpus", train_args.corpus, "Corpus file")->required();
  train->add_option("--out", train_args.out, "Model bank output file")
      ->required();
  train->add_option("--max-depth", train_args.params.max_depth,
                    "Context length bound");
  train->add_option("--discount", train_args.params.discount,
                    "Smoothing discount in [0, 1)");
  train->add_option("--strength", train_args.params.strength,
                    "Smoothing strength (> -discount)");

  MineArgs mine_args;
  nm_mine_options_default(&mine_args.opts);
  auto* mine = app.add_subcommand(
      "mine", "Score every norm hypothesis against the corpus");
  mine->add_option("--corpus", mine_args.corpus, "Corpus file")->required();
  mine->add_option("--bank", mine_args.bank, "Model bank file")->required();
  mine->add_option("--csv", mine_args.csv, "Ranked results CSV output");
  mine->add_option("--report", mine_args.report, "Full JSON report output");
  mine->add_option("--prior-log-odds", mine_args.opts.prior_log_odds,
                   "Log prior odds added to every hypothesis");
  mine->add_option("--workers", mine_args.opts.workers, "Scoring threads");
  mine->add_flag("--strict-sanction", mine_args.opts.strict_sanction,
                 "Sanction must immediately follow the violation");
  mine->add_option("--block-sequences", mine_args.opts.block_sequences,
                   "Sequences scored per parallel block");
  mine->add_option("--top", mine_args.top, "Rows printed to stdout");

  EvalArgs eval_args;
  nm_eval_options_default(&eval_args.opts);
  auto* evaluate = app.add_subcommand(
      "evaluate", "Likelihood-ratio significance test for one norm");
  evaluate->add_option("--corpus", eval_args.corpus, "Corpus file")->required();
  evaluate->add_option("--bank", eval_args.bank, "Model bank file")->required();
  evaluate->add_option("--norm", eval_args.norm,
                       "Norm text, e.g. O(4) or O(4,4,-)")->required();
  evaluate->add_option("--report", eval_args.report, "Report output file");
  evaluate->add_option("--hist", eval_args.hist,
                       "Null-statistic histogram CSV output");
  evaluate->add_option("--n-synth", eval_args.opts.n_synth,
                       "Synthetic corpora drawn for the null distribution");
  evaluate->add_option("--synth-size", eval_args.opts.synth_size,
                       "Sequences per synthetic corpus (0: match corpus)");
  evaluate->add_flag("--frozen-params", eval_args.frozen_params,
                     "Reuse the corpus parameter estimates on synthetic "
                     "corpora");
  evaluate->add_option("--seed", eval_args.opts.seed, "Sampling seed");
  evaluate->add_option("--workers", eval_args.opts.workers,
                       "Corpora evaluated in parallel");
  evaluate->add_flag("--strict-sanction", eval_args.opts.strict_sanction,
                     "Sanction must immediately follow the violation");
  evaluate->add_option("--max-sample-length", eval_args.opts.max_sample_length,
                       "Length cap for sampled sequences");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand(
      "synth", "Sample a synthetic corpus from a trained model bank");
  synth->add_option("--bank", synth_args.bank, "Model bank file")->required();
  synth->add_option("--out", synth_args.out, "Corpus output file")->required();
  synth->add_option("--size", synth_args.size, "Number of sequences");
  synth->add_option("--seed", synth_args.seed, "Sampling seed");
  synth->add_option("--max-length", synth_args.max_length,
                    "Length cap for sampled sequences (0: default)");
  synth->add_option("--norm", synth_args.norm,
                    "Plant this norm into the sample");
  synth->add_option("--p-comp", synth_args.p_comp,
                    "Planted compliance probability");
  synth->add_option("--p-sanc", synth_args.p_sanc,
                    "Planted sanction probability");
  synth->add_flag("--no-meta", synth_args.no_meta,
                  "Skip the provenance sidecar file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*ingest) return run_ingest(ingest_args);
  if (*train) return run_train(train_args);
  if (*mine) return run_mine(mine_args);
  if (*evaluate) return run_evaluate(eval_args);
  if (*synth) return run_synth(synth_args);
  return 2;
}
