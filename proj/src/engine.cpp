#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "normine/errors.hpp"
#include "normine/norms.hpp"
#include "normine/parallel.hpp"

namespace normine {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

double logsumexp3(double a, double b, double c) {
  const double m = std::max(a, std::max(b, c));
  if (m == kLogZero) return kLogZero;
  double sum = 0.0;
  if (a != kLogZero) sum += std::exp(a - m);
  if (b != kLogZero) sum += std::exp(b - m);
  if (c != kLogZero) sum += std::exp(c - m);
  return m + std::log(sum);
}

using Dist = std::array<double, Symbol::alphabet_size>;

// Per-sequence prediction tables.  Position p scores the symbol at p given
// the first p events as context; position n_events scores the terminator.
// Tables materialize lazily until freeze(), after which lookups are pure
// reads and safe to share across scoring threads.
class SeqPredictions {
 public:
  SeqPredictions(const ScoringBank& bank, const EventSequence& seq)
      : bank_(bank), seq_(seq) {
    const auto& ev = seq.events;
    flipped_.resize(ev.size());
    last_pos_.fill(npos);
    first_code_.fill(npos);
    for (std::size_t i = 0; i < ev.size(); ++i) {
      flipped_[i] = ev[i].reversed();
      last_pos_[ev[i].id()] = i;
      auto& f = first_code_[ev[i].code() - 1];
      if (f == npos) f = i;
    }
  }

  std::size_t n_events() const { return seq_.events.size(); }
  Symbol symbol_at(std::size_t pos) const {
    return pos < seq_.events.size() ? seq_.events[pos] : Symbol::end();
  }

  std::size_t first_code_pos(int code) const { return first_code_[code - 1]; }

  bool present_in(DirSet doi, int code, std::size_t from) const {
    for (Direction d : {Direction::forward, Direction::backward}) {
      if (!contains(doi, d)) continue;
      const std::size_t last = last_pos_[Symbol::directed(d, code).id()];
      if (last != npos && last >= from) return true;
    }
    return false;
  }

  bool sanction_in(DirSet doi, std::size_t from) const {
    for (int code : sanction_codes)
      if (present_in(doi, code, from)) return true;
    return false;
  }

  bool any_occurrence(int code) const { return first_code_[code - 1] != npos; }

  const Dist& base_vec(std::size_t pos) const {
    materialize_base();
    return base_[pos];
  }
  double base_at(std::size_t pos, Symbol s) const { return base_vec(pos)[s.id()]; }

  double incl_at(int set_id, bool rev, std::size_t pos, Symbol s) const {
    materialize_incl(set_id, rev);
    const Dist& d = incl_[set_id][rev ? 1 : 0][pos];
    return d[rev ? s.reversed().id() : s.id()];
  }

  double base_loglik() const {
    materialize_base();
    return base_loglik_;
  }

  // Eager preparation for mining: everything a triggered hypothesis can
  // touch on this sequence, so frozen lookups never race.
  void prepare_for_mining() {
    materialize_base();
    for (int code = 1; code <= Symbol::num_codes; ++code) {
      if (!any_occurrence(code)) continue;
      materialize_incl(ScoringBank::set_for_code(code), false);
      materialize_incl(ScoringBank::set_for_code(code), true);
    }
    if (sanction_in(DirSet::both, 0)) {
      materialize_incl(ScoringBank::sanction_set_id, false);
      materialize_incl(ScoringBank::sanction_set_id, true);
    }
    frozen_ = true;
  }

 private:
  void materialize_base() const {
    if (!base_.empty()) return;
    require_invariant(!frozen_, "prediction table missing after freeze");
    const std::size_t n = n_events();
    base_.resize(n + 1);
    std::span<const Symbol> ev(seq_.events);
    for (std::size_t pos = 0; pos <= n; ++pos)
      base_[pos] = bank_.base_dist(ev.first(pos));
    double ll = 0.0;
    for (std::size_t pos = 0; pos <= n; ++pos)
      ll += std::log(base_[pos][symbol_at(pos).id()]);
    base_loglik_ = ll;
  }

  void materialize_incl(int set_id, bool rev) const {
    auto& table = incl_[set_id][rev ? 1 : 0];
    if (!table.empty()) return;
    require_invariant(!frozen_, "prediction table missing after freeze");
    const std::size_t n = n_events();
    table.resize(n + 1);
    std::span<const Symbol> ctx(rev ? flipped_ : seq_.events);
    for (std::size_t pos = 0; pos <= n; ++pos)
      table[pos] = bank_.incl_dist(set_id, ctx.first(pos));
  }

  const ScoringBank& bank_;
  const EventSequence& seq_;
  std::vector<Symbol> flipped_;
  std::array<std::size_t, Symbol::alphabet_size> last_pos_;
  std::array<std::size_t, Symbol::num_codes> first_code_;
  mutable std::vector<Dist> base_;
  mutable std::array<std::array<std::vector<Dist>, 2>, ScoringBank::num_incl_sets>
      incl_;
  mutable double base_loglik_ = 0.0;
  bool frozen_ = false;
};

double excl_prob_at(const SeqPredictions& sp, DirSet doi,
                    std::span<const int> codes, std::size_t pos, Symbol s) {
  const Dist& v = sp.base_vec(pos);
  double excluded = 0.0;
  bool s_excluded = false;
  for (Direction d : {Direction::forward, Direction::backward}) {
    if (!contains(doi, d)) continue;
    for (int code : codes) {
      const Symbol ex = Symbol::directed(d, code);
      excluded += v[ex.id()];
      if (ex == s) s_excluded = true;
    }
  }
  if (s_excluded) return 0.0;
  require_invariant(excluded < 1.0, "excluded symbols carry the whole mass");
  return v[s.id()] / (1.0 - excluded);
}

bool is_doi_sanction(DirSet doi, Symbol s) {
  return !s.is_end() && contains(doi, s.direction()) && is_sanction_code(s.code());
}

// Log-probability of the remainder from `act` on under one resolved branch.
// The walk keeps the per-position requirement of the live assumption as a
// lookahead gate; a gate failure means the branch is inconsistent with the
// sequence and contributes zero mass.
double branch_loglik(const NormHypothesis& norm, DirSet doi, Assumption assumption,
                     const SeqPredictions& sp, std::size_t act,
                     const ScoringOptions& opts) {
  const int ec = norm.event_code;
  const int ec_set = ScoringBank::set_for_code(ec);
  const bool rev = doi == DirSet::bwd;

  NormStateMachine m;
  m.norm = norm;
  m.doi = doi;
  m.assumption = assumption;
  if (assumption == Assumption::comp) {
    m.state = NormState::active;
  } else if (norm.modality == Modality::obligation) {
    // violated at activation; inconsistent if the obliged event still occurs
    if (sp.present_in(doi, ec, act)) return kLogZero;
    m.state = NormState::viol_no_sanc;
  } else {
    m.state = NormState::active;
  }

  double ll = 0.0;
  const std::size_t n = sp.n_events();
  for (std::size_t pos = act; pos <= n; ++pos) {
    const Symbol s = sp.symbol_at(pos);
    switch (m.state) {
      case NormState::active:
        if (norm.modality == Modality::obligation) {
          // comp: the obliged event must still be ahead
          if (!sp.present_in(doi, ec, pos)) return kLogZero;
          ll += std::log(sp.incl_at(ec_set, rev, pos, s));
        } else if (m.assumption == Assumption::comp) {
          if (sp.present_in(doi, ec, pos)) return kLogZero;
          ll += std::log(excl_prob_at(sp, doi, ScoringBank::set_codes(ec_set), pos, s));
        } else {
          // no-comply prohibition: the forbidden event must still be ahead
          if (!sp.present_in(doi, ec, pos)) return kLogZero;
          ll += std::log(sp.incl_at(ec_set, rev, pos, s));
        }
        break;

      case NormState::viol_no_sanc:
        if (m.assumption == Assumption::nocomp_sanc) {
          if (opts.strict_sanction) {
            if (!is_doi_sanction(doi, s)) return kLogZero;
          } else if (!sp.sanction_in(doi, pos)) {
            return kLogZero;
          }
          ll += std::log(
              sp.incl_at(ScoringBank::sanction_set_id, rev, pos, s));
        } else {
          if (is_doi_sanction(doi, s)) return kLogZero;
          ll += std::log(excl_prob_at(
              sp, doi, ScoringBank::set_codes(ScoringBank::sanction_set_id), pos, s));
        }
        break;

      default:  // fulfilled, viol_sanc
        ll += std::log(sp.base_at(pos, s));
        break;
    }
    m = nsm_receive(m, s);
  }
  return ll;
}

BranchScores score_norm(const NormHypothesis& norm, const NormParams& params,
                        const SeqPredictions& sp, const ScoringOptions& opts) {
  BranchScores out;
  std::size_t act = 0;
  DirSet doi = DirSet::both;
  if (norm.conditional()) {
    const std::size_t t = sp.first_code_pos(norm.condition_code);
    if (t == npos) {
      out.triggered = false;
      out.total = sp.base_loglik();
      return out;
    }
    const Direction td = sp.symbol_at(t).direction();
    doi = dirset_of(norm.rel_dir == RelDir::same ? td : opposite(td));
    act = t + 1;
  }
  out.triggered = true;
  out.activation_index = act;
  out.doi = doi;

  double prefix = 0.0;
  for (std::size_t pos = 0; pos < act; ++pos)
    prefix += std::log(sp.base_at(pos, sp.symbol_at(pos)));
  out.prefix_loglik = prefix;

  const double pc = std::pow(params.p_comp, dirset_size(doi));
  out.w_comp = pc;
  out.w_sanc = (1.0 - pc) * params.p_sanc;
  out.w_nosanc = (1.0 - pc) * (1.0 - params.p_sanc);

  out.comp = branch_loglik(norm, doi, Assumption::comp, sp, act, opts);
  out.sanc = branch_loglik(norm, doi, Assumption::nocomp_sanc, sp, act, opts);
  out.nosanc = branch_loglik(norm, doi, Assumption::nocomp_nosanc, sp, act, opts);

  out.total = prefix + logsumexp3(std::log(out.w_comp) + out.comp,
                                  std::log(out.w_sanc) + out.sanc,
                                  std::log(out.w_nosanc) + out.nosanc);
  return out;
}

}  // namespace

double seq_loglik_base(const ScoringBank& bank, const EventSequence& seq) {
  SeqPredictions sp(bank, seq);
  return sp.base_loglik();
}

double seq_loglik_norm(const NormHypothesis& norm, const NormParams& params,
                       const EventSequence& seq, const ScoringBank& bank,
                       const ScoringOptions& opts) {
  SeqPredictions sp(bank, seq);
  return score_norm(norm, params, sp, opts).total;
}

BranchScores seq_loglik_norm_detail(const NormHypothesis& norm,
                                    const NormParams& params,
                                    const EventSequence& seq,
                                    const ScoringBank& bank,
                                    const ScoringOptions& opts) {
  SeqPredictions sp(bank, seq);
  return score_norm(norm, params, sp, opts);
}

double seq_loglik_advantage(const NormHypothesis& norm, const NormParams& params,
                            const EventSequence& seq, const ScoringBank& bank,
                            const ScoringOptions& opts) {
  SeqPredictions sp(bank, seq);
  const BranchScores bs = score_norm(norm, params, sp, opts);
  return bs.triggered ? bs.total - sp.base_loglik() : 0.0;
}

std::array<double, Symbol::alphabet_size> step_distribution(
    const ScoringBank& bank, const NormStateMachine& m,
    std::span<const Symbol> context) {
  switch (m.state) {
    case NormState::inactive:
    case NormState::fulfilled:
    case NormState::viol_sanc:
      return bank.base_dist(context);

    case NormState::active:
    case NormState::viol_no_sanc: {
      const bool sanction_phase = m.state == NormState::viol_no_sanc;
      require_invariant(!sanction_phase || m.assumption != Assumption::comp,
                        "no step distribution for a complied violation");
      const int set = sanction_phase
                          ? ScoringBank::sanction_set_id
                          : ScoringBank::set_for_code(m.norm.event_code);
      bool inclusive;
      if (sanction_phase) {
        inclusive = m.assumption == Assumption::nocomp_sanc;
      } else if (m.norm.modality == Modality::obligation) {
        inclusive = m.assumption == Assumption::comp;
      } else {
        inclusive = m.assumption != Assumption::comp;
      }
      if (inclusive) {
        std::array<double, Symbol::alphabet_size> out;
        if (m.doi == DirSet::bwd) {
          std::vector<Symbol> flipped(context.size());
          for (std::size_t i = 0; i < context.size(); ++i)
            flipped[i] = context[i].reversed();
          const auto dist = bank.incl_dist(set, flipped);
          for (int id = 0; id < Symbol::alphabet_size; ++id)
            out[id] = dist[Symbol::from_id(id).reversed().id()];
        } else {
          out = bank.incl_dist(set, context);
        }
        return out;
      }
      auto out = bank.base_dist(context);
      double excluded = 0.0;
      for (Direction d : {Direction::forward, Direction::backward}) {
        if (!contains(m.doi, d)) continue;
        for (int code : ScoringBank::set_codes(set)) {
          auto& p = out[Symbol::directed(d, code).id()];
          excluded += p;
          p = 0.0;
        }
      }
      require_invariant(excluded < 1.0, "excluded symbols carry the whole mass");
      for (auto& p : out) p /= 1.0 - excluded;
      return out;
    }

    case NormState::activating:
      throw internal_error("no step distribution at the mixture point");
  }
  throw internal_error("unreachable norm state");
}

// ---------------------------------------------------------------------------
// mining

std::vector<NormScore> mine(const Corpus& corpus,
                            const std::vector<NormHypothesis>& hypotheses,
                            const ScoringBank& bank, const MineOptions& opts) {
  const std::size_t n_hyp = hypotheses.size();
  std::vector<NormScore> scores(n_hyp);

  // Pass 1: outcome counts and parameter estimates.
  parallel_ranges(n_hyp, opts.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t h = begin; h < end; ++h) {
      scores[h].norm = hypotheses[h];
      scores[h].counts = count_norm_stats(hypotheses[h], corpus);
      scores[h].params = estimate_params(scores[h].counts);
    }
  });

  // Pass 2: per-sequence likelihood advantage, accumulated in corpus order
  // for every hypothesis regardless of worker count.  Sequences are scored
  // in blocks: tables are built in parallel across the block, then workers
  // sweep disjoint hypothesis ranges over the block in order.
  std::vector<double> acc(n_hyp, 0.0);
  const std::size_t block = std::max<std::size_t>(1, opts.block_sequences);
  std::vector<std::unique_ptr<SeqPredictions>> sps(block);
  for (std::size_t base = 0; base < corpus.size(); base += block) {
    const std::size_t count = std::min(block, corpus.size() - base);
    parallel_ranges(count, opts.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        sps[i] = std::make_unique<SeqPredictions>(bank, corpus[base + i]);
        sps[i]->prepare_for_mining();
      }
    });
    parallel_ranges(n_hyp, opts.workers, [&](std::size_t hb, std::size_t he) {
      for (std::size_t h = hb; h < he; ++h) {
        const NormHypothesis& norm = hypotheses[h];
        for (std::size_t i = 0; i < count; ++i) {
          const SeqPredictions& sp = *sps[i];
          if (norm.conditional() && !sp.any_occurrence(norm.condition_code))
            continue;  // untriggered: advantage is exactly zero
          const BranchScores bs =
              score_norm(norm, scores[h].params, sp, opts.scoring);
          acc[h] += bs.total - sp.base_loglik();
        }
      }
    });
    for (std::size_t i = 0; i < count; ++i) sps[i].reset();
    if (opts.progress) opts.progress(base + count, corpus.size());
  }

  for (std::size_t h = 0; h < n_hyp; ++h)
    scores[h].log_odds = opts.prior_log_odds + acc[h];

  std::sort(scores.begin(), scores.end(), [](const NormScore& a, const NormScore& b) {
    if (a.log_odds != b.log_odds) return a.log_odds > b.log_odds;
    return a.norm.canonical_index() < b.norm.canonical_index();
  });
  return scores;
}

void write_mine_csv(const std::vector<NormScore>& scores,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "cannot open csv file for writing: " + path);
  out << "norm,log_odds,triggers,fulfilled,violations,unsanctioned,sanctioned,"
         "p_comp,p_sanc\n";
  char buf[64];
  for (const auto& s : scores) {
    out << s.norm.str() << ',';
    std::snprintf(buf, sizeof buf, "%.6f", s.log_odds);
    out << buf << ',' << s.counts.triggers << ',' << s.counts.fulfilments << ','
        << s.counts.violations << ',' << s.counts.unsanctioned() << ','
        << s.counts.sanctioned << ',';
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", s.params.p_comp, s.params.p_sanc);
    out << buf << '\n';
  }
  out.flush();
  require_input(out.good(), "write failed: " + path);
}

void write_mine_report(const std::vector<NormScore>& scores,
                       const Corpus& corpus, double prior_log_odds,
                       const std::string& path) {
  nlohmann::json results = nlohmann::json::array();
  std::size_t positive = 0;
  for (const auto& s : scores) {
    if (s.log_odds > 0.0) ++positive;
    results.push_back({{"norm", s.norm.str()},
                       {"log_odds", s.log_odds},
                       {"triggers", s.counts.triggers},
                       {"fulfilled", s.counts.fulfilments},
                       {"violations", s.counts.violations},
                       {"unsanctioned", s.counts.unsanctioned()},
                       {"sanctioned", s.counts.sanctioned},
                       {"p_comp", s.params.p_comp},
                       {"p_sanc", s.params.p_sanc}});
  }
  nlohmann::json doc = {{"sequences", corpus.size()},
                        {"hypotheses", scores.size()},
                        {"prior_log_odds", prior_log_odds},
                        {"positive_log_odds", positive},
                        {"results", std::move(results)}};
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "cannot open report file for writing: " + path);
  out << doc.dump(2) << '\n';
  out.flush();
  require_input(out.good(), "write failed: " + path);
}

}  // namespace normine
