#include "normine/norms.hpp"

#include <charconv>
#include <cstdio>

#include "normine/errors.hpp"

namespace normine {

// ---------------------------------------------------------------------------
// hypotheses

std::string NormHypothesis::str() const {
  char buf[24];
  const char mod = modality == Modality::obligation ? 'O' : 'P';
  if (!conditional()) {
    std::snprintf(buf, sizeof buf, "%c(%d)", mod, event_code);
  } else {
    std::snprintf(buf, sizeof buf, "%c(%d,%d,%c)", mod, condition_code,
                  event_code, rel_dir == RelDir::same ? '+' : '-');
  }
  return buf;
}

namespace {

bool parse_code(std::string_view text, std::size_t& i, int& out) {
  const char* begin = text.data() + i;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr == begin) return false;
  i += static_cast<std::size_t>(ptr - begin);
  return out >= 1 && out <= Symbol::num_codes;
}

}  // namespace

std::optional<NormHypothesis> NormHypothesis::parse(std::string_view text) {
  NormHypothesis n;
  std::size_t i = 0;
  if (text.empty()) return std::nullopt;
  if (text[0] == 'O') {
    n.modality = Modality::obligation;
  } else if (text[0] == 'P') {
    n.modality = Modality::prohibition;
  } else {
    return std::nullopt;
  }
  i = 1;
  if (i >= text.size() || text[i] != '(') return std::nullopt;
  ++i;
  int first = 0;
  if (!parse_code(text, i, first)) return std::nullopt;
  if (i < text.size() && text[i] == ',') {
    ++i;
    n.condition_code = first;
    if (!parse_code(text, i, n.event_code)) return std::nullopt;
    if (i >= text.size() || text[i] != ',') return std::nullopt;
    ++i;
    if (i >= text.size()) return std::nullopt;
    if (text[i] == '+') {
      n.rel_dir = RelDir::same;
    } else if (text[i] == '-') {
      n.rel_dir = RelDir::opposite;
    } else {
      return std::nullopt;
    }
    ++i;
  } else {
    n.condition_code = 0;
    n.event_code = first;
  }
  if (i >= text.size() || text[i] != ')') return std::nullopt;
  ++i;
  if (i != text.size()) return std::nullopt;
  return n;
}

int NormHypothesis::canonical_index() const {
  const int m = modality == Modality::obligation ? 0 : 1;
  if (!conditional()) return m * Symbol::num_codes + (event_code - 1);
  const int base = 2 * Symbol::num_codes;
  const int within = m * (Symbol::num_codes * Symbol::num_codes * 2) +
                     (condition_code - 1) * (Symbol::num_codes * 2) +
                     (event_code - 1) * 2 +
                     (rel_dir == RelDir::same ? 0 : 1);
  return base + within;
}

std::vector<NormHypothesis> enumerate_hypotheses() {
  std::vector<NormHypothesis> out;
  out.reserve(2 * Symbol::num_codes + 2 * Symbol::num_codes * Symbol::num_codes * 2);
  for (Modality m : {Modality::obligation, Modality::prohibition})
    for (int ec = 1; ec <= Symbol::num_codes; ++ec)
      out.push_back({m, 0, ec, RelDir::same});
  for (Modality m : {Modality::obligation, Modality::prohibition})
    for (int cc = 1; cc <= Symbol::num_codes; ++cc)
      for (int ec = 1; ec <= Symbol::num_codes; ++ec)
        for (RelDir rd : {RelDir::same, RelDir::opposite})
          out.push_back({m, cc, ec, rd});
  return out;
}

// ---------------------------------------------------------------------------
// state machine

NormStateMachine nsm_new(const NormHypothesis& norm) {
  NormStateMachine m;
  m.norm = norm;
  if (norm.conditional()) {
    m.state = NormState::inactive;
    m.doi = DirSet::none;
  } else {
    m.state = NormState::activating;
    m.doi = DirSet::both;
  }
  return m;
}

NormStateMachine nsm_receive(NormStateMachine m, Symbol s) {
  switch (m.state) {
    case NormState::inactive:
      if (!s.is_end() && s.code() == m.norm.condition_code) {
        m.state = NormState::activating;
        const Direction d = m.norm.rel_dir == RelDir::same
                                ? s.direction()
                                : opposite(s.direction());
        m.doi = dirset_of(d);
      }
      return m;

    case NormState::activating:
      // resolve() leaves this state before any symbol may be consumed
      throw internal_error("symbol received while activation is unresolved");

    case NormState::active: {
      if (s.is_end()) return m;
      const bool match =
          contains(m.doi, s.direction()) && s.code() == m.norm.event_code;
      if (!match) return m;
      if (m.norm.modality == Modality::obligation) {
        if (m.assumption == Assumption::comp) m.state = NormState::fulfilled;
      } else if (m.assumption != Assumption::comp) {
        m.state = NormState::viol_no_sanc;
      }
      return m;
    }

    case NormState::viol_no_sanc:
      if (m.assumption == Assumption::nocomp_sanc && !s.is_end() &&
          contains(m.doi, s.direction()) && is_sanction_code(s.code())) {
        m.state = NormState::viol_sanc;
      }
      return m;

    case NormState::fulfilled:
    case NormState::viol_sanc:
      return m;
  }
  throw internal_error("unreachable norm state");
}

NormStateMachine nsm_resolve(NormStateMachine m, Assumption a) {
  require_invariant(m.state == NormState::activating,
                    "resolve on a machine that is not activating");
  require_invariant(a != Assumption::unresolved, "resolve without a branch");
  m.assumption = a;
  if (a == Assumption::comp) {
    m.state = NormState::active;
  } else if (m.norm.modality == Modality::obligation) {
    // a missed obligation is violated outright, there is no deadline
    m.state = NormState::viol_no_sanc;
  } else {
    m.state = NormState::active;
  }
  return m;
}

// ---------------------------------------------------------------------------
// counting

NormCounts count_norm_stats(const NormHypothesis& norm, const Corpus& corpus) {
  NormCounts counts;
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  for (const auto& seq : corpus) {
    const auto& ev = seq.events;
    std::size_t start = 0;
    DirSet doi = DirSet::both;
    if (norm.conditional()) {
      std::size_t t = npos;
      for (std::size_t i = 0; i < ev.size(); ++i) {
        if (ev[i].code() == norm.condition_code) {
          t = i;
          break;
        }
      }
      if (t == npos) continue;
      const Direction d = norm.rel_dir == RelDir::same
                              ? ev[t].direction()
                              : opposite(ev[t].direction());
      doi = dirset_of(d);
      start = t + 1;
    }
    ++counts.triggers;

    std::size_t match = npos;
    for (std::size_t i = start; i < ev.size(); ++i) {
      if (contains(doi, ev[i].direction()) && ev[i].code() == norm.event_code) {
        match = i;
        break;
      }
    }

    const bool fulfilled =
        norm.modality == Modality::obligation ? match != npos : match == npos;
    if (fulfilled) {
      ++counts.fulfilments;
      continue;
    }
    ++counts.violations;
    // obligations are violated at activation, prohibitions at the first
    // forbidden event; a sanction counts only after that point
    const std::size_t sanction_from =
        norm.modality == Modality::obligation ? start : match + 1;
    for (std::size_t i = sanction_from; i < ev.size(); ++i) {
      if (contains(doi, ev[i].direction()) && is_sanction_code(ev[i].code())) {
        ++counts.sanctioned;
        break;
      }
    }
  }
  require_invariant(counts.fulfilments + counts.violations == counts.triggers,
                    "trigger accounting mismatch");
  require_invariant(counts.sanctioned <= counts.violations,
                    "sanction accounting mismatch");
  return counts;
}

NormParams estimate_params(const NormCounts& c) {
  NormParams p;
  const double t = static_cast<double>(c.triggers);
  const double v = static_cast<double>(c.violations);
  const double s = static_cast<double>(c.sanctioned);
  p.p_comp = (t - v + 1.0) / (t + 2.0);
  p.p_sanc = (s + 1.0) / (v + 2.0);
  return p;
}

}  // namespace normine
