#ifndef NORMINE_TESTS_ORACLE_PYP_HPP
#define NORMINE_TESTS_ORACLE_PYP_HPP

// Dictionary-based reference for the smoothed context model, written
// against the same counting rules but with none of the trie machinery, so
// the two implementations can check each other.

#include <algorithm>
#include <map>
#include <vector>

#include "normine/seqmodel.hpp"
#include "normine/sequence.hpp"
#include "normine/symbols.hpp"

namespace normine::testing {

class OraclePyp {
 public:
  explicit OraclePyp(PyParams params = {}) : params_(params) {}

  // context key: oldest symbol first, newest last (matches prediction use)
  void add_sequence(const std::vector<Symbol>& seq_events, bool with_end = true) {
    std::vector<Symbol> syms = seq_events;
    if (with_end) syms.push_back(Symbol::end());
    for (std::size_t i = 0; i < syms.size(); ++i) {
      const std::size_t depth =
          std::min(i, static_cast<std::size_t>(params_.max_depth));
      std::vector<int> ctx;
      for (std::size_t k = i - depth; k < i; ++k) ctx.push_back(syms[k].id());
      counts_[ctx][syms[i].id()] += 1;
    }
  }

  // dual-copy convenience mirroring training
  void add_dual(const std::vector<Symbol>& seq_events) {
    add_sequence(seq_events);
    std::vector<Symbol> flipped;
    for (Symbol s : seq_events) flipped.push_back(s.reversed());
    add_sequence(flipped);
  }

  // one table per seen symbol propagates to the context's suffix; levels
  // run deepest first and re-scan the map, so contexts that exist only
  // through received propagation forward their symbols too
  void finalize() {
    std::size_t max_len = 0;
    for (const auto& [ctx, _] : counts_) max_len = std::max(max_len, ctx.size());
    for (std::size_t len = max_len; len >= 1; --len) {
      std::vector<std::vector<int>> keys;
      for (const auto& [ctx, _] : counts_)
        if (ctx.size() == len) keys.push_back(ctx);
      for (const auto& key : keys) {
        const std::vector<int> parent(key.begin() + 1, key.end());
        for (const auto& [sym, c] : counts_[key]) {
          (void)c;
          counts_[parent][sym] += 1;
        }
      }
    }
  }

  double predict(const std::vector<Symbol>& context, Symbol s) const {
    const std::size_t depth =
        std::min(context.size(), static_cast<std::size_t>(params_.max_depth));
    std::vector<int> full;
    for (std::size_t k = context.size() - depth; k < context.size(); ++k)
      full.push_back(context[k].id());

    double p = 1.0 / Symbol::alphabet_size;
    for (std::size_t len = 0; len <= full.size(); ++len) {
      const std::vector<int> key(full.end() - len, full.end());
      const auto it = counts_.find(key);
      if (it == counts_.end()) break;  // no deeper contexts exist either
      double total = 0.0, distinct = 0.0, c = 0.0;
      for (const auto& [sym, n] : it->second) {
        total += n;
        distinct += 1.0;
        if (sym == s.id()) c = n;
      }
      const double d = params_.discount, theta = params_.strength;
      const double denom = total + theta;
      p = (c > 0.0 ? (c - d) / denom : 0.0) + (theta + d * distinct) / denom * p;
    }
    return p;
  }

 private:
  PyParams params_;
  std::map<std::vector<int>, std::map<int, int>> counts_;
};

}  // namespace normine::testing

#endif
