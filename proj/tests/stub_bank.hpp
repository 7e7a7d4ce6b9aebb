#ifndef NORMINE_TESTS_STUB_BANK_HPP
#define NORMINE_TESTS_STUB_BANK_HPP

// Context-free bank for hand-checkable likelihoods: every distribution is
// uniform 1/5 over {F01, B01, F02, B02, END} regardless of context or
// inclusion set.

#include <array>

#include "normine/seqmodel.hpp"
#include "normine/symbols.hpp"

namespace normine::testing {

class StubBank final : public ScoringBank {
 public:
  static std::array<double, Symbol::alphabet_size> uniform5() {
    std::array<double, Symbol::alphabet_size> out{};
    const int ids[5] = {Symbol::directed(Direction::forward, 1).id(),
                        Symbol::directed(Direction::backward, 1).id(),
                        Symbol::directed(Direction::forward, 2).id(),
                        Symbol::directed(Direction::backward, 2).id(),
                        Symbol::end().id()};
    for (int id : ids) out[id] = 0.2;
    return out;
  }

  std::array<double, Symbol::alphabet_size> base_dist(
      std::span<const Symbol>) const override {
    return uniform5();
  }
  std::array<double, Symbol::alphabet_size> incl_dist(
      int, std::span<const Symbol>) const override {
    return uniform5();
  }
};

}  // namespace normine::testing

#endif
