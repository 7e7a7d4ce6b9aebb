#include "normine/symbols.hpp"

#include <cstdio>

namespace normine {

std::string Symbol::str() const {
  if (is_end()) return "END";
  char buf[4];
  std::snprintf(buf, sizeof buf, "%c%02d",
                direction() == Direction::forward ? 'F' : 'B', code());
  return buf;
}

std::optional<Symbol> Symbol::parse(std::string_view token) {
  if (token == "END") return Symbol::end();
  if (token.size() != 3) return std::nullopt;
  Direction d;
  if (token[0] == 'F') {
    d = Direction::forward;
  } else if (token[0] == 'B') {
    d = Direction::backward;
  } else {
    return std::nullopt;
  }
  if (token[1] < '0' || token[1] > '9' || token[2] < '0' || token[2] > '9')
    return std::nullopt;
  int code = (token[1] - '0') * 10 + (token[2] - '0');
  if (code < 1 || code > num_codes) return std::nullopt;
  return Symbol::directed(d, code);
}

std::string dirset_str(DirSet s) {
  switch (s) {
    case DirSet::fwd: return "{F}";
    case DirSet::bwd: return "{B}";
    case DirSet::both: return "{F,B}";
    default: return "{}";
  }
}

}  // namespace normine
