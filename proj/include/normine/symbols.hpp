#ifndef NORMINE_SYMBOLS_HPP
#define NORMINE_SYMBOLS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace normine {

// Direction of a bilateral event relative to the sequence's reference
// orientation: forward = same ordered country pair as the first event,
// backward = the reverse pair.
enum class Direction : std::uint8_t { forward = 0, backward = 1 };

inline Direction opposite(Direction d) {
  return d == Direction::forward ? Direction::backward : Direction::forward;
}

// One token of the event alphabet: 20 root event classes in each of two
// directions, plus the terminator.  Ids are dense: F01..F20 -> 0..19,
// B01..B20 -> 20..39, END -> 40.
class Symbol {
 public:
  static constexpr int num_codes = 20;
  static constexpr int alphabet_size = 2 * num_codes + 1;
  static constexpr int end_id = alphabet_size - 1;

  constexpr Symbol() : id_(end_id) {}

  static constexpr Symbol directed(Direction d, int code) {
    return Symbol(static_cast<std::uint8_t>(
        static_cast<int>(d) * num_codes + (code - 1)));
  }
  static constexpr Symbol end() { return Symbol(static_cast<std::uint8_t>(end_id)); }
  static constexpr Symbol from_id(int id) {
    return Symbol(static_cast<std::uint8_t>(id));
  }

  constexpr std::uint8_t id() const { return id_; }
  constexpr bool is_end() const { return id_ == end_id; }
  constexpr Direction direction() const {
    return id_ < num_codes ? Direction::forward : Direction::backward;
  }
  constexpr int code() const { return id_ % num_codes + 1; }

  // Swaps forward and backward; END maps to itself.
  constexpr Symbol reversed() const {
    if (is_end()) return *this;
    return directed(opposite(direction()), code());
  }

  std::string str() const;
  static std::optional<Symbol> parse(std::string_view token);

  friend constexpr bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend constexpr bool operator!=(Symbol a, Symbol b) { return a.id_ != b.id_; }

 private:
  constexpr explicit Symbol(std::uint8_t id) : id_(id) {}
  std::uint8_t id_;
};

// Codes treated as sanctioning responses: disapproval, rejection, and
// reduction of relations.
inline constexpr std::array<int, 3> sanction_codes = {11, 12, 16};

inline constexpr bool is_sanction_code(int code) {
  return code == 11 || code == 12 || code == 16;
}

// Non-empty subset of {forward, backward}; bit 0 = forward, bit 1 = backward.
enum class DirSet : std::uint8_t { none = 0, fwd = 1, bwd = 2, both = 3 };

inline constexpr DirSet dirset_of(Direction d) {
  return d == Direction::forward ? DirSet::fwd : DirSet::bwd;
}
inline constexpr bool contains(DirSet s, Direction d) {
  return (static_cast<std::uint8_t>(s) >> static_cast<int>(d)) & 1u;
}
inline constexpr int dirset_size(DirSet s) {
  return (static_cast<std::uint8_t>(s) & 1u) + ((static_cast<std::uint8_t>(s) >> 1) & 1u);
}

std::string dirset_str(DirSet s);

}  // namespace normine

#endif
