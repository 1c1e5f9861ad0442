#ifndef SDGEN_ATTRIBUTE_VALUE_H_
#define SDGEN_ATTRIBUTE_VALUE_H_

#include <cstdint>
#include <set>
#include <string>
#include <variant>

namespace sdgen {

enum class ValueDomain { kBitSet, kIntCounter, kSymbolSet, kToken };

enum class ValueState { kUnset, kPendingLazy, kSet };

/// Fixed-width bit vector (width = cap C_a, at most 32).
struct BitSet {
  uint32_t bits = 0;
  int width = 0;

  bool test(int i) const { return (bits >> i) & 1u; }
  int count() const;
  bool operator==(const BitSet&) const = default;
};

using SymbolSet = std::set<std::string>;

/// One attribute slot: a tagged value plus its evaluation state.
struct AttributeValue {
  ValueState state = ValueState::kUnset;
  std::variant<std::monostate, BitSet, int64_t, SymbolSet, std::string> value;

  static AttributeValue bits(BitSet b, ValueState s = ValueState::kSet) { return {s, b}; }
  static AttributeValue counter(int64_t v) { return {ValueState::kSet, v}; }
  static AttributeValue symbols(SymbolSet v) { return {ValueState::kSet, std::move(v)}; }
  static AttributeValue token(std::string v) { return {ValueState::kSet, std::move(v)}; }

  bool is_set() const { return state == ValueState::kSet; }
  bool is_pending() const { return state == ValueState::kPendingLazy; }

  const BitSet& as_bits() const { return std::get<BitSet>(value); }
  int64_t as_counter() const { return std::get<int64_t>(value); }
  const SymbolSet& as_symbols() const { return std::get<SymbolSet>(value); }
  const std::string& as_token() const { return std::get<std::string>(value); }

  /// Compact human-readable rendering, e.g. `{-1}`, `0b01`, `3`, `'v2'`.
  std::string to_string() const;

  bool operator==(const AttributeValue&) const = default;
};

}  // namespace sdgen

#endif  // SDGEN_ATTRIBUTE_VALUE_H_
