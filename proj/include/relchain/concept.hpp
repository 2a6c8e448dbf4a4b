#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace relchain {

/// Lowercases ASCII letters, trims surrounding whitespace and replaces every
/// internal whitespace run by a single underscore. Idempotent.
std::string normalize_token(std::string_view raw);

/// A normalized, non-empty token without whitespace.
class Concept {
 public:
  Concept() = default;

  /// Normalizes `raw`; throws relchain::Error if the result is empty.
  explicit Concept(std::string_view raw);

  const std::string& str() const noexcept { return surface_; }
  bool empty() const noexcept { return surface_.empty(); }

  friend auto operator<=>(const Concept&, const Concept&) = default;
  friend bool operator==(const Concept&, const Concept&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Concept& c) { return os << c.surface_; }

 private:
  std::string surface_;
};

/// Ordered pair; (a, b) and (b, a) are distinct keys.
struct ConceptPair {
  Concept first;
  Concept second;

  friend auto operator<=>(const ConceptPair&, const ConceptPair&) = default;
  friend bool operator==(const ConceptPair&, const ConceptPair&) = default;
};

}  // namespace relchain

template <>
struct std::hash<relchain::Concept> {
  std::size_t operator()(const relchain::Concept& c) const noexcept {
    return std::hash<std::string>{}(c.str());
  }
};

template <>
struct std::hash<relchain::ConceptPair> {
  std::size_t operator()(const relchain::ConceptPair& p) const noexcept {
    std::size_t h = std::hash<std::string>{}(p.first.str());
    return h ^ (std::hash<std::string>{}(p.second.str()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};
