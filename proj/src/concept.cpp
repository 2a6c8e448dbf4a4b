#include "relchain/concept.hpp"

#include "relchain/errors.hpp"

namespace relchain {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string normalize_token(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_gap = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_gap = !out.empty();
      continue;
    }
    if (pending_gap) {
      out.push_back('_');
      pending_gap = false;
    }
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

Concept::Concept(std::string_view raw) : surface_(normalize_token(raw)) {
  if (surface_.empty()) throw Error("empty concept after normalization");
}

}  // namespace relchain
