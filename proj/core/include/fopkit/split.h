#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fopkit/store.h"

namespace fopkit {

enum class SplitKind {
  kSeenHeard,      // same identities, disjoint instances
  kUnseenUnheard,  // disjoint identities
};

std::string to_string(SplitKind kind);
SplitKind parse_split_kind(const std::string& text);

struct SplitFractions {
  double train = 0.6;
  double val = 0.1;
  double test = 0.3;
};

struct SplitSpec {
  SplitKind kind = SplitKind::kUnseenUnheard;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// Seeded split of paired stores. Validation is carved out of the non-test
/// pool (whole identities for unseen_unheard, instances for seen_heard).
SplitSpec make_split(const EmbeddingStore& face, const EmbeddingStore& voice, SplitKind kind,
                     const SplitFractions& fractions, std::uint64_t seed);

/// Throws DataError if the kind's disjointness invariant does not hold.
void validate_split(const SplitSpec& split, const EmbeddingStore& store);

/// Row indices of `ids` in `store`.
std::vector<std::size_t> rows_of(const EmbeddingStore& store, const std::vector<std::string>& ids);

// Text format: "kind=<kind>" then one "<train|val|test>,<id>" per line.
std::string encode_split(const SplitSpec& split);
SplitSpec decode_split(std::string_view text, const std::string& source = "<memory>");

}  // namespace fopkit
