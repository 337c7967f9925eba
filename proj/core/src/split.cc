#include "fopkit/split.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fopkit/errors.h"
#include "fopkit/rng.h"
#include "fopkit/text.h"

namespace fopkit {

std::string to_string(SplitKind kind) {
  return kind == SplitKind::kSeenHeard ? "seen_heard" : "unseen_unheard";
}

SplitKind parse_split_kind(const std::string& text) {
  if (text == "seen_heard") return SplitKind::kSeenHeard;
  if (text == "unseen_unheard") return SplitKind::kUnseenUnheard;
  throw ConfigError("unknown split kind '" + text + "' (expected seen_heard or unseen_unheard)");
}

namespace {

std::size_t share(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

void validate_fractions(const SplitFractions& f) {
  if (f.train <= 0 || f.val < 0 || f.test <= 0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be positive (val may be 0) and sum to 1");
  }
}

// Sort ids by their record order so that output does not depend on the
// shuffle beyond set membership.
void sort_by_store(std::vector<std::string>& ids, const EmbeddingStore& store) {
  std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
    return store.index_of(a) < store.index_of(b);
  });
}

}  // namespace

SplitSpec make_split(const EmbeddingStore& face, const EmbeddingStore& voice, SplitKind kind,
                     const SplitFractions& fractions, std::uint64_t seed) {
  check_paired(face, voice);
  validate_fractions(fractions);
  Rng rng(seed);
  std::map<std::int32_t, std::vector<std::string>> by_identity;
  for (const Record& r : face.records()) by_identity[r.label].push_back(r.id);

  SplitSpec split;
  split.kind = kind;
  if (kind == SplitKind::kUnseenUnheard) {
    if (by_identity.size() < 3) {
      throw DataError("unseen_unheard split needs >= 3 identities, store has " +
                      std::to_string(by_identity.size()));
    }
    std::vector<std::int32_t> ids;
    for (const auto& [y, _] : by_identity) ids.push_back(y);
    seeded_shuffle(ids, rng);
    const std::size_t c = ids.size();
    std::size_t n_test = std::max<std::size_t>(1, share(fractions.test, c));
    std::size_t n_val = fractions.val > 0 ? std::max<std::size_t>(1, share(fractions.val, c)) : 0;
    if (n_test + n_val >= c) {
      throw DataError("split fractions leave no training identities");
    }
    for (std::size_t i = 0; i < c; ++i) {
      auto& dest = i < n_test ? split.test : (i < n_test + n_val ? split.val : split.train);
      const auto& members = by_identity[ids[i]];
      dest.insert(dest.end(), members.begin(), members.end());
    }
  } else {
    for (auto& [y, members] : by_identity) {
      const std::size_t n = members.size();
      if (n < 2) {
        throw DataError("seen_heard split needs >= 2 instances per identity; identity " +
                        std::to_string(y) + " has " + std::to_string(n));
      }
      std::vector<std::string> shuffled = members;
      seeded_shuffle(shuffled, rng);
      const std::size_t n_test = std::clamp<std::size_t>(share(fractions.test, n), 1, n - 1);
      const std::size_t n_val = std::min(share(fractions.val, n), n - n_test - 1);
      for (std::size_t i = 0; i < n; ++i) {
        auto& dest = i < n_test ? split.test : (i < n_test + n_val ? split.val : split.train);
        dest.push_back(shuffled[i]);
      }
    }
  }
  sort_by_store(split.train, face);
  sort_by_store(split.val, face);
  sort_by_store(split.test, face);
  validate_split(split, face);
  return split;
}

void validate_split(const SplitSpec& split, const EmbeddingStore& store) {
  std::set<std::string> seen;
  std::set<std::int32_t> train_ids, val_ids, test_ids;
  auto collect = [&](const std::vector<std::string>& ids, std::set<std::int32_t>& labels) {
    for (const auto& id : ids) {
      if (!seen.insert(id).second) throw DataError("instance '" + id + "' appears in two partitions");
      labels.insert(store.at(store.index_of(id)).label);
    }
  };
  collect(split.train, train_ids);
  collect(split.val, val_ids);
  collect(split.test, test_ids);
  if (split.train.empty() || split.test.empty()) throw DataError("split has an empty train or test set");
  auto disjoint = [](const std::set<std::int32_t>& a, const std::set<std::int32_t>& b) {
    return std::none_of(a.begin(), a.end(), [&](std::int32_t y) { return b.count(y) != 0; });
  };
  if (split.kind == SplitKind::kUnseenUnheard) {
    if (!disjoint(train_ids, test_ids) || !disjoint(val_ids, test_ids) ||
        !disjoint(train_ids, val_ids)) {
      throw DataError("unseen_unheard split shares identities between partitions");
    }
  } else if (train_ids != test_ids) {
    throw DataError("seen_heard split has different train and test identity sets");
  }
}

std::vector<std::size_t> rows_of(const EmbeddingStore& store, const std::vector<std::string>& ids) {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) rows.push_back(store.index_of(id));
  return rows;
}

std::string encode_split(const SplitSpec& split) {
  std::string out = "kind=" + to_string(split.kind) + "\n";
  for (const auto& id : split.train) out += "train," + id + "\n";
  for (const auto& id : split.val) out += "val," + id + "\n";
  for (const auto& id : split.test) out += "test," + id + "\n";
  return out;
}

SplitSpec decode_split(std::string_view content, const std::string& source) {
  const auto rows = text::lines(content);
  if (rows.empty() || !rows[0].starts_with("kind=")) {
    throw DataError(source + ": split file must start with kind=");
  }
  SplitSpec split;
  split.kind = parse_split_kind(std::string(text::trim(rows[0].substr(5))));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (text::trim(rows[i]).empty()) continue;
    const auto cells = text::split(rows[i], ',');
    if (cells.size() != 2) {
      throw DataError(source + " line " + std::to_string(i + 1) + ": expected <partition>,<id>");
    }
    const std::string id(text::trim(cells[1]));
    if (cells[0] == "train") split.train.push_back(id);
    else if (cells[0] == "val") split.val.push_back(id);
    else if (cells[0] == "test") split.test.push_back(id);
    else throw DataError(source + " line " + std::to_string(i + 1) + ": unknown partition");
  }
  return split;
}

}  // namespace fopkit
