#include "fopkit/trials.h"

#include <map>

#include "fopkit/errors.h"
#include "fopkit/rng.h"
#include "fopkit/text.h"

namespace fopkit {
namespace {

struct IdentityIndex {
  std::vector<std::int32_t> labels;                   // identities, ascending
  std::map<std::int32_t, std::vector<std::string>> members;
};

IdentityIndex index_identities(const EmbeddingStore& face, const EmbeddingStore& voice,
                               const std::vector<std::string>& ids) {
  check_paired(face, voice);
  IdentityIndex idx;
  for (const auto& id : ids) idx.members[face.at(face.index_of(id)).label].push_back(id);
  for (const auto& [y, _] : idx.members) idx.labels.push_back(y);
  return idx;
}

const std::string& pick(const std::vector<std::string>& v, Rng& rng) {
  return v[uniform_index(rng, v.size())];
}

// Two distinct members of one identity.
std::pair<std::string, std::string> pick_two(const std::vector<std::string>& v, Rng& rng) {
  const std::size_t a = uniform_index(rng, v.size());
  std::size_t b = uniform_index(rng, v.size() - 1);
  if (b >= a) ++b;
  return {v[a], v[b]};
}

}  // namespace

VerificationTrialSet build_verification_trials(const EmbeddingStore& face,
                                               const EmbeddingStore& voice,
                                               const std::vector<std::string>& ids,
                                               std::size_t count, std::uint64_t seed) {
  const IdentityIndex idx = index_identities(face, voice, ids);
  VerificationTrialSet out;
  std::vector<std::int32_t> genuine_pool;
  for (std::int32_t y : idx.labels) {
    if (idx.members.at(y).size() >= 2) {
      genuine_pool.push_back(y);
    } else {
      out.warnings.push_back("identity " + std::to_string(y) +
                             " has a single instance; skipped for genuine trials");
    }
  }
  if (count > 0 && genuine_pool.empty()) {
    throw DataError("no identity has two instances; cannot form genuine trials");
  }
  if (count > 1 && idx.labels.size() < 2) {
    throw DataError("need at least two identities to form impostor trials");
  }
  Rng rng(seed);
  const std::size_t n_genuine = (count + 1) / 2;
  for (std::size_t t = 0; t < count; ++t) {
    VerificationTrial trial;
    if (t < n_genuine) {
      const auto y = genuine_pool[uniform_index(rng, genuine_pool.size())];
      auto [f, v] = pick_two(idx.members.at(y), rng);
      trial = {f, v, true};
    } else {
      const std::size_t a = uniform_index(rng, idx.labels.size());
      std::size_t b = uniform_index(rng, idx.labels.size() - 1);
      if (b >= a) ++b;
      trial = {pick(idx.members.at(idx.labels[a]), rng), pick(idx.members.at(idx.labels[b]), rng),
               false};
    }
    out.trials.push_back(std::move(trial));
  }
  seeded_shuffle(out.trials, rng);
  return out;
}

MatchingTrialSet build_matching_trials(const EmbeddingStore& face, const EmbeddingStore& voice,
                                       const std::vector<std::string>& ids, std::size_t n_c,
                                       std::size_t count, std::uint64_t seed, Modality probe) {
  if (n_c < 2) throw ConfigError("gallery size n_c must be >= 2");
  const IdentityIndex idx = index_identities(face, voice, ids);
  if (idx.labels.size() < n_c) {
    throw DataError("gallery size " + std::to_string(n_c) + " exceeds the " +
                    std::to_string(idx.labels.size()) + " identities available");
  }
  MatchingTrialSet out;
  std::vector<std::int32_t> probe_pool;
  for (std::int32_t y : idx.labels) {
    if (idx.members.at(y).size() >= 2) {
      probe_pool.push_back(y);
    } else {
      out.warnings.push_back("identity " + std::to_string(y) +
                             " has a single instance; never used as a probe");
    }
  }
  if (count > 0 && probe_pool.empty()) {
    throw DataError("no identity has two instances; cannot form matching trials");
  }
  Rng rng(seed);
  for (std::size_t t = 0; t < count; ++t) {
    const std::int32_t y = probe_pool[uniform_index(rng, probe_pool.size())];
    auto [probe_id, match_id] = pick_two(idx.members.at(y), rng);
    std::vector<std::int32_t> others;
    for (std::int32_t o : idx.labels)
      if (o != y) others.push_back(o);
    // Partial Fisher-Yates: the first n_c-1 entries are a uniform sample.
    for (std::size_t i = 0; i + 1 < n_c; ++i) {
      const std::size_t j = i + uniform_index(rng, others.size() - i);
      std::swap(others[i], others[j]);
    }
    MatchingTrial trial;
    trial.probe_modality = probe;
    trial.probe_id = probe_id;
    trial.true_pos = uniform_index(rng, n_c);
    for (std::size_t pos = 0, k = 0; pos < n_c; ++pos) {
      trial.gallery.push_back(pos == trial.true_pos ? match_id : pick(idx.members.at(others[k++]), rng));
    }
    out.trials.push_back(std::move(trial));
  }
  return out;
}

std::string encode_verification_trials(const std::vector<VerificationTrial>& trials) {
  std::string out;
  for (const auto& t : trials) out += t.face_id + "," + t.voice_id + "," + (t.genuine ? "1" : "0") + "\n";
  return out;
}

std::vector<VerificationTrial> decode_verification_trials(std::string_view content,
                                                          const std::string& source) {
  std::vector<VerificationTrial> out;
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = text::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = text::split(line, ',');
    const auto label = cells.size() == 3 ? text::trim(cells[2]) : std::string_view{};
    if (cells.size() != 3 || (label != "0" && label != "1")) {
      throw DataError(source + " line " + std::to_string(i + 1) +
                      ": expected face_id,voice_id,label with label 0 or 1");
    }
    out.push_back({std::string(text::trim(cells[0])), std::string(text::trim(cells[1])), label == "1"});
  }
  return out;
}

std::string encode_matching_trials(const std::vector<MatchingTrial>& trials) {
  std::string out;
  if (!trials.empty()) out += "# probe=" + to_string(trials.front().probe_modality) + "\n";
  for (const auto& t : trials) {
    if (t.probe_modality != trials.front().probe_modality) {
      throw DataError("matching trial file holds a single probe modality");
    }
    out += t.probe_id;
    for (const auto& g : t.gallery) out += "," + g;
    out += "," + std::to_string(t.true_pos) + "\n";
  }
  return out;
}

std::vector<MatchingTrial> decode_matching_trials(std::string_view content,
                                                  const std::string& source) {
  std::vector<MatchingTrial> out;
  Modality probe = Modality::kVoice;
  const auto rows = text::lines(content);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = text::trim(rows[i]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("probe=");
      if (pos != std::string_view::npos) {
        probe = parse_modality(std::string(text::trim(line.substr(pos + 6))));
      }
      continue;
    }
    const auto cells = text::split(line, ',');
    if (cells.size() < 4) {
      throw DataError(source + " line " + std::to_string(i + 1) +
                      ": expected probe_id,gallery ids...,true_pos with >= 2 gallery entries");
    }
    MatchingTrial t;
    t.probe_modality = probe;
    t.probe_id = std::string(text::trim(cells.front()));
    for (std::size_t k = 1; k + 1 < cells.size(); ++k) t.gallery.emplace_back(text::trim(cells[k]));
    try {
      t.true_pos = text::parse_uint(cells.back(), "true_pos");
    } catch (const DataError& e) {
      throw DataError(source + " line " + std::to_string(i + 1) + ": " + e.what());
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace fopkit
