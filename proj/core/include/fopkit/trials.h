#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fopkit/store.h"

namespace fopkit {

/// A face instance and a voice instance; genuine when they share an identity.
struct VerificationTrial {
  std::string face_id;
  std::string voice_id;
  bool genuine = false;
  friend bool operator==(const VerificationTrial&, const VerificationTrial&) = default;
};

/// A probe from one modality and a gallery from the other. Exactly one gallery
/// entry shares the probe's identity; true_pos is its 0-based position.
struct MatchingTrial {
  Modality probe_modality = Modality::kVoice;
  std::string probe_id;
  std::vector<std::string> gallery;
  std::size_t true_pos = 0;
  friend bool operator==(const MatchingTrial&, const MatchingTrial&) = default;
};

struct VerificationTrialSet {
  std::vector<VerificationTrial> trials;
  std::vector<std::string> warnings;
};

struct MatchingTrialSet {
  std::vector<MatchingTrial> trials;
  std::vector<std::string> warnings;
};

/// Balanced verification trials over the instances `ids`: ceil(count/2)
/// genuine trials pair a face and a voice of two different instances of one
/// identity; the rest pair instances of different identities. Identities with a
/// single instance in `ids` cannot form genuine trials and are skipped with a
/// warning.
VerificationTrialSet build_verification_trials(const EmbeddingStore& face,
                                               const EmbeddingStore& voice,
                                               const std::vector<std::string>& ids,
                                               std::size_t count, std::uint64_t seed);

/// 1:n_c matching trials over `ids`. The true match is a different instance of
/// the probe's identity; impostors come from n_c-1 distinct other identities
/// drawn uniformly without replacement.
MatchingTrialSet build_matching_trials(const EmbeddingStore& face, const EmbeddingStore& voice,
                                       const std::vector<std::string>& ids, std::size_t n_c,
                                       std::size_t count, std::uint64_t seed,
                                       Modality probe = Modality::kVoice);

// Verification file: one "face_id,voice_id,label" line per trial (label 1
// genuine, 0 impostor). Lines starting with '#' are comments.
std::string encode_verification_trials(const std::vector<VerificationTrial>& trials);
std::vector<VerificationTrial> decode_verification_trials(std::string_view text,
                                                          const std::string& source = "<memory>");

// Matching file: optional "# probe=<face|voice>" comment, then one
// "probe_id,gallery_id_1,...,gallery_id_n,true_pos" line per trial with a
// 0-based true_pos. Galleries of different sizes may share a file.
std::string encode_matching_trials(const std::vector<MatchingTrial>& trials);
std::vector<MatchingTrial> decode_matching_trials(std::string_view text,
                                                  const std::string& source = "<memory>");

}  // namespace fopkit
