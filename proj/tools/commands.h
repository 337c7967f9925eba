#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.h"

namespace fopkit::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

inline constexpr const char* kVersion = "0.1.0";

/// Command-line options shared by the verbs.
struct Options {
  std::string command;
  std::string config_path;
  std::string out;
  std::string data;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;
  std::string store_a;
  std::string store_b;
  std::string grid;
};

// Fixed file names inside a synth output directory.
inline constexpr const char* kFaceStore = "face.fvem";
inline constexpr const char* kVoiceStore = "voice.fvem";
inline constexpr const char* kShiftedVoiceStore = "voice_lang1.fvem";
inline constexpr const char* kSplitFile = "split.txt";
inline constexpr const char* kVerifyFile = "verify.txt";
inline constexpr const char* kMatchVoiceFile = "match.txt";
inline constexpr const char* kMatchFaceFile = "match_face.txt";
inline constexpr const char* kConfigFile = "config.txt";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCheckpointFile = "checkpoint.fopc";

/// Runs one verb; errors propagate as fopkit exceptions.
void run_command(const Options& options, std::ostream& out);

/// Parses argv, runs the verb and maps failures to exit codes.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Re-runs the command recorded in `manifest_path` into `out_dir`.
void rerun_manifest(const std::string& manifest_path, const std::string& out_dir, std::ostream& out);

/// Hex FNV-1a of a file's bytes.
std::string file_hash(const std::string& path);

}  // namespace fopkit::cli
