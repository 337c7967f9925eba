#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fopkit/matrix.h"

namespace fopkit {

enum class Modality : std::uint8_t { kFace = 0, kVoice = 1 };

std::string to_string(Modality m);
Modality parse_modality(const std::string& text);

inline constexpr std::int32_t kUnknownAttribute = -1;

/// Coded demographic annotations; kUnknownAttribute marks a missing value.
struct Attributes {
  std::int32_t gender = kUnknownAttribute;
  std::int32_t nationality = kUnknownAttribute;
  std::int32_t age_group = kUnknownAttribute;
  std::int32_t language = kUnknownAttribute;
  friend bool operator==(const Attributes&, const Attributes&) = default;
};

/// Age buckets: <25, 25-34, 35-44, 45-54, >=55.
std::int32_t bucket_age(double years);

struct Record {
  std::string id;
  std::int32_t label = 0;
  Attributes attrs;
  std::vector<double> vec;
  friend bool operator==(const Record&, const Record&) = default;
};

/// Labeled feature vectors of one modality.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(Modality modality, std::size_t dim) : modality_(modality), dim_(dim) {}

  /// Appends a record; throws DataError on a ragged vector or duplicate id.
  void add(Record record);

  /// Checks that labels are dense 0..C-1.
  void validate() const;

  Modality modality() const { return modality_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<Record>& records() const { return records_; }
  const Record& at(std::size_t i) const { return records_.at(i); }
  std::size_t num_identities() const;

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;  // throws DataError

  /// Vectors of the given rows stacked into a matrix.
  Matrix matrix(std::span<const std::size_t> rows) const;
  Matrix matrix() const;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.modality_ == b.modality_ && a.dim_ == b.dim_ && a.records_ == b.records_;
  }

 private:
  Modality modality_ = Modality::kFace;
  std::size_t dim_ = 0;
  std::vector<Record> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class StoreFormat { kBinary, kCsv };

/// .csv selects CSV, anything else binary.
StoreFormat format_for_path(const std::string& path);

inline constexpr std::uint32_t kStoreVersion = 1;

// Binary layout (little-endian): "FVEM" | u32 version | u8 modality | u32 dim |
// u64 count | per record: u32 id_len | id | i32 label | i32 gender |
// i32 nationality | i32 age_group | i32 language | dim * f64
std::string encode_store(const EmbeddingStore& store);
EmbeddingStore decode_store(std::string_view bytes, const std::string& source = "<memory>");

// CSV: "# fvem modality=<face|voice> dim=<d>" then a header row
// id,label,gender,nationality,age_group,language,x0..x{d-1}. An `age` column in
// place of `age_group` holds years and is bucketed on read.
std::string encode_store_csv(const EmbeddingStore& store);
EmbeddingStore decode_store_csv(std::string_view text, const std::string& source = "<memory>");

void save_store(const std::string& path, const EmbeddingStore& store);
void save_store(const std::string& path, const EmbeddingStore& store, StoreFormat format);
EmbeddingStore load_store(const std::string& path);
EmbeddingStore load_store(const std::string& path, StoreFormat format);

/// Face and voice stores must hold the same instance ids with equal labels.
void check_paired(const EmbeddingStore& face, const EmbeddingStore& voice);

}  // namespace fopkit
