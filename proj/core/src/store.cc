#include "fopkit/store.h"

#include <algorithm>
#include <set>

#include "fopkit/binary_io.h"
#include "fopkit/errors.h"
#include "fopkit/text.h"

namespace fopkit {

std::string to_string(Modality m) { return m == Modality::kFace ? "face" : "voice"; }

Modality parse_modality(const std::string& text) {
  if (text == "face") return Modality::kFace;
  if (text == "voice") return Modality::kVoice;
  throw DataError("unknown modality '" + text + "'");
}

std::int32_t bucket_age(double years) {
  if (years < 25) return 0;
  if (years < 35) return 1;
  if (years < 45) return 2;
  if (years < 55) return 3;
  return 4;
}

void EmbeddingStore::add(Record record) {
  if (record.vec.size() != dim_) {
    throw DataError("ragged vector for '" + record.id + "': length " +
                    std::to_string(record.vec.size()) + ", store dim " + std::to_string(dim_));
  }
  if (index_.count(record.id) != 0) throw DataError("duplicate instance id '" + record.id + "'");
  index_.emplace(record.id, records_.size());
  records_.push_back(std::move(record));
}

std::size_t EmbeddingStore::num_identities() const {
  std::int32_t max_label = -1;
  for (const Record& r : records_) max_label = std::max(max_label, r.label);
  return static_cast<std::size_t>(max_label + 1);
}

void EmbeddingStore::validate() const {
  if (dim_ < 1) throw DataError("store dim must be >= 1");
  std::set<std::int32_t> labels;
  for (const Record& r : records_) {
    if (r.label < 0) throw DataError("negative identity label for '" + r.id + "'");
    labels.insert(r.label);
  }
  if (!labels.empty() && static_cast<std::size_t>(*labels.rbegin()) + 1 != labels.size()) {
    throw DataError("identity labels are not dense: " + std::to_string(labels.size()) +
                    " distinct labels, max " + std::to_string(*labels.rbegin()));
  }
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingStore::index_of(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw DataError("unknown instance id '" + std::string(id) + "' in " +
                            to_string(modality_) + " store");
  return *idx;
}

Matrix EmbeddingStore::matrix(std::span<const std::size_t> rows) const {
  Matrix m(rows.size(), dim_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& v = records_.at(rows[i]).vec;
    std::copy(v.begin(), v.end(), m.row(i).begin());
  }
  return m;
}

Matrix EmbeddingStore::matrix() const {
  Matrix m(records_.size(), dim_);
  for (std::size_t i = 0; i < records_.size(); ++i)
    std::copy(records_[i].vec.begin(), records_[i].vec.end(), m.row(i).begin());
  return m;
}

StoreFormat format_for_path(const std::string& path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? StoreFormat::kCsv
                                                                    : StoreFormat::kBinary;
}

std::string encode_store(const EmbeddingStore& store) {
  io::ByteWriter w;
  w.raw("FVEM");
  w.u32(kStoreVersion);
  w.u8(static_cast<std::uint8_t>(store.modality()));
  w.u32(static_cast<std::uint32_t>(store.dim()));
  w.u64(store.size());
  for (const Record& r : store.records()) {
    w.str(r.id);
    w.i32(r.label);
    w.i32(r.attrs.gender);
    w.i32(r.attrs.nationality);
    w.i32(r.attrs.age_group);
    w.i32(r.attrs.language);
    for (double x : r.vec) w.f64(x);
  }
  return w.bytes();
}

EmbeddingStore decode_store(std::string_view bytes, const std::string& source) {
  io::ByteReader r(bytes, source);
  if (r.raw(4) != "FVEM") r.fail("bad magic (expected FVEM)");
  const std::uint32_t version = r.u32();
  if (version != kStoreVersion) r.fail("unsupported store version " + std::to_string(version));
  const std::uint8_t modality = r.u8();
  if (modality > 1) r.fail("unknown modality code " + std::to_string(modality));
  const std::uint32_t dim = r.u32();
  if (dim == 0) r.fail("store dim must be >= 1");
  const std::uint64_t count = r.u64();
  EmbeddingStore store(static_cast<Modality>(modality), dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    Record rec;
    rec.id = r.str();
    rec.label = r.i32();
    rec.attrs.gender = r.i32();
    rec.attrs.nationality = r.i32();
    rec.attrs.age_group = r.i32();
    rec.attrs.language = r.i32();
    rec.vec.resize(dim);
    for (double& x : rec.vec) x = r.f64();
    try {
      store.add(std::move(rec));
    } catch (const DataError& e) {
      r.fail(e.what());
    }
  }
  if (!r.at_end()) r.fail("trailing bytes after last record");
  store.validate();
  return store;
}

std::string encode_store_csv(const EmbeddingStore& store) {
  std::string out = "# fvem modality=" + to_string(store.modality()) +
                    " dim=" + std::to_string(store.dim()) + "\n";
  out += "id,label,gender,nationality,age_group,language";
  for (std::size_t k = 0; k < store.dim(); ++k) out += ",x" + std::to_string(k);
  out += '\n';
  for (const Record& r : store.records()) {
    if (r.id.find_first_of(",\n\r") != std::string::npos) {
      throw DataError("instance id '" + r.id + "' cannot be written to CSV");
    }
    out += r.id;
    for (std::int32_t v : {r.label, r.attrs.gender, r.attrs.nationality, r.attrs.age_group,
                           r.attrs.language}) {
      out += ',' + std::to_string(v);
    }
    for (double x : r.vec) out += ',' + text::format_double(x);
    out += '\n';
  }
  return out;
}

EmbeddingStore decode_store_csv(std::string_view content, const std::string& source) {
  const auto rows = text::lines(content);
  if (rows.size() < 2) throw DataError(source + ": CSV store needs a preamble and header");
  auto where = [&](std::size_t line) { return source + " line " + std::to_string(line + 1); };

  std::string modality;
  std::size_t dim = 0;
  {
    std::string_view pre = rows[0];
    if (!pre.starts_with("# fvem")) throw DataError(where(0) + ": expected '# fvem' preamble");
    for (auto tok : text::split(text::trim(pre.substr(6)), ' ')) {
      if (tok.starts_with("modality=")) modality = std::string(tok.substr(9));
      if (tok.starts_with("dim=")) dim = text::parse_uint(tok.substr(4), "dim");
    }
    if (modality.empty() || dim == 0) throw DataError(where(0) + ": preamble needs modality and dim");
  }
  const auto header = text::split(rows[1], ',');
  if (header.size() != 6 + dim || header[0] != "id" || header[1] != "label") {
    throw DataError(where(1) + ": header does not match dim " + std::to_string(dim));
  }
  const bool raw_age = header[4] == "age";
  if (!raw_age && header[4] != "age_group") {
    throw DataError(where(1) + ": fifth column must be age_group or age");
  }

  EmbeddingStore store(parse_modality(modality), dim);
  for (std::size_t li = 2; li < rows.size(); ++li) {
    if (text::trim(rows[li]).empty()) continue;
    const auto cells = text::split(rows[li], ',');
    if (cells.size() != header.size()) {
      throw DataError(where(li) + ": ragged row with " + std::to_string(cells.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    try {
      Record rec;
      rec.id = std::string(text::trim(cells[0]));
      rec.label = static_cast<std::int32_t>(text::parse_int(cells[1], "label"));
      rec.attrs.gender = static_cast<std::int32_t>(text::parse_int(cells[2], "gender"));
      rec.attrs.nationality = static_cast<std::int32_t>(text::parse_int(cells[3], "nationality"));
      if (raw_age) {
        const double years = text::parse_double(cells[4], "age");
        rec.attrs.age_group = years < 0 ? kUnknownAttribute : bucket_age(years);
      } else {
        rec.attrs.age_group = static_cast<std::int32_t>(text::parse_int(cells[4], "age_group"));
      }
      rec.attrs.language = static_cast<std::int32_t>(text::parse_int(cells[5], "language"));
      rec.vec.reserve(dim);
      for (std::size_t k = 0; k < dim; ++k) rec.vec.push_back(text::parse_double(cells[6 + k], "x"));
      store.add(std::move(rec));
    } catch (const DataError& e) {
      throw DataError(where(li) + ": " + e.what());
    }
  }
  store.validate();
  return store;
}

void save_store(const std::string& path, const EmbeddingStore& store, StoreFormat format) {
  store.validate();
  io::write_file(path, format == StoreFormat::kCsv ? encode_store_csv(store) : encode_store(store));
}

void save_store(const std::string& path, const EmbeddingStore& store) {
  save_store(path, store, format_for_path(path));
}

EmbeddingStore load_store(const std::string& path, StoreFormat format) {
  const std::string bytes = io::read_file(path);
  return format == StoreFormat::kCsv ? decode_store_csv(bytes, path) : decode_store(bytes, path);
}

EmbeddingStore load_store(const std::string& path) { return load_store(path, format_for_path(path)); }

void check_paired(const EmbeddingStore& face, const EmbeddingStore& voice) {
  if (face.modality() != Modality::kFace || voice.modality() != Modality::kVoice) {
    throw DataError("expected a face store and a voice store");
  }
  if (face.size() != voice.size()) {
    throw DataError("face store has " + std::to_string(face.size()) + " records, voice store " +
                    std::to_string(voice.size()));
  }
  for (const Record& f : face.records()) {
    const auto vi = voice.find(f.id);
    if (!vi) throw DataError("instance '" + f.id + "' missing from voice store");
    if (voice.at(*vi).label != f.label) {
      throw DataError("instance '" + f.id + "' has different labels in face and voice stores");
    }
  }
}

}  // namespace fopkit
