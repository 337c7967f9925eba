#include "fopkit/checkpoint.h"

#include "fopkit/binary_io.h"
#include "fopkit/errors.h"

namespace fopkit {

std::string encode_checkpoint(const FopConfig& config, const FopParams& params) {
  io::ByteWriter w;
  w.raw("FOPC");
  w.u32(kCheckpointVersion);
  w.u64(config.face_dim);
  w.u64(config.voice_dim);
  w.u64(config.embed_dim);
  w.u64(config.num_identities);
  w.u8(static_cast<std::uint8_t>(config.fusion));
  const auto all = params.all();
  w.u32(static_cast<std::uint32_t>(all.size()));
  for (const Parameter* p : all) {
    w.str(p->name);
    w.u64(p->value.rows());
    w.u64(p->value.cols());
    for (double x : p->value.data()) w.f64(x);
  }
  return w.bytes();
}

Checkpoint decode_checkpoint(std::string_view bytes, const std::string& source) {
  io::ByteReader r(bytes, source);
  if (r.raw(4) != "FOPC") r.fail("bad magic (expected FOPC)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config.face_dim = r.u64();
  ck.config.voice_dim = r.u64();
  ck.config.embed_dim = r.u64();
  ck.config.num_identities = r.u64();
  const std::uint8_t fusion = r.u8();
  if (fusion > 1) r.fail("unknown fusion code " + std::to_string(fusion));
  ck.config.fusion = static_cast<FusionKind>(fusion);
  try {
    ck.config.validate();
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  ck.params = FopParams::zeros(ck.config);
  auto slots = ck.params.all();
  const std::uint32_t count = r.u32();
  if (count != slots.size()) {
    r.fail("expected " + std::to_string(slots.size()) + " parameters, found " +
           std::to_string(count));
  }
  for (Parameter* slot : slots) {
    const std::string name = r.str();
    if (name != slot->name) r.fail("expected parameter '" + slot->name + "', found '" + name + "'");
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != slot->value.rows() || cols != slot->value.cols()) {
      r.fail("parameter '" + name + "' has shape " + std::to_string(rows) + "x" +
             std::to_string(cols) + ", expected " + slot->value.shape_string());
    }
    for (double& x : slot->value.data()) x = r.f64();
  }
  if (!r.at_end()) r.fail("trailing bytes after last parameter");
  return ck;
}

void save_checkpoint(const std::string& path, const FopConfig& config, const FopParams& params) {
  io::write_file(path, encode_checkpoint(config, params));
}

Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(io::read_file(path), path);
}

}  // namespace fopkit
