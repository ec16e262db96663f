#include "geolink/checkpoint.hpp"

#include <fstream>

#include "geolink/error.hpp"
#include "geolink/io.hpp"

namespace geolink {
namespace {

constexpr std::string_view kCheckpointMagic = "GEOLINK-CKPT";
constexpr std::uint32_t kCheckpointVersion = 1;

void write_shape(BinaryWriter& w, nn::Shape3 s) {
  w.pod<std::int64_t>(s.d);
  w.pod<std::int64_t>(s.h);
  w.pod<std::int64_t>(s.w);
}

nn::Shape3 read_shape(BinaryReader& r) {
  nn::Shape3 s;
  s.d = r.pod<std::int64_t>();
  s.h = r.pod<std::int64_t>();
  s.w = r.pod<std::int64_t>();
  if (s.d < 1 || s.h < 1 || s.w < 1 || s.d > 4096 || s.h > 4096 || s.w > 4096)
    throw FormatError(r.what() + ": corrupt shape");
  return s;
}

void write_params(BinaryWriter& w, const nn::Model<double>& m) {
  const auto flat = m.flatten();
  w.pod<std::uint64_t>(flat.size());
  w.array(std::span<const double>(flat));
}

void read_params(BinaryReader& r, nn::Model<double>& m) {
  const auto n = r.pod<std::uint64_t>();
  if (n != m.parameter_count())
    throw ShapeError(r.what() + ": stored parameter count " + std::to_string(n) + " does not match architecture (" +
                     std::to_string(m.parameter_count()) + ")");
  std::vector<double> flat(n);
  r.array(std::span<double>(flat));
  m.assign(flat);
}

void write_doubles(BinaryWriter& w, const std::vector<double>& v) {
  w.pod<std::uint64_t>(v.size());
  w.array(std::span<const double>(v));
}

std::vector<double> read_doubles(BinaryReader& r, std::size_t expected) {
  const auto n = r.pod<std::uint64_t>();
  if (n != 0 && n != expected) throw FormatError(r.what() + ": optimizer state has the wrong size");
  std::vector<double> v(n);
  r.array(std::span<double>(v));
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  BinaryWriter header(out);
  header.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
  header.pod<std::uint32_t>(kCheckpointVersion);

  BinaryWriter w(out);
  const auto& a = c.model.arch;
  w.pod<std::int64_t>(a.input_channels);
  w.pod<std::int64_t>(a.conv1_channels);
  w.pod<std::int64_t>(a.conv2_channels);
  write_shape(w, a.kernel);
  w.pod<std::int64_t>(a.padding);
  write_shape(w, a.pool1);
  write_shape(w, a.pool2);
  w.pod<std::uint64_t>(a.hidden.size());
  for (auto h : a.hidden) w.pod<std::int64_t>(h);

  w.pod<std::uint64_t>(c.tensor.doc_len);
  w.pod<std::uint64_t>(c.tensor.max_docs);
  w.pod<std::uint64_t>(c.tensor.max_checkins);
  w.pod<std::uint8_t>(static_cast<std::uint8_t>(c.tensor.time_transform));
  w.pod<double>(c.tensor.time_scale);
  w.pod<std::uint64_t>(c.matrix_hash);

  write_params(w, c.model);

  w.pod<std::uint8_t>(c.trainer ? 1 : 0);
  if (c.trainer) {
    const auto& s = *c.trainer;
    write_params(w, s.model);
    write_params(w, s.best_model);
    w.pod<std::uint64_t>(s.optimizer.step);
    write_doubles(w, s.optimizer.m);
    write_doubles(w, s.optimizer.v);
    w.pod<std::uint64_t>(s.epochs_done);
    w.pod<double>(s.best_score);
    w.pod<std::uint64_t>(s.since_improvement);
    w.pod<std::uint64_t>(s.history.size());
    for (const auto& h : s.history) {
      w.pod<std::uint64_t>(h.epoch);
      w.pod<double>(h.train_loss);
      w.pod<double>(h.valid_auc);
      w.pod<double>(h.valid_loss);
    }
  }
  write_checksum(out, w);
  if (!out) throw Error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint " + path);
  BinaryReader header(in, path);
  header.expect_magic(kCheckpointMagic);
  if (const auto v = header.pod<std::uint32_t>(); v != kCheckpointVersion)
    throw FormatError(path + ": unsupported checkpoint version " + std::to_string(v));

  BinaryReader r(in, path);
  nn::ArchitectureConfig a;
  a.input_channels = r.pod<std::int64_t>();
  a.conv1_channels = r.pod<std::int64_t>();
  a.conv2_channels = r.pod<std::int64_t>();
  a.kernel = read_shape(r);
  a.padding = r.pod<std::int64_t>();
  a.pool1 = read_shape(r);
  a.pool2 = read_shape(r);
  const auto n_hidden = r.pod<std::uint64_t>();
  if (n_hidden > 64) throw FormatError(path + ": corrupt hidden layer count");
  a.hidden.resize(n_hidden);
  for (auto& h : a.hidden) h = r.pod<std::int64_t>();
  if (a.input_channels < 1 || a.conv1_channels < 1 || a.conv2_channels < 1 || a.padding < 0)
    throw FormatError(path + ": corrupt architecture");
  for (auto h : a.hidden)
    if (h < 1) throw FormatError(path + ": corrupt architecture");

  Checkpoint c{{}, 0, nn::Model<double>(a), std::nullopt};
  c.tensor.doc_len = r.pod<std::uint64_t>();
  c.tensor.max_docs = r.pod<std::uint64_t>();
  c.tensor.max_checkins = r.pod<std::uint64_t>();
  const auto tt = r.pod<std::uint8_t>();
  if (tt > 1) throw FormatError(path + ": unknown time transform");
  c.tensor.time_transform = static_cast<TimeTransform>(tt);
  c.tensor.time_scale = r.pod<double>();
  c.matrix_hash = r.pod<std::uint64_t>();

  read_params(r, c.model);

  if (r.pod<std::uint8_t>() == 1) {
    TrainerState s{nn::Model<double>(a), nn::Model<double>(a), {}, 0, 0.0, 0, {}};
    read_params(r, s.model);
    read_params(r, s.best_model);
    s.optimizer.step = r.pod<std::uint64_t>();
    s.optimizer.m = read_doubles(r, s.model.parameter_count());
    s.optimizer.v = read_doubles(r, s.model.parameter_count());
    s.epochs_done = r.pod<std::uint64_t>();
    s.best_score = r.pod<double>();
    s.since_improvement = r.pod<std::uint64_t>();
    const auto n_hist = r.pod<std::uint64_t>();
    if (n_hist > (1u << 24)) throw FormatError(path + ": corrupt history length");
    s.history.resize(n_hist);
    for (auto& h : s.history) {
      h.epoch = r.pod<std::uint64_t>();
      h.train_loss = r.pod<double>();
      h.valid_auc = r.pod<double>();
      h.valid_loss = r.pod<double>();
    }
    c.trainer = std::move(s);
  }
  r.verify_checksum();
  return c;
}

void require_matching_matrix(const Checkpoint& checkpoint, const CorrelationMatrix& matrix,
                             const std::string& checkpoint_path, const std::string& matrix_path) {
  const auto h = matrix.content_hash();
  if (h != checkpoint.matrix_hash)
    throw Error("checkpoint " + checkpoint_path + " was trained with correlation matrix " +
                hex64(checkpoint.matrix_hash) + " but " + matrix_path + " has hash " + hex64(h));
}

}  // namespace geolink
