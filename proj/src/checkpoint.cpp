#include "occamnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace occamnet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(std::string("checkpoint truncated while reading ") + what + " at byte " +
                            std::to_string(pos_));
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, ckpt.metadata.size());
  out += ckpt.metadata;
  put<std::uint64_t>(out, ckpt.tensors.size());
  for (const auto& t : ckpt.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put<std::uint64_t>(out, t.value.rows());
    put<std::uint64_t>(out, t.value.cols());
    for (std::size_t i = 0; i < t.value.size(); ++i) put<double>(out, t.value[i]);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof kCheckpointMagic, "magic") != std::string(kCheckpointMagic, sizeof kCheckpointMagic)) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ckpt;
  ckpt.metadata = r.bytes(r.get<std::uint64_t>("metadata length"), "metadata");
  const auto count = r.get<std::uint64_t>("tensor count");
  std::set<std::string> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.bytes(r.get<std::uint32_t>("name length"), "tensor name");
    if (!seen.insert(t.name).second) throw CheckpointError("duplicate tensor '" + t.name + "'");
    const auto rows = r.get<std::uint64_t>("rows");
    const auto cols = r.get<std::uint64_t>("cols");
    if (cols != 0 && rows > (bytes.size() / sizeof(double)) / cols) {
      throw CheckpointError("tensor '" + t.name + "' larger than the file");
    }
    t.value = Tensor(rows, cols);
    for (std::size_t k = 0; k < t.value.size(); ++k) t.value[k] = r.get<double>("tensor values");
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.at_end()) throw CheckpointError("trailing bytes after the tensor table");
  return ckpt;
}

Checkpoint snapshot_parameters(const ParameterRefs& params, std::string metadata) {
  Checkpoint ckpt;
  ckpt.metadata = std::move(metadata);
  for (const Parameter* p : params) ckpt.tensors.push_back({p->name, p->value});
  return ckpt;
}

void load_parameters(const Checkpoint& ckpt, const ParameterRefs& params) {
  for (Parameter* p : params) {
    const NamedTensor* t = ckpt.find(p->name);
    if (!t) throw CheckpointError("checkpoint has no tensor '" + p->name + "'");
    if (t->value.shape() != p->value.shape()) {
      throw CheckpointError("tensor '" + p->name + "' is " + t->value.shape().str() + " in the checkpoint but the model expects " +
                            p->value.shape().str());
    }
    p->value = t->value;
  }
  if (ckpt.tensors.size() != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ckpt.tensors.size()) + " tensors but the model has " +
                          std::to_string(params.size()));
  }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = encode_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace occamnet
