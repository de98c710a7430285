#include "rcc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rcc {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'R', 'C', 'C', '1'};
constexpr std::uint8_t kConvKind = 0;
constexpr std::uint8_t kFcKind = 1;

class Writer {
 public:
  template <typename T>
  void put(T value) {
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    out_.insert(out_.end(), raw, raw + sizeof(T));
  }
  void put_tensor_data(const Tensor& t) {
    for (double v : t.data()) put(v);
  }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw CheckpointError(CheckpointErrorKind::kTruncated, "checkpoint truncated at byte " + std::to_string(pos_));
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  Tensor get_tensor(Shape shape) {
    const std::size_t n = element_count(shape);
    if ((bytes_.size() - pos_) / sizeof(double) < n) {
      throw CheckpointError(CheckpointErrorKind::kTruncated, "checkpoint truncated inside tensor data");
    }
    std::vector<double> data(n);
    std::memcpy(data.data(), bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return Tensor(std::move(shape), std::move(data));
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void write_layer(Writer& w, std::uint8_t kind, const Tensor& weights, const Tensor& bias) {
  w.put(kind);
  w.put(static_cast<std::uint32_t>(weights.rank()));
  for (std::size_t d : weights.shape()) w.put(static_cast<std::uint32_t>(d));
  w.put_tensor_data(weights);
  w.put_tensor_data(bias);
}

struct RawLayer {
  std::uint8_t kind;
  Tensor weights;
  Tensor bias;
};

RawLayer read_layer(Reader& r) {
  RawLayer layer;
  layer.kind = r.get<std::uint8_t>();
  if (layer.kind != kConvKind && layer.kind != kFcKind) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "unknown layer kind " + std::to_string(layer.kind));
  }
  const auto rank = r.get<std::uint32_t>();
  if (rank != (layer.kind == kConvKind ? 4u : 2u)) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "unexpected weight rank " + std::to_string(rank));
  }
  Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.get<std::uint32_t>());
  const std::size_t out = shape.front();
  layer.weights = r.get_tensor(std::move(shape));
  layer.bias = r.get_tensor({out});
  return layer;
}

}  // namespace

Bytes save_checkpoint(const NetworkParams& params) {
  Writer w;
  for (char c : kMagic) w.put(static_cast<std::uint8_t>(c));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint32_t>(params.conv.size() + params.fc.size()));
  for (const auto& layer : params.conv) write_layer(w, kConvKind, layer.filters, layer.bias);
  for (const auto& layer : params.fc) write_layer(w, kFcKind, layer.weights, layer.bias);
  return w.take();
}

NetworkParams load_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (char c : kMagic) {
    if (r.get<std::uint8_t>() != static_cast<std::uint8_t>(c)) {
      throw CheckpointError(CheckpointErrorKind::kBadMagic, "not an RCC1 checkpoint");
    }
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::kBadVersion, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  if (count != 6) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "expected 6 layers, found " + std::to_string(count));
  }

  NetworkParams params;
  for (std::size_t l = 0; l < 6; ++l) {
    RawLayer layer = read_layer(r);
    const bool conv = l < 3;
    if (conv != (layer.kind == kConvKind)) {
      throw CheckpointError(CheckpointErrorKind::kMalformed, "layer " + std::to_string(l) + " has the wrong kind");
    }
    if (conv) {
      const int padding = static_cast<int>(layer.weights.dim(2) - 1) / 2;
      params.conv[l] = {std::move(layer.weights), std::move(layer.bias), padding};
    } else {
      params.fc[l - 3] = {std::move(layer.weights), std::move(layer.bias)};
    }
  }
  if (!r.done()) throw CheckpointError(CheckpointErrorKind::kMalformed, "trailing bytes after checkpoint");

  // Shapes must chain from a 3x32x32 input to the class outputs.
  const NetworkParams reference = init_params(0);
  const auto got = params.tensors();
  const auto want = reference.tensors();
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i]->shape() != want[i]->shape()) {
      throw CheckpointError(CheckpointErrorKind::kMalformed,
                            tensor_names()[i] + " has shape " + to_string(got[i]->shape()));
    }
  }
  params.class_names = default_class_names();
  return params;
}

void save_checkpoint_file(const std::filesystem::path& path, const NetworkParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const Bytes bytes = save_checkpoint(params);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

NetworkParams load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_checkpoint(bytes);
}

}  // namespace rcc
