#include "cvqkd/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace cvqkd {

namespace {

constexpr char kModelMagic[8] = {'C', 'V', 'Q', 'K', 'D', 'M', 'L', '1'};
constexpr std::uint32_t kModelVersion = 1;
constexpr char kShiftNote[] = "softplus shift learnable, init 0.1, stored as last parameter";

// Serialization helpers; all integers and doubles little-endian.  The build
// targets x86-64, asserted here rather than byte-swapping.
static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");

struct Writer {
  std::vector<char> bytes;

  void raw(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    bytes.insert(bytes.end(), c, c + n);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
};

struct Reader {
  const char* p;
  const char* end;

  void raw(void* out, std::size_t n) {
    if (p + n > end) throw std::runtime_error("model container truncated");
    std::memcpy(out, p, n);
    p += n;
  }
  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
  std::int32_t i32() { std::int32_t v; raw(&v, sizeof v); return v; }
  double f64() { double v; raw(&v, sizeof v); return v; }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 20)) throw std::runtime_error("model container: oversized string");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
};

std::vector<char> model_payload(const MlpModel& model) {
  model.validate();
  Writer w;
  w.raw(kModelMagic, sizeof kModelMagic);
  w.u32(kModelVersion);
  const std::vector<int> dims = model.layer_dims();
  w.u32(static_cast<std::uint32_t>(dims.size()));
  for (int d : dims) w.i32(d);
  w.f64(model.amplification);
  w.str(kShiftNote);
  w.u32(static_cast<std::uint32_t>(model.parameter_count()));
  w.str(kParameterOrderingId);
  const Eigen::VectorXd theta = model.flatten();
  w.raw(theta.data(), static_cast<std::size_t>(theta.size()) * sizeof(double));
  return w.bytes;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x00000100000001B3ull;
  }
  return h;
}

std::uint64_t model_checksum(const MlpModel& model) {
  const std::vector<char> payload = model_payload(model);
  return fnv1a64(payload.data(), payload.size());
}

void save_model(const MlpModel& model, const std::string& path) {
  const std::vector<char> payload = model_payload(model);
  const std::uint64_t sum = fnv1a64(payload.data(), payload.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.write(reinterpret_cast<const char*>(&sum), sizeof sum);
  if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof kModelMagic + sizeof(std::uint64_t)) {
    throw std::runtime_error("load_model: file too short: " + path);
  }
  const std::size_t payload_size = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + payload_size, sizeof stored);
  if (fnv1a64(bytes.data(), payload_size) != stored) {
    throw std::runtime_error("load_model: checksum mismatch, file corrupted: " + path);
  }

  Reader r{bytes.data(), bytes.data() + payload_size};
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
    throw std::runtime_error("load_model: bad magic in " + path);
  }
  if (r.u32() != kModelVersion) {
    throw std::runtime_error("load_model: unsupported container version in " + path);
  }
  const std::uint32_t dim_count = r.u32();
  if (dim_count < 2 || dim_count > 64) {
    throw std::runtime_error("load_model: implausible layer count in " + path);
  }
  std::vector<int> dims(dim_count);
  for (auto& d : dims) {
    d = r.i32();
    if (d < 1) throw std::runtime_error("load_model: invalid layer dim in " + path);
  }
  const double amplification = r.f64();
  (void)r.str();  // shift note, informational
  const std::uint32_t p = r.u32();
  const std::string ordering = r.str();
  if (ordering != kParameterOrderingId) {
    throw std::runtime_error("load_model: unknown parameter ordering '" + ordering + "'");
  }

  MlpModel model;
  model.amplification = amplification;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    model.weights.emplace_back(Eigen::MatrixXd::Zero(dims[l + 1], dims[l]));
    model.biases.emplace_back(Eigen::VectorXd::Zero(dims[l + 1]));
  }
  if (static_cast<std::uint32_t>(model.parameter_count()) != p) {
    throw std::runtime_error("load_model: parameter count does not match dims in " + path);
  }
  Eigen::VectorXd theta(p);
  r.raw(theta.data(), static_cast<std::size_t>(p) * sizeof(double));
  if (r.p != r.end) throw std::runtime_error("load_model: trailing bytes in " + path);
  model.unflatten(theta);
  model.validate();
  return model;
}

}  // namespace cvqkd
