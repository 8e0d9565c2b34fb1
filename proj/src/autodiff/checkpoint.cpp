#include "r3/autodiff/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace r3::ad {

namespace {

constexpr std::array<char, 8> kMagic = {'R', '3', 'C', 'K', 'P', 'T', '\0', '\0'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_str(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_matrix(std::ostream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

class Reader {
 public:
  explicit Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  template <typename T>
  T get() {
    T v{};
    read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
  }

  std::string get_str() {
    const auto n = get<std::uint64_t>();
    if (n > (1ULL << 32)) fail("string length out of range");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  Matrix get_matrix(std::uint64_t rows, std::uint64_t cols) {
    if (rows == 0 || cols == 0 || rows > (1ULL << 24) || cols > (1ULL << 24)) fail("bad tensor shape");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    read(reinterpret_cast<char*>(m.data()), m.size() * sizeof(double));
    return m;
  }

  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw std::runtime_error("checkpoint " + path_ + ": " + why);
  }

 private:
  std::istream& in_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put_str(out, ckpt.metadata);
  put<std::uint64_t>(out, ckpt.params.size());
  for (const auto& p : ckpt.params) {
    put_str(out, p->name);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.cols()));
    put_matrix(out, p->value);
  }
  put<std::uint8_t>(out, ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    put<std::uint64_t>(out, ckpt.optimizer->step);
    put<std::uint64_t>(out, ckpt.optimizer->slots.size());
    for (const auto& [name, slot] : ckpt.optimizer->slots) {
      put_str(out, name);
      put<std::uint64_t>(out, static_cast<std::uint64_t>(slot.m.rows()));
      put<std::uint64_t>(out, static_cast<std::uint64_t>(slot.m.cols()));
      put_matrix(out, slot.m);
      put_matrix(out, slot.u);
    }
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  Reader r(in, path);
  std::array<char, 8> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kMagic) r.fail("not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.metadata = r.get_str();
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = r.get_str();
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    Parameter& p = ckpt.params.add(name, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    p.value = r.get_matrix(rows, cols);
  }
  if (r.get<std::uint8_t>() != 0) {
    AdamaxState state;
    state.step = r.get<std::uint64_t>();
    const auto slots = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < slots; ++i) {
      const std::string name = r.get_str();
      const auto rows = r.get<std::uint64_t>();
      const auto cols = r.get<std::uint64_t>();
      AdamaxSlot slot;
      slot.m = r.get_matrix(rows, cols);
      slot.u = r.get_matrix(rows, cols);
      state.slots.emplace(name, std::move(slot));
    }
    ckpt.optimizer = std::move(state);
  }
  return ckpt;
}

void copy_parameters(const ParameterStore& source, ParameterStore& target) {
  for (auto& p : target) {
    const Parameter* src = source.find(p->name);
    if (src == nullptr) throw std::invalid_argument("checkpoint is missing parameter '" + p->name + "'");
    if (src->value.rows() != p->value.rows() || src->value.cols() != p->value.cols()) {
      throw ShapeError("parameter '" + p->name + "': checkpoint has " + shape_string(src->value) +
                       ", model expects " + shape_string(p->value));
    }
  }
  for (auto& p : target) {
    p->value = source.at(p->name).value;
    p->grad.setZero();
  }
}

}  // namespace r3::ad
