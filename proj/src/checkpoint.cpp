#include "couette_ks/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace couette {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'C', 'K', 'S', '1'};

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw std::runtime_error("checkpoint truncated");
  return value;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  const Grid& g = ck.n.grid();
  if (!g.same_shape(ck.omega.grid())) throw std::invalid_argument("checkpoint: grid mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, 4);
  put<std::int32_t>(out, g.nx());
  put<std::int32_t>(out, g.ny());
  put<double>(out, g.lx());
  put<double>(out, g.ly());
  put<double>(out, ck.t);
  put<double>(out, ck.shear);
  put<double>(out, ck.A);
  for (const SpectralField* f : {&ck.n, &ck.omega}) {
    for (const Complex& c : f->coef()) {
      put<double>(out, c.real());
      put<double>(out, c.imag());
    }
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a CKS1 checkpoint: " + path);
  }
  const auto nx = get<std::int32_t>(in);
  const auto ny = get<std::int32_t>(in);
  const double lx = get<double>(in);
  const double ly = get<double>(in);
  if (std::abs(lx - 2.0 * std::numbers::pi) > 1e-12) {
    throw std::runtime_error("checkpoint has unsupported x-period");
  }
  Checkpoint ck;
  ck.t = get<double>(in);
  ck.shear = get<double>(in);
  ck.A = get<double>(in);
  const Grid g = Grid::make(nx, ny, ly);
  ck.n = SpectralField(g);
  ck.omega = SpectralField(g);
  for (SpectralField* f : {&ck.n, &ck.omega}) {
    for (Complex& c : f->coef()) {
      const double re = get<double>(in);
      const double im = get<double>(in);
      c = Complex(re, im);
    }
  }
  return ck;
}

}  // namespace couette
