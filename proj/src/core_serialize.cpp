#include "dreamer/core/serialize.hpp"

#include <cstring>
#include <stdexcept>

namespace dreamer {
namespace io {

namespace {

template <typename T>
void write_raw(std::ostream& os, T v) {
  // Assumes little-endian host; checked once at startup in debug builds.
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("unexpected end of stream");
  return v;
}

}  // namespace

void write_u8(std::ostream& os, uint8_t v) { write_raw(os, v); }
void write_u32(std::ostream& os, uint32_t v) { write_raw(os, v); }
void write_u64(std::ostream& os, uint64_t v) { write_raw(os, v); }
void write_i64(std::ostream& os, int64_t v) { write_raw(os, v); }
void write_f32(std::ostream& os, float v) { write_raw(os, v); }

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_f32_span(std::ostream& os, const float* data, uint64_t n) {
  write_u64(os, n);
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
}

void write_u8_array(std::ostream& os, const std::vector<uint8_t>& v) {
  write_u64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
}

uint8_t read_u8(std::istream& is) { return read_raw<uint8_t>(is); }
uint32_t read_u32(std::istream& is) { return read_raw<uint32_t>(is); }
uint64_t read_u64(std::istream& is) { return read_raw<uint64_t>(is); }
int64_t read_i64(std::istream& is) { return read_raw<int64_t>(is); }
float read_f32(std::istream& is) { return read_raw<float>(is); }

std::string read_string(std::istream& is) {
  uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("unexpected end of stream");
  return s;
}

std::vector<float> read_f32_array(std::istream& is) {
  uint64_t n = read_u64(is);
  std::vector<float> v(n);
  read_f32_into(is, v.data(), n);
  return v;
}

void read_f32_into(std::istream& is, float* data, uint64_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
  if (!is) throw std::runtime_error("unexpected end of stream");
}

uint64_t read_u64_peek_count(std::istream& is) { return read_u64(is); }

std::vector<uint8_t> read_u8_array(std::istream& is) {
  uint64_t n = read_u64(is);
  std::vector<uint8_t> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("unexpected end of stream");
  return v;
}

}  // namespace io

void write_observation(std::ostream& os, const Observation& obs) {
  io::write_u32(os, static_cast<uint32_t>(obs.entries.size()));
  for (const auto& [name, entry] : obs.entries) {
    io::write_string(os, name);
    if (const auto* img = std::get_if<ImageBuf>(&entry)) {
      io::write_u8(os, 0);
      io::write_u32(os, static_cast<uint32_t>(img->h));
      io::write_u32(os, static_cast<uint32_t>(img->w));
      io::write_u32(os, static_cast<uint32_t>(img->c));
      io::write_u8_array(os, img->pixels);
    } else {
      io::write_u8(os, 1);
      io::write_f32_array(os, std::get<VecBuf>(entry).values);
    }
  }
}

Observation read_observation(std::istream& is) {
  Observation obs;
  uint32_t n = io::read_u32(is);
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = io::read_string(is);
    uint8_t tag = io::read_u8(is);
    if (tag == 0) {
      ImageBuf img;
      img.h = static_cast<int>(io::read_u32(is));
      img.w = static_cast<int>(io::read_u32(is));
      img.c = static_cast<int>(io::read_u32(is));
      img.pixels = io::read_u8_array(is);
      obs.entries.emplace(std::move(name), std::move(img));
    } else {
      VecBuf vec;
      vec.values = io::read_f32_array(is);
      obs.entries.emplace(std::move(name), std::move(vec));
    }
  }
  return obs;
}

void write_transition(std::ostream& os, const Transition& t) {
  io::write_u32(os, kTransitionFormatVersion);
  write_observation(os, t.obs);
  io::write_u8(os, t.action.kind == ActionSpec::Kind::continuous ? 0 : 1);
  io::write_f32_array(os, t.action.values);
  io::write_i64(os, t.action.index);
  io::write_f32(os, t.reward);
  io::write_u8(os, t.is_first ? 1 : 0);
  io::write_u8(os, t.is_last ? 1 : 0);
}

Transition read_transition(std::istream& is) {
  uint32_t version = io::read_u32(is);
  if (version != kTransitionFormatVersion)
    throw std::runtime_error("unsupported transition format version " + std::to_string(version));
  Transition t;
  t.obs = read_observation(is);
  t.action.kind = io::read_u8(is) == 0 ? ActionSpec::Kind::continuous : ActionSpec::Kind::discrete;
  t.action.values = io::read_f32_array(is);
  t.action.index = static_cast<int>(io::read_i64(is));
  t.reward = io::read_f32(is);
  t.is_first = io::read_u8(is) != 0;
  t.is_last = io::read_u8(is) != 0;
  return t;
}

void write_space_spec(std::ostream& os, const SpaceSpec& spec) {
  io::write_u32(os, static_cast<uint32_t>(spec.modalities.size()));
  for (const auto& m : spec.modalities) {
    io::write_string(os, m.name);
    io::write_u8(os, m.kind == ModalitySpec::Kind::image ? 0 : 1);
    io::write_u32(os, static_cast<uint32_t>(m.shape.size()));
    for (int d : m.shape) io::write_u32(os, static_cast<uint32_t>(d));
  }
  io::write_u8(os, spec.action.kind == ActionSpec::Kind::continuous ? 0 : 1);
  io::write_u32(os, static_cast<uint32_t>(spec.action.dim));
  io::write_f32_array(os, spec.action.low);
  io::write_f32_array(os, spec.action.high);
  io::write_u32(os, static_cast<uint32_t>(spec.action.n));
}

SpaceSpec read_space_spec(std::istream& is) {
  SpaceSpec spec;
  uint32_t n = io::read_u32(is);
  for (uint32_t i = 0; i < n; ++i) {
    ModalitySpec m;
    m.name = io::read_string(is);
    m.kind = io::read_u8(is) == 0 ? ModalitySpec::Kind::image : ModalitySpec::Kind::vec;
    uint32_t dims = io::read_u32(is);
    for (uint32_t d = 0; d < dims; ++d) m.shape.push_back(static_cast<int>(io::read_u32(is)));
    spec.modalities.push_back(std::move(m));
  }
  spec.action.kind =
      io::read_u8(is) == 0 ? ActionSpec::Kind::continuous : ActionSpec::Kind::discrete;
  spec.action.dim = static_cast<int>(io::read_u32(is));
  spec.action.low = io::read_f32_array(is);
  spec.action.high = io::read_f32_array(is);
  spec.action.n = static_cast<int>(io::read_u32(is));
  return spec;
}

}  // namespace dreamer
