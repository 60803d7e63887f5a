#include "dreamer/net/checkpoint.hpp"

#include <fstream>

#include "dreamer/core/serialize.hpp"

namespace dreamer::net {

namespace {
constexpr uint32_t kMagic = 0x4E54'5244;  // "DRTN"

void write_tensor(std::ostream& os, const Tensor& t) {
  io::write_u32(os, static_cast<uint32_t>(t.shape.size()));
  for (int d : t.shape) io::write_u32(os, static_cast<uint32_t>(d));
  io::write_f32_array(os, t.data);
}

Tensor read_tensor(std::istream& is) {
  Tensor t;
  uint32_t dims = io::read_u32(is);
  for (uint32_t i = 0; i < dims; ++i) t.shape.push_back(static_cast<int>(io::read_u32(is)));
  io::read_f32_vector(is, t.data);
  if (static_cast<int64_t>(t.data.size()) != t.numel())
    throw std::runtime_error("tensor payload does not match shape");
  return t;
}
}  // namespace

void save_params(std::ostream& os, const ParamSet& params) {
  io::write_u32(os, kMagic);
  io::write_u32(os, kParamFormatVersion);
  io::write_i64(os, params.version_);
  io::write_i64(os, params.adam_t_);
  io::write_u32(os, static_cast<uint32_t>(params.params_.size()));
  for (const auto& [name, t] : params.params_) {
    io::write_string(os, name);
    write_tensor(os, t);
    write_tensor(os, params.m_.at(name));
    write_tensor(os, params.v_.at(name));
  }
}

ParamSet load_params(std::istream& is) {
  if (io::read_u32(is) != kMagic) throw std::runtime_error("not a parameter container");
  uint32_t version = io::read_u32(is);
  if (version != kParamFormatVersion)
    throw std::runtime_error("unsupported parameter format version " + std::to_string(version));
  ParamSet p;
  p.version_ = io::read_i64(is);
  p.adam_t_ = io::read_i64(is);
  uint32_t count = io::read_u32(is);
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = io::read_string(is);
    Tensor t = read_tensor(is);
    Tensor m = read_tensor(is);
    Tensor v = read_tensor(is);
    p.params_.emplace(name, std::move(t));
    p.m_.emplace(name, std::move(m));
    p.v_.emplace(name, std::move(v));
  }
  return p;
}

void save_params_file(const std::string& path, const ParamSet& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_params(os, params);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

ParamSet load_params_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return load_params(is);
}

}  // namespace dreamer::net
