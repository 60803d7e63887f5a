#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dreamer/core/transition.hpp"

namespace dreamer {

// Little-endian binary primitives shared by every on-disk format.
namespace io {

void write_u8(std::ostream& os, uint8_t v);
void write_u32(std::ostream& os, uint32_t v);
void write_u64(std::ostream& os, uint64_t v);
void write_i64(std::ostream& os, int64_t v);
void write_f32(std::ostream& os, float v);
void write_string(std::ostream& os, const std::string& s);
void write_f32_span(std::ostream& os, const float* data, uint64_t n);
void write_u8_array(std::ostream& os, const std::vector<uint8_t>& v);

template <typename Alloc>
void write_f32_array(std::ostream& os, const std::vector<float, Alloc>& v) {
  write_f32_span(os, v.data(), v.size());
}

uint8_t read_u8(std::istream& is);
uint32_t read_u32(std::istream& is);
uint64_t read_u64(std::istream& is);
int64_t read_i64(std::istream& is);
float read_f32(std::istream& is);
std::string read_string(std::istream& is);
std::vector<float> read_f32_array(std::istream& is);
std::vector<uint8_t> read_u8_array(std::istream& is);
void read_f32_into(std::istream& is, float* data, uint64_t n);
uint64_t read_u64_peek_count(std::istream& is);

template <typename Vec>
void read_f32_vector(std::istream& is, Vec& out) {
  const uint64_t n = read_u64_peek_count(is);
  out.resize(n);
  read_f32_into(is, out.data(), n);
}

}  // namespace io

// Versioned transition container. Round-trips bit-exactly.
inline constexpr uint32_t kTransitionFormatVersion = 1;

void write_observation(std::ostream& os, const Observation& obs);
Observation read_observation(std::istream& is);

void write_transition(std::ostream& os, const Transition& t);
Transition read_transition(std::istream& is);

void write_space_spec(std::ostream& os, const SpaceSpec& spec);
SpaceSpec read_space_spec(std::istream& is);

}  // namespace dreamer
