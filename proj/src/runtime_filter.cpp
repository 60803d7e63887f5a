#include "dreamer/runtime/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "dreamer/core/serialize.hpp"

namespace dreamer::runtime {

LowPassFilter::LowPassFilter(int dims, float cutoff_hz, float sample_hz) : dims_(dims) {
  if (cutoff_hz <= 0.0f || cutoff_hz >= sample_hz / 2.0f)
    throw std::invalid_argument("cutoff must lie in (0, sample_rate / 2)");
  const float k = std::tan(3.14159265f * cutoff_hz / sample_hz);
  const float norm = 1.0f / (1.0f + std::sqrt(2.0f) * k + k * k);
  b0_ = k * k * norm;
  b1_ = 2.0f * b0_;
  b2_ = b0_;
  a1_ = 2.0f * (k * k - 1.0f) * norm;
  a2_ = (1.0f - std::sqrt(2.0f) * k + k * k) * norm;
  x1_.assign(static_cast<size_t>(dims), 0.0f);
  x2_.assign(static_cast<size_t>(dims), 0.0f);
  y1_.assign(static_cast<size_t>(dims), 0.0f);
  y2_.assign(static_cast<size_t>(dims), 0.0f);
}

std::vector<float> LowPassFilter::apply(const std::vector<float>& raw) {
  if (static_cast<int>(raw.size()) != dims_)
    throw std::invalid_argument("filter dimension mismatch");
  std::vector<float> out(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    const float y = b0_ * raw[i] + b1_ * x1_[i] + b2_ * x2_[i] - a1_ * y1_[i] - a2_ * y2_[i];
    x2_[i] = x1_[i];
    x1_[i] = raw[i];
    y2_[i] = y1_[i];
    y1_[i] = y;
    out[i] = std::clamp(y, -1.0f, 1.0f);
  }
  return out;
}

void LowPassFilter::reset() {
  std::fill(x1_.begin(), x1_.end(), 0.0f);
  std::fill(x2_.begin(), x2_.end(), 0.0f);
  std::fill(y1_.begin(), y1_.end(), 0.0f);
  std::fill(y2_.begin(), y2_.end(), 0.0f);
}

double LowPassFilter::magnitude(double omega) const {
  const std::complex<double> z = std::polar(1.0, -omega);
  const std::complex<double> num = static_cast<double>(b0_) + static_cast<double>(b1_) * z +
                                   static_cast<double>(b2_) * z * z;
  const std::complex<double> den =
      1.0 + static_cast<double>(a1_) * z + static_cast<double>(a2_) * z * z;
  return std::abs(num / den);
}

void LowPassFilter::save_state(std::ostream& os) const {
  for (const auto* hist : {&x1_, &x2_, &y1_, &y2_}) io::write_f32_array(os, *hist);
}

void LowPassFilter::load_state(std::istream& is) {
  for (auto* hist : {&x1_, &x2_, &y1_, &y2_}) {
    *hist = io::read_f32_array(is);
    if (static_cast<int>(hist->size()) != dims_)
      throw std::runtime_error("filter state dimension mismatch");
  }
}

}  // namespace dreamer::runtime
