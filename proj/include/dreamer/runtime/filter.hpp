#pragma once

#include <iosfwd>
#include <vector>

namespace dreamer::runtime {

// Second-order low-pass Butterworth filter, one instance per action
// dimension, discretized by the bilinear transform with frequency
// prewarping. Unit gain at DC; output clamped to the action bounds.
class LowPassFilter {
 public:
  LowPassFilter(int dims, float cutoff_hz, float sample_hz);

  std::vector<float> apply(const std::vector<float>& raw);
  void reset();

  float b0() const { return b0_; }
  float b1() const { return b1_; }
  float b2() const { return b2_; }
  float a1() const { return a1_; }
  float a2() const { return a2_; }

  // |H(e^{i omega})| of the realized digital filter at a normalized angular
  // frequency (omega = 2 pi f / fs).
  double magnitude(double omega) const;

  void save_state(std::ostream& os) const;
  void load_state(std::istream& is);

 private:
  int dims_;
  float b0_, b1_, b2_, a1_, a2_;
  std::vector<float> x1_, x2_, y1_, y2_;
};

}  // namespace dreamer::runtime
