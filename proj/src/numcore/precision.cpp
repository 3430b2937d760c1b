#include "embedkit/numcore/precision.hpp"

namespace embedkit::numcore {

namespace {
Precision g_precision = Precision::f64;
}

Precision precision() { return g_precision; }
void set_precision(Precision p) { g_precision = p; }

double quantize(double v) {
  if (g_precision == Precision::f32) return static_cast<double>(static_cast<float>(v));
  return v;
}

}  // namespace embedkit::numcore
