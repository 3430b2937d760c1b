#pragma once

namespace embedkit::numcore {

// Global run precision. Storage is always double; in f32 mode every op
// output, parameter and optimizer-state value is rounded through float, so a
// run behaves like (and serializes losslessly as) 32-bit arithmetic.
// Test/default mode is f64, training runs switch to f32.
enum class Precision { f64, f32 };

Precision precision();
void set_precision(Precision p);

double quantize(double v);

}  // namespace embedkit::numcore
