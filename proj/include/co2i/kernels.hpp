#pragma once

// Dense kernels with an OpenMP variant and a serial reference. Both variants
// perform identical floating-point operations per element, so results agree
// bit for bit.

#include <vector>

namespace co2i::kernels {

/// Gauss-Jordan pivot on a dense row-major tableau of `rows` x `width`:
/// scales row `prow` so that column `col` becomes 1 and eliminates `col`
/// from every other row. `scratch` receives the nonzero pattern of the pivot
/// row and is reused between calls.
void pivot_serial(double* tableau, int rows, int width, int prow, int col,
                  std::vector<int>& scratch);
void pivot_parallel(double* tableau, int rows, int width, int prow, int col,
                    std::vector<int>& scratch);

/// True when the binary was built with OpenMP and more than one thread is
/// available.
bool parallel_available();

}  // namespace co2i::kernels
