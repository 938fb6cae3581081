#include "co2i/kernels.hpp"

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace co2i::kernels {
namespace {

void normalize_pivot_row(double* pr, int width, int col, std::vector<int>& nz) {
  const double inv = 1.0 / pr[col];
  nz.clear();
  for (int k = 0; k < width; ++k) {
    if (pr[k] == 0.0) continue;
    pr[k] *= inv;
    nz.push_back(k);
  }
  pr[col] = 1.0;
}

inline void eliminate_row(double* ri, const double* pr, int col, const std::vector<int>& nz) {
  const double f = ri[col];
  if (f == 0.0) return;
  for (int k : nz) ri[k] -= f * pr[k];
  ri[col] = 0.0;
}

}  // namespace

void pivot_serial(double* tableau, int rows, int width, int prow, int col,
                  std::vector<int>& scratch) {
  double* pr = tableau + static_cast<std::ptrdiff_t>(prow) * width;
  normalize_pivot_row(pr, width, col, scratch);
  for (int i = 0; i < rows; ++i) {
    if (i == prow) continue;
    eliminate_row(tableau + static_cast<std::ptrdiff_t>(i) * width, pr, col, scratch);
  }
}

void pivot_parallel(double* tableau, int rows, int width, int prow, int col,
                    std::vector<int>& scratch) {
  double* pr = tableau + static_cast<std::ptrdiff_t>(prow) * width;
  normalize_pivot_row(pr, width, col, scratch);
  const std::vector<int>& nz = scratch;
#pragma omp parallel for schedule(static) if (static_cast<long>(rows) * static_cast<long>(nz.size()) > 20000)
  for (int i = 0; i < rows; ++i) {
    if (i == prow) continue;
    eliminate_row(tableau + static_cast<std::ptrdiff_t>(i) * width, pr, col, nz);
  }
}

bool parallel_available() {
#ifdef _OPENMP
  return omp_get_max_threads() > 1;
#else
  return false;
#endif
}

}  // namespace co2i::kernels
