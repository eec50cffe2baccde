#pragma once

namespace emac::detail {

struct UmfpackApi {
  void (*defaults)(double* control);
  int (*symbolic)(int n_row, int n_col, const int* ap, const int* ai, const double* ax, void** symbolic,
                  const double* control, double* info);
  int (*numeric)(const int* ap, const int* ai, const double* ax, void* symbolic, void** numeric,
                 const double* control, double* info);
  int (*solve)(int sys, const int* ap, const int* ai, const double* ax, double* x, const double* b, void* numeric,
               const double* control, double* info);
  void (*free_symbolic)(void** symbolic);
  void (*free_numeric)(void** numeric);
};

// Null when the shared library is unavailable at run time.
const UmfpackApi* umfpack_api();

}  // namespace emac::detail
