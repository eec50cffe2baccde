#include "umfpack_loader.hpp"

#include <dlfcn.h>

#include <cstdlib>
#include <mutex>

namespace emac::detail {

namespace {

// OpenBLAS 0.3.20 picks Cooperlake kernels on CPUs with AVX512-BF16, and its
// dense factorization kernels return NaNs there. The core type has to be in the
// environment before libblas is loaded, hence the lazy dlopen.
void select_blas_kernels() {
#if defined(__x86_64__) && defined(__GNUC__)
  if (std::getenv("OPENBLAS_CORETYPE") == nullptr && __builtin_cpu_supports("avx512bf16") &&
      __builtin_cpu_supports("avx2")) {
    setenv("OPENBLAS_CORETYPE", "Haswell", 0);
  }
#endif
}

template <class F>
bool bind(void* handle, const char* name, F& fn) {
  fn = reinterpret_cast<F>(dlsym(handle, name));
  return fn != nullptr;
}

UmfpackApi* load() {
  select_blas_kernels();
  void* handle = nullptr;
  for (const char* name : {"libumfpack.so.5", "libumfpack.so.6", "libumfpack.so"}) {
    handle = dlopen(name, RTLD_NOW | RTLD_LOCAL);
    if (handle) break;
  }
  if (!handle) return nullptr;
  static UmfpackApi api;
  const bool ok = bind(handle, "umfpack_di_defaults", api.defaults) &&
                  bind(handle, "umfpack_di_symbolic", api.symbolic) && bind(handle, "umfpack_di_numeric", api.numeric) &&
                  bind(handle, "umfpack_di_solve", api.solve) &&
                  bind(handle, "umfpack_di_free_symbolic", api.free_symbolic) &&
                  bind(handle, "umfpack_di_free_numeric", api.free_numeric);
  return ok ? &api : nullptr;
}

}  // namespace

const UmfpackApi* umfpack_api() {
  static std::once_flag once;
  static const UmfpackApi* api = nullptr;
  std::call_once(once, [] { api = load(); });
  return api;
}

}  // namespace emac::detail
