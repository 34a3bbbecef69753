#pragma once

#include <fftw3.h>

#include <array>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "glperiod/grid.hpp"

namespace glperiod::detail {

/// Process-wide cache of FFTW plans keyed by (dim, n, sign).
///
/// Plans are made with FFTW_ESTIMATE so that the chosen algorithm, and hence
/// every bit of the output, does not depend on timing. Planning goes through
/// a mutex (the FFTW planner is not re-entrant); execution uses the new-array
/// interface, which is safe to call concurrently on one plan.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    const Key key{dim, n, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::array<int, 3> dims{n, n, n};
    const std::size_t total = [&] {
      std::size_t t = 1;
      for (int a = 0; a < dim; ++a) t *= static_cast<std::size_t>(n);
      return t;
    }();
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, dims.data(), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  struct Key {
    int dim, n, sign;
    auto operator<=>(const Key&) const = default;
  };
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

/// Unnormalized DFT of `in` into `out` (distinct buffers of grid.size()).
inline void execute_dft(const Grid& grid, const std::complex<double>* in, std::complex<double>* out,
                        int sign) {
  fftw_plan plan = PlanCache::instance().get(grid.dim(), grid.n(), sign);
  // fftw_execute_dft never writes to `in` for out-of-place plans.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace glperiod::detail
