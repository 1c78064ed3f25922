#include "tcme/spectral.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <new>
#include <stdexcept>
#include <tuple>

#include <fftw3.h>

namespace tcme::spectral {
namespace {

std::atomic<Planning> g_planning{Planning::Deterministic};

struct PlanKey {
  int n;
  std::ptrdiff_t stride;
  std::vector<std::pair<int, std::ptrdiff_t>> loops;
  int sign;
  Planning mode;

  auto tie() const { return std::tie(n, stride, loops, sign, mode); }
  bool operator<(const PlanKey& o) const { return tie() < o.tie(); }
};

// FFTW's planner is not thread-safe; execution of an existing plan is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const AxisLayout& layout, int sign) {
    PlanKey key{layout.n, layout.stride, {}, sign, g_planning.load()};
    for (const auto& l : layout.loops) key.loops.emplace_back(l.count, l.stride);

    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    fftw_iodim64 dim{layout.n, layout.stride, layout.stride};
    std::vector<fftw_iodim64> loops;
    std::ptrdiff_t extent = 1 + (layout.n - 1) * layout.stride;
    for (const auto& l : layout.loops) {
      loops.push_back({l.count, l.stride, l.stride});
      extent += (l.count - 1) * l.stride;
    }
    // Planning may scribble over the arrays, so plan on scratch storage and
    // execute later with fftw_execute_dft on the caller's buffer.
    fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(extent));
    if (scratch == nullptr) throw std::bad_alloc();
    unsigned flags = FFTW_UNALIGNED |
                     (key.mode == Planning::Measured ? FFTW_MEASURE : FFTW_ESTIMATE);
    fftw_plan plan = fftw_plan_guru64_dft(1, &dim, static_cast<int>(loops.size()), loops.data(),
                                        scratch, scratch, sign, flags);
    fftw_free(scratch);
    if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

// Visits the start offset of every fibre.
template <class F>
void for_each_fibre(const std::vector<LoopDim>& loops, F&& f) {
  std::vector<int> idx(loops.size(), 0);
  while (true) {
    std::ptrdiff_t offset = 0;
    for (std::size_t d = 0; d < loops.size(); ++d) offset += idx[d] * loops[d].stride;
    f(offset);
    std::size_t d = 0;
    for (; d < loops.size(); ++d) {
      if (++idx[d] < loops[d].count) break;
      idx[d] = 0;
    }
    if (d == loops.size()) return;
  }
}

// Multiplies element i of every fibre by factor[i].
void scale_fibres(std::complex<double>* data, const AxisLayout& layout,
                  const std::vector<double>& factor) {
  for_each_fibre(layout.loops, [&](std::ptrdiff_t offset) {
    std::complex<double>* fibre = data + offset;
    for (int i = 0; i < layout.n; ++i) fibre[i * layout.stride] *= factor[i];
  });
}

}  // namespace

void transform_axis(std::complex<double>* data, const AxisLayout& layout, Slot slot,
                    Direction direction) {
  const int n = layout.n;
  if (n <= 0 || n % 2 != 0) throw std::invalid_argument("transform axis length must be even");

  // F[a][j] = (-1)^(a - n/2) * exp(-2 pi i a j / n) * (-1)^j / sqrt(n)
  std::vector<double> position_sign(n), momentum_sign(n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    position_sign[i] = (i % 2 == 0) ? 1.0 : -1.0;
    momentum_sign[i] = (((i - n / 2) % 2) == 0 ? 1.0 : -1.0);
  }

  const bool to_momentum = direction == Direction::ToMomentum;
  // Ket: F forward, F^dagger back. Bra: conj(F) forward, F^T back.
  const bool forward_kernel = (slot == Slot::Ket) == to_momentum;
  const int sign = forward_kernel ? FFTW_FORWARD : FFTW_BACKWARD;

  std::vector<double> pre = to_momentum ? position_sign : momentum_sign;
  std::vector<double> post = to_momentum ? momentum_sign : position_sign;
  for (double& v : post) v *= norm;

  scale_fibres(data, layout, pre);
  fftw_plan plan = cache().get(layout, sign);
  auto* buffer = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buffer, buffer);
  scale_fibres(data, layout, post);
}

AxisLayout matrix_row_axis(int n) { return {n, 1, {{n, n}}}; }

AxisLayout matrix_column_axis(int n) { return {n, n, {{n, 1}}}; }

void set_planning(Planning mode) { g_planning.store(mode); }

Planning planning() { return g_planning.load(); }

}  // namespace tcme::spectral
