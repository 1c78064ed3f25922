#pragma once

// Strided discrete Fourier conjugation along one tensor axis, backed by FFTW
// guru plans. A density-matrix-like array has "ket" axes (transformed by F)
// and "bra" axes (transformed by conj(F)); F is the unitary DFT between the
// lattice x_j = -L/2 + j dx and p_a = (a - n/2) dq.

#include <complex>
#include <cstddef>
#include <vector>

namespace tcme::spectral {

enum class Slot { Ket, Bra };
enum class Direction { ToMomentum, ToPosition };

struct LoopDim {
  int count;
  std::ptrdiff_t stride;
};

struct AxisLayout {
  int n;                       // length of the transformed axis
  std::ptrdiff_t stride;       // element stride along it
  std::vector<LoopDim> loops;  // all remaining axes
};

/// In-place transform of every 1-D fibre described by `layout`.
void transform_axis(std::complex<double>* data, const AxisLayout& layout, Slot slot,
                    Direction direction);

/// Layouts for an n x n column-major matrix.
AxisLayout matrix_row_axis(int n);
AxisLayout matrix_column_axis(int n);

enum class Planning {
  Deterministic,  // FFTW_ESTIMATE: identical plans, bit-reproducible output
  Measured        // FFTW_MEASURE: faster plans, roundoff may vary run to run
};

/// Applies to plans created afterwards. Default: Deterministic.
void set_planning(Planning mode);
Planning planning();

}  // namespace tcme::spectral
