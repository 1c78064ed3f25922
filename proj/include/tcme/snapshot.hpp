#pragma once

// Binary density-matrix snapshots. Layout (little-endian):
//   0   8 bytes  magic "TCMESNAP"
//   8   u32      format version (1)
//   12  u32      n_points (matrix dimension)
//   16  u32      representation tag (0 position, 1 momentum)
//   20  12 bytes reserved, zero
//   32  n*n pairs of f64 (re, im), row-major

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "tcme/lattice.hpp"

namespace tcme {

inline constexpr std::size_t kSnapshotHeaderBytes = 32;
inline constexpr std::uint32_t kSnapshotVersion = 1;

class SnapshotFormatError : public std::runtime_error {
 public:
  SnapshotFormatError(const std::string& path, std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

std::size_t snapshot_size(int n_points);

void emit_snapshot(const ComplexMatrix& rho, Representation rep, const std::string& path);
void emit_snapshot(const DensityMatrix& rho, const std::string& path);

/// Raw entries and tag, no physical validation.
ComplexMatrix read_snapshot_entries(const std::string& path, Representation* rep = nullptr);

/// Bit-exact inverse of emit_snapshot. Validates the state with
/// DensityMatrix::from_matrix unless `trusted`.
DensityMatrix load_snapshot(const std::string& path, bool trusted = false);

}  // namespace tcme
