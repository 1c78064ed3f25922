#include "tcme/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <fmt/format.h>

namespace tcme {
namespace {

constexpr char kMagic[8] = {'T', 'C', 'M', 'E', 'S', 'N', 'A', 'P'};

template <typename U>
void put_le(std::vector<unsigned char>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

}  // namespace

SnapshotFormatError::SnapshotFormatError(const std::string& path, std::size_t offset,
                                         const std::string& what)
    : std::runtime_error(fmt::format("{}: snapshot format error at byte offset {}: {}", path,
                                     offset, what)),
      offset_(offset) {}

std::size_t snapshot_size(int n_points) {
  return kSnapshotHeaderBytes + static_cast<std::size_t>(n_points) * n_points * 16;
}

void emit_snapshot(const ComplexMatrix& rho, Representation rep, const std::string& path) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw std::invalid_argument("emit_snapshot: matrix must be square and non-empty");
  }
  const int n = static_cast<int>(rho.rows());
  std::vector<unsigned char> buf;
  buf.reserve(snapshot_size(n));
  buf.insert(buf.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(buf, kSnapshotVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(n));
  put_le<std::uint32_t>(buf, rep == Representation::Position ? 0u : 1u);
  buf.resize(kSnapshotHeaderBytes, 0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(rho(j, k).real()));
      put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(rho(j, k).imag()));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path));
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error(fmt::format("write to {} failed", path));
}

void emit_snapshot(const DensityMatrix& rho, const std::string& path) {
  emit_snapshot(rho.matrix(), rho.representation(), path);
}

ComplexMatrix read_snapshot_entries(const std::string& path, Representation* rep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open snapshot {}", path));
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (buf.size() < kSnapshotHeaderBytes) {
    throw SnapshotFormatError(path, buf.size(), "file ends inside the 32-byte header");
  }
  if (std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw SnapshotFormatError(path, 0, "bad magic (expected TCMESNAP)");
  }
  const auto version = get_le<std::uint32_t>(buf.data() + 8);
  if (version != kSnapshotVersion) {
    throw SnapshotFormatError(path, 8, fmt::format("unsupported version {}", version));
  }
  const auto n = get_le<std::uint32_t>(buf.data() + 12);
  if (n == 0 || n > 1u << 14) {
    throw SnapshotFormatError(path, 12, fmt::format("implausible n_points {}", n));
  }
  const auto tag = get_le<std::uint32_t>(buf.data() + 16);
  if (tag > 1) throw SnapshotFormatError(path, 16, fmt::format("unknown representation tag {}", tag));
  for (std::size_t i = 20; i < kSnapshotHeaderBytes; ++i) {
    if (buf[i] != 0) throw SnapshotFormatError(path, i, "reserved header byte is not zero");
  }
  const std::size_t expected = snapshot_size(static_cast<int>(n));
  if (buf.size() < expected) {
    throw SnapshotFormatError(path, buf.size(),
                              fmt::format("truncated: {} x {} matrix needs {} bytes", n, n, expected));
  }
  if (buf.size() > expected) {
    throw SnapshotFormatError(path, expected, "trailing bytes after the matrix payload");
  }
  ComplexMatrix rho(n, n);
  const unsigned char* p = buf.data() + kSnapshotHeaderBytes;
  for (std::uint32_t j = 0; j < n; ++j) {
    for (std::uint32_t k = 0; k < n; ++k, p += 16) {
      rho(j, k) = Complex(std::bit_cast<double>(get_le<std::uint64_t>(p)),
                          std::bit_cast<double>(get_le<std::uint64_t>(p + 8)));
    }
  }
  if (rep) *rep = tag == 0 ? Representation::Position : Representation::Momentum;
  return rho;
}

DensityMatrix load_snapshot(const std::string& path, bool trusted) {
  Representation rep{};
  ComplexMatrix rho = read_snapshot_entries(path, &rep);
  return trusted ? DensityMatrix::trusted(std::move(rho), rep)
                 : DensityMatrix::from_matrix(std::move(rho), rep);
}

}  // namespace tcme
