#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace mvcca {

/// n samples (rows) of a d-dimensional representation for one view.
struct ViewDataset {
  Eigen::MatrixXd z;
  std::size_t view_index = 0;

  Eigen::Index samples() const noexcept { return z.rows(); }
  Eigen::Index dim() const noexcept { return z.cols(); }
};

/// Long-format CSV with header `view,sample,coord,value`; values use 17
/// significant digits so a write/read cycle is exact.
void write_csv(const std::vector<ViewDataset>& views, std::ostream& out);
/// Groups rows by view index, ascending. Every (sample, coord) cell must be present once.
std::vector<ViewDataset> read_csv(std::istream& in);

/// Binary blob: 8-byte magic "MVCCA001", then n, d, view_index as 64-bit
/// little-endian unsigned integers, then n·d float64 little-endian values in
/// column-major order.
void write_binary(const ViewDataset& view, std::ostream& out);
ViewDataset read_binary(std::istream& in);

}  // namespace mvcca
