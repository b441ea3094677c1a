#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "hcb/common.hpp"

namespace hcb {

struct Site {
  int x = 0;
  int y = 0;
};

/// Nearest-neighbour bond, stored with a < b.
struct Bond {
  int a = 0;
  int b = 0;
};

/// Open-boundary square lattice with row-major site indexing.
///
/// Site index = y * cols + x. Bit b of every occupation mask refers to site b.
class Lattice {
 public:
  static Lattice square(int rows, int cols, int max_sites = kDefaultMaxSites) {
    if (rows < 1 || cols < 1)
      throw DomainError("lattice dimensions must be positive");
    if (max_sites > 31)
      throw DomainError("site cap above 31 is not supported by 32-bit masks");
    if (static_cast<long>(rows) * cols > max_sites)
      throw CapacityError("lattice " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " exceeds the site cap of " + std::to_string(max_sites));
    Lattice lat;
    lat.rows_ = rows;
    lat.cols_ = cols;
    lat.sites_.reserve(rows * cols);
    for (int y = 0; y < rows; ++y)
      for (int x = 0; x < cols; ++x) lat.sites_.push_back({x, y});
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) {
        const int i = y * cols + x;
        if (x + 1 < cols) lat.bonds_.push_back({i, i + 1});
        if (y + 1 < rows) lat.bonds_.push_back({i, i + cols});
      }
    }
    return lat;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return static_cast<int>(sites_.size()); }
  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  const Site& site(int i) const {
    check_index(i);
    return sites_[i];
  }
  int index(int x, int y) const { return y * cols_ + x; }
  std::uint32_t full_mask() const {
    return size() == 32 ? ~0u : ((1u << size()) - 1u);
  }

  int manhattan_distance(int i, int j) const {
    check_index(i);
    check_index(j);
    return std::abs(sites_[i].x - sites_[j].x) + std::abs(sites_[i].y - sites_[j].y);
  }

  /// Number of bonds with exactly one endpoint inside `mask`.
  int boundary_bonds(std::uint32_t mask) const {
    int count = 0;
    for (const Bond& b : bonds_)
      count += static_cast<int>(((mask >> b.a) ^ (mask >> b.b)) & 1u);
    return count;
  }

  /// Unordered site pairs at the given Manhattan distance, ascending (i, j), i < j.
  std::vector<std::pair<int, int>> pairs_at_distance(int d) const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j)
        if (manhattan_distance(i, j) == d) out.emplace_back(i, j);
    return out;
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= size())
      throw DomainError("site index " + std::to_string(i) + " out of range");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Site> sites_;
  std::vector<Bond> bonds_;
};

/// A proper, nonempty set of sites with its volume and boundary area.
struct Subset {
  std::uint32_t mask = 0;
  int volume = 0;  // V_X, member count
  int area = 0;    // A_X, bonds leaving the set

  std::vector<int> members() const {
    std::vector<int> out;
    for (std::uint32_t m = mask; m; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }
};

inline Subset make_subset(const Lattice& lat, std::uint32_t mask) {
  if ((mask & ~lat.full_mask()) != 0) throw DomainError("subset mask has bits outside the lattice");
  return Subset{mask, std::popcount(mask), lat.boundary_bonds(mask)};
}

inline Subset complement(const Lattice& lat, const Subset& s) {
  return make_subset(lat, lat.full_mask() & ~s.mask);
}

struct SubsetPolicy {
  enum class Kind { Rectangles, BlockPowerset };
  Kind kind = Kind::Rectangles;
  int block = 3;  // side of the block for BlockPowerset, anchored at site (0, 0)

  static SubsetPolicy rectangles() { return {Kind::Rectangles, 0}; }
  static SubsetPolicy block_powerset(int k) { return {Kind::BlockPowerset, k}; }

  std::string tag() const {
    return kind == Kind::Rectangles ? std::string("rectangles")
                                    : "block-powerset(" + std::to_string(block) + ")";
  }
};

/// True when the (V_X, A_X) columns over `subsets` are linearly independent.
inline bool has_rank_two(const std::vector<Subset>& subsets) {
  double vv = 0, va = 0, aa = 0;
  for (const Subset& s : subsets) {
    vv += double(s.volume) * s.volume;
    va += double(s.volume) * s.area;
    aa += double(s.area) * s.area;
  }
  const double det = vv * aa - va * va;
  return det > 1e-9 * std::max(1.0, vv * aa);
}

/// Subset catalog used for the entropy scaling fit.
///
/// Rectangles: every axis-aligned sub-rectangle with V_X <= floor(N/2).
/// BlockPowerset(k): every nonempty subset of the k x k block at the origin.
/// Ordering is deterministic: rectangles by (height, width, y, x); block subsets by mask.
inline std::vector<Subset> enumerate_subsets(const Lattice& lat, SubsetPolicy policy) {
  std::vector<Subset> out;
  const int n = lat.size();
  if (policy.kind == SubsetPolicy::Kind::Rectangles) {
    for (int h = 1; h <= lat.rows(); ++h)
      for (int w = 1; w <= lat.cols(); ++w) {
        if (h * w > n / 2 || h * w >= n) continue;
        for (int y0 = 0; y0 + h <= lat.rows(); ++y0)
          for (int x0 = 0; x0 + w <= lat.cols(); ++x0) {
            std::uint32_t mask = 0;
            for (int y = y0; y < y0 + h; ++y)
              for (int x = x0; x < x0 + w; ++x) mask |= 1u << lat.index(x, y);
            out.push_back(make_subset(lat, mask));
          }
      }
  } else {
    const int k = policy.block;
    if (k < 1 || k > lat.rows() || k > lat.cols())
      throw DomainError("block size does not fit in the lattice");
    std::vector<int> block_sites;
    for (int y = 0; y < k; ++y)
      for (int x = 0; x < k; ++x) block_sites.push_back(lat.index(x, y));
    const std::uint32_t count = 1u << block_sites.size();
    for (std::uint32_t sel = 1; sel < count; ++sel) {
      std::uint32_t mask = 0;
      for (std::size_t b = 0; b < block_sites.size(); ++b)
        if ((sel >> b) & 1u) mask |= 1u << block_sites[b];
      if (mask == lat.full_mask()) continue;
      out.push_back(make_subset(lat, mask));
    }
    std::sort(out.begin(), out.end(), [](const Subset& a, const Subset& b) { return a.mask < b.mask; });
  }
  if (!has_rank_two(out))
    throw FitDegeneracyError("subset policy " + policy.tag() +
                             " gives a rank-deficient (V, A) design matrix");
  return out;
}

}  // namespace hcb
