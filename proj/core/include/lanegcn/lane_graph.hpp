#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lanegcn/geometry.hpp"
#include "lanegcn/sparse.hpp"

namespace lanegcn {

// Malformed map or scenario input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Lane {
  std::string id;
  std::vector<Vec2> centerline;  // >= 2 points, ordered along travel direction
  std::vector<std::string> predecessors;
  std::vector<std::string> successors;
  std::optional<std::string> left;
  std::optional<std::string> right;
};

enum class AdjType { kPre = 0, kSuc = 1, kLeft = 2, kRight = 3 };

const char* adj_type_name(AdjType t);

// Lane nodes (one per straight centerline segment) with four typed
// adjacencies. Node order is lane order, segments in centerline order, so
// within one lane the successor adjacency is the superdiagonal shift.
// adj(kPre) is the transpose of adj(kSuc) by construction.
//
// Immutable after build; the dilation cache locks internally so concurrent
// readers are safe. Movable but not copyable.
class LaneGraph {
 public:
  LaneGraph();
  LaneGraph(LaneGraph&&) = default;
  LaneGraph& operator=(LaneGraph&&) = default;

  long num_nodes() const { return static_cast<long>(node_centers.size()); }
  long num_lanes() const { return static_cast<long>(lane_ids.size()); }

  const SparseMatrix& adj(AdjType t) const {
    return adjacency[static_cast<int>(t)];
  }

  // Binarized k-step reachability along pre or suc edges, lazily cached.
  // Throws std::invalid_argument for left/right or k < 1.
  const SparseMatrix& dilated(AdjType t, int k) const;

  std::vector<Vec2> node_centers;  // midpoint of the two segment end points
  std::vector<Vec2> node_starts;
  std::vector<Vec2> node_ends;
  std::array<SparseMatrix, 4> adjacency;
  std::vector<long> node_lane;        // node index -> lane index
  std::vector<std::string> lane_ids;  // lane index -> source lane id

 private:
  struct DilationCache {
    std::mutex mutex;
    std::map<std::pair<int, int>, SparseMatrix> entries;
  };
  std::unique_ptr<DilationCache> cache_;

  friend LaneGraph merge_graphs(const std::vector<const LaneGraph*>& parts);
};

// Builds the lane graph. Throws ParseError for dangling lane references,
// centerlines with fewer than 2 points, repeated consecutive points, or
// duplicate lane ids.
LaneGraph build_lane_graph(const std::vector<Lane>& lanes);

// Elementwise OR of the four adjacencies, symmetrized.
SparseMatrix union_adjacency(const LaneGraph& graph);

// All (i, j) with ||b[j] - a[i]||_2 strictly below radius, ordered row-major
// by i then j.
std::vector<std::pair<long, long>> context_pairs(const std::vector<Vec2>& a,
                                                 const std::vector<Vec2>& b,
                                                 double radius);

// Same, restricted to pairs whose group labels match. Used for batches of
// disjoint scenes stacked in one coordinate frame.
std::vector<std::pair<long, long>> context_pairs_grouped(
    const std::vector<Vec2>& a, const std::vector<long>& group_a,
    const std::vector<Vec2>& b, const std::vector<long>& group_b,
    double radius);

// Block-diagonal union of several graphs, with node and lane indices
// offset. Dilation entries cached on every part are merged as well.
LaneGraph merge_graphs(const std::vector<const LaneGraph*>& parts);

// Stacks CSR blocks along the diagonal.
SparseMatrix block_diag(const std::vector<const SparseMatrix*>& blocks);

}  // namespace lanegcn
