#include "lanegcn/lane_graph.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>

namespace lanegcn {

const char* adj_type_name(AdjType t) {
  switch (t) {
    case AdjType::kPre:
      return "pre";
    case AdjType::kSuc:
      return "suc";
    case AdjType::kLeft:
      return "left";
    case AdjType::kRight:
      return "right";
  }
  return "?";
}

LaneGraph::LaneGraph() : cache_(std::make_unique<DilationCache>()) {}

const SparseMatrix& LaneGraph::dilated(AdjType t, int k) const {
  if (t != AdjType::kPre && t != AdjType::kSuc) {
    throw std::invalid_argument(
        "dilation is only used for predecessor and successor adjacencies");
  }
  if (k < 1) {
    throw std::invalid_argument("dilation step must be >= 1, got " +
                                std::to_string(k));
  }
  if (k == 1) return adj(t);
  const auto key = std::make_pair(static_cast<int>(t), k);
  std::lock_guard<std::mutex> lock(cache_->mutex);
  auto it = cache_->entries.find(key);
  if (it == cache_->entries.end()) {
    it = cache_->entries
             .emplace(key, sparse_power(adj(t), k, /*binarize=*/true))
             .first;
  }
  return it->second;
}

namespace {

struct LaneSpan {
  long first_node = 0;
  long num_nodes = 0;
  long last_node() const { return first_node + num_nodes - 1; }
};

}  // namespace

LaneGraph build_lane_graph(const std::vector<Lane>& lanes) {
  std::unordered_map<std::string, long> lane_index;
  for (size_t i = 0; i < lanes.size(); ++i) {
    if (!lane_index.emplace(lanes[i].id, static_cast<long>(i)).second) {
      throw ParseError("duplicate lane id '" + lanes[i].id + "'");
    }
  }
  auto resolve = [&](const std::string& ref, const std::string& from,
                     const char* kind) -> long {
    auto it = lane_index.find(ref);
    if (it == lane_index.end()) {
      throw ParseError("lane '" + from + "' references unknown " + kind +
                       " lane '" + ref + "'");
    }
    return it->second;
  };

  LaneGraph g;
  std::vector<LaneSpan> spans(lanes.size());
  for (size_t li = 0; li < lanes.size(); ++li) {
    const Lane& lane = lanes[li];
    if (lane.centerline.size() < 2) {
      throw ParseError("lane '" + lane.id + "' centerline has " +
                       std::to_string(lane.centerline.size()) +
                       " points, need at least 2");
    }
    spans[li].first_node = g.num_nodes();
    spans[li].num_nodes = static_cast<long>(lane.centerline.size()) - 1;
    for (size_t p = 0; p + 1 < lane.centerline.size(); ++p) {
      const Vec2 a = lane.centerline[p];
      const Vec2 b = lane.centerline[p + 1];
      if (a == b) {
        throw ParseError("lane '" + lane.id +
                         "' has repeated consecutive centerline points");
      }
      g.node_starts.push_back(a);
      g.node_ends.push_back(b);
      g.node_centers.push_back((a + b) * 0.5);
      g.node_lane.push_back(static_cast<long>(li));
    }
    g.lane_ids.push_back(lane.id);
  }

  const long n = g.num_nodes();
  std::vector<Triplet> suc, left, right;

  // Along-lane edges between consecutive segments.
  for (const LaneSpan& span : spans) {
    for (long i = 0; i + 1 < span.num_nodes; ++i) {
      suc.push_back({span.first_node + i, span.first_node + i + 1, 1.0});
    }
  }

  // Cross-lane continuation: last node of a predecessor lane reaches the
  // first node of its successor lane. Both reference directions are
  // honored and deduplicated.
  std::set<std::pair<long, long>> cross;
  for (size_t li = 0; li < lanes.size(); ++li) {
    for (const std::string& ref : lanes[li].predecessors) {
      const long pi = resolve(ref, lanes[li].id, "predecessor");
      cross.insert({spans[pi].last_node(), spans[li].first_node});
    }
    for (const std::string& ref : lanes[li].successors) {
      const long si = resolve(ref, lanes[li].id, "successor");
      cross.insert({spans[li].last_node(), spans[si].first_node});
    }
  }
  for (const auto& [from, to] : cross) suc.push_back({from, to, 1.0});

  // Each node links to the spatially closest node of its declared
  // neighbour lane; ties resolve to the smaller node index.
  auto closest_on_lane = [&](long node, long lane_idx) -> long {
    const LaneSpan& span = spans[lane_idx];
    long best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (long j = span.first_node; j < span.first_node + span.num_nodes; ++j) {
      const double d = distance(g.node_centers[node], g.node_centers[j]);
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    return best;
  };
  for (size_t li = 0; li < lanes.size(); ++li) {
    const LaneSpan& span = spans[li];
    if (lanes[li].left) {
      const long target = resolve(*lanes[li].left, lanes[li].id, "left");
      for (long i = span.first_node; i < span.first_node + span.num_nodes;
           ++i) {
        left.push_back({i, closest_on_lane(i, target), 1.0});
      }
    }
    if (lanes[li].right) {
      const long target = resolve(*lanes[li].right, lanes[li].id, "right");
      for (long i = span.first_node; i < span.first_node + span.num_nodes;
           ++i) {
        right.push_back({i, closest_on_lane(i, target), 1.0});
      }
    }
  }

  SparseMatrix suc_m = SparseMatrix::from_triplets(n, n, std::move(suc));
  g.adjacency[static_cast<int>(AdjType::kPre)] = suc_m.transpose();
  g.adjacency[static_cast<int>(AdjType::kSuc)] = std::move(suc_m);
  g.adjacency[static_cast<int>(AdjType::kLeft)] =
      SparseMatrix::from_triplets(n, n, std::move(left));
  g.adjacency[static_cast<int>(AdjType::kRight)] =
      SparseMatrix::from_triplets(n, n, std::move(right));
  return g;
}

SparseMatrix union_adjacency(const LaneGraph& graph) {
  SparseMatrix acc = graph.adj(AdjType::kPre);
  acc = acc.plus(graph.adj(AdjType::kSuc));
  acc = acc.plus(graph.adj(AdjType::kLeft));
  acc = acc.plus(graph.adj(AdjType::kRight));
  acc = acc.plus(acc.transpose());
  return acc.binarized();
}

std::vector<std::pair<long, long>> context_pairs(const std::vector<Vec2>& a,
                                                 const std::vector<Vec2>& b,
                                                 double radius) {
  if (radius <= 0.0) {
    throw std::invalid_argument("context radius must be positive");
  }
  std::vector<std::pair<long, long>> out;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) {
      if (distance(a[i], b[j]) < radius) {
        out.emplace_back(static_cast<long>(i), static_cast<long>(j));
      }
    }
  }
  return out;
}

std::vector<std::pair<long, long>> context_pairs_grouped(
    const std::vector<Vec2>& a, const std::vector<long>& group_a,
    const std::vector<Vec2>& b, const std::vector<long>& group_b,
    double radius) {
  if (radius <= 0.0) {
    throw std::invalid_argument("context radius must be positive");
  }
  std::vector<std::pair<long, long>> out;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) {
      if (group_a[i] == group_b[j] && distance(a[i], b[j]) < radius) {
        out.emplace_back(static_cast<long>(i), static_cast<long>(j));
      }
    }
  }
  return out;
}

SparseMatrix block_diag(const std::vector<const SparseMatrix*>& blocks) {
  long rows = 0, cols = 0, nnz = 0;
  for (const SparseMatrix* b : blocks) {
    rows += b->rows();
    cols += b->cols();
    nnz += b->nnz();
  }
  std::vector<long> offsets;
  std::vector<long> col_idx;
  std::vector<double> vals;
  offsets.reserve(rows + 1);
  col_idx.reserve(nnz);
  vals.reserve(nnz);
  offsets.push_back(0);
  long col_base = 0;
  for (const SparseMatrix* b : blocks) {
    for (long r = 0; r < b->rows(); ++r) {
      for (long i = b->row_offsets()[r]; i < b->row_offsets()[r + 1]; ++i) {
        col_idx.push_back(col_base + b->col_indices()[i]);
        vals.push_back(b->values()[i]);
      }
      offsets.push_back(static_cast<long>(col_idx.size()));
    }
    col_base += b->cols();
  }
  return SparseMatrix(rows, cols, std::move(offsets), std::move(col_idx),
                      std::move(vals));
}

LaneGraph merge_graphs(const std::vector<const LaneGraph*>& parts) {
  LaneGraph g;
  long node_base = 0, lane_base = 0;
  for (const LaneGraph* p : parts) {
    g.node_centers.insert(g.node_centers.end(), p->node_centers.begin(),
                          p->node_centers.end());
    g.node_starts.insert(g.node_starts.end(), p->node_starts.begin(),
                         p->node_starts.end());
    g.node_ends.insert(g.node_ends.end(), p->node_ends.begin(),
                       p->node_ends.end());
    for (long l : p->node_lane) g.node_lane.push_back(lane_base + l);
    g.lane_ids.insert(g.lane_ids.end(), p->lane_ids.begin(),
                      p->lane_ids.end());
    node_base += p->num_nodes();
    lane_base += p->num_lanes();
  }
  (void)node_base;
  for (int t = 0; t < 4; ++t) {
    std::vector<const SparseMatrix*> blocks;
    blocks.reserve(parts.size());
    for (const LaneGraph* p : parts) blocks.push_back(&p->adjacency[t]);
    g.adjacency[t] = block_diag(blocks);
  }
  // Powers of a block-diagonal matrix are block-diagonal powers, so any
  // dilation every part has already built merges directly.
  for (AdjType t : {AdjType::kPre, AdjType::kSuc}) {
    std::set<int> ks;
    bool first = true;
    for (const LaneGraph* p : parts) {
      std::set<int> own;
      {
        std::lock_guard<std::mutex> lock(p->cache_->mutex);
        for (const auto& [key, m] : p->cache_->entries) {
          if (key.first == static_cast<int>(t)) own.insert(key.second);
        }
      }
      if (first) {
        ks = std::move(own);
        first = false;
      } else {
        std::set<int> kept;
        std::set_intersection(ks.begin(), ks.end(), own.begin(), own.end(),
                              std::inserter(kept, kept.begin()));
        ks = std::move(kept);
      }
    }
    for (int k : ks) {
      std::vector<const SparseMatrix*> blocks;
      for (const LaneGraph* p : parts) blocks.push_back(&p->dilated(t, k));
      g.cache_->entries.emplace(std::make_pair(static_cast<int>(t), k),
                                block_diag(blocks));
    }
  }
  return g;
}

}  // namespace lanegcn
