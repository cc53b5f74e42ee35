#ifndef GELAB_CLUSTER_HPP
#define GELAB_CLUSTER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace gelab {

struct Partition {
    std::vector<int> assignment;  // cluster id per point, contiguous 0..k-1
    int k = 0;
    double inertia = 0.0;  // k-means only
};

/// Lloyd's algorithm with k-means++ seeding; iterates until the largest
/// centroid movement drops below 1e-6 or 300 iterations. Keeps the best
/// inertia over `restarts` seedings. Empty clusters are repaired by
/// splitting the largest cluster at its farthest point.
Partition kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10);

/// First-integer-neighbor clustering hierarchy: link i and j when one is the
/// other's cosine 1-NN or they share a 1-NN, take connected components,
/// recurse on the cluster means until a single cluster remains. Returns
/// every intermediate partition, strictly coarsening.
std::vector<Partition> finch(const Eigen::MatrixXd& points);

}  // namespace gelab

#endif
