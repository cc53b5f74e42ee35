#ifndef GELAB_EMBEDDING_HPP
#define GELAB_EMBEDDING_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gelab {

/// Node embedding matrix (n x d) tagged with its provenance.
struct Embedding {
    Eigen::MatrixXd values;
    std::string model;
    std::uint64_t seed = 0;
    int run = 0;

    Eigen::Index n_nodes() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }
};

/// CSV `node_id,z_0,...,z_{d-1}` with %.17g values (lossless round trip).
void write_embedding_csv(std::ostream& out, const Embedding& emb,
                         const std::vector<std::string>& node_ids);

/// Reads a CSV written by write_embedding_csv; node ids are returned in file
/// order and must be remapped by the caller if needed.
Embedding read_embedding_csv(std::istream& in);

}  // namespace gelab

#endif
