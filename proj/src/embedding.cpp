#include "gelab/embedding.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gelab {

void write_embedding_csv(std::ostream& out, const Embedding& emb,
                         const std::vector<std::string>& node_ids) {
    if (static_cast<Eigen::Index>(node_ids.size()) != emb.values.rows()) {
        throw std::invalid_argument("write_embedding_csv: node id count mismatch");
    }
    out << "node_id";
    for (Eigen::Index j = 0; j < emb.values.cols(); ++j) out << ",z_" << j;
    out << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < emb.values.rows(); ++i) {
        out << node_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < emb.values.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", emb.values(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

Embedding read_embedding_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("embedding csv: empty file");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        bool first = true;
        while (std::getline(ss, field, ',')) {
            if (first) {
                first = false;  // node id column
                continue;
            }
            row.push_back(std::stod(field));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("embedding csv: no data rows");
    Embedding emb;
    emb.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) {
            throw std::runtime_error("embedding csv: ragged rows");
        }
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            emb.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return emb;
}

}  // namespace gelab
