#ifndef GELAB_DATASET_HPP
#define GELAB_DATASET_HPP

#include <optional>
#include <string>
#include <vector>

#include "gelab/graph.hpp"

namespace gelab {

/// One entry of the dataset registry: file locations are relative to the
/// registry's data directory.
struct DatasetSpec {
    std::string name;
    std::string edges_file;
    std::optional<std::string> attributes_file;  // Planetoid .content layout
    std::optional<std::string> labels_file;      // "<id> <label>" per line
    bool directed = false;
    // Expected SHA-256 per file (hex), keyed like the *_file fields; empty
    // strings skip verification.
    std::string edges_sha256;
    std::string attributes_sha256;
    std::string labels_sha256;
};

struct DatasetRegistry {
    std::string data_dir;
    std::vector<DatasetSpec> datasets;

    const DatasetSpec& find(const std::string& name) const;
    bool contains(const std::string& name) const;
};

/// Reads the JSON registry (see configs/datasets.json). `data_dir` entries in
/// the file are resolved relative to the registry file's directory.
DatasetRegistry load_registry(const std::string& path);

/// Loads edges plus any attribute/label files. Missing files raise an error
/// naming the expected absolute path.
Graph load_dataset(const DatasetRegistry& registry, const std::string& name);

struct FetchReport {
    std::vector<std::string> verified;  // "<dataset>/<file>"
    std::vector<std::string> missing;
    std::vector<std::string> corrupt;
    bool ok() const { return missing.empty() && corrupt.empty(); }
};

/// Verifies presence and checksums of every registered file.
FetchReport verify_datasets(const DatasetRegistry& registry,
                            const std::vector<std::string>& only = {});

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);
/// Hex SHA-256 of a string.
std::string sha256_string(const std::string& text);

}  // namespace gelab

#endif
