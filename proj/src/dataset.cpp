#include "gelab/dataset.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gelab {

const DatasetSpec& DatasetRegistry::find(const std::string& name) const {
    for (const auto& d : datasets) {
        if (d.name == name) return d;
    }
    throw std::runtime_error("dataset '" + name + "' is not in the registry");
}

bool DatasetRegistry::contains(const std::string& name) const {
    for (const auto& d : datasets) {
        if (d.name == name) return true;
    }
    return false;
}

DatasetRegistry load_registry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open registry file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("registry parse error in " + path + ": " + e.what());
    }

    DatasetRegistry reg;
    fs::path base = fs::path(path).parent_path();
    std::string data_dir = j.value("data_dir", std::string("."));
    reg.data_dir = (base / data_dir).lexically_normal().string();

    for (auto& [name, entry] : j.at("datasets").items()) {
        DatasetSpec d;
        d.name = name;
        d.edges_file = entry.at("edges").get<std::string>();
        if (entry.contains("attributes")) d.attributes_file = entry["attributes"].get<std::string>();
        if (entry.contains("labels")) d.labels_file = entry["labels"].get<std::string>();
        d.directed = entry.value("directed", false);
        if (entry.contains("sha256")) {
            const auto& s = entry["sha256"];
            d.edges_sha256 = s.value("edges", "");
            d.attributes_sha256 = s.value("attributes", "");
            d.labels_sha256 = s.value("labels", "");
        }
        reg.datasets.push_back(std::move(d));
    }
    std::sort(reg.datasets.begin(), reg.datasets.end(),
              [](const DatasetSpec& a, const DatasetSpec& b) { return a.name < b.name; });
    return reg;
}

namespace {

std::string resolve(const DatasetRegistry& reg, const std::string& rel) {
    return (fs::path(reg.data_dir) / rel).string();
}

std::ifstream open_or_throw(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("missing " + what + " file: " + path +
                                 " (run the fetch subcommand for details)");
    }
    return in;
}

}  // namespace

Graph load_dataset(const DatasetRegistry& registry, const std::string& name) {
    const DatasetSpec& spec = registry.find(name);
    auto edges_path = resolve(registry, spec.edges_file);
    auto in = open_or_throw(edges_path, "edge list");
    Graph g = load_edge_list(in, EdgeListOptions{spec.directed});
    if (spec.attributes_file) {
        auto attr_in = open_or_throw(resolve(registry, *spec.attributes_file), "attribute");
        load_attributes(attr_in, g);
    }
    if (spec.labels_file) {
        auto lab_in = open_or_throw(resolve(registry, *spec.labels_file), "label");
        load_labels(lab_in, g);
    }
    return g;
}

FetchReport verify_datasets(const DatasetRegistry& registry,
                            const std::vector<std::string>& only) {
    FetchReport report;
    auto wanted = [&](const std::string& name) {
        if (only.empty()) return true;
        return std::find(only.begin(), only.end(), name) != only.end();
    };
    auto check = [&](const std::string& dataset, const std::string& rel, const std::string& sha) {
        std::string path = resolve(registry, rel);
        std::string tag = dataset + "/" + rel;
        if (!fs::exists(path)) {
            report.missing.push_back(tag + " (expected at " + path + ")");
            return;
        }
        if (!sha.empty() && sha256_file(path) != sha) {
            report.corrupt.push_back(tag);
            return;
        }
        report.verified.push_back(tag);
    };
    for (const auto& d : registry.datasets) {
        if (!wanted(d.name)) continue;
        check(d.name, d.edges_file, d.edges_sha256);
        if (d.attributes_file) check(d.name, *d.attributes_file, d.attributes_sha256);
        if (d.labels_file) check(d.name, *d.labels_file, d.labels_sha256);
    }
    return report;
}

namespace {

std::string digest_hex(EVP_MD_CTX* ctx) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    static const char* hex = "0123456789abcdef";
    std::string out(len * 2, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[2 * i] = hex[md[i] >> 4];
        out[2 * i + 1] = hex[md[i] & 0xf];
    }
    return out;
}

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
        if (!in) break;
    }
    std::string out = digest_hex(ctx);
    EVP_MD_CTX_free(ctx);
    return out;
}

std::string sha256_string(const std::string& text) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, text.data(), text.size());
    std::string out = digest_hex(ctx);
    EVP_MD_CTX_free(ctx);
    return out;
}

}  // namespace gelab
