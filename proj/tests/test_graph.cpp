#include <random>
#include <sstream>

#include "doctest.h"
#include "gelab/graph.hpp"
#include "gelab/tensor.hpp"

using namespace gelab;

namespace {

Graph from_text(const std::string& text, bool directed = false) {
    std::istringstream in(text);
    return load_edge_list(in, EdgeListOptions{directed});
}

}  // namespace

TEST_CASE("edge list parsing") {
    auto g = from_text("0 1\n1 2");
    CHECK(g.n_nodes == 3);
    CHECK(g.edges.size() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
    CHECK_FALSE(g.has_edge(0, 2));

    SUBCASE("reciprocal pairs deduplicate in undirected mode") {
        auto h = from_text("a b\nb a");
        CHECK(h.n_nodes == 2);
        CHECK(h.edges.size() == 1);
    }
    SUBCASE("weight tokens are dropped, commas accepted") {
        auto h = from_text("7188,1,10\n430,1,-2");
        CHECK(h.n_nodes == 3);
        CHECK(h.edges.size() == 2);
    }
    SUBCASE("comments and blank lines are skipped") {
        auto h = from_text("# header\n\n0 1\n");
        CHECK(h.edges.size() == 1);
    }
    SUBCASE("self loops dropped at ingestion") {
        auto h = from_text("0 0\n0 1");
        CHECK(h.edges.size() == 1);
    }
    SUBCASE("malformed line reports its number") {
        std::istringstream in("0 1\nnonsense_token\n");
        CHECK_THROWS_WITH_AS(load_edge_list(in, {}), doctest::Contains("line 2"),
                             std::runtime_error);
    }
    SUBCASE("empty input is an error") {
        std::istringstream in("# nothing\n");
        CHECK_THROWS_AS(load_edge_list(in, {}), std::runtime_error);
    }
    SUBCASE("reindexing round-trips external ids") {
        auto h = from_text("42 9\n9 1000007");
        for (std::uint32_t v = 0; v < h.n_nodes; ++v) {
            CHECK(h.node_index.at(h.node_ids[v]) == v);
        }
    }
}

TEST_CASE("attribute loading") {
    auto g = from_text("n0 n1\nn1 n2");
    SUBCASE("3-node file with 4-dim bag of words") {
        std::istringstream in("n0 1 0 0 1 labelA\nn1 0 1 0 0 labelB\nn2 0 0 0 1 labelA\n");
        load_attributes(in, g);
        CHECK(g.attr_dim == 4);
        CHECK(g.labels.size() == 3);
        CHECK(g.n_classes == 2);
        CHECK(g.labels[g.node_index.at("n0")] == g.labels[g.node_index.at("n2")]);
        auto x = attribute_matrix(g);
        CHECK(x.rows == 3);
        CHECK(x.cols == 4);
        CHECK(x.nnz() == 4);
    }
    SUBCASE("row width mismatch") {
        std::istringstream in("n0 1 0 labelA\nn1 0 labelB\n");
        CHECK_THROWS_AS(load_attributes(in, g), std::runtime_error);
    }
    SUBCASE("node listed twice") {
        std::istringstream in("n0 1 0 A\nn0 0 1 B\nn2 1 1 A\n");
        CHECK_THROWS_AS(load_attributes(in, g), std::runtime_error);
    }
    SUBCASE("unknown node rejected") {
        std::istringstream in("zz 1 0 A\n");
        CHECK_THROWS_AS(load_attributes(in, g), std::runtime_error);
    }
}

TEST_CASE("augmented adjacency") {
    SUBCASE("K3 gets ones everywhere") {
        auto g = from_text("0 1\n1 2\n0 2");
        auto ahat = augmented_adjacency(g);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) CHECK(ahat.at(i, j) == 1.0);
        }
    }
    SUBCASE("single node without edges") {
        Graph g;
        g.n_nodes = 1;
        g.node_ids = {"0"};
        g.node_index = {{"0", 0}};
        g.neighbors = {{}};
        auto ahat = augmented_adjacency(g);
        CHECK(ahat.rows == 1);
        CHECK(ahat.nnz() == 1);
        CHECK(ahat.at(0, 0) == 1.0);
    }
    SUBCASE("P3 row sums are degree+1") {
        auto g = from_text("0 1\n1 2");
        auto sums = augmented_adjacency(g).row_sums();
        CHECK(sums[0] == 2.0);
        CHECK(sums[1] == 3.0);
        CHECK(sums[2] == 2.0);
    }
    SUBCASE("directed input is symmetrized") {
        auto g = from_text("0 1\n2 1", true);
        auto ahat = augmented_adjacency(g);
        CHECK(ahat.is_symmetric());
        CHECK(ahat.at(1, 0) == 1.0);
    }
}

TEST_CASE("normalized adjacency") {
    auto g = from_text("0 1\n1 2\n0 2");
    auto ahat = augmented_adjacency(g);
    SUBCASE("mean rows sum to one") {
        auto m = normalize_adjacency(ahat, NormalizeMode::Mean);
        for (double s : m.row_sums()) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("spectral on K3 is uniform 1/3") {
        auto m = normalize_adjacency(ahat, NormalizeMode::Spectral);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(m.at(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
            }
        }
        CHECK(m.is_symmetric(1e-15));
    }
}

TEST_CASE("proximity power") {
    SUBCASE("P3 cube has walks of length three") {
        auto g = from_text("0 1\n1 2");
        auto p3 = proximity_power(g, 3);
        // cube the dense adjacency by hand: walks 0-1-0-1, 0-1-2-1, ...
        auto a = nk::densify(adjacency_matrix(g));
        nk::Matrix cube = a * a * a;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(p3.at(i, j) == (cube(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(j)) >= 1.0
                                          ? 1.0
                                          : 0.0));
            }
        }
        CHECK(p3.at(0, 1) == 1.0);
    }
    SUBCASE("K3 cube is all ones") {
        auto g = from_text("0 1\n1 2\n0 2");
        auto p3 = proximity_power(g, 3);
        CHECK(p3.nnz() == 9);
    }
    SUBCASE("k=1 equals the adjacency on random graphs") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            std::uniform_int_distribution<int> size(2, 50);
            const int n = size(rng);
            std::ostringstream edges;
            std::bernoulli_distribution coin(0.15);
            bool any = false;
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    if (coin(rng)) {
                        edges << i << ' ' << j << '\n';
                        any = true;
                    }
                }
            }
            if (!any) edges << "0 1\n";
            auto g = from_text(edges.str());
            auto p1 = proximity_power(g, 1);
            auto a = adjacency_matrix(g);
            REQUIRE(p1.nnz() == a.nnz());
            CHECK(p1.row_ptr == a.row_ptr);
            CHECK(p1.col_idx == a.col_idx);
        }
    }
    SUBCASE("k=0 is an error") {
        auto g = from_text("0 1");
        CHECK_THROWS_AS(proximity_power(g, 0), std::invalid_argument);
    }
    SUBCASE("matches dense matrix powers on random graphs") {
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 10; ++trial) {
            std::uniform_int_distribution<int> size(3, 25);
            const int n = size(rng);
            std::ostringstream edges;
            std::bernoulli_distribution coin(0.2);
            edges << "0 1\n";
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    if (coin(rng)) edges << i << ' ' << j << '\n';
                }
            }
            auto g = from_text(edges.str());
            auto a = nk::densify(adjacency_matrix(g));
            nk::Matrix power = a;
            for (int k = 1; k <= 4; ++k) {
                auto pk = proximity_power(g, k);
                auto dense = nk::densify(pk);
                for (Eigen::Index i = 0; i < dense.rows(); ++i) {
                    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
                        REQUIRE(dense(i, j) == (power(i, j) >= 1.0 ? 1.0 : 0.0));
                    }
                }
                power = power * a;
            }
        }
    }
}

TEST_CASE("one hot features") {
    auto g = from_text("0 1\n1 2");
    auto x = one_hot_features(g);
    CHECK(x.rows == 3);
    CHECK(x.nnz() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x.at(i, i) == 1.0);
    // Ahat * I = Ahat downstream
    auto ahat = augmented_adjacency(g);
    nk::Tape tape;
    auto prod = tape.matmul(ahat, nk::tensor(nk::densify(x)));
    CHECK(prod->value == nk::densify(ahat));
}

TEST_CASE("symmetry of normalizations on random undirected graphs") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        std::uniform_int_distribution<int> size(2, 40);
        const int n = size(rng);
        std::ostringstream edges;
        std::bernoulli_distribution coin(0.2);
        edges << "0 1\n";
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (coin(rng)) edges << i << ' ' << j << '\n';
            }
        }
        auto g = from_text(edges.str());
        auto ahat = augmented_adjacency(g);
        CHECK(ahat.is_symmetric());
        CHECK(normalize_adjacency(ahat, NormalizeMode::Spectral).is_symmetric(1e-12));
        auto mean = normalize_adjacency(ahat, NormalizeMode::Mean);
        for (double s : mean.row_sums()) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}
