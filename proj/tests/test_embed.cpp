#include <Eigen/Dense>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gelab/eigenmaps.hpp"
#include "gelab/graph.hpp"
#include "gelab/skipgram.hpp"
#include "gelab/walks.hpp"

using namespace gelab;

namespace {

Graph from_text(const std::string& text) {
    std::istringstream in(text);
    return load_edge_list(in, {});
}

Eigen::MatrixXd sym_laplacian(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.n_nodes);
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
    for (std::uint32_t v = 0; v < g.n_nodes; ++v) {
        const double dv = static_cast<double>(g.neighbors[v].size());
        for (auto u : g.neighbors[v]) {
            const double du = static_cast<double>(g.neighbors[u].size());
            lap(v, u) -= 1.0 / std::sqrt(dv * du);
        }
    }
    return lap;
}

}  // namespace

TEST_CASE("laplacian eigenmaps") {
    SUBCASE("columns are eigenvectors of L matching the dense oracle") {
        auto g = from_text("0 1\n1 2\n0 2\n2 3\n3 4\n4 0\n1 4");
        const int d = 3;
        auto emb = laplacian_eigenmaps(g, d);
        auto lap = sym_laplacian(g);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
        for (int j = 0; j < d; ++j) {
            const double lambda = solver.eigenvalues()(j + 1);  // trivial vector dropped
            Eigen::VectorXd col = emb.values.col(j);
            CHECK((lap * col - lambda * col).norm() < 1e-8);
        }
    }
    SUBCASE("eigenvectors are orthonormal") {
        auto g = from_text("0 1\n1 2\n2 3\n3 0\n0 2");
        auto emb = laplacian_eigenmaps(g, 3);
        Eigen::MatrixXd gram = emb.values.transpose() * emb.values;
        CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-8);
    }
    SUBCASE("two disconnected K2s: kernel vector is constant per component") {
        auto g = from_text("0 1\n2 3");
        auto emb = laplacian_eigenmaps(g, 1);
        auto lap = sym_laplacian(g);
        Eigen::VectorXd col = emb.values.col(0);
        CHECK((lap * col).norm() < 1e-10);  // second kernel vector
        CHECK(col(g.node_index.at("0")) == doctest::Approx(col(g.node_index.at("1"))));
        CHECK(col(g.node_index.at("2")) == doctest::Approx(col(g.node_index.at("3"))));
    }
    SUBCASE("C4 ring rows have equal norm") {
        auto g = from_text("0 1\n1 2\n2 3\n3 0");
        auto emb = laplacian_eigenmaps(g, 2);
        const double base = emb.values.row(0).norm();
        for (int i = 1; i < 4; ++i) {
            CHECK(emb.values.row(i).norm() == doctest::Approx(base).epsilon(1e-8));
        }
    }
    SUBCASE("n <= d rejected") {
        auto g = from_text("0 1\n1 2");
        CHECK_THROWS_AS(laplacian_eigenmaps(g, 3), std::invalid_argument);
    }
}

TEST_CASE("biased random walks") {
    SUBCASE("single edge alternates endpoints") {
        auto g = from_text("a b");
        WalkConfig cfg;
        cfg.walk_length = 10;
        cfg.num_walks = 2;
        cfg.seed = 5;
        auto corpus = biased_random_walks(g, cfg);
        REQUIRE(corpus.walks.size() == 4);
        for (const auto& walk : corpus.walks) {
            REQUIRE(walk.size() == 10);
            for (std::size_t i = 1; i < walk.size(); ++i) REQUIRE(walk[i] != walk[i - 1]);
        }
    }
    SUBCASE("huge p suppresses immediate returns on a triangle") {
        auto g = from_text("0 1\n1 2\n0 2");
        WalkConfig cfg;
        cfg.p = 1e12;
        cfg.q = 1.0;
        cfg.walk_length = 80;
        cfg.num_walks = 50;
        cfg.seed = 7;
        auto corpus = biased_random_walks(g, cfg);
        std::size_t returns = 0, steps = 0;
        for (const auto& walk : corpus.walks) {
            for (std::size_t i = 2; i < walk.size(); ++i) {
                ++steps;
                if (walk[i] == walk[i - 2]) ++returns;
            }
        }
        REQUIRE(steps > 10000);
        CHECK(static_cast<double>(returns) / static_cast<double>(steps) < 0.05);
    }
    SUBCASE("p=q=1 matches uniform neighbor sampling within 3 sigma") {
        auto g = from_text("0 1\n1 2\n0 2");
        WalkConfig cfg;
        cfg.walk_length = 80;
        cfg.num_walks = 60;
        cfg.seed = 11;
        auto corpus = biased_random_walks(g, cfg);
        std::size_t returns = 0, steps = 0;
        for (const auto& walk : corpus.walks) {
            for (std::size_t i = 2; i < walk.size(); ++i) {
                ++steps;
                if (walk[i] == walk[i - 2]) ++returns;
            }
        }
        // each step has exactly two neighbor choices, return prob 1/2
        const double freq = static_cast<double>(returns) / static_cast<double>(steps);
        const double sigma = std::sqrt(0.25 / static_cast<double>(steps));
        CHECK(std::abs(freq - 0.5) < 3.0 * sigma);
    }
    SUBCASE("same seed reproduces the corpus") {
        auto g = from_text("0 1\n1 2\n2 3\n3 0\n0 2");
        WalkConfig cfg;
        cfg.seed = 13;
        auto c1 = biased_random_walks(g, cfg);
        auto c2 = biased_random_walks(g, cfg);
        REQUIRE(c1.walks == c2.walks);
    }
    SUBCASE("isolated nodes yield singleton walks") {
        Graph g;
        g.n_nodes = 3;
        g.node_ids = {"0", "1", "2"};
        g.node_index = {{"0", 0}, {"1", 1}, {"2", 2}};
        g.neighbors = {{1}, {0}, {}};
        WalkConfig cfg;
        cfg.num_walks = 1;
        auto corpus = biased_random_walks(g, cfg);
        REQUIRE(corpus.walks.size() == 3);
        CHECK(corpus.walks[2] == std::vector<std::uint32_t>{2});
    }
    SUBCASE("nonpositive p or q rejected") {
        auto g = from_text("0 1");
        WalkConfig cfg;
        cfg.p = 0.0;
        CHECK_THROWS_AS(biased_random_walks(g, cfg), std::invalid_argument);
    }
}

TEST_CASE("skipgram") {
    SUBCASE("window enumeration") {
        auto pairs = window_pairs({10, 11, 12, 13}, 2);
        // center 11 sees 10, 12 and 13
        std::set<std::pair<std::uint32_t, std::uint32_t>> set(pairs.begin(), pairs.end());
        CHECK(set.count({11, 10}) == 1);
        CHECK(set.count({11, 12}) == 1);
        CHECK(set.count({11, 13}) == 1);
        CHECK(set.count({10, 13}) == 0);  // outside the window
    }
    SUBCASE("embedding has one row per corpus node") {
        WalkCorpus corpus;
        corpus.n_nodes = 5;
        corpus.walks = {{0, 1, 2, 3, 4}, {4, 3, 2, 1, 0}};
        SkipGramConfig cfg;
        cfg.dim = 8;
        cfg.epochs = 1;
        auto result = skipgram_train(corpus, cfg);
        CHECK(result.embedding.values.rows() == 5);
        CHECK(result.embedding.values.cols() == 8);
    }
    SUBCASE("two disconnected cliques separate by cosine similarity") {
        auto g = from_text("0 1\n1 2\n0 2\n3 4\n4 5\n3 5");
        WalkConfig wcfg;
        wcfg.walk_length = 40;
        wcfg.num_walks = 10;
        wcfg.seed = 3;
        auto corpus = biased_random_walks(g, wcfg);
        SkipGramConfig scfg;
        scfg.dim = 16;
        scfg.window = 5;
        scfg.epochs = 5;
        scfg.seed = 4;
        auto emb = skipgram_train(corpus, scfg).embedding.values;
        auto cosine = [&](int a, int b) {
            return emb.row(a).dot(emb.row(b)) / (emb.row(a).norm() * emb.row(b).norm());
        };
        double intra = (cosine(0, 1) + cosine(1, 2) + cosine(0, 2) + cosine(3, 4) + cosine(4, 5) +
                        cosine(3, 5)) /
                       6.0;
        double inter = 0.0;
        for (int a = 0; a < 3; ++a) {
            for (int b = 3; b < 6; ++b) inter += cosine(a, b);
        }
        inter /= 9.0;
        CHECK(intra > inter);
    }
    SUBCASE("epoch losses are non-increasing up to rare violations") {
        auto g = from_text("0 1\n1 2\n0 2\n2 3\n3 4\n4 5\n3 5");
        WalkConfig wcfg;
        wcfg.walk_length = 30;
        wcfg.num_walks = 8;
        wcfg.seed = 17;
        auto corpus = biased_random_walks(g, wcfg);
        SkipGramConfig scfg;
        scfg.dim = 16;
        scfg.window = 4;
        scfg.epochs = 8;
        scfg.seed = 19;
        auto losses = skipgram_train(corpus, scfg).epoch_losses;
        REQUIRE(losses.size() == 8);
        int violations = 0;
        for (std::size_t e = 1; e < losses.size(); ++e) {
            if (losses[e] > losses[e - 1]) ++violations;
        }
        CHECK(violations <= 1);  // 5% of epoch pairs, rounded up generously
    }
    SUBCASE("empty corpus rejected") {
        WalkCorpus corpus;
        corpus.n_nodes = 3;
        SkipGramConfig cfg;
        CHECK_THROWS_AS(skipgram_train(corpus, cfg), std::invalid_argument);
    }
}
