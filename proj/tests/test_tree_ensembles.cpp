#include <doctest.h>

#include <cmath>

#include "beamalign/checks/oracles.hpp"
#include "beamalign/tree_ensembles.hpp"

using namespace beamalign;

namespace {

Dataset make_data(Rng& rng, std::size_t m) {
    Dataset d;
    for (std::size_t i = 0; i < m; ++i) {
        const BeamPair z{rng.uniform(-kHalfPi, kHalfPi), rng.uniform(-kHalfPi, kHalfPi)};
        d.add(z, std::sin(3 * z.theta) + z.phi * z.phi + 0.1 * rng.normal());
    }
    return d;
}

std::vector<BeamPair> random_queries(Rng& rng, std::size_t n) {
    std::vector<BeamPair> zs;
    for (std::size_t i = 0; i < n; ++i) zs.push_back({rng.uniform(-kHalfPi, kHalfPi), rng.uniform(-kHalfPi, kHalfPi)});
    return zs;
}

}  // namespace

TEST_CASE("constant targets give a single leaf") {
    Dataset d;
    Rng rng(1);
    for (int i = 0; i < 10; ++i) d.add({rng.uniform(-1, 1), rng.uniform(-1, 1)}, 4.0);
    const auto tree = fit_regression_tree(d, TreeConfig{}, rng);
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.depth() == 0);
    CHECK(tree.predict({0.3, 0.3}) == 4.0);
}

TEST_CASE("two separated clusters split once on theta") {
    Dataset d;
    for (int i = 0; i < 5; ++i) d.add({-1.0 + 0.01 * i, 0.1 * i}, 0.0);
    for (int i = 0; i < 5; ++i) d.add({1.0 + 0.01 * i, 0.1 * i}, 10.0);
    Rng rng(2);
    const auto tree = fit_regression_tree(d, TreeConfig{}, rng);
    REQUIRE(tree.nodes().size() == 3);
    CHECK(tree.depth() == 1);
    CHECK(tree.nodes()[0].feature == 0);
    CHECK(tree.nodes()[0].threshold > -0.96);
    CHECK(tree.nodes()[0].threshold < 1.0);
    CHECK(tree.predict({-1.2, 0.0}) == 0.0);
    CHECK(tree.predict({1.2, 0.0}) == 10.0);
    CHECK(tree.leaf_count() == 2);
}

TEST_CASE("depth zero predicts the global mean") {
    Rng rng(3);
    const auto d = make_data(rng, 20);
    TreeConfig cfg;
    cfg.max_depth = 0;
    const auto tree = fit_regression_tree(d, cfg, rng);
    double mean = 0.0;
    for (const double y : d.values()) mean += y;
    mean /= 20.0;
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.predict({0.0, 0.0}) == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("trees respect max_depth and min_leaf") {
    Rng rng(4);
    for (const std::size_t depth : {1u, 2u, 3u, 6u}) {
        const auto d = make_data(rng, 64);
        TreeConfig cfg{depth, 3, 2};
        const auto tree = fit_regression_tree(d, cfg, rng);
        CHECK(tree.depth() <= depth);
        for (const auto& n : tree.nodes()) {
            CHECK(n.depth <= depth);
            if (n.feature >= 0) {
                CHECK(n.left > 0);
                CHECK(n.right > 0);
            }
        }
        // Every leaf holds at least min_leaf training rows.
        std::vector<int> counts(tree.nodes().size(), 0);
        for (const auto& z : d.points()) {
            int i = 0;
            while (tree.nodes()[i].feature >= 0) {
                const auto& n = tree.nodes()[i];
                i = (n.feature == 0 ? z.theta : z.phi) <= n.threshold ? n.left : n.right;
            }
            ++counts[i];
        }
        for (std::size_t i = 0; i < counts.size(); ++i)
            if (tree.nodes()[i].feature < 0) CHECK(counts[i] >= 3);
    }
}

TEST_CASE("tree traversal paths agree") {
    Rng rng(5);
    const auto d = make_data(rng, 80);
    const auto tree = fit_regression_tree(d, TreeConfig{6, 1, 2}, rng);
    const auto zs = random_queries(rng, 301);
    std::vector<double> out(zs.size());
    tree.predict_into(zs, out);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        CHECK(out[i] == tree.predict(zs[i]));
        CHECK(out[i] == checks::walk_tree(tree, zs[i]));
    }
}

TEST_CASE("GBRT on constant data has no spread") {
    Dataset d;
    Rng rng(6);
    for (int i = 0; i < 12; ++i) d.add({rng.uniform(-1, 1), rng.uniform(-1, 1)}, 2.5);
    const auto model = gbrt_fit(d, GbrtConfig{}, rng);
    const auto p = gbrt_predict(model, {0.1, 0.1});
    CHECK(p.mu == doctest::Approx(2.5));
    CHECK(p.sigma == 0.0);
}

TEST_CASE("one boosting stage with unit rate reproduces a single tree") {
    Rng rng(7);
    const auto d = make_data(rng, 30);
    GbrtConfig cfg;
    cfg.n_trees = 1;
    cfg.learning_rate = 1.0;
    cfg.standardize = false;
    Rng a(70);
    const auto model = gbrt_fit(d, cfg, a);

    double mean = 0.0;
    for (const double y : d.values()) mean += y;
    mean /= 30.0;
    Dataset resid;
    for (std::size_t i = 0; i < d.size(); ++i) resid.add(d.points()[i], d.values()[i] - mean);
    Rng b(70);
    const auto tree = fit_regression_tree(resid, cfg.tree, b);
    for (const auto& z : random_queries(rng, 50)) {
        CHECK(model.boosted_prediction(z) == doctest::Approx(mean + tree.predict(z)).epsilon(1e-12));
        CHECK(model.predict(z).sigma == 0.0);
    }
}

TEST_CASE("staged training loss never increases") {
    Rng rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        const auto d = make_data(rng, 40);
        const auto model = gbrt_fit(d, GbrtConfig{}, rng);
        const auto loss = model.staged_training_loss(d);
        REQUIRE(loss.size() == 101);
        for (std::size_t t = 1; t < loss.size(); ++t) CHECK(loss[t] <= loss[t - 1] + 1e-12 * loss[0]);
        CHECK(loss.back() < loss.front());
    }
}

TEST_CASE("GBRT moments match the per-tree oracle") {
    Rng rng(9);
    const auto d = make_data(rng, 40);
    GbrtConfig cfg;
    cfg.n_trees = 5;
    const auto model = gbrt_fit(d, cfg, rng);
    const auto zs = random_queries(rng, 100);
    const auto batch = model.predict_batch(zs);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const auto p = model.predict(zs[i]);
        const auto want = checks::per_tree_moments(model, zs[i]);
        CHECK(p.mu == doctest::Approx(checks::staged_boosted_value(model, zs[i])).epsilon(1e-12));
        CHECK(p.mu == doctest::Approx(want.mu).epsilon(1e-12));
        CHECK(p.sigma == doctest::Approx(want.sigma).epsilon(1e-12));
        CHECK(batch[i].mu == p.mu);
        CHECK(batch[i].sigma == p.sigma);
        CHECK(model.tree_estimates(zs[i]).size() == 5);
    }
}

TEST_CASE("random forest basics") {
    Rng rng(10);
    Dataset flat;
    for (int i = 0; i < 10; ++i) flat.add({rng.uniform(-1, 1), rng.uniform(-1, 1)}, -3.0);
    const auto p = rf_predict(rf_fit(flat, RfConfig{}, rng), {0.0, 0.0});
    CHECK(p.mu == doctest::Approx(-3.0));
    CHECK(p.sigma == doctest::Approx(0.0).epsilon(1e-12));

    const auto d = make_data(rng, 50);
    RfConfig one;
    one.n_trees = 1;
    const auto single = rf_fit(d, one, rng);
    CHECK(rf_predict(single, {0.2, 0.2}).sigma == 0.0);

    RfConfig ten;
    ten.n_trees = 10;
    const auto forest = rf_fit(d, ten, rng);
    const auto zs = random_queries(rng, 60);
    const auto batch = forest.predict_batch(zs);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const auto per = forest.tree_predictions(zs[i]);
        REQUIRE(per.size() == 10);
        double mean = 0.0;
        for (const double v : per) mean += v;
        mean /= 10.0;
        double ss = 0.0;
        for (const double v : per) ss += (v - mean) * (v - mean);
        const auto q = forest.predict(zs[i]);
        CHECK(q.mu == doctest::Approx(mean).epsilon(1e-12));
        CHECK(q.sigma == doctest::Approx(std::sqrt(ss / 9.0)).epsilon(1e-12));
        CHECK(batch[i].mu == q.mu);
        CHECK(batch[i].sigma == q.sigma);
    }
}

TEST_CASE("surrogate wrappers") {
    Rng rng(11);
    const auto d = make_data(rng, 30);
    GbrtSurrogate g;
    RfSurrogate r;
    CHECK_THROWS(g.predict({0, 0}));
    CHECK_THROWS(r.predict({0, 0}));
    g.fit(d, rng);
    r.fit(d, rng);
    CHECK(g.name() == "GBRT");
    CHECK(r.name() == "RF");
    CHECK_FALSE(g.sigma_upper_bound().has_value());
    const auto zs = random_queries(rng, 10);
    const auto gb = g.predict_batch(zs);
    const auto gm = g.predict_mean_batch(zs);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        CHECK(gb[i].mu == g.predict(zs[i]).mu);
        CHECK(gm[i] == gb[i].mu);
    }
}

TEST_CASE("fitting is reproducible from the stream") {
    Rng rng(12);
    const auto d = make_data(rng, 30);
    Rng a(5), b(5);
    const auto fa = rf_fit(d, RfConfig{}, a);
    const auto fb = rf_fit(d, RfConfig{}, b);
    for (const auto& z : random_queries(rng, 20)) {
        CHECK(fa.predict(z).mu == fb.predict(z).mu);
        CHECK(fa.predict(z).sigma == fb.predict(z).sigma);
    }
}
