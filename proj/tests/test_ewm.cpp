#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "visrisk/error.hpp"
#include "visrisk/ewm.hpp"

using namespace visrisk;
using namespace visrisk::ewm;

namespace {

// Central-difference gradient of the objective.
std::vector<double> fd_gradient(const Design& d, std::vector<double> p, double l2) {
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(p[i]));
        const double keep = p[i];
        p[i] = keep + h;
        const double up = objective(d, p, l2);
        p[i] = keep - h;
        const double down = objective(d, p, l2);
        p[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

Design random_design(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Design d;
    d.indicators = testsupport::names("k", cols);
    d.features = Matrix(rows, cols);
    for (auto& v : d.features.data()) v = u(rng);
    for (std::size_t r = 0; r < rows; ++r) d.labels.push_back(u(rng) < 0.3 + 0.4 * d.features(r, 0) ? 1.0 : 0.0);
    return d;
}

}  // namespace

TEST_CASE("logistic") {
    CHECK(logistic(0.0) == 0.5);
    CHECK(logistic(0.4) == doctest::Approx(0.59869).epsilon(1e-5));
    CHECK(logistic(-800.0) > 0.0);
    CHECK(logistic(800.0) < 1.0);
    CHECK(logistic(40.0) < 1.0);
}

TEST_CASE("score: zero model gives 0.5; contributions add up exactly") {
    std::mt19937_64 rng(1);
    auto cube = percentile_transform(testsupport::random_cube(rng, 3, 6, 4, 0.1));
    EwmModel zero{{{"g1", {"k0", "k1"}}, {"g2", {"k2", "k3"}}}, {{"k0", 0}, {"k1", 0}, {"k2", 0}, {"k3", 0}}, 0.0};
    for (const auto& row : score(zero, cube).rows)
        if (row.scored) CHECK(row.probability == 0.5);

    EwmModel m{{{"g1", {"k0", "k1"}}, {"g2", {"k2"}}, {"g3", {"k3"}}},
               {{"k0", 1.3}, {"k1", -0.7}, {"k2", 2.1}, {"k3", 0.4}},
               -0.9};
    auto series = score(m, cube);
    std::size_t skipped = 0;
    for (const auto& row : series.rows) {
        if (!row.scored) {
            ++skipped;
            CHECK_FALSE(row.missing.empty());
            continue;
        }
        double total = series.bias;
        for (double c : row.contributions) total += c;
        CHECK(total == row.score);
        CHECK(row.probability == logistic(row.score));
    }
    CHECK(skipped > 0);
}

TEST_CASE("score: group sums 0.2, 0.3, -0.1 give probability 0.59869") {
    DataCube cube({"A"}, testsupport::quarters(1), {"a", "b", "c"});
    cube.set(0, 0, 0, 20.0);
    cube.set(0, 0, 1, 30.0);
    cube.set(0, 0, 2, 10.0);
    EwmModel m{{{"g1", {"a"}}, {"g2", {"b"}}, {"g3", {"c"}}}, {{"a", 1.0}, {"b", 1.0}, {"c", -1.0}}, 0.0};
    auto row = score(m, cube).rows.at(0);
    CHECK(row.contributions[0] == doctest::Approx(0.2));
    CHECK(row.contributions[1] == doctest::Approx(0.3));
    CHECK(row.contributions[2] == doctest::Approx(-0.1));
    CHECK(row.score == doctest::Approx(0.4));
    CHECK(row.probability == doctest::Approx(0.59869).epsilon(1e-5));
}

TEST_CASE("score: missing model indicator in cube is an error; probability monotone") {
    DataCube cube({"A"}, testsupport::quarters(2), {"a"});
    cube.set(0, 0, 0, 10.0);
    cube.set(0, 1, 0, 90.0);
    EwmModel m{{{"g", {"a", "zz"}}}, {{"a", 1.0}, {"zz", 1.0}}, 0.0};
    CHECK_THROWS_WITH_AS(score(m, cube), doctest::Contains("zz"), NotFoundError);
    EwmModel ok{{{"g", {"a"}}}, {{"a", 2.0}}, 0.0};
    auto s = score(ok, cube);
    CHECK(s.rows[1].probability > s.rows[0].probability);
}

TEST_CASE("model validation") {
    EwmModel dup{{{"g1", {"a"}}, {"g2", {"a"}}}, {{"a", 1.0}}, 0.0};
    CHECK_THROWS_AS(dup.validate(), DataError);
    EwmModel stray{{{"g1", {"a"}}}, {{"a", 1.0}, {"b", 1.0}}, 0.0};
    CHECK_THROWS_AS(stray.validate(), DataError);
    EwmModel inf{{{"g1", {"a"}}}, {{"a", INFINITY}}, 0.0};
    CHECK_THROWS_AS(inf.validate(), DataError);
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        auto d = random_design(rng, 40, 4);
        std::vector<double> p(5);
        for (auto& v : p) v = nd(rng);
        const double l2 = rep % 2 ? 0.1 : 0.0;
        auto g = gradient(d, p, l2);
        auto fd = fd_gradient(d, p, l2);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(std::abs(g[i] - fd[i]) <= 1e-6 * std::max(1.0, std::abs(fd[i])));
    }
}

TEST_CASE("fit: labels independent of features give the base-rate intercept") {
    // Each feature pattern appears once with label 1 and three times with label 0.
    Design d;
    d.indicators = {"a", "b"};
    const double pats[4][2] = {{0.1, 0.9}, {0.5, 0.2}, {0.8, 0.6}, {0.3, 0.4}};
    d.features = Matrix(16, 2);
    for (std::size_t r = 0; r < 16; ++r) {
        d.features(r, 0) = pats[r % 4][0];
        d.features(r, 1) = pats[r % 4][1];
        d.labels.push_back(r < 4 ? 1.0 : 0.0);
    }
    auto res = fit(d, {{"g", {"a", "b"}}}, {});
    CHECK(res.converged);
    CHECK(res.model.weights.at("a") == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(res.model.weights.at("b") == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(res.model.bias == doctest::Approx(std::log(0.25 / 0.75)).epsilon(1e-6));
    CHECK(res.gradient_norm <= 1e-6);
}

TEST_CASE("fit: perfectly predictive indicator with l2 > 0 gives a finite positive weight") {
    Design d;
    d.indicators = {"a"};
    d.features = Matrix(20, 1);
    for (std::size_t r = 0; r < 20; ++r) {
        d.features(r, 0) = r < 10 ? 0.1 + 0.01 * r : 0.6 + 0.01 * r;
        d.labels.push_back(r < 10 ? 0.0 : 1.0);
    }
    FitConfig cfg;
    cfg.l2 = 0.01;
    auto res = fit(d, {{"g", {"a"}}}, cfg);
    CHECK(res.converged);
    CHECK(std::isfinite(res.model.weights.at("a")));
    CHECK(res.model.weights.at("a") > 0.0);
    auto g = gradient(d, std::vector<double>{res.model.weights.at("a"), res.model.bias}, cfg.l2);
    CHECK(std::hypot(g[0], g[1]) <= 1e-6);

    cfg.l2 = 0.0;
    cfg.iterations = 500;
    auto sep = fit(d, {{"g", {"a"}}}, cfg);
    CHECK_FALSE(sep.converged);
    CHECK(sep.warning);
}

TEST_CASE("fit needs both classes") {
    Design d;
    d.indicators = {"a"};
    d.features = Matrix(3, 1, 0.5);
    d.labels = {1, 1, 1};
    CHECK_THROWS_AS(fit(d, {{"g", {"a"}}}, {}), DataError);
}

TEST_CASE("build_design keeps complete labelled rows") {
    DataCube cube({"A", "B"}, testsupport::quarters(2), {"a", "b"});
    cube.set(0, 0, 0, 50);
    cube.set(0, 0, 1, 100);
    cube.set(1, 1, 0, 0);  // b missing
    std::vector<LabelRecord> labels{{"A", testsupport::quarter(2000, 1), "1"},
                                    {"B", testsupport::quarter(2000, 2), "0"},
                                    {"Z", testsupport::quarter(2000, 1), "0"}};
    auto d = build_design(cube, labels, {"a", "b"});
    REQUIRE(d.features.rows() == 1);
    CHECK(d.features(0, 0) == 0.5);
    CHECK(d.features(0, 1) == 1.0);
    CHECK(d.labels[0] == 1.0);
    std::vector<LabelRecord> bad{{"A", testsupport::quarter(2000, 1), "yes"}};
    CHECK_THROWS_AS(build_design(cube, bad, {"a", "b"}), DataError);
}
