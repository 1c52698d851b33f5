#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "support.hpp"
#include "visrisk/error.hpp"
#include "visrisk/sotm.hpp"

using namespace visrisk;
using namespace visrisk::sotm;

namespace {

// Same cross-section repeated at every time point.
DataCube stationary_cube(std::size_t E, std::size_t T, std::size_t K, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    DataCube cube(testsupport::names("e", E), testsupport::quarters(T), testsupport::names("k", K));
    for (std::size_t e = 0; e < E; ++e)
        for (std::size_t k = 0; k < K; ++k) {
            const double v = nd(rng) + (e % 2 ? 3.0 : 0.0);
            for (std::size_t t = 0; t < T; ++t) cube.set(e, t, k, v);
        }
    return cube;
}

Assignments make_assignments(const std::vector<std::vector<std::optional<std::size_t>>>& per_time,
                             const std::vector<std::string>& entities) {
    Assignments a{entities, per_time.size(), {}};
    a.units.assign(entities.size() * per_time.size(), std::nullopt);
    for (std::size_t t = 0; t < per_time.size(); ++t)
        for (std::size_t e = 0; e < entities.size(); ++e) a.units[e * per_time.size() + t] = per_time[t][e];
    return a;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace

TEST_CASE("stationary data gives identical slices") {
    auto cube = stationary_cube(12, 6, 3, 1);
    SotmConfig cfg;
    cfg.epochs_per_slice = 50;
    auto model = train_sotm(cube, cfg);
    for (std::size_t t = 1; t < 6; ++t) CHECK(max_abs_diff(model.slice(t), model.slice(0)) <= 1e-6);
    auto colors = profile_coloring(model);
    for (std::size_t t = 1; t < 6; ++t)
        for (std::size_t i = 0; i < model.units(); ++i) CHECK(colors(t, i) == doctest::Approx(colors(0, i)));
}

TEST_CASE("single unit converges to each slice mean") {
    std::mt19937_64 rng(2);
    auto cube = testsupport::random_cube(rng, 7, 4, 2);
    SotmConfig cfg;
    cfg.units = 1;
    auto model = train_sotm(cube, cfg);
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t k = 0; k < 2; ++k) {
            double mean = 0;
            for (std::size_t e = 0; e < 7; ++e) mean += cube.value(e, t, k);
            CHECK(model.slice(t)(0, k) == doctest::Approx(mean / 7));
        }
}

TEST_CASE("drifting clusters: units follow the drift in order") {
    // Two separated clusters translated by +delta every period.
    const double delta = 0.5;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd(0.0, 0.2);
    const std::size_t E = 40, T = 6;
    DataCube cube(testsupport::names("e", E), testsupport::quarters(T), {"a", "b"});
    std::vector<std::array<double, 2>> base(E);
    for (std::size_t e = 0; e < E; ++e) base[e] = {(e % 2 ? 5.0 : -5.0) + nd(rng), (e % 2 ? 5.0 : -5.0) + nd(rng)};
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t e = 0; e < E; ++e)
            for (std::size_t k = 0; k < 2; ++k) cube.set(e, t, k, base[e][k] + delta * static_cast<double>(t));
    SotmConfig cfg;
    cfg.units = 4;
    cfg.epochs_per_slice = 30;
    auto model = train_sotm(cube, cfg);
    for (std::size_t t = 1; t < T; ++t)
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < 2; ++k)
                CHECK(model.slice(t)(i, k) - model.slice(t - 1)(i, k) == doctest::Approx(delta).epsilon(0.02));
    // unit order preserved: first coordinate monotone along the chain at every t
    auto plane = component_plane_t(model, 0);
    for (std::size_t t = 0; t < T; ++t) {
        const bool up = plane(t, 3) > plane(t, 0);
        for (std::size_t i = 1; i < 4; ++i) CHECK((plane(t, i) >= plane(t, i - 1)) == up);
        if (t > 0) CHECK((plane(t - 1, 3) > plane(t - 1, 0)) == up);
        for (std::size_t i = 0; t > 0 && i < 4; ++i) CHECK(plane(t, i) > plane(t - 1, i));
    }
}

TEST_CASE("train_sotm equals the chained per-slice oracle bit-for-bit") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 5; ++rep) {
        auto cube = testsupport::random_cube(rng, 9, 5, 3, 0.1);
        for (std::size_t e = 0; e < 3; ++e)
            for (std::size_t k = 0; k < 3; ++k) cube.set(e, 0, k, static_cast<double>(e * 3 + k) * 0.37 - 1.0);
        SotmConfig cfg;
        cfg.units = 3 + rep % 3;
        cfg.sigma = 0.8;
        cfg.epochs_per_slice = 3;
        auto model = train_sotm(cube, cfg);
        Matrix refs;
        for (std::size_t t = 0; t < cube.time_count(); ++t) {
            auto rows = to_masked_rows(cross_section_rows(cube, t), 3);
            if (t == 0) refs = first_component_init(rows, cfg.units, cube.indicators());
            for (std::size_t ep = 0; ep < cfg.epochs_per_slice; ++ep)
                refs = testsupport::chain_batch_oracle(refs, rows, cfg.sigma);
            CHECK(refs == model.slice(t));
        }
    }
}

TEST_CASE("empty slice and degenerate first slice are rejected") {
    std::mt19937_64 rng(1);
    auto cube = testsupport::random_cube(rng, 3, 3, 2);
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t k = 0; k < 2; ++k) cube.clear(e, 1, k);
    CHECK_THROWS_WITH_AS(train_sotm(cube, {}), doctest::Contains("2000Q2"), DataError);
    DataCube flat(testsupport::names("e", 3), testsupport::quarters(2), {"a", "b"});
    for (std::size_t e = 0; e < 3; ++e)
        for (std::size_t t = 0; t < 2; ++t) {
            flat.set(e, t, 0, 1.0);
            flat.set(e, t, 1, static_cast<double>(e));
        }
    CHECK_THROWS_WITH_AS(train_sotm(flat, {}), doctest::Contains("zero covariance"), DataError);
    SotmConfig bad;
    bad.sigma = 0.0;
    CHECK_THROWS(train_sotm(cube, bad));
}

TEST_CASE("alluvial flows: hand enumeration") {
    auto a = make_assignments({{0, 0, 1}, {0, 1, 1}}, {"e1", "e2", "e3"});
    auto flows = alluvial_flows(2, a);
    REQUIRE(flows.transitions.size() == 3);
    CHECK(flows.transitions[0] == Transition{0, 0, 0, {"e1"}});
    CHECK(flows.transitions[1] == Transition{0, 0, 1, {"e2"}});
    CHECK(flows.transitions[2] == Transition{0, 1, 1, {"e3"}});
    CHECK(flows.node_sizes[0] == std::vector<std::size_t>{2, 1});
    CHECK(flows.node_sizes[1] == std::vector<std::size_t>{1, 2});
}

TEST_CASE("alluvial flows: an entity absent at t+1 has no flow but counts at t") {
    auto a = make_assignments({{0, 1}, {0, std::nullopt}}, {"e1", "e2"});
    auto flows = alluvial_flows(2, a);
    CHECK(flows.node_sizes[0] == std::vector<std::size_t>{1, 1});
    REQUIRE(flows.transitions.size() == 1);
    CHECK(flows.transitions[0].entities == std::vector<std::string>{"e1"});
}

TEST_CASE("alluvial conservation on random assignments") {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> unit(-1, 4);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<std::vector<std::optional<std::size_t>>> per(3, std::vector<std::optional<std::size_t>>(15));
        for (auto& v : per)
            for (auto& x : v) {
                const int u = unit(rng);
                if (u >= 0) x = static_cast<std::size_t>(u);
            }
        auto a = make_assignments(per, testsupport::names("e", 15));
        auto flows = alluvial_flows(5, a);
        for (std::size_t t = 0; t + 1 < 3; ++t)
            for (std::size_t i = 0; i < 5; ++i) {
                std::size_t shared = 0, out = 0;
                for (std::size_t e = 0; e < 15; ++e) shared += (per[t][e] == i && per[t + 1][e]) ? 1 : 0;
                for (const auto& tr : flows.transitions)
                    if (tr.time == t && tr.from == i) out += tr.entities.size();
                CHECK(out == shared);
            }
    }
}

TEST_CASE("assign_entities skips unobserved entities") {
    std::mt19937_64 rng(12);
    auto cube = testsupport::random_cube(rng, 6, 3, 2);
    auto model = train_sotm(cube, {});
    cube.clear(2, 1, 0);
    cube.clear(2, 1, 1);
    auto a = assign_entities(model, cube);
    CHECK_FALSE(a.at(2, 1));
    CHECK(a.at(2, 0));
    for (std::size_t e = 0; e < 6; ++e)
        if (a.at(e, 0)) CHECK(*a.at(e, 0) < model.units());
}

TEST_CASE("structural positions") {
    auto mk = [](std::vector<std::vector<double>> slices) {
        std::vector<Matrix> ms;
        for (auto& s : slices) {
            Matrix m(s.size(), 1);
            for (std::size_t i = 0; i < s.size(); ++i) m(i, 0) = s[i];
            ms.push_back(m);
        }
        SotmConfig cfg;
        cfg.units = slices[0].size();
        return SotmModel(testsupport::names("t", slices.size()), {"x"}, ms, cfg);
    };
    auto even = structural_positions(mk({{0, 1, 2, 3}}));
    CHECK(even(0, 1) == doctest::Approx(1.0 / 3));
    CHECK(even(0, 2) == doctest::Approx(2.0 / 3));
    auto near = structural_positions(mk({{0, 1, 1.000001, 2}}));
    CHECK(near(0, 2) - near(0, 1) == doctest::Approx(0.0).epsilon(1e-5));
    auto twice = structural_positions(mk({{0, 1, 2}, {0, 2, 4}}));
    CHECK(twice(0, 2) == doctest::Approx(0.5));
    CHECK(twice(1, 2) == doctest::Approx(1.0));
}

TEST_CASE("profile coloring degenerate and range") {
    std::vector<Matrix> same(3, Matrix(4, 2, 1.5));
    SotmConfig cfg;
    cfg.units = 4;
    SotmModel flat(testsupport::names("t", 3), {"a", "b"}, same, cfg);
    auto c = profile_coloring(flat);
    for (double v : c.data()) CHECK(v == 0.5);

    std::mt19937_64 rng(14);
    auto model = train_sotm(testsupport::random_cube(rng, 10, 4, 3), {});
    auto colors = profile_coloring(model);
    double lo = 1, hi = 0;
    for (double v : colors.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
}

TEST_CASE("train_sotm is deterministic") {
    std::mt19937_64 rng(15);
    auto cube = testsupport::random_cube(rng, 8, 5, 3, 0.1);
    cube.set(0, 0, 0, 1.0);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t e = 0; e < 4; ++e) cube.set(e, 0, k, static_cast<double>(e + k));
    CHECK(train_sotm(cube, {}) == train_sotm(cube, {}));
}
