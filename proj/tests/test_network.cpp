#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "visrisk/error.hpp"
#include "visrisk/network.hpp"

using namespace visrisk;
using namespace visrisk::network;

namespace {

OccurrenceRecord rec(std::string id, const char* time, std::set<std::string> m, std::optional<std::string> text = {}) {
    return {std::move(id), TimePoint::parse_or_throw(time), std::move(m), std::move(text)};
}

CooccurrenceNetwork ring(std::size_t n) {
    CooccurrenceNetwork net;
    for (std::size_t i = 0; i < n; ++i) net.nodes["n" + std::to_string(10 + i)] = 1;
    for (std::size_t i = 0; i < n; ++i) {
        auto a = "n" + std::to_string(10 + i), b = "n" + std::to_string(10 + (i + 1) % n);
        net.edges[{std::min(a, b), std::max(a, b)}] = 1;
    }
    return net;
}

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST_CASE("co-occurrence counts: hand enumeration") {
    std::vector<OccurrenceRecord> recs{rec("1", "2010Q1", {"A", "B"}), rec("2", "2010Q1", {"A", "B", "C"}),
                                       rec("3", "2010Q1", {"A"})};
    auto net = build_cooccurrence(recs);
    CHECK(net.nodes.at("A") == 3);
    CHECK(net.nodes.at("B") == 2);
    CHECK(net.nodes.at("C") == 1);
    CHECK(net.edges.at({"A", "B"}) == 2);
    CHECK(net.edges.at({"A", "C"}) == 1);
    CHECK(net.edges.at({"B", "C"}) == 1);
    CHECK(build_cooccurrence({}).nodes.empty());
    for (const auto& [e, w] : net.edges) CHECK(w <= std::min(net.nodes.at(e.first), net.nodes.at(e.second)));
}

TEST_CASE("occurrence csv groups mentions per document and dedups") {
    auto in = testsupport::text(
        "doc_id,time,entity,text\np1,2010Q1,A,\"A is at risk\"\np1,2010Q1,A,\np1,2010Q1,B,\np2,2010Q2,A,fine\n");
    auto recs = ingest_occurrences(in);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].mentions.size() == 2);
    CHECK(recs[0].text == std::optional<std::string>("A is at risk"));
    auto net = build_cooccurrence(recs);
    CHECK(net.nodes.at("A") == 2);
    auto bad = testsupport::text("doc_id,time,entity\np1,notatime,A\n");
    CHECK_THROWS_AS(ingest_occurrences(bad), DataError);
}

TEST_CASE("window restricts records; adding records never decreases counts") {
    std::vector<OccurrenceRecord> recs{rec("1", "2009Q4", {"A", "B"}), rec("2", "2010Q1", {"A", "C"}),
                                       rec("3", "2010Q3", {"B", "C"})};
    Window w{TimePoint::parse_or_throw("2010Q1"), TimePoint::parse_or_throw("2010Q2")};
    auto net = build_cooccurrence(recs, w);
    CHECK(net.nodes.size() == 2);
    CHECK(net.edges.size() == 1);
    auto before = build_cooccurrence(recs);
    recs.push_back(rec("4", "2010Q3", {"A", "B", "D"}));
    auto after = build_cooccurrence(recs);
    for (const auto& [n, c] : before.nodes) CHECK(after.nodes.at(n) >= c);
    for (const auto& [e, c] : before.edges) CHECK(after.edges.at(e) >= c);
}

TEST_CASE("edge styling") {
    CooccurrenceNetwork net;
    net.nodes = {{"A", 10}, {"B", 10}, {"C", 10}};
    net.edges[{"A", "B"}] = 3;
    net.edges[{"A", "C"}] = 7;
    auto d = edge_styling(net);
    CHECK(d[0] == doctest::Approx(std::log(4.0) / std::log(8.0)));
    CHECK(d[0] == doctest::Approx(0.6667).epsilon(1e-4));
    CHECK(d[1] == 1.0);
    CooccurrenceNetwork one;
    one.nodes = {{"A", 1}, {"B", 1}};
    one.edges[{"A", "B"}] = 1;
    CHECK(edge_styling(one) == std::vector<double>{1.0});
}

TEST_CASE("two-node layout settles at the ideal edge length") {
    CooccurrenceNetwork net;
    net.nodes = {{"A", 1}, {"B", 1}};
    net.edges[{"A", "B"}] = 1;
    LayoutParams p;
    auto layout = fr_layout(net, p);
    const double d = dist(layout.positions[0], layout.positions[1]);
    CHECK(std::abs(d - layout.k) / layout.k <= 0.05);
    CHECK(layout.k == doctest::Approx(0.5 * std::sqrt(1000.0 * 1000.0 / 2.0)));

    p.spread = 1.0;
    layout = fr_layout(net, p);
    CHECK(layout.k == doctest::Approx(std::sqrt(1000.0 * 1000.0 / 2.0)));
    CHECK(std::abs(dist(layout.positions[0], layout.positions[1]) - layout.k) / layout.k <= 0.05);
    p.spread = 0.0;
    CHECK_THROWS_AS(fr_layout(net, p), std::invalid_argument);
}

TEST_CASE("single node stays put; empty network rejected") {
    CooccurrenceNetwork net;
    net.nodes = {{"A", 1}};
    LayoutParams p;
    p.iterations = 0;
    auto start = fr_layout(net, p);
    p.iterations = 100;
    auto end = fr_layout(net, p);
    CHECK(start.positions[0] == end.positions[0]);
    CHECK_THROWS_AS(fr_layout(CooccurrenceNetwork{}, p), DataError);
}

TEST_CASE("layout determinism, frame bounds, and seed dependence") {
    auto net = ring(12);
    LayoutParams p;
    p.iterations = 200;
    auto a = fr_layout(net, p), b = fr_layout(net, p);
    CHECK(a.positions == b.positions);
    for (const auto& pt : a.positions) {
        CHECK(pt.x >= 0.0);
        CHECK(pt.x <= p.width);
        CHECK(pt.y >= 0.0);
        CHECK(pt.y <= p.height);
    }
    p.seed = 2;
    auto c = fr_layout(net, p);
    CHECK(c.nodes == a.nodes);
    CHECK_FALSE(c.positions == a.positions);
}

TEST_CASE("ring edge lengths are nearly uniform") {
    auto net = ring(12);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        LayoutParams p;
        p.seed = seed;
        auto l = fr_layout(net, p);
        std::vector<double> lens;
        for (const auto& [e, w] : net.edges) lens.push_back(dist(l.positions[*l.index(e.first)], l.positions[*l.index(e.second)]));
        double mean = 0, var = 0;
        for (double x : lens) mean += x;
        mean /= lens.size();
        for (double x : lens) var += (x - mean) * (x - mean);
        CHECK(std::sqrt(var / lens.size()) / mean <= 0.15);
    }
}

TEST_CASE("coincident nodes are separated") {
    CooccurrenceNetwork net;
    net.nodes = {{"A", 1}, {"B", 1}};
    LayoutParams p;
    p.iterations = 50;
    auto l = fr_layout(net, p);
    l.positions[1] = l.positions[0];
    auto relaxed = pin_and_relax(net, l, {}, 50);
    CHECK(dist(relaxed.positions[0], relaxed.positions[1]) > 1.0);
}

TEST_CASE("pin_and_relax") {
    CooccurrenceNetwork net;
    net.nodes = {{"A", 1}, {"B", 1}};
    net.edges[{"A", "B"}] = 1;
    LayoutParams p;
    auto l = fr_layout(net, p);
    auto all = pin_and_relax(net, l, {{"A", l.positions[0]}, {"B", l.positions[1]}}, 100);
    CHECK(all.positions == l.positions);

    const Point pin{500.0, 500.0};
    auto one = pin_and_relax(net, l, {{"A", pin}}, 300);
    CHECK(one.positions[0] == pin);
    const double d = dist(one.positions[0], one.positions[1]);
    CHECK(std::abs(d - l.k) / l.k <= 0.05);

    auto big = ring(8);
    auto lb = fr_layout(big, p);
    auto rb = pin_and_relax(big, lb, {{"n10", {0.0, 0.0}}}, 100);
    for (const auto& pt : rb.positions) {
        CHECK(pt.x >= 0.0);
        CHECK(pt.x <= p.width);
        CHECK(pt.y >= 0.0);
        CHECK(pt.y <= p.height);
    }
}

TEST_CASE("distress share") {
    std::vector<OccurrenceRecord> recs{rec("1", "2010Q1", {"A"}, "Elevated RISK today"),
                                       rec("2", "2010Q1", {"A"}, "riskless returns"),
                                       rec("3", "2010Q1", {"A", "B"}, "all calm"), rec("4", "2010Q1", {"A"})};
    const std::vector<std::string> terms{"risk", "default"};
    CHECK(distress_share(recs, "A", terms) == 0.25);
    CHECK(distress_share(recs, "Z", terms) == 0.0);
    std::vector<OccurrenceRecord> all{rec("1", "2010Q1", {"A"}, "default"), rec("2", "2010Q1", {"A"}, "risk.")};
    CHECK(distress_share(all, "A", terms) == 1.0);
}
