#include <doctest.h>

#include "support.hpp"
#include "visrisk/csv.hpp"
#include "visrisk/datacube.hpp"
#include "visrisk/error.hpp"
#include "visrisk/time_point.hpp"

using namespace visrisk;
using testsupport::text;

TEST_CASE("time labels parse and order chronologically") {
    auto q = TimePoint::parse("2007q3");
    REQUIRE(q);
    CHECK(q->label == "2007Q3");
    CHECK(q->month == 7);
    auto d = TimePoint::parse("2007-09-30");
    REQUIRE(d);
    CHECK(*q < *d);
    CHECK(TimePoint::parse_or_throw("2008Q1") > *d);
    CHECK_FALSE(TimePoint::parse("2007Q5"));
    CHECK_FALSE(TimePoint::parse("2007-02-30"));
    CHECK_FALSE(TimePoint::parse("1899"));
    CHECK(TimePoint::parse("2000-02-29"));
    CHECK_THROWS_AS(TimePoint::parse_or_throw("garbage"), DataError);
}

TEST_CASE("csv reader handles quotes and blank lines") {
    auto in = text("\xEF\xBB\xBF" "a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\n\n1,2\n");
    auto t = csv::read(in);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.header[0] == "a");
    CHECK(t.rows[0].fields[0] == "x, y");
    CHECK(t.rows[0].fields[1] == "say \"hi\"");
    CHECK(t.rows[1].line == 4);
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK_THROWS_AS(t.column("zzz"), DataError);
}

TEST_CASE("ingest_observations: two rows give a 1x2x1 cube") {
    auto in = text("entity,time,indicator,value\nA,2000Q1,x,1.0\nA,2000Q2,x,2.0\n");
    auto cube = ingest_observations(in);
    CHECK(cube.entity_count() == 1);
    CHECK(cube.time_count() == 2);
    CHECK(cube.indicator_count() == 1);
    CHECK(cube.observed_total() == 2);
    CHECK(cube.value(0, 1, 0) == 2.0);
}

TEST_CASE("ingest_observations: union grid with an empty value") {
    auto in = text("entity,time,indicator,value\nA,2000Q1,x,1.0\nB,2000Q1,y,\n");
    auto cube = ingest_observations(in);
    CHECK(cube.entity_count() == 2);
    CHECK(cube.time_count() == 1);
    CHECK(cube.indicator_count() == 2);
    CHECK(cube.observed_total() == 1);
    CHECK(cube.observed(0, 0, 0));
    CHECK(cube.value(0, 0, 0) == 1.0);
}

TEST_CASE("ingest_observations: axes sorted, times chronological") {
    auto in = text("entity,time,indicator,value\nB,2001Q1,z,1\nA,1999Q4,a,2\nA,2000-06-30,m,3\n");
    auto cube = ingest_observations(in);
    CHECK(cube.entities() == std::vector<std::string>{"A", "B"});
    CHECK(cube.indicators() == std::vector<std::string>{"a", "m", "z"});
    CHECK(cube.times()[0].label == "1999Q4");
    CHECK(cube.times()[1].label == "2000-06-30");
    CHECK(cube.times()[2].label == "2001Q1");
}

TEST_CASE("ingest_observations errors") {
    auto dup = text("entity,time,indicator,value\nA,2000Q1,x,1\nA,2000Q1,x,2\n");
    try {
        ingest_observations(dup);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("(A,2000Q1,x)") != std::string::npos);
    }
    auto bad_time = text("entity,time,indicator,value\nA,2000Q1,x,1\nA,20X0,x,2\n");
    try {
        ingest_observations(bad_time);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    auto empty = text("entity,time,indicator,value\n");
    CHECK_THROWS_WITH_AS(ingest_observations(empty), doctest::Contains("no observations"), DataError);
    auto nothing = text("");
    CHECK_THROWS_WITH_AS(ingest_observations(nothing), doctest::Contains("no observations"), DataError);
    auto nan = text("entity,time,indicator,value\nA,2000Q1,x,abc\n");
    CHECK_THROWS_AS(ingest_observations(nan), DataError);
}

namespace {
DataCube two_entity_cube() {
    auto in = text("entity,time,indicator,value\nA,2000Q1,x,1\nB,2000Q1,x,2\n");
    return ingest_observations(in);
}
}  // namespace

TEST_CASE("ingest_links: single entry, asymmetric pair, empty file") {
    auto cube = two_entity_cube();
    auto one = text("source,target,time,weight\nA,B,2000Q1,5\n");
    auto c1 = ingest_links(one, cube);
    auto m = slice_links(c1, "2000Q1");
    CHECK(m(0, 0) == 0.0);
    CHECK(m(0, 1) == 5.0);
    CHECK(m(1, 0) == 0.0);
    CHECK(m(1, 1) == 0.0);

    auto pair = text("source,target,time,weight\nA,B,2000Q1,1\nB,A,2000Q1,2\n");
    auto m2 = slice_links(ingest_links(pair, cube), "2000Q1");
    CHECK(m2(0, 1) == 1.0);
    CHECK(m2(1, 0) == 2.0);

    auto empty = text("source,target,time,weight\n");
    CHECK(ingest_links(empty, cube).links().empty());
}

TEST_CASE("ingest_links errors") {
    auto cube = two_entity_cube();
    auto unknown = text("source,target,time,weight\nA,B,2000Q1,1\nA,Z,2000Q1,1\n");
    CHECK_THROWS_WITH_AS(ingest_links(unknown, cube), doctest::Contains("row 3"), DataError);
    auto negative = text("source,target,time,weight\nA,B,2000Q1,-1\n");
    CHECK_THROWS_AS(ingest_links(negative, cube), DataError);
}

TEST_CASE("links roundtrip every weight through slice_links") {
    std::mt19937_64 rng(3);
    auto cube = testsupport::random_cube(rng, 5, 3, 1);
    std::uniform_real_distribution<double> w(0.0, 100.0);
    std::ostringstream csv;
    csv.precision(17);
    csv << "source,target,time,weight\n";
    Matrix expected(5, 5, 0.0);
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b) {
            expected(a, b) = w(rng);
            csv << cube.entities()[a] << ',' << cube.entities()[b] << ",2000Q2," << expected(a, b) << '\n';
        }
    auto in = text(csv.str());
    auto linked = ingest_links(in, cube);
    CHECK(slice_links(linked, "2000Q2") == expected);
    CHECK(slice_links(linked, "2000Q1") == Matrix(5, 5, 0.0));
}

TEST_CASE("slices") {
    std::mt19937_64 rng(5);
    auto cube = testsupport::random_cube(rng, 2, 2, 2);
    cube.clear(1, 0, 1);
    auto cs = slice_cross_section(cube, cube.times()[0].label);
    CHECK(cs.values.rows() == 2);
    CHECK(cs.values.cols() == 2);
    CHECK(cs.values(0, 1) == cube.value(0, 0, 1));
    CHECK_FALSE(cs.observed(1, 1));
    CHECK(cs.observed(0, 1));
    CHECK_THROWS_AS(slice_cross_section(cube, "1899Q1"), NotFoundError);

    // indicator panel then entity row equals entity series column
    for (std::size_t k = 0; k < 2; ++k) {
        auto panel = slice_indicator_panel(cube, cube.indicators()[k]);
        for (std::size_t e = 0; e < 2; ++e) {
            auto series = slice_entity_series(cube, cube.entities()[e]);
            for (std::size_t t = 0; t < 2; ++t) {
                CHECK(panel.observed(e, t) == series.observed(t, k));
                if (panel.observed(e, t)) CHECK(panel.values(e, t) == series.values(t, k));
            }
        }
    }
}

TEST_CASE("entity series on a 1-entity cube is the transposed panel") {
    std::mt19937_64 rng(9);
    auto cube = testsupport::random_cube(rng, 1, 4, 3);
    auto s = slice_entity_series(cube, "e0");
    REQUIRE(s.values.rows() == 4);
    REQUIRE(s.values.cols() == 3);
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t k = 0; k < 3; ++k) CHECK(s.values(t, k) == cube.value(0, t, k));
}

TEST_CASE("slicing is lossless over cross sections") {
    std::mt19937_64 rng(11);
    auto cube = testsupport::random_cube(rng, 4, 5, 3, 0.3);
    DataCube rebuilt(cube.entities(), cube.times(), cube.indicators());
    for (std::size_t t = 0; t < cube.time_count(); ++t) {
        auto cs = slice_cross_section(cube, cube.times()[t].label);
        for (std::size_t e = 0; e < 4; ++e)
            for (std::size_t k = 0; k < 3; ++k)
                if (cs.observed(e, k)) rebuilt.set(e, t, k, cs.values(e, k));
    }
    CHECK(rebuilt == cube);
}

TEST_CASE("percentile_transform worked examples") {
    auto run = [](const std::vector<double>& xs) {
        DataCube cube({"A"}, testsupport::quarters(xs.size()), {"x"});
        for (std::size_t t = 0; t < xs.size(); ++t) cube.set(0, t, 0, xs[t]);
        auto p = percentile_transform(cube);
        std::vector<double> out;
        for (std::size_t t = 0; t < xs.size(); ++t) out.push_back(p.value(0, t, 0));
        return out;
    };
    CHECK(run({1, 2, 3, 4, 5}) == std::vector<double>{0, 25, 50, 75, 100});
    CHECK(run({7, 7}) == std::vector<double>{50, 50});
    CHECK(run({42}) == std::vector<double>{50});
}

TEST_CASE("percentile_transform matches the counting oracle and keeps the mask") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        auto cube = testsupport::random_cube(rng, 3, 9, 2, 0.25);
        // inject ties
        for (std::size_t t = 0; t + 1 < 9; t += 3)
            if (cube.observed(0, t, 0)) cube.set(0, t + 1, 0, cube.value(0, t, 0));
        auto p = percentile_transform(cube);
        for (std::size_t e = 0; e < 3; ++e)
            for (std::size_t k = 0; k < 2; ++k) {
                std::vector<double> xs;
                std::vector<std::size_t> ts;
                for (std::size_t t = 0; t < 9; ++t)
                    if (cube.observed(e, t, k)) {
                        xs.push_back(cube.value(e, t, k));
                        ts.push_back(t);
                    }
                auto want = testsupport::percentile_oracle(xs);
                for (std::size_t i = 0; i < ts.size(); ++i) CHECK(p.value(e, ts[i], k) == doctest::Approx(want[i]).epsilon(1e-12));
                for (std::size_t t = 0; t < 9; ++t) CHECK(p.observed(e, t, k) == cube.observed(e, t, k));
            }
    }
}

TEST_CASE("pool_panel") {
    std::mt19937_64 rng(17);
    auto full = testsupport::random_cube(rng, 2, 2, 2);
    CHECK(pool_panel(full).size() == 4);
    full.clear(1, 0, 0);
    full.clear(1, 0, 1);
    auto rows = pool_panel(full);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].entity == 0);
    CHECK(rows[0].time == 0);
    CHECK(rows[1].time == 1);
    CHECK(rows[2].entity == 1);
    CHECK(rows[2].time == 1);

    auto sparse = testsupport::random_cube(rng, 6, 7, 3, 0.5);
    std::size_t expected = 0;
    for (std::size_t e = 0; e < 6; ++e)
        for (std::size_t t = 0; t < 7; ++t) {
            bool any = false;
            for (std::size_t k = 0; k < 3; ++k) any = any || sparse.observed(e, t, k);
            expected += any ? 1 : 0;
        }
    CHECK(pool_panel(sparse).size() == expected);
}

TEST_CASE("ingest_events") {
    auto in = text("entity,start,end,label\nUS,2007Q3,2009Q2,crisis\nFI,1991Q1,,banking crisis\n");
    auto ev = ingest_events(in);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].entity == "FI");
    CHECK_FALSE(ev[0].end);
    CHECK(ev[1].end->label == "2009Q2");
    auto bad = text("entity,start,end,label\nUS,2009Q3,2009Q2,x\n");
    CHECK_THROWS_AS(ingest_events(bad), DataError);
}

TEST_CASE("cube rejects invalid construction") {
    CHECK_THROWS(DataCube({"A", "A"}, testsupport::quarters(1), {"x"}));
    CHECK_THROWS(DataCube({"A"}, {testsupport::quarter(2001, 1), testsupport::quarter(2000, 1)}, {"x"}));
    DataCube c({"A", "B"}, testsupport::quarters(1), {"x"});
    CHECK_THROWS_AS(c.set(0, 0, 0, NAN), DataError);
    CHECK_THROWS_AS(c.set_links(0, Matrix(2, 3)), DataError);
    Matrix neg(2, 2, 0.0);
    neg(0, 1) = -1.0;
    CHECK_THROWS_AS(c.set_links(0, neg), DataError);
}
