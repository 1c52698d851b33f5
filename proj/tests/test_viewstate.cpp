#include <doctest.h>

#include <random>

#include "support.hpp"
#include "visrisk/error.hpp"
#include "visrisk/viewstate.hpp"

using namespace visrisk;

TEST_CASE("base64url roundtrip and rejection") {
    std::mt19937_64 rng(1);
    for (int n = 0; n < 64; ++n) {
        std::string s;
        for (int i = 0; i < n; ++i) s += static_cast<char>(rng() & 0xff);
        auto enc = base64url_encode(s);
        CHECK(enc.find_first_of("+/=") == std::string::npos);
        CHECK(base64url_decode(enc) == std::optional<std::string>(s));
    }
    CHECK_FALSE(base64url_decode("ab$d"));
    CHECK_FALSE(base64url_decode("a"));
}

TEST_CASE("default state has a fixed token") {
    const auto a = encode_state(ViewState{});
    CHECK(a == encode_state(ViewState{}));
    CHECK(decode_state(a) == ViewState{});
    CHECK(state_to_json(ViewState{}).dump() ==
          R"({"view":"dashboard","entities":[],"from":null,"to":null,"indicator":null,"transform":"raw","events":[],"pinned":{},"seed":null})");
}

TEST_CASE("canonicalization: entity order does not change the token") {
    ViewState a, b;
    a.entities = {"US", "FI", "US"};
    b.entities = {"FI", "US"};
    CHECK(encode_state(a) == encode_state(b));
}

TEST_CASE("random states roundtrip") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        auto s = canonicalize(testsupport::random_state(rng));
        auto token = encode_state(s);
        CHECK(decode_state(token) == s);
        CHECK(state_to_json(decode_state(token)) == state_to_json(s));
    }
}

TEST_CASE("oversized or tampered states are rejected") {
    ViewState big;
    for (int i = 0; i < 400; ++i) big.entities.push_back("entity_" + std::to_string(i));
    CHECK_THROWS_AS(encode_state(big), InvalidRequestError);

    auto token = encode_state(ViewState{});
    std::string t = token;
    t[t.size() / 2] = t[t.size() / 2] == 'A' ? 'B' : 'A';
    CHECK_THROWS_AS(decode_state(t), InvalidRequestError);
    CHECK_THROWS_AS(decode_state(""), InvalidRequestError);
    CHECK_THROWS_AS(decode_state("!!!"), InvalidRequestError);
    CHECK_THROWS_AS(decode_state(token.substr(0, token.size() - 3)), InvalidRequestError);
}

TEST_CASE("state_from_json validates and defaults") {
    auto s = state_from_json(nlohmann::json::parse(R"({"view":"bim","pinned":{"A":[1,2]}})"));
    CHECK(s.view == View::Bim);
    CHECK(s.pinned.at("A") == network::Point{1, 2});
    CHECK_THROWS_AS(state_from_json(nlohmann::json::parse(R"({"view":"nope"})")), InvalidRequestError);
    CHECK_THROWS_AS(state_from_json(nlohmann::json::parse(R"({})")), InvalidRequestError);
    CHECK_THROWS_AS(state_from_json(nlohmann::json::parse(R"({"view":"bim","pinned":{"A":[1]}})")),
                    InvalidRequestError);
    CHECK_THROWS_AS(state_from_json(nlohmann::json::parse(R"({"view":"ewm","transform":"log"})")),
                    InvalidRequestError);
    CHECK_THROWS_AS(state_from_json(nlohmann::json::parse(R"([1,2])")), InvalidRequestError);
}
