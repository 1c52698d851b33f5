#include "visrisk/viewstate.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "visrisk/error.hpp"

namespace visrisk {
namespace {

constexpr std::array<std::pair<View, std::string_view>, 5> kViews{{{View::Dashboard, "dashboard"},
                                                                     {View::Ewm, "ewm"},
                                                                     {View::Fsm, "fsm"},
                                                                     {View::Fsmt, "fsmt"},
                                                                     {View::Bim, "bim"}}};

constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Absent keys take their defaults, so clients may post partial states.
std::vector<std::string> string_list(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return {};
    const auto& v = doc.at(key);
    if (!v.is_array()) throw InvalidRequestError(std::string(key) + " must be an array");
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) throw InvalidRequestError(std::string(key) + " must hold strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

std::optional<std::string> optional_string(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    if (!doc.at(key).is_string()) throw InvalidRequestError(std::string(key) + " must be a string or null");
    return doc.at(key).get<std::string>();
}

}  // namespace

std::string_view to_string(View v) {
    for (const auto& [view, name] : kViews)
        if (view == v) return name;
    return "dashboard";
}

std::optional<View> parse_view(std::string_view s) {
    for (const auto& [view, name] : kViews)
        if (name == s) return view;
    return std::nullopt;
}

ViewState canonicalize(ViewState state) {
    sort_unique(state.entities);
    sort_unique(state.events);
    return state;
}

nlohmann::ordered_json state_to_json(const ViewState& raw) {
    const auto s = canonicalize(raw);
    nlohmann::ordered_json doc;
    doc["view"] = to_string(s.view);
    doc["entities"] = s.entities;
    doc["from"] = s.time_from ? nlohmann::ordered_json(*s.time_from) : nlohmann::ordered_json(nullptr);
    doc["to"] = s.time_to ? nlohmann::ordered_json(*s.time_to) : nlohmann::ordered_json(nullptr);
    doc["indicator"] = s.indicator ? nlohmann::ordered_json(*s.indicator) : nlohmann::ordered_json(nullptr);
    doc["transform"] = s.percentile ? "percentile" : "raw";
    doc["events"] = s.events;
    auto pinned = nlohmann::ordered_json::object();
    for (const auto& [id, p] : s.pinned) pinned[id] = {p.x, p.y};
    doc["pinned"] = std::move(pinned);
    doc["seed"] = s.seed ? nlohmann::ordered_json(*s.seed) : nlohmann::ordered_json(nullptr);
    return doc;
}

ViewState state_from_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object()) throw InvalidRequestError("state must be an object");
        ViewState s;
        auto view = parse_view(doc.at("view").get<std::string>());
        if (!view) throw InvalidRequestError("unknown view");
        s.view = *view;
        s.entities = string_list(doc, "entities");
        s.time_from = optional_string(doc, "from");
        s.time_to = optional_string(doc, "to");
        s.indicator = optional_string(doc, "indicator");
        if (doc.contains("transform") && !doc.at("transform").is_null()) {
            const auto transform = doc.at("transform").get<std::string>();
            if (transform != "raw" && transform != "percentile") throw InvalidRequestError("unknown transform");
            s.percentile = transform == "percentile";
        }
        s.events = string_list(doc, "events");
        const auto pinned = doc.contains("pinned") && !doc.at("pinned").is_null() ? doc.at("pinned")
                                                                                   : nlohmann::json::object();
        if (!pinned.is_object()) throw InvalidRequestError("pinned must be an object");
        for (const auto& [id, xy] : pinned.items()) {
            if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number())
                throw InvalidRequestError("pinned position must be [x, y]");
            network::Point p{xy[0].get<double>(), xy[1].get<double>()};
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidRequestError("pinned position not finite");
            s.pinned[id] = p;
        }
        if (doc.contains("seed") && !doc.at("seed").is_null()) {
            if (!doc.at("seed").is_number_unsigned()) throw InvalidRequestError("seed must be unsigned");
            s.seed = doc.at("seed").get<std::uint64_t>();
        }
        return canonicalize(std::move(s));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidRequestError(std::string("malformed state: ") + e.what());
    }
}

std::string base64url_encode(std::string_view bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) | static_cast<unsigned char>(bytes[i + 2]);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
    } else if (rest == 2) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
    }
    return out;
}

std::optional<std::string> base64url_decode(std::string_view text) {
    if (text.size() % 4 == 1) return std::nullopt;
    std::string out;
    unsigned buffer = 0;
    int bits = 0;
    for (char c : text) {
        const auto pos = kAlphabet.find(c);
        if (pos == std::string_view::npos) return std::nullopt;
        buffer = (buffer << 6) | static_cast<unsigned>(pos);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out += static_cast<char>((buffer >> bits) & 0xFF);
        }
    }
    // Leftover bits must be zero for a canonical encoding.
    if (bits > 0 && (buffer & ((1u << bits) - 1)) != 0) return std::nullopt;
    return out;
}

std::string encode_state(const ViewState& state) {
    for (const auto& [id, p] : state.pinned)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidRequestError("pinned position not finite");
    const std::string doc = state_to_json(state).dump();
    if (doc.size() > kMaxStateBytes)
        throw InvalidRequestError("state document exceeds " + std::to_string(kMaxStateBytes) + " bytes");
    uLongf size = compressBound(static_cast<uLong>(doc.size()));
    std::string packed(size, '\0');
    if (compress2(reinterpret_cast<Bytef*>(packed.data()), &size, reinterpret_cast<const Bytef*>(doc.data()),
                  static_cast<uLong>(doc.size()), Z_BEST_COMPRESSION) != Z_OK)
        throw InvalidRequestError("state compression failed");
    packed.resize(size);
    return base64url_encode(packed);
}

ViewState decode_state(std::string_view token) {
    if (token.empty() || token.size() > 4 * kMaxStateBytes) throw InvalidRequestError("malformed state token");
    const auto packed = base64url_decode(token);
    if (!packed) throw InvalidRequestError("malformed state token");
    std::string doc(kMaxStateBytes, '\0');
    uLongf size = static_cast<uLongf>(doc.size());
    if (uncompress(reinterpret_cast<Bytef*>(doc.data()), &size, reinterpret_cast<const Bytef*>(packed->data()),
                   static_cast<uLong>(packed->size())) != Z_OK)
        throw InvalidRequestError("malformed state token");
    doc.resize(size);
    auto json = nlohmann::json::parse(doc, nullptr, false);
    if (json.is_discarded()) throw InvalidRequestError("malformed state token");
    return state_from_json(json);
}

}  // namespace visrisk
