#pragma once

// Permalink state for the interactive views. A token is the canonical JSON of
// the state, deflated and encoded as URL-safe base64 without padding.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "visrisk/network.hpp"

namespace visrisk {

enum class View { Dashboard, Ewm, Fsm, Fsmt, Bim };

std::string_view to_string(View v);
std::optional<View> parse_view(std::string_view s);

struct ViewState {
    View view = View::Dashboard;
    std::vector<std::string> entities;
    std::optional<std::string> time_from;
    std::optional<std::string> time_to;
    std::optional<std::string> indicator;  // indicator or layer id
    bool percentile = false;
    std::vector<std::string> events;
    std::map<std::string, network::Point> pinned;  // bim only
    std::optional<std::uint64_t> seed;             // bim layout seed

    friend bool operator==(const ViewState&, const ViewState&) = default;
};

inline constexpr std::size_t kMaxStateBytes = 2048;

/// Sorted, deduplicated entity and event lists.
ViewState canonicalize(ViewState state);

nlohmann::ordered_json state_to_json(const ViewState& state);
/// Throws InvalidRequestError on schema violations.
ViewState state_from_json(const nlohmann::json& doc);

/// Throws InvalidRequestError when the canonical document exceeds kMaxStateBytes.
std::string encode_state(const ViewState& state);
/// Throws InvalidRequestError for any malformed or tampered token.
ViewState decode_state(std::string_view token);

std::string base64url_encode(std::string_view bytes);
std::optional<std::string> base64url_decode(std::string_view text);

}  // namespace visrisk
