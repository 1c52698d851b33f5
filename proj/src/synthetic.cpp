#include "visrisk/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "visrisk/error.hpp"

namespace visrisk::synthetic {
namespace {

constexpr std::array<const char*, 14> kIndicatorNames{
    "real_gdp_growth", "inflation",       "current_account", "govt_debt",      "credit_gap",
    "leverage",        "house_prices",    "equity_prices",   "debt_service",   "bank_loans",
    "global_gdp",      "global_credit",   "global_equity",   "global_leverage"};

constexpr std::array<const char*, 4> kStates{"tranquil", "pre-crisis", "crisis", "post-crisis"};

std::string quarter_label(int start_year, std::size_t q) {
    return std::to_string(start_year + static_cast<int>(q / 4)) + "Q" + std::to_string(q % 4 + 1);
}

std::string pad(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i + 1);
    return buf;
}

std::ofstream create(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + p.string() + "'");
    f.precision(17);
    return f;
}

// Per-state shift applied to each indicator, in units of its noise sd.
double state_shift(std::size_t state, std::size_t k) {
    const double sign = (k == 0 || k == 2) ? -1.0 : 1.0;  // growth and current account fall ahead of crises
    switch (state) {
        case 1: return 2.0 * sign;
        case 2: return -1.5 * sign;
        case 3: return -0.5 * sign;
        default: return 0.0;
    }
}

}  // namespace

std::filesystem::path write_dataset(const Options& opt, const std::filesystem::path& dir) {
    if (opt.entities < 2 || opt.quarters < 8 || opt.indicators < 2)
        throw std::invalid_argument("synthetic cube needs >= 2 entities, >= 8 quarters, >= 2 indicators");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create '" + dir.string() + "'");

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::string> entities, indicators, times;
    for (std::size_t e = 0; e < opt.entities; ++e) entities.push_back(pad("E", e));
    for (std::size_t k = 0; k < opt.indicators; ++k)
        indicators.push_back(k < kIndicatorNames.size() ? std::string(kIndicatorNames[k]) : pad("ind", k));
    for (std::size_t q = 0; q < opt.quarters; ++q) times.push_back(quarter_label(opt.start_year, q));

    // One crisis per entity: 6 quarters of build-up, 4 of crisis, 6 of recovery.
    std::vector<std::size_t> crisis_start(opt.entities);
    std::vector<std::vector<std::size_t>> state(opt.entities, std::vector<std::size_t>(opt.quarters, 0));
    const std::size_t lo = std::min<std::size_t>(6, opt.quarters - 1);
    const std::size_t hi = std::max(lo, opt.quarters > 10 ? opt.quarters - 10 : opt.quarters - 1);
    std::uniform_int_distribution<std::size_t> start_dist(lo, hi);
    for (std::size_t e = 0; e < opt.entities; ++e) {
        const std::size_t c = start_dist(rng);
        crisis_start[e] = c;
        for (std::size_t q = 0; q < opt.quarters; ++q) {
            if (q + 6 >= c && q < c) state[e][q] = 1;
            else if (q >= c && q < c + 4) state[e][q] = 2;
            else if (q >= c + 4 && q < c + 10) state[e][q] = 3;
        }
    }

    {
        auto f = create(dir / "observations.csv");
        f << "entity,time,indicator,value\n";
        for (std::size_t e = 0; e < opt.entities; ++e) {
            std::vector<double> level(opt.indicators);
            for (auto& l : level) l = 5.0 * noise(rng);
            for (std::size_t q = 0; q < opt.quarters; ++q)
                for (std::size_t k = 0; k < opt.indicators; ++k) {
                    const double trend = 0.02 * static_cast<double>(q) * (k % 3 == 0 ? 1.0 : 0.0);
                    const double v = level[k] + trend + state_shift(state[e][q], k) + 0.6 * noise(rng);
                    f << entities[e] << ',' << times[q] << ',' << indicators[k] << ',';
                    if (unit(rng) >= opt.missing_rate) f << v;
                    f << '\n';
                }
        }
    }
    {
        auto f = create(dir / "states.csv");
        f << "entity,time,label\n";
        for (std::size_t e = 0; e < opt.entities; ++e)
            for (std::size_t q = 0; q < opt.quarters; ++q)
                f << entities[e] << ',' << times[q] << ',' << kStates[state[e][q]] << '\n';
    }
    {
        // Early-warning target: build-up quarters vs tranquil; crisis and recovery excluded.
        auto f = create(dir / "ewm_labels.csv");
        f << "entity,time,label\n";
        for (std::size_t e = 0; e < opt.entities; ++e)
            for (std::size_t q = 0; q < opt.quarters; ++q)
                if (state[e][q] <= 1) f << entities[e] << ',' << times[q] << ',' << state[e][q] << '\n';
    }
    {
        auto f = create(dir / "events.csv");
        f << "entity,start,end,label\n";
        for (std::size_t e = 0; e < opt.entities; ++e) {
            const std::size_t c = crisis_start[e];
            f << entities[e] << ',' << times[c] << ',' << times[std::min(c + 3, opt.quarters - 1)]
              << ",systemic crisis\n";
        }
    }
    {
        // Annual exposure snapshots, sparse.
        auto f = create(dir / "links.csv");
        f << "source,target,time,weight\n";
        for (std::size_t q = 0; q < opt.quarters; q += 4)
            for (std::size_t a = 0; a < opt.entities; ++a)
                for (std::size_t b = 0; b < opt.entities; ++b)
                    if (a != b && unit(rng) < 0.1)
                        f << entities[a] << ',' << entities[b] << ',' << times[q] << ','
                          << std::round(1000.0 * unit(rng)) / 10.0 << '\n';
    }
    {
        static const std::array<const char*, 6> calm{"quarterly results were solid",
                                                     "new mobile app launched",
                                                     "branch network expanded",
                                                     "dividend unchanged",
                                                     "merger talks rumored",
                                                     "customer service praised"};
        static const std::array<const char*, 5> alarm{"funding risk is rising", "fears of default",
                                                      "large losses on loans", "distress in the interbank market",
                                                      "bankruptcy rumors"};
        auto f = create(dir / "occurrences.csv");
        f << "doc_id,time,entity,text\n";
        // Corpus spans the last 28 quarters; banks with higher index are more often in distress.
        const std::size_t span = std::min<std::size_t>(28, opt.quarters);
        std::uniform_int_distribution<std::size_t> qd(opt.quarters - span, opt.quarters - 1);
        std::uniform_int_distribution<std::size_t> bd(0, opt.banks - 1);
        std::uniform_int_distribution<std::size_t> md(1, 4);
        for (std::size_t d = 0; d < opt.documents; ++d) {
            const std::string doc = pad("d", d);
            const std::string& t = times[qd(rng)];
            // Neighbouring banks co-occur more often, giving the network some structure.
            const std::size_t anchor = bd(rng);
            std::vector<std::size_t> mentioned{anchor};
            const std::size_t count = md(rng);
            for (std::size_t i = 1; i < count; ++i) {
                const std::size_t b = unit(rng) < 0.7 ? (anchor + i) % opt.banks : bd(rng);
                if (std::find(mentioned.begin(), mentioned.end(), b) == mentioned.end()) mentioned.push_back(b);
            }
            const double p_alarm = 0.1 + 0.5 * static_cast<double>(anchor) / static_cast<double>(opt.banks);
            std::string text = unit(rng) < p_alarm ? alarm[d % alarm.size()] : calm[d % calm.size()];
            for (auto b : mentioned) f << doc << ',' << t << ',' << pad("Bank", b) << ",\"" << text << "\"\n";
        }
    }

    nlohmann::ordered_json cfg;
    cfg["observations"] = "observations.csv";
    cfg["links"] = "links.csv";
    cfg["events"] = "events.csv";
    cfg["occurrences"] = "occurrences.csv";
    cfg["ewm_labels"] = "ewm_labels.csv";
    cfg["state_labels"] = "states.csv";
    cfg["som"] = {{"width", 13}, {"height", 10}, {"epochs", 40}, {"sigma_final", 1.0}, {"transform", "percentile"}};
    cfg["sotm"] = {{"units", 5}, {"sigma", 1.0}, {"epochs_per_slice", 10}, {"transform", "percentile"}};
    cfg["network"] = {{"width", 1000.0}, {"height", 1000.0}, {"iterations", 300}, {"seed", 1},
                      {"distress_terms", {"risk", "distress", "default", "bankruptcy", "crisis", "losses"}}};
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    const std::array<const char*, 3> names{"domestic macroeconomic", "credit and asset imbalances", "global imbalances"};
    for (std::size_t g = 0; g < 3; ++g) {
        nlohmann::ordered_json members = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < opt.indicators; ++k)
            if (std::min<std::size_t>(3 * k / opt.indicators, 2) == g) members.push_back(indicators[k]);
        groups.push_back({{"name", names[g]}, {"indicators", members}});
    }
    // Hand-set weights so ewm-score works before any fit; signs follow the build-up shifts.
    nlohmann::ordered_json weights = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < opt.indicators; ++k) weights[indicators[k]] = state_shift(1, k) > 0 ? 1.0 : -1.0;
    cfg["ewm"] = {{"groups", groups},
                  {"weights", weights},
                  {"bias", -0.5 * static_cast<double>(opt.indicators) / 2.0},
                  {"fit", {{"learning_rate", 1.0}, {"iterations", 5000}, {"l2", 0.01}}}};
    const auto path = dir / "config.json";
    auto f = create(path);
    f << cfg.dump(2) << '\n';
    return path;
}

}  // namespace visrisk::synthetic
